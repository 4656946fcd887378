// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/LU>
#include <array>
#include <span>
#include <vector>

#include "spinquad/kinetics.hpp"

namespace spinquad {

/// Microwave field B1 (e^{-i w t}) + c.c. along `axis`.
struct DriveParams {
  Complex b1_mT{1e-4, 0.0};
  DriveAxis axis = DriveAxis::y;
  double freq_MHz = 0.0;
};

/// Relative PL changes above this magnitude are flagged as non-perturbative.
inline constexpr double kPerturbativeLimit = 0.2;

struct MwResponse {
  double dpl = 0.0;       ///< Delta PL / PL
  double baseline = 0.0;  ///< PL without drive, 1/us
  double imag_residue = 0.0;
  bool perturbative = true;
};

/**
 * Second-order microwave response at one static field.
 *
 * Caches the steady state, a Hessenberg reduction and an LU factorization of
 * the generator, and the drive superoperator, so each frequency costs one
 * shifted Hessenberg solve plus one prefactored real solve, both O(n^2).
 * Instances are immutable after construction.
 */
class OdmrSolver {
 public:
  OdmrSolver(const CenterParams& center, const RateParams& rates, double bx_mT,
             DriveAxis axis = DriveAxis::y);

  /// Uses a prebuilt generator and steady state.
  OdmrSolver(const Generator& gen, const SpinState& steady, DriveAxis axis);

  MwResponse response(double freq_MHz, Complex b1_mT) const;

  const SpinState& steady() const { return steady_; }
  double baseline() const { return baseline_; }

 private:
  void init(DriveAxis axis);

  Generator gen_;
  SpinState steady_;
  double baseline_ = 0.0;
  GeneratorMatrix drive_;     // coordinates of i 2pi [rho, gyro S_axis], per unit B1
  StateVector drive_s0_;      // drive_ * steady
  GeneratorMatrix deflated_;  // G + s0 t, nonsingular on the trace-zero subspace
  GeneratorMatrix hess_;      // deflated_ = hess_q_ hess_ hess_q_^T, upper Hessenberg
  GeneratorMatrix hess_q_;
  Eigen::PartialPivLU<GeneratorMatrix> dc_solver_;
};

MwResponse mw_response(const CenterParams& center, const RateParams& rates, double bx_mT,
                       const DriveParams& drive);

/// Row-major (field, frequency) grid of responses.
struct OdmrResult {
  std::vector<double> freqs_MHz;
  std::vector<double> fields_mT;
  std::vector<double> dpl;       ///< dpl[f * freqs.size() + k]
  std::vector<double> baseline;  ///< one entry per field
  /// Transition tables per field, ground then excited, for line attribution.
  std::vector<std::array<TransitionTable, 2>> transitions;
  bool perturbative = true;

  double at(std::size_t field_index, std::size_t freq_index) const {
    return dpl[field_index * freqs_MHz.size() + freq_index];
  }
};

OdmrResult odmr_spectrum(const CenterParams& center, const RateParams& rates, double bx_mT,
                         const DriveParams& drive, std::span<const double> freqs_MHz);

/// Rows are independent; `jobs` worker threads fill them, output is order independent.
OdmrResult odmr_map(const CenterParams& center, const RateParams& rates,
                    const DriveParams& drive, std::span<const double> freqs_MHz,
                    std::span<const double> fields_mT, int jobs = 1);

}  // namespace spinquad
