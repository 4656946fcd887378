// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>

#include "spinquad/hamiltonian.hpp"

namespace spinquad {

/**
 * Optical-cycle rates in 1/us and the two spin selectivities.
 *
 * Branch rates between the metastable state and the spin doublets are
 * gamma_ms * (1 +- eta), with + for |m| = 1/2.
 */
struct RateParams {
  double pump = 1.0;       ///< P, ground -> excited
  double recomb = 10.0;    ///< Gamma, radiative excited -> ground
  double gamma_ms = 1.0;   ///< Gamma_e, base metastable branch rate
  double eta_g = 0.5;      ///< selectivity of metastable -> ground
  double eta_e = 0.35;     ///< selectivity of excited -> metastable
  double gamma_g = 0.01;   ///< ground-state spin relaxation
  double gamma_e = 0.1;    ///< excited-state spin relaxation

  double ms_to_ground_half() const { return gamma_ms * (1.0 + eta_g); }
  double ms_to_ground_three_half() const { return gamma_ms * (1.0 - eta_g); }
  double es_to_ms_half() const { return gamma_ms * (1.0 + eta_e); }
  double es_to_ms_three_half() const { return gamma_ms * (1.0 - eta_e); }

  /// Throws InvalidRates on negative or non-finite rates or |eta| > 1.
  void validate() const;
};

/// Ground and excited density matrices plus the metastable population.
struct SpinState {
  ComplexMat4 rho_g = ComplexMat4::Zero();
  ComplexMat4 rho_e = ComplexMat4::Zero();
  double n_m = 0.0;

  double total_trace() const { return rho_g.trace().real() + rho_e.trace().real() + n_m; }
};

/**
 * Real coordinates of a SpinState.
 *
 * Each Hermitian block occupies 16 slots: the 4 diagonal entries, then the
 * real parts and then the imaginary parts of the upper triangle in the order
 * (0,1), (0,2), (0,3), (1,2), (1,3), (2,3). Block rho_g comes first, then
 * rho_e, then n_m in slot 32.
 */
inline constexpr int kBlockDim = 16;
inline constexpr int kStateDim = 2 * kBlockDim + 1;
using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using GeneratorMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;

Eigen::Matrix<double, kBlockDim, 1> hermitian_coords(const ComplexMat4& m);
ComplexMat4 from_hermitian_coords(const Eigen::Matrix<double, kBlockDim, 1>& c);
StateVector to_vector(const SpinState& s);
SpinState from_vector(const StateVector& v);

/// Row vector t with t * to_vector(s) = s.total_trace().
Eigen::Matrix<double, 1, kStateDim> trace_functional();

/// Linear kinetic generator ds/dt = G s at a static field.
struct Generator {
  GeneratorMatrix matrix = GeneratorMatrix::Zero();
  CenterParams center;
  RateParams rates;
  double field_mT = 0.0;
};

/// Time derivative of s evaluated directly on the matrices.
SpinState kinetic_rhs(const CenterParams& center, const RateParams& rates, double bx_mT,
                      const SpinState& s);

Generator build_generator(const CenterParams& center, const RateParams& rates, double bx_mT);

/// Normalized (total trace 1) null vector of the generator.
SpinState steady_state(const Generator& gen);

/// exp(G t) s0 via dense Pade matrix exponential.
SpinState time_evolve(const Generator& gen, const SpinState& s0, double t_us);

/// Photoluminescence Gamma * Tr(rho_e) in 1/us.
double pl_intensity(const RateParams& rates, const SpinState& s);

struct LevelEntry {
  std::string label;
  double energy_MHz = 0.0;
  double population = 0.0;
  double brightness = 0.0;
};

/**
 * Populations and relative PL brightness of every eigenstate.
 *
 * Excited-state brightness is the radiative branching ratio
 * Gamma / (Gamma + drain_i), where drain_i is the state's decay rate to the
 * metastable level. A ground-state entry averages the brightness of the
 * excited states it is pumped into, weighted by the eigenbasis overlaps.
 */
struct LevelReport {
  double field_mT = 0.0;
  std::array<LevelEntry, 4> ground;
  std::array<LevelEntry, 4> excited;
  SpinState steady;
};

LevelReport level_report(const CenterParams& center, const RateParams& rates, double bx_mT);

}  // namespace spinquad
