// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "spinquad/kinetics.hpp"

namespace spinquad {

/// Tr(rho (Sz^2 - 5/4)), not normalized.
double quadrupole_moment(const ComplexMat4& rho);

/// Tr(rho Sx), not normalized.
double dipole_moment(const ComplexMat4& rho);

/// quadrupole_moment / Tr(rho); throws ZeroTrace when Tr(rho) vanishes.
double quadrupole(const ComplexMat4& rho);

/// dipole_moment / Tr(rho); throws ZeroTrace when Tr(rho) vanishes.
double dipole_x(const ComplexMat4& rho);

/// Husimi density on a midpoint grid, values stored row-major in (theta, phi).
struct HusimiGrid {
  std::vector<double> thetas;
  std::vector<double> phis;
  std::vector<double> values;

  double at(std::size_t i_theta, std::size_t i_phi) const {
    return values[i_theta * phis.size() + i_phi];
  }
  /// (4 / 4pi) * integral of P over the sphere, equal to Tr(rho).
  double normalization() const;
  /// Integral of P(theta, phi) * n(theta, phi) dOmega.
  Eigen::Vector3d first_moment() const;
};

/// P(theta, phi) = <psi|rho|psi> with psi = exp(-i phi Sz) exp(-i theta Sy) |+3/2>.
HusimiGrid husimi(const ComplexMat4& rho, int n_theta = 91, int n_phi = 181);

struct Multipoles {
  double quadrupole = 0.0;
  double dipole_x = 0.0;
};

/**
 * Quadrupole and x dipole of an eigenbasis-diagonal population variation.
 *
 * df holds variations of the eigenstate populations (descending energy) at
 * reduced field b = gyro * B / D. The result equals the moments of
 * sum_i df_i |i><i|, obtained in closed form from the b-derivatives of the
 * eigenvalues. Throws UnnormalizedInput unless sum(df) vanishes to 1e-9.
 */
Multipoles multipoles_from_populations(const RealVec4& df, double b);

/// Signed ODMR peak areas of one level, keyed by 1-based (i, j) with i < j.
struct PeakAreaSet {
  Level level = Level::ground;
  double field_mT = 0.0;
  std::map<std::pair<int, int>, double> areas;
};

enum class ExtractionMode {
  relative,   ///< population variations up to one global scale
  calibrated  ///< scale fixed by the model's total ground-state area
};

struct LevelExtraction {
  RealVec4 df = RealVec4::Zero();
  Multipoles multipoles;
  double residual = 0.0;
};

struct ExtractionResult {
  LevelExtraction ground;
  LevelExtraction excited;
  ExtractionMode mode = ExtractionMode::relative;
  double scale = 1.0;
  std::vector<std::string> warnings;
};

/**
 * Inverts peak areas into population variations and multipoles.
 *
 * Each area is modeled as the secular line intensity of its transition,
 * linear in the population difference across it. Excited-state transitions
 * missing from `es` enter as zero-area rows; the zero-sum constraint closes
 * both systems, which are solved by least squares. In calibrated mode the
 * multipoles are normalized by the model's level populations.
 */
ExtractionResult extract_from_peak_areas(const PeakAreaSet& gs, const PeakAreaSet& es,
                                         const CenterParams& center, const RateParams& rates,
                                         double bx_mT,
                                         ExtractionMode mode = ExtractionMode::relative);

/// Ground {1-2, 2-3, 3-4} and excited {1-4, 2-3} areas predicted by the secular model.
std::pair<PeakAreaSet, PeakAreaSet> model_peak_areas(const CenterParams& center,
                                                     const RateParams& rates, double bx_mT);

}  // namespace spinquad
