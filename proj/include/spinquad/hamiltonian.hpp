// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "spinquad/spin_algebra.hpp"

namespace spinquad {

/// Bohr magneton over Planck constant, MHz per mT.
inline constexpr double kBohrMHzPerMT = 13.9962;

/// Zero-field splittings (MHz) and g factors of the two optical levels.
struct CenterParams {
  double d_g_MHz = 35.0;
  double d_e_MHz = 220.0;
  double g_factor_g = 2.0;
  double g_factor_e = 2.0;

  double zfs(Level level) const { return level == Level::ground ? d_g_MHz : d_e_MHz; }
  /// Zeeman coefficient g * mu_B / h in MHz/mT.
  double gyro(Level level) const {
    return (level == Level::ground ? g_factor_g : g_factor_e) * kBohrMHzPerMT;
  }
  /// Dimensionless field b = gyro * B / D.
  double reduced_field(Level level, double bx_mT) const {
    return gyro(level) * bx_mT / zfs(level);
  }

  /// Throws ConfigError unless D > 0 and g > 0 for both levels.
  void validate() const;
};

/// Microwave drive direction.
enum class DriveAxis { x, y, z };

const ComplexMat4& drive_operator(DriveAxis axis);

/// H = gyro * B * Sx + D (Sz^2 - 5/4), in MHz.
ComplexMat4 build_hamiltonian(Level level, const CenterParams& params, double bx_mT);

/// hermitian_eig of build_hamiltonian, tagged with level and field.
EigenSystem level_eigensystem(Level level, const CenterParams& params, double bx_mT);

struct Transition {
  int i = 0;  ///< zero-based upper eigenstate index (higher energy)
  int j = 0;  ///< zero-based lower eigenstate index, i < j
  double freq_MHz = 0.0;
  double m2 = 0.0;  ///< |<i|S_axis|j>|^2
};

struct TransitionTable {
  Level level = Level::ground;
  double field_mT = 0.0;
  std::array<Transition, 6> entries;

  const Transition& find(int i, int j) const;
};

TransitionTable transition_table(Level level, const CenterParams& params, double bx_mT,
                                 DriveAxis axis = DriveAxis::y);

/// Same table computed from an existing eigensystem.
TransitionTable transition_table(const EigenSystem& es, DriveAxis axis = DriveAxis::y);

struct CrossoverFields {
  double ground_mT = 0.0;
  double excited_mT = 0.0;
};

/// Fields D / gyro where Zeeman and zero-field terms are equal.
CrossoverFields crossover_fields(const CenterParams& params);

std::vector<EigenSystem> level_sweep(Level level, const CenterParams& params,
                                     std::span<const double> grid_mT);

/**
 * Large-field label of eigenstate `index` (descending energy): "+3/2_x",
 * "+1/2_x", ... for B > 0, sign-reversed for B < 0, and the zero-field
 * doublet label ("+-3/2_z" or "+-1/2_z") at B = 0.
 */
std::string asymptotic_label(Level level, const CenterParams& params, double bx_mT, int index);

}  // namespace spinquad
