// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>

#include "spinquad/hamiltonian.hpp"
#include "spinquad/kinetics.hpp"

namespace spinquad {

/**
 * Eigenbasis overlaps between levels and fields.
 *
 * u_g0(i, j) = <g_i(B)|g_j(0)>, u_e0(i, j) = <e_i(B)|e_j(0)>,
 * u_eg(i, j) = <e_i(B)|g_j(B)>, and each t_* holds the squared moduli.
 */
struct TransferMatrices {
  ComplexMat4 u_g0;
  ComplexMat4 u_e0;
  ComplexMat4 u_eg;
  RealMat4 t_g0;
  RealMat4 t_e0;
  RealMat4 t_eg;
  double field_mT = 0.0;

  RealMat4 t_ge() const { return t_eg.transpose(); }
};

TransferMatrices transfer_matrices(const CenterParams& center, double bx_mT);

/// Zero-field quadrupole population pattern (-1, -1, 1, 1) / 2.
RealVec4 zero_field_quadrupole();

/// Secular steady-state population variations f_i - sum(f) / 4.
struct PopulationVariation {
  RealVec4 df_g = RealVec4::Zero();
  RealVec4 df_e = RealVec4::Zero();
  double n_e = 0.0;
};

/// kappa = P Gamma / ((P + gamma_g)(Gamma + Gamma_e + gamma_e)).
double feedback_kappa(const RateParams& rates);

/// Solves the secular balance equations for a given excited-state population.
PopulationVariation solve_population_variations(const RateParams& rates,
                                                const TransferMatrices& tm, double n_e);

/// Population rate change caused by driving transition (i, j) of `level`.
RealVec4 mw_population_kick(const TransitionTable& tt, const PopulationVariation& pv, int i,
                            int j);

/**
 * PL change produced by a population kick in `level`.
 *
 * Includes the level-dependent prefactor, so ground and excited intensities
 * share one scale.
 */
double odmr_line_intensity(const RateParams& rates, const TransferMatrices& tm,
                           const RealVec4& kick, Level level);

/// Intensity of every transition of both levels at one field.
struct RateLine {
  Level level = Level::ground;
  Transition transition;
  double intensity = 0.0;
};

/// n_e is taken from the full kinetic steady state at the same parameters.
std::vector<RateLine> rate_model_lines(const CenterParams& center, const RateParams& rates,
                                       double bx_mT, DriveAxis axis = DriveAxis::y);

/// x(b) = (1 + 3 / (1 + b^2 + b^4)) / 4.
double small_field_x(double b_g);

/// Inverse of small_field_x on b >= 0; x must lie in (1/4, 1].
double small_field_b_for_x(double x);

struct SmallFieldSignal {
  double value = 0.0;
  bool hierarchy_ok = true;  ///< gamma_g, gamma_e, Gamma_e << P, Gamma
};

/// Excited-state ODMR proxy; diverges (with the correct sign) at b_g = 0.
SmallFieldSignal es_signal_small_field(const RateParams& rates, double b_g, double n_e = 1.0);

/// eta_e eta_g (1 - eta_e / eta_g), written to stay finite at eta_g = 0.
double gs_signal_sign_small_field(const RateParams& rates);

struct LargeFieldSignals {
  double half_to_three_half = 0.0;
  double half_to_minus_half = 0.0;
};

LargeFieldSignals large_field_signals(const RateParams& rates, double b_e);

/// eta_e / eta_g ratio above which the +-1/2 <-> +-3/2 large-field signal is negative.
double large_field_threshold(double b_e);

/**
 * Reduced fields b* <= 1/b* where the +-1/2 <-> +-3/2 large-field signal
 * changes sign; empty unless 1 < eta_e / eta_g < 2.
 */
std::optional<std::pair<double, double>> large_field_sign_changes(double eta_ratio);

/// True when gamma_g/P, gamma_e/Gamma and Gamma_e/Gamma are all <= 0.2.
bool rate_hierarchy_ok(const RateParams& rates);

}  // namespace spinquad
