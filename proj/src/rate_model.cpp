// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinquad/rate_model.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "spinquad/errors.hpp"

namespace spinquad {

namespace {

constexpr double kMaxCondition = 1e8;
constexpr double kHierarchyRatio = 0.2;

// 1 - kappa T_eg T_ge, checked for conditioning.
RealMat4 feedback_matrix(const RateParams& rates, const TransferMatrices& tm) {
  const RealMat4 m = RealMat4::Identity() - feedback_kappa(rates) * tm.t_eg * tm.t_ge();
  const Eigen::JacobiSVD<RealMat4> svd(m);
  const auto& sigma = svd.singularValues();
  if (!(sigma(3) > 0.0) || sigma(0) / sigma(3) > kMaxCondition) {
    std::ostringstream msg;
    msg << "rate_model: feedback matrix condition number "
        << (sigma(3) > 0.0 ? sigma(0) / sigma(3) : std::numeric_limits<double>::infinity()) << " at B = " << tm.field_mT
        << " mT exceeds " << kMaxCondition;
    throw IllConditioned(msg.str());
  }
  return m;
}

RealMat4 squared_moduli(const ComplexMat4& u) { return u.cwiseAbs2(); }

}  // namespace

TransferMatrices transfer_matrices(const CenterParams& center, double bx_mT) {
  const EigenSystem g0 = level_eigensystem(Level::ground, center, 0.0);
  const EigenSystem e0 = level_eigensystem(Level::excited, center, 0.0);
  const EigenSystem g = level_eigensystem(Level::ground, center, bx_mT);
  const EigenSystem e = level_eigensystem(Level::excited, center, bx_mT);

  TransferMatrices tm;
  tm.field_mT = bx_mT;
  tm.u_g0 = g.vectors.adjoint() * g0.vectors;
  tm.u_e0 = e.vectors.adjoint() * e0.vectors;
  tm.u_eg = e.vectors.adjoint() * g.vectors;
  tm.t_g0 = squared_moduli(tm.u_g0);
  tm.t_e0 = squared_moduli(tm.u_e0);
  tm.t_eg = squared_moduli(tm.u_eg);
  return tm;
}

RealVec4 zero_field_quadrupole() { return RealVec4(-0.5, -0.5, 0.5, 0.5); }

double feedback_kappa(const RateParams& rates) {
  const double denom = (rates.pump + rates.gamma_g) *
                       (rates.recomb + rates.gamma_ms + rates.gamma_e);
  return denom > 0.0 ? rates.pump * rates.recomb / denom : 0.0;
}

PopulationVariation solve_population_variations(const RateParams& rates,
                                                const TransferMatrices& tm, double n_e) {
  rates.validate();
  const RealMat4 m = feedback_matrix(rates, tm);
  const RealVec4 d0 = zero_field_quadrupole();
  const double es_out = rates.recomb + rates.gamma_ms + rates.gamma_e;
  const double gs_out = rates.pump + rates.gamma_g;
  if (!(es_out > 0.0) || !(gs_out > 0.0)) {
    throw IllConditioned("rate_model: level lifetimes are infinite (all outgoing rates zero)");
  }

  const RealVec4 source =
      (rates.eta_g * rates.pump / gs_out * tm.t_eg * tm.t_g0 - rates.eta_e * tm.t_e0) * d0;
  PopulationVariation pv;
  pv.n_e = n_e;
  pv.df_e = rates.gamma_ms * n_e / es_out * m.partialPivLu().solve(source);
  pv.df_g = (rates.eta_g * rates.gamma_ms * n_e * tm.t_g0 * d0 +
             rates.recomb * tm.t_ge() * pv.df_e) /
            gs_out;
  return pv;
}

RealVec4 mw_population_kick(const TransitionTable& tt, const PopulationVariation& pv, int i,
                            int j) {
  if (i == j) throw std::invalid_argument("mw_population_kick: i == j");
  const RealVec4& df = tt.level == Level::ground ? pv.df_g : pv.df_e;
  const double rate = tt.find(i, j).m2 * (df(j) - df(i));
  RealVec4 kick = RealVec4::Zero();
  kick(i) = rate;
  kick(j) = -rate;
  return kick;
}

double odmr_line_intensity(const RateParams& rates, const TransferMatrices& tm,
                           const RealVec4& kick, Level level) {
  const RealMat4 m = feedback_matrix(rates, tm);
  const RealVec4 d0 = zero_field_quadrupole();
  const double es_out = rates.recomb + rates.gamma_ms + rates.gamma_e;
  const RealVec4 es_kick = level == Level::excited ? kick : RealVec4(tm.t_eg * kick);
  double prefactor = 1.0 / es_out;
  if (level == Level::ground) prefactor *= rates.pump / (rates.pump + rates.gamma_g);
  const RealVec4 response = m.partialPivLu().solve(es_kick);
  return -rates.eta_e * prefactor * d0.dot(tm.t_e0.transpose() * response);
}

std::vector<RateLine> rate_model_lines(const CenterParams& center, const RateParams& rates,
                                       double bx_mT, DriveAxis axis) {
  const SpinState s0 = steady_state(build_generator(center, rates, bx_mT));
  const TransferMatrices tm = transfer_matrices(center, bx_mT);
  const PopulationVariation pv =
      solve_population_variations(rates, tm, s0.rho_e.trace().real());

  std::vector<RateLine> lines;
  for (Level level : {Level::ground, Level::excited}) {
    const TransitionTable tt = transition_table(level, center, bx_mT, axis);
    for (const Transition& t : tt.entries) {
      const RealVec4 kick = mw_population_kick(tt, pv, t.i, t.j);
      lines.push_back({level, t, odmr_line_intensity(rates, tm, kick, level)});
    }
  }
  return lines;
}

double small_field_x(double b_g) {
  const double b2 = b_g * b_g;
  return 0.25 * (1.0 + 3.0 / (1.0 + b2 + b2 * b2));
}

double small_field_b_for_x(double x) {
  if (!(x > 0.25 && x <= 1.0)) {
    std::ostringstream msg;
    msg << "small_field_b_for_x: x = " << x << " outside (1/4, 1]";
    throw std::domain_error(msg.str());
  }
  const double q = 3.0 / (4.0 * x - 1.0);
  return std::sqrt(0.5 * (std::sqrt(4.0 * q - 3.0) - 1.0));
}

bool rate_hierarchy_ok(const RateParams& rates) {
  auto small = [](double num, double den) {
    return num == 0.0 || (den > 0.0 && num / den <= kHierarchyRatio);
  };
  return small(rates.gamma_g, rates.pump) && small(rates.gamma_e, rates.recomb) &&
         small(rates.gamma_ms, rates.recomb);
}

SmallFieldSignal es_signal_small_field(const RateParams& rates, double b_g, double n_e) {
  const double x = small_field_x(b_g);
  const double selectivity = rates.eta_e * (rates.eta_g * x - rates.eta_e);
  return {rates.gamma_ms * n_e / ((1.0 - x) * rates.recomb) * selectivity,
          rate_hierarchy_ok(rates)};
}

double gs_signal_sign_small_field(const RateParams& rates) {
  return rates.eta_e * (rates.eta_g - rates.eta_e);
}

double large_field_threshold(double b_e) {
  const double b2 = b_e * b_e;
  const double b4 = b2 * b2;
  return 2.0 * (1.0 + b2 + b4) / (2.0 - b2 + 2.0 * b4);
}

std::optional<std::pair<double, double>> large_field_sign_changes(double eta_ratio) {
  if (!(eta_ratio > 1.0 && eta_ratio < 2.0)) return std::nullopt;
  // threshold(b) = r is a palindromic quadratic in u = b^2: a u^2 - c u + a = 0.
  const double a = 2.0 - 2.0 / eta_ratio;
  const double c = 1.0 + 2.0 / eta_ratio;
  const double u_hi = (c + std::sqrt(c * c - 4.0 * a * a)) / (2.0 * a);
  const double u_lo = 1.0 / u_hi;
  return std::pair{std::sqrt(u_lo), std::sqrt(u_hi)};
}

LargeFieldSignals large_field_signals(const RateParams& rates, double b_e) {
  const double b2 = b_e * b_e;
  const double b4 = b2 * b2;
  const double c = (2.0 - b2 + 2.0 * b4) / (2.0 * (1.0 + b2 + b4));
  LargeFieldSignals out;
  out.half_to_three_half = 0.25 * rates.eta_e * (1.0 + b2) * (rates.eta_g - c * rates.eta_e);
  out.half_to_minus_half =
      -1.25 * rates.eta_e * rates.eta_e * b2 * (1.0 + b2) / (1.0 + b2 + b4);
  return out;
}

}  // namespace spinquad
