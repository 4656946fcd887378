// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinquad/multipoles.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spinquad/errors.hpp"
#include "spinquad/rate_model.hpp"

namespace spinquad {

namespace {

constexpr double kZeroTrace = 1e-300;
constexpr double kSumTol = 1e-9;
constexpr double kRankTol = 1e-10;
constexpr double kResolvedField_mT = 2.0;

ComplexMat4 quadrupole_operator() {
  const SpinOperators& ops = spin_operators();
  return ops.sz * ops.sz - 1.25 * ComplexMat4::Identity();
}

double checked_trace(const ComplexMat4& rho, const char* what) {
  const double tr = rho.trace().real();
  if (std::abs(tr) < kZeroTrace) {
    throw ZeroTrace(std::string(what) + ": density matrix has zero trace");
  }
  return tr;
}

// Multipoles for b >= 0.
Multipoles multipoles_nonnegative(const RealVec4& df, double b) {
  const double lower = std::sqrt(1.0 - b + b * b);
  const double upper = std::sqrt(1.0 + b + b * b);
  const double d13 = df(0) - df(2);
  const double d24 = df(1) - df(3);
  Multipoles m;
  m.quadrupole = (2.0 - b) * d13 / (2.0 * lower) + (2.0 + b) * d24 / (2.0 * upper);
  m.dipole_x = 0.5 * (df(0) + df(2) - df(1) - df(3)) + (2.0 * b - 1.0) * d13 / (2.0 * lower) +
               (1.0 + 2.0 * b) * d24 / (2.0 * upper);
  return m;
}

std::string transition_key(int i, int j) {
  return std::to_string(i) + "-" + std::to_string(j);
}

void require_keys(const PeakAreaSet& set, std::initializer_list<std::pair<int, int>> keys,
                  const char* name) {
  for (const auto& key : keys) {
    if (!set.areas.contains(key)) {
      throw ConfigError(std::string("extract: ") + name + " areas missing transition " +
                        transition_key(key.first, key.second));
    }
  }
  for (const auto& [key, value] : set.areas) {
    const auto [i, j] = key;
    if (i < 1 || j > 4 || i >= j) {
      throw ConfigError(std::string("extract: ") + name + " transition " +
                        transition_key(i, j) + " is not of the form i-j with 1 <= i < j <= 4");
    }
    if (!std::isfinite(value)) {
      throw ConfigError(std::string("extract: ") + name + " area " + transition_key(i, j) +
                        " is not finite");
    }
  }
}

// Line intensity per unit population difference (df_j - df_i) of transition (i, j).
double line_coefficient(const RateParams& rates, const TransferMatrices& tm,
                        const TransitionTable& tt, int i, int j) {
  RealVec4 kick = RealVec4::Zero();
  const double m2 = tt.find(i, j).m2;
  kick(i) = m2;
  kick(j) = -m2;
  return odmr_line_intensity(rates, tm, kick, tt.level);
}

LevelExtraction solve_level(const std::map<std::pair<int, int>, double>& areas,
                            const RateParams& rates, const TransferMatrices& tm,
                            const TransitionTable& tt, const char* name) {
  const int rows = static_cast<int>(areas.size()) + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, 4);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  int r = 0;
  for (const auto& [key, area] : areas) {
    const int i = key.first - 1;
    const int j = key.second - 1;
    const double coeff = line_coefficient(rates, tm, tt, i, j);
    a(r, j) = coeff;
    a(r, i) = -coeff;
    rhs(r) = area;
    ++r;
  }
  a.row(r).setOnes();

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sigma = svd.singularValues();
  if (sigma(3) <= kRankTol * sigma(0)) {
    std::ostringstream msg;
    msg << "extract: " << name << " design matrix is rank deficient at B = " << tm.field_mT
        << " mT (vanishing matrix elements)";
    throw SingularExtraction(msg.str());
  }
  LevelExtraction out;
  out.df = a.colPivHouseholderQr().solve(rhs);
  out.residual = (a * out.df - rhs).norm();
  return out;
}

}  // namespace

double quadrupole_moment(const ComplexMat4& rho) {
  return (rho * quadrupole_operator()).trace().real();
}

double dipole_moment(const ComplexMat4& rho) {
  return (rho * spin_operators().sx).trace().real();
}

double quadrupole(const ComplexMat4& rho) {
  return quadrupole_moment(rho) / checked_trace(rho, "quadrupole");
}

double dipole_x(const ComplexMat4& rho) {
  return dipole_moment(rho) / checked_trace(rho, "dipole_x");
}

double HusimiGrid::normalization() const {
  const double d_theta = std::numbers::pi / static_cast<double>(thetas.size());
  const double d_phi = 2.0 * std::numbers::pi / static_cast<double>(phis.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < phis.size(); ++j) row += at(i, j);
    sum += row * std::sin(thetas[i]);
  }
  return sum * d_theta * d_phi / std::numbers::pi;
}

Eigen::Vector3d HusimiGrid::first_moment() const {
  const double d_theta = std::numbers::pi / static_cast<double>(thetas.size());
  const double d_phi = 2.0 * std::numbers::pi / static_cast<double>(phis.size());
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double st = std::sin(thetas[i]);
    for (std::size_t j = 0; j < phis.size(); ++j) {
      const Eigen::Vector3d n(st * std::cos(phis[j]), st * std::sin(phis[j]),
                              std::cos(thetas[i]));
      m += at(i, j) * st * n;
    }
  }
  return m * d_theta * d_phi;
}

HusimiGrid husimi(const ComplexMat4& rho, int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw ConfigError("husimi: grid sizes must be >= 1");
  HusimiGrid grid;
  grid.thetas.resize(n_theta);
  grid.phis.resize(n_phi);
  for (int i = 0; i < n_theta; ++i) grid.thetas[i] = (i + 0.5) * std::numbers::pi / n_theta;
  for (int j = 0; j < n_phi; ++j) grid.phis[j] = (j + 0.5) * 2.0 * std::numbers::pi / n_phi;

  const ComplexMat4 h = 0.5 * (rho + rho.adjoint());
  grid.values.resize(static_cast<std::size_t>(n_theta) * n_phi);
  for (int i = 0; i < n_theta; ++i) {
    for (int j = 0; j < n_phi; ++j) {
      const ComplexVec4 psi = rotation_operator(grid.thetas[i], grid.phis[j]).col(0);
      grid.values[static_cast<std::size_t>(i) * n_phi + j] = psi.dot(h * psi).real();
    }
  }
  return grid;
}

Multipoles multipoles_from_populations(const RealVec4& df, double b) {
  if (std::abs(df.sum()) > kSumTol) {
    std::ostringstream msg;
    msg << "multipoles_from_populations: population variations sum to " << df.sum()
        << ", expected 0";
    throw UnnormalizedInput(msg.str());
  }
  if (b >= 0.0) return multipoles_nonnegative(df, b);
  Multipoles m = multipoles_nonnegative(df, -b);
  m.dipole_x = -m.dipole_x;
  return m;
}

ExtractionResult extract_from_peak_areas(const PeakAreaSet& gs, const PeakAreaSet& es,
                                         const CenterParams& center, const RateParams& rates,
                                         double bx_mT, ExtractionMode mode) {
  require_keys(gs, {{1, 2}, {2, 3}, {3, 4}}, "ground");
  require_keys(es, {{1, 4}, {2, 3}}, "excited");

  ExtractionResult result;
  result.mode = mode;
  if (std::abs(bx_mT) < kResolvedField_mT) {
    result.warnings.push_back("ground-state lines are not spectrally resolved below 2 mT");
  }

  const TransferMatrices tm = transfer_matrices(center, bx_mT);
  const TransitionTable tt_g = transition_table(Level::ground, center, bx_mT);
  const TransitionTable tt_e = transition_table(Level::excited, center, bx_mT);

  std::map<std::pair<int, int>, double> es_rows = es.areas;
  for (int i = 1; i <= 4; ++i) {
    for (int j = i + 1; j <= 4; ++j) es_rows.try_emplace({i, j}, 0.0);
  }
  result.ground = solve_level(gs.areas, rates, tm, tt_g, "ground");
  result.excited = solve_level(es_rows, rates, tm, tt_e, "excited");

  double norm_g = 1.0;
  double norm_e = 1.0;
  if (mode == ExtractionMode::calibrated) {
    const auto [model_gs, model_es] = model_peak_areas(center, rates, bx_mT);
    double model_total = 0.0;
    double input_total = 0.0;
    for (const auto& [key, area] : model_gs.areas) {
      model_total += area;
      input_total += gs.areas.at(key);
    }
    if (input_total == 0.0) {
      throw ConfigError("extract: calibrated mode needs a nonzero total ground-state area");
    }
    result.scale = model_total / input_total;
    result.ground.df *= result.scale;
    result.excited.df *= result.scale;
    result.ground.residual *= std::abs(result.scale);
    result.excited.residual *= std::abs(result.scale);
    const SpinState s0 = steady_state(build_generator(center, rates, bx_mT));
    norm_g = s0.rho_g.trace().real();
    norm_e = s0.rho_e.trace().real();
  }

  result.ground.multipoles = multipoles_from_populations(
      result.ground.df, center.reduced_field(Level::ground, bx_mT));
  result.excited.multipoles = multipoles_from_populations(
      result.excited.df, center.reduced_field(Level::excited, bx_mT));
  result.ground.multipoles.quadrupole /= norm_g;
  result.ground.multipoles.dipole_x /= norm_g;
  result.excited.multipoles.quadrupole /= norm_e;
  result.excited.multipoles.dipole_x /= norm_e;
  return result;
}

std::pair<PeakAreaSet, PeakAreaSet> model_peak_areas(const CenterParams& center,
                                                     const RateParams& rates, double bx_mT) {
  const SpinState s0 = steady_state(build_generator(center, rates, bx_mT));
  const TransferMatrices tm = transfer_matrices(center, bx_mT);
  const PopulationVariation pv =
      solve_population_variations(rates, tm, s0.rho_e.trace().real());

  std::pair<PeakAreaSet, PeakAreaSet> out;
  out.first.level = Level::ground;
  out.second.level = Level::excited;
  out.first.field_mT = out.second.field_mT = bx_mT;

  const TransitionTable tt_g = transition_table(Level::ground, center, bx_mT);
  const TransitionTable tt_e = transition_table(Level::excited, center, bx_mT);
  for (const auto& [i, j] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 4}}) {
    out.first.areas[{i, j}] = odmr_line_intensity(
        rates, tm, mw_population_kick(tt_g, pv, i - 1, j - 1), Level::ground);
  }
  for (const auto& [i, j] : {std::pair{1, 4}, std::pair{2, 3}}) {
    out.second.areas[{i, j}] = odmr_line_intensity(
        rates, tm, mw_population_kick(tt_e, pv, i - 1, j - 1), Level::excited);
  }
  return out;
}

}  // namespace spinquad
