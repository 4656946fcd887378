// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinquad/kinetics.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>
#include <utility>

#include "spinquad/errors.hpp"
#include "spinquad/rate_model.hpp"

namespace spinquad {

namespace {

constexpr std::array<std::pair<int, int>, 6> kUpperPairs = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

constexpr double kNullTol = 1e-9;

}  // namespace

void RateParams::validate() const {
  const std::array<std::pair<const char*, double>, 5> rates = {{{"pump", pump},
                                                                {"recomb", recomb},
                                                                {"gamma_ms", gamma_ms},
                                                                {"gamma_g", gamma_g},
                                                                {"gamma_e", gamma_e}}};
  for (const auto& [name, value] : rates) {
    if (!std::isfinite(value) || value < 0.0) {
      std::ostringstream msg;
      msg << "rates." << name << " must be finite and >= 0 (got " << value << ")";
      throw InvalidRates(msg.str());
    }
  }
  for (const auto& [name, value] : {std::pair{"eta_g", eta_g}, std::pair{"eta_e", eta_e}}) {
    if (!std::isfinite(value) || std::abs(value) > 1.0) {
      std::ostringstream msg;
      msg << "rates." << name << " must lie in [-1, 1] so branch rates stay >= 0 (got "
          << value << ")";
      throw InvalidRates(msg.str());
    }
  }
}

Eigen::Matrix<double, kBlockDim, 1> hermitian_coords(const ComplexMat4& m) {
  Eigen::Matrix<double, kBlockDim, 1> c;
  for (int k = 0; k < 4; ++k) c(k) = m(k, k).real();
  for (int p = 0; p < 6; ++p) {
    const auto [r, s] = kUpperPairs[p];
    c(4 + p) = m(r, s).real();
    c(10 + p) = m(r, s).imag();
  }
  return c;
}

ComplexMat4 from_hermitian_coords(const Eigen::Matrix<double, kBlockDim, 1>& c) {
  ComplexMat4 m = ComplexMat4::Zero();
  for (int k = 0; k < 4; ++k) m(k, k) = c(k);
  for (int p = 0; p < 6; ++p) {
    const auto [r, s] = kUpperPairs[p];
    m(r, s) = Complex(c(4 + p), c(10 + p));
    m(s, r) = std::conj(m(r, s));
  }
  return m;
}

StateVector to_vector(const SpinState& s) {
  StateVector v;
  v.segment<kBlockDim>(0) = hermitian_coords(s.rho_g);
  v.segment<kBlockDim>(kBlockDim) = hermitian_coords(s.rho_e);
  v(2 * kBlockDim) = s.n_m;
  return v;
}

SpinState from_vector(const StateVector& v) {
  SpinState s;
  s.rho_g = from_hermitian_coords(v.segment<kBlockDim>(0));
  s.rho_e = from_hermitian_coords(v.segment<kBlockDim>(kBlockDim));
  s.n_m = v(2 * kBlockDim);
  return s;
}

Eigen::Matrix<double, 1, kStateDim> trace_functional() {
  Eigen::Matrix<double, 1, kStateDim> t = Eigen::Matrix<double, 1, kStateDim>::Zero();
  t.segment<4>(0).setOnes();
  t.segment<4>(kBlockDim).setOnes();
  t(2 * kBlockDim) = 1.0;
  return t;
}

SpinState kinetic_rhs(const CenterParams& center, const RateParams& rates, double bx_mT,
                      const SpinState& s) {
  const SpinOperators& ops = spin_operators();
  const ComplexMat4 h_g = build_hamiltonian(Level::ground, center, bx_mT);
  const ComplexMat4 h_e = build_hamiltonian(Level::excited, center, bx_mT);
  const Complex i2pi(0.0, 2.0 * std::numbers::pi);
  const ComplexMat4 id = ComplexMat4::Identity();

  const double tr_g = s.rho_g.trace().real();
  const double tr_e = s.rho_e.trace().real();
  const double g_half = rates.ms_to_ground_half();
  const double g_three = rates.ms_to_ground_three_half();
  const double e_half = rates.es_to_ms_half();
  const double e_three = rates.es_to_ms_three_half();

  SpinState d;
  d.rho_g = i2pi * commutator(s.rho_g, h_g) + rates.recomb * s.rho_e - rates.pump * s.rho_g -
            rates.gamma_g * (s.rho_g - 0.25 * tr_g * id) +
            0.5 * s.n_m * (g_half * ops.p_half + g_three * ops.p_three_half);
  d.rho_e = i2pi * commutator(s.rho_e, h_e) - rates.recomb * s.rho_e -
            rates.gamma_e * (s.rho_e - 0.25 * tr_e * id) + rates.pump * s.rho_g -
            e_half * sym_anticommutator(ops.p_half, s.rho_e) -
            e_three * sym_anticommutator(ops.p_three_half, s.rho_e);
  d.n_m = e_half * (ops.p_half * s.rho_e).trace().real() +
          e_three * (ops.p_three_half * s.rho_e).trace().real() - (g_half + g_three) * s.n_m;
  return d;
}

Generator build_generator(const CenterParams& center, const RateParams& rates, double bx_mT) {
  rates.validate();
  Generator gen;
  gen.center = center;
  gen.rates = rates;
  gen.field_mT = bx_mT;
  for (int k = 0; k < kStateDim; ++k) {
    const SpinState basis = from_vector(StateVector::Unit(k));
    gen.matrix.col(k) = to_vector(kinetic_rhs(center, rates, bx_mT, basis));
  }
  return gen;
}

SpinState steady_state(const Generator& gen) {
  const GeneratorMatrix& g = gen.matrix;
  const Eigen::JacobiSVD<GeneratorMatrix> svd(g);
  const auto& sigma = svd.singularValues();
  const double sigma_max = sigma(0);
  int null_dim = 0;
  for (int k = 0; k < kStateDim; ++k) {
    if (sigma(k) <= kNullTol * sigma_max) ++null_dim;
  }
  if (sigma_max == 0.0 || null_dim != 1) {
    std::ostringstream msg;
    msg << "steady_state: generator null space has dimension "
        << (sigma_max == 0.0 ? kStateDim : null_dim) << " at B = " << gen.field_mT
        << " mT (expected 1; check that pump, recomb and gamma_ms are positive)";
    throw DegenerateKernel(msg.str());
  }

  Eigen::Matrix<double, kStateDim + 1, kStateDim> augmented;
  augmented.topRows<kStateDim>() = g;
  augmented.bottomRows<1>() = trace_functional();
  Eigen::Matrix<double, kStateDim + 1, 1> rhs = Eigen::Matrix<double, kStateDim + 1, 1>::Zero();
  rhs(kStateDim) = 1.0;
  StateVector v = augmented.colPivHouseholderQr().solve(rhs);
  v /= trace_functional() * v;

  const double residual = (g * v).cwiseAbs().maxCoeff();
  if (residual > kNullTol * g.cwiseAbs().maxCoeff()) {
    std::ostringstream msg;
    msg << "steady_state: residual " << residual << " exceeds tolerance at B = "
        << gen.field_mT << " mT";
    throw DegenerateKernel(msg.str());
  }
  return from_vector(v);
}

SpinState time_evolve(const Generator& gen, const SpinState& s0, double t_us) {
  if (!(t_us >= 0.0)) throw ConfigError("time_evolve: time must be >= 0");
  if (t_us == 0.0) return s0;
  const Eigen::MatrixXd propagator = (gen.matrix * t_us).eval().exp();
  const StateVector v = propagator * to_vector(s0);
  return from_vector(v);
}

double pl_intensity(const RateParams& rates, const SpinState& s) {
  return rates.recomb * s.rho_e.trace().real();
}

LevelReport level_report(const CenterParams& center, const RateParams& rates, double bx_mT) {
  LevelReport report;
  report.field_mT = bx_mT;
  report.steady = steady_state(build_generator(center, rates, bx_mT));

  const EigenSystem es_g = level_eigensystem(Level::ground, center, bx_mT);
  const EigenSystem es_e = level_eigensystem(Level::excited, center, bx_mT);
  const TransferMatrices tm = transfer_matrices(center, bx_mT);
  const SpinOperators& ops = spin_operators();

  const ComplexMat4 pop_g = es_g.vectors.adjoint() * report.steady.rho_g * es_g.vectors;
  const ComplexMat4 pop_e = es_e.vectors.adjoint() * report.steady.rho_e * es_e.vectors;
  const ComplexMat4 drain_op =
      rates.es_to_ms_half() * ops.p_half + rates.es_to_ms_three_half() * ops.p_three_half;
  const ComplexMat4 drain = es_e.vectors.adjoint() * drain_op * es_e.vectors;

  RealVec4 bright_e;
  for (int i = 0; i < 4; ++i) {
    const double total = rates.recomb + drain(i, i).real();
    bright_e(i) = total > 0.0 ? rates.recomb / total : 0.0;
  }
  const RealVec4 bright_g = tm.t_eg.transpose() * bright_e;

  for (int i = 0; i < 4; ++i) {
    report.ground[i] = {asymptotic_label(Level::ground, center, bx_mT, i), es_g.energies(i),
                        pop_g(i, i).real(), bright_g(i)};
    report.excited[i] = {asymptotic_label(Level::excited, center, bx_mT, i), es_e.energies(i),
                         pop_e(i, i).real(), bright_e(i)};
  }
  return report;
}

}  // namespace spinquad
