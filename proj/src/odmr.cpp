// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinquad/odmr.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include "spinquad/errors.hpp"

namespace spinquad {

namespace {

using ComplexGenerator = Eigen::Matrix<Complex, kStateDim, kStateDim>;
using ComplexState = Eigen::Matrix<Complex, kStateDim, 1>;

constexpr double kMinRcond = 1e-12;

double excited_trace(const StateVector& v) {
  return v.segment<4>(kBlockDim).sum();
}

// i 2pi [rho, gyro S] on both levels, as a real map on coordinates.
GeneratorMatrix drive_superoperator(const CenterParams& center, DriveAxis axis) {
  const ComplexMat4& op = drive_operator(axis);
  const Complex i2pi(0.0, 2.0 * std::numbers::pi);
  const ComplexMat4 op_g = center.gyro(Level::ground) * op;
  const ComplexMat4 op_e = center.gyro(Level::excited) * op;
  GeneratorMatrix v = GeneratorMatrix::Zero();
  for (int k = 0; k < kStateDim; ++k) {
    const SpinState basis = from_vector(StateVector::Unit(k));
    SpinState d;
    d.rho_g = i2pi * commutator(basis.rho_g, op_g);
    d.rho_e = i2pi * commutator(basis.rho_e, op_e);
    v.col(k) = to_vector(d);
  }
  return v;
}

// Eigen's rcond estimate is unreliable when a pivot is exactly zero, so the
// pivot ratio is checked as well.
template <typename Lu>
bool near_singular(const Lu& lu) {
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  return !(pivots.minCoeff() > kMinRcond * pivots.maxCoeff()) || lu.rcond() < kMinRcond;
}

// Solves A x = b for complex b using a real factorization.
ComplexState solve_real(const Eigen::PartialPivLU<GeneratorMatrix>& lu, const ComplexState& b) {
  const StateVector re = lu.solve(StateVector(b.real()));
  const StateVector im = lu.solve(StateVector(b.imag()));
  return re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
}

// Solves (H + shift I) x = b in place for upper Hessenberg H, eliminating the
// single subdiagonal with adjacent-row pivoting. Returns false on a negligible pivot.
bool shifted_hessenberg_solve(const GeneratorMatrix& h, Complex shift, ComplexState& b) {
  constexpr int n = kStateDim;
  ComplexGenerator a = h.cast<Complex>();
  a.diagonal().array() += shift;
  for (int k = 0; k + 1 < n; ++k) {
    if (std::abs(a(k + 1, k)) > std::abs(a(k, k))) {
      a.row(k).tail(n - k).swap(a.row(k + 1).tail(n - k));
      std::swap(b(k), b(k + 1));
    }
    if (a(k + 1, k) == Complex(0.0, 0.0)) continue;
    if (a(k, k) == Complex(0.0, 0.0)) return false;
    const Complex m = a(k + 1, k) / a(k, k);
    a.row(k + 1).tail(n - k - 1) -= m * a.row(k).tail(n - k - 1);
    a(k + 1, k) = 0.0;
    b(k + 1) -= m * b(k);
  }
  const auto pivots = a.diagonal().cwiseAbs();
  if (!(pivots.minCoeff() > kMinRcond * pivots.maxCoeff())) return false;
  b = a.triangularView<Eigen::Upper>().solve(b);
  return true;
}

}  // namespace

OdmrSolver::OdmrSolver(const CenterParams& center, const RateParams& rates, double bx_mT,
                       DriveAxis axis)
    : gen_(build_generator(center, rates, bx_mT)), steady_(steady_state(gen_)) {
  init(axis);
}

OdmrSolver::OdmrSolver(const Generator& gen, const SpinState& steady, DriveAxis axis)
    : gen_(gen), steady_(steady) {
  init(axis);
}

void OdmrSolver::init(DriveAxis axis) {
  baseline_ = pl_intensity(gen_.rates, steady_);
  drive_ = drive_superoperator(gen_.center, axis);
  const StateVector s0 = to_vector(steady_);
  drive_s0_ = drive_ * s0;
  deflated_ = gen_.matrix + s0 * trace_functional();
  dc_solver_.compute(deflated_);
  const Eigen::HessenbergDecomposition<GeneratorMatrix> hd(deflated_);
  hess_ = hd.matrixH();
  hess_q_ = hd.matrixQ();
  if (near_singular(dc_solver_)) {
    std::ostringstream msg;
    msg << "odmr: static generator is singular off its zero mode at B = " << gen_.field_mT
        << " mT";
    throw SingularResponse(msg.str());
  }
}

MwResponse OdmrSolver::response(double freq_MHz, Complex b1_mT) const {
  MwResponse out;
  out.baseline = baseline_;
  if (b1_mT == Complex(0.0, 0.0)) return out;

  // The deflation term s0 t vanishes on trace-free vectors, which all
  // right-hand sides below are, so it leaves the solutions unchanged. With a
  // real generator the negative-frequency harmonic is the conjugate of the
  // positive one.
  const double omega = 2.0 * std::numbers::pi * freq_MHz;
  ComplexState s_plus = hess_q_.transpose() * (-b1_mT * drive_s0_.cast<Complex>());
  if (!shifted_hessenberg_solve(hess_, Complex(0.0, omega), s_plus)) {
    std::ostringstream msg;
    msg << "odmr: first-harmonic system singular at f = " << freq_MHz
        << " MHz, B = " << gen_.field_mT << " mT (undamped resonance)";
    throw SingularResponse(msg.str());
  }
  s_plus = hess_q_ * s_plus;
  const ComplexState s_minus = s_plus.conjugate();

  const ComplexState source = b1_mT * (drive_ * s_minus) + std::conj(b1_mT) * (drive_ * s_plus);
  const ComplexState delta = solve_real(dc_solver_, -source);

  Complex d_trace(0.0, 0.0);
  for (int k = 0; k < 4; ++k) d_trace += delta(kBlockDim + k);
  const double e_trace = excited_trace(to_vector(steady_));
  out.dpl = d_trace.real() / e_trace;
  out.imag_residue = std::abs(d_trace.imag() / e_trace);
  out.perturbative = std::abs(out.dpl) <= kPerturbativeLimit;
  return out;
}

MwResponse mw_response(const CenterParams& center, const RateParams& rates, double bx_mT,
                       const DriveParams& drive) {
  return OdmrSolver(center, rates, bx_mT, drive.axis).response(drive.freq_MHz, drive.b1_mT);
}

namespace {

void check_grid(std::span<const double> grid, const char* name) {
  if (grid.empty()) throw ConfigError(std::string("odmr: empty ") + name + " grid");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw ConfigError(std::string("odmr: ") + name + " grid must be sorted ascending");
  }
}

void fill_row(OdmrResult& result, std::size_t row, const CenterParams& center,
              const RateParams& rates, const DriveParams& drive) {
  const double bx = result.fields_mT[row];
  const OdmrSolver solver(center, rates, bx, drive.axis);
  const std::size_t n = result.freqs_MHz.size();
  result.baseline[row] = solver.baseline();
  result.transitions[row] = {transition_table(Level::ground, center, bx, drive.axis),
                             transition_table(Level::excited, center, bx, drive.axis)};
  for (std::size_t k = 0; k < n; ++k) {
    result.dpl[row * n + k] = solver.response(result.freqs_MHz[k], drive.b1_mT).dpl;
  }
}

}  // namespace

OdmrResult odmr_map(const CenterParams& center, const RateParams& rates,
                    const DriveParams& drive, std::span<const double> freqs_MHz,
                    std::span<const double> fields_mT, int jobs) {
  check_grid(freqs_MHz, "frequency");
  check_grid(fields_mT, "field");
  rates.validate();

  OdmrResult result;
  result.freqs_MHz.assign(freqs_MHz.begin(), freqs_MHz.end());
  result.fields_mT.assign(fields_mT.begin(), fields_mT.end());
  result.dpl.assign(freqs_MHz.size() * fields_mT.size(), 0.0);
  result.baseline.assign(fields_mT.size(), 0.0);
  result.transitions.resize(fields_mT.size());

  const std::size_t rows = fields_mT.size();
  const std::size_t workers = std::clamp<std::size_t>(jobs > 0 ? jobs : 1, 1, rows);
  std::vector<std::exception_ptr> errors(rows);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t row = next++; row < rows; row = next++) {
      try {
        fill_row(result, row, center, rates, drive);
      } catch (...) {
        errors[row] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  result.perturbative = std::all_of(result.dpl.begin(), result.dpl.end(), [](double d) {
    return std::abs(d) <= kPerturbativeLimit;
  });
  return result;
}

OdmrResult odmr_spectrum(const CenterParams& center, const RateParams& rates, double bx_mT,
                         const DriveParams& drive, std::span<const double> freqs_MHz) {
  const double field[] = {bx_mT};
  return odmr_map(center, rates, drive, freqs_MHz, field, 1);
}

}  // namespace spinquad
