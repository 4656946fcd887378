// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinquad/spin_algebra.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "spinquad/errors.hpp"

namespace spinquad {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kDegenerateTol = 1e-9;
// Projections shorter than this are treated as lying outside the cluster.
constexpr double kMinProjection = 1e-6;

// Orthonormalizes, inside the invariant subspace spanned by columns
// [begin, end) of vecs, the projections of the standard basis vectors.
void canonicalize_cluster(ComplexMat4& vecs, int begin, int end) {
  const int dim = end - begin;
  const Eigen::Matrix<Complex, 4, Eigen::Dynamic> span = vecs.middleCols(begin, dim);
  const ComplexMat4 projector = span * span.adjoint();

  int found = 0;
  for (int n = 0; n < 4 && found < dim; ++n) {
    ComplexVec4 w = projector.col(n);
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < found; ++k) {
        const ComplexVec4 q = vecs.col(begin + k);
        w -= q * q.dot(w);
      }
    }
    const double norm = w.norm();
    if (norm < kMinProjection) continue;
    vecs.col(begin + found) = w / norm;
    ++found;
  }
}

void fix_phase(ComplexMat4& vecs) {
  for (int c = 0; c < 4; ++c) {
    int best = 0;
    for (int r = 1; r < 4; ++r) {
      if (std::abs(vecs(r, c)) > std::abs(vecs(best, c)) + 1e-12) best = r;
    }
    const Complex pivot = vecs(best, c);
    vecs.col(c) *= std::conj(pivot) / std::abs(pivot);
    vecs(best, c) = Complex(vecs(best, c).real(), 0.0);
  }
}

}  // namespace

SpinOperators make_spin_operators() {
  ComplexMat4 raise = ComplexMat4::Zero();
  raise(0, 1) = std::sqrt(3.0);
  raise(1, 2) = 2.0;
  raise(2, 3) = std::sqrt(3.0);
  const ComplexMat4 lower = raise.adjoint();
  const Complex i(0.0, 1.0);

  SpinOperators ops;
  ops.sx = 0.5 * (raise + lower);
  ops.sy = (raise - lower) / (2.0 * i);
  ops.sz = ComplexMat4::Zero();
  ops.sz.diagonal() << 1.5, 0.5, -0.5, -1.5;
  ops.p_half = ComplexMat4::Zero();
  ops.p_half.diagonal() << 0.0, 1.0, 1.0, 0.0;
  ops.p_three_half = ComplexMat4::Identity() - ops.p_half;
  return ops;
}

const SpinOperators& spin_operators() {
  static const SpinOperators ops = make_spin_operators();
  return ops;
}

double max_abs(const ComplexMat4& m) { return m.cwiseAbs().maxCoeff(); }

EigenSystem hermitian_eig(const ComplexMat4& m) {
  if (!m.allFinite()) throw NotHermitian("hermitian_eig: non-finite matrix entries");
  const double asym = max_abs(m - m.adjoint());
  if (asym > kHermitianTol * std::max(1.0, max_abs(m))) {
    std::ostringstream msg;
    msg << "hermitian_eig: max|m - m^H| = " << asym << " exceeds tolerance";
    throw NotHermitian(msg.str());
  }
  const ComplexMat4 h = 0.5 * (m + m.adjoint());
  const Eigen::SelfAdjointEigenSolver<ComplexMat4> solver(h);

  EigenSystem out;
  out.energies = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();

  const double gap_tol = kDegenerateTol * (out.energies(0) - out.energies(3));
  int begin = 0;
  while (begin < 4) {
    int end = begin + 1;
    while (end < 4 && out.energies(end - 1) - out.energies(end) <= gap_tol) ++end;
    if (end - begin > 1) canonicalize_cluster(out.vectors, begin, end);
    begin = end;
  }
  fix_phase(out.vectors);
  return out;
}

ComplexMat4 unitary_propagator(const ComplexMat4& h, double t) {
  const EigenSystem es = hermitian_eig(h);
  ComplexVec4 phases;
  for (int k = 0; k < 4; ++k) phases(k) = std::polar(1.0, -t * es.energies(k));
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

ComplexMat4 rotation_operator(double theta, double phi) {
  const SpinOperators& ops = spin_operators();
  ComplexVec4 z_phases;
  for (int k = 0; k < 4; ++k) z_phases(k) = std::polar(1.0, -phi * ops.sz(k, k).real());
  return z_phases.asDiagonal() * unitary_propagator(ops.sy, theta);
}

}  // namespace spinquad
