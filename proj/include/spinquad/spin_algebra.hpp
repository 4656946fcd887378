// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

namespace spinquad {

using Complex = std::complex<double>;
using ComplexMat4 = Eigen::Matrix4cd;
using ComplexVec4 = Eigen::Vector4cd;
using RealMat4 = Eigen::Matrix4d;
using RealVec4 = Eigen::Vector4d;

enum class Level { ground, excited };

/**
 * Spin-3/2 operators in the Sz basis ordered (+3/2, +1/2, -1/2, -3/2).
 *
 * p_half and p_three_half project onto |m|=1/2 and |m|=3/2.
 */
struct SpinOperators {
  ComplexMat4 sx;
  ComplexMat4 sy;
  ComplexMat4 sz;
  ComplexMat4 p_half;
  ComplexMat4 p_three_half;
};

SpinOperators make_spin_operators();

/// Shared immutable instance of make_spin_operators().
const SpinOperators& spin_operators();

inline ComplexMat4 commutator(const ComplexMat4& a, const ComplexMat4& b) {
  return a * b - b * a;
}

/// Symmetrized product (AB + BA) / 2.
inline ComplexMat4 sym_anticommutator(const ComplexMat4& a, const ComplexMat4& b) {
  return 0.5 * (a * b + b * a);
}

/**
 * Eigen-decomposition of a Hermitian 4x4 matrix.
 *
 * Energies are sorted descending and vectors holds the matching eigenvectors
 * as columns. The decomposition is canonical: inside a degenerate cluster the
 * basis is obtained by projecting the standard basis vectors in order and
 * orthonormalizing, and every column is phase-fixed so that its largest
 * component is real and positive (the lowest index wins ties).
 */
struct EigenSystem {
  RealVec4 energies;
  ComplexMat4 vectors;
  /// Set by the hamiltonian module; hermitian_eig leaves it empty.
  std::optional<Level> level;
  double field_mT = 0.0;
};

/// Throws NotHermitian when |m - m^H| exceeds 1e-10 relative to |m|.
EigenSystem hermitian_eig(const ComplexMat4& m);

/// exp(-i t H) for Hermitian H, built from hermitian_eig.
ComplexMat4 unitary_propagator(const ComplexMat4& h, double t);

/// exp(-i phi Sz) exp(-i theta Sy).
ComplexMat4 rotation_operator(double theta, double phi);

/// Largest elementwise modulus.
double max_abs(const ComplexMat4& m);

}  // namespace spinquad
