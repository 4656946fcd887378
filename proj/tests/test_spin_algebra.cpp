// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spinquad/errors.hpp"
#include "spinquad/hamiltonian.hpp"
#include "spinquad/spin_algebra.hpp"

using namespace spinquad;

namespace {

const ComplexMat4 kId = ComplexMat4::Identity();
const Complex kI(0.0, 1.0);

}  // namespace

TEST_CASE("spin operators match the ladder construction") {
  const SpinOperators ops = make_spin_operators();
  const oracle::Spin ref;
  CHECK(max_abs(ops.sx - ref.sx) < 1e-15);
  CHECK(max_abs(ops.sy - ref.sy) < 1e-15);
  CHECK(max_abs(ops.sz - ref.sz) < 1e-15);
  CHECK(ops.sx(0, 1).real() == doctest::Approx(std::sqrt(3.0) / 2.0));
  CHECK(ops.sz(0, 0).real() == 1.5);
  CHECK(ops.sz(3, 3).real() == -1.5);
}

TEST_CASE("spin operators satisfy the angular momentum algebra") {
  const SpinOperators& ops = spin_operators();
  CHECK(max_abs(commutator(ops.sx, ops.sy) - kI * ops.sz) < 1e-12);
  CHECK(max_abs(commutator(ops.sy, ops.sz) - kI * ops.sx) < 1e-12);
  CHECK(max_abs(commutator(ops.sz, ops.sx) - kI * ops.sy) < 1e-12);
  const ComplexMat4 casimir = ops.sx * ops.sx + ops.sy * ops.sy + ops.sz * ops.sz;
  CHECK(max_abs(casimir - 3.75 * kId) < 1e-12);
  CHECK(max_abs(ops.p_half + ops.p_three_half - kId) == 0.0);
  CHECK(max_abs(ops.p_half * ops.p_half - ops.p_half) == 0.0);
  CHECK(max_abs(ops.p_half - ops.p_half.adjoint()) == 0.0);
}

TEST_CASE("commutator and symmetrized product") {
  const SpinOperators& ops = spin_operators();
  std::mt19937_64 rng(11);
  const ComplexMat4 m = oracle::random_hermitian(rng);
  CHECK(max_abs(commutator(ops.sx, ops.sx)) == 0.0);
  CHECK(max_abs(commutator(kId, m)) < 1e-15);
  CHECK(max_abs(sym_anticommutator(kId, m) - m) < 1e-15);
  CHECK(max_abs(sym_anticommutator(ops.p_half, ops.p_half) - ops.p_half) == 0.0);
  CHECK(max_abs(sym_anticommutator(ops.p_half, ops.p_three_half)) == 0.0);
}

TEST_CASE("hermitian_eig on trivial inputs") {
  SUBCASE("diagonal matrix") {
    ComplexMat4 m = ComplexMat4::Zero();
    m.diagonal() << 35.0, -35.0, -35.0, 35.0;
    const EigenSystem es = hermitian_eig(m);
    CHECK(es.energies(0) == doctest::Approx(35.0));
    CHECK(es.energies(1) == doctest::Approx(35.0));
    CHECK(es.energies(2) == doctest::Approx(-35.0));
    CHECK(es.energies(3) == doctest::Approx(-35.0));
    // Degenerate doublets resolve onto canonical vectors in basis order.
    ComplexMat4 expected = ComplexMat4::Zero();
    expected(0, 0) = expected(3, 1) = expected(1, 2) = expected(2, 3) = 1.0;
    CHECK(max_abs(es.vectors - expected) < 1e-14);
  }
  SUBCASE("zero matrix gives the canonical basis") {
    const EigenSystem es = hermitian_eig(ComplexMat4::Zero());
    CHECK(es.energies.isZero());
    CHECK(max_abs(es.vectors - kId) == 0.0);
  }
  SUBCASE("rejects non-Hermitian input") {
    ComplexMat4 m = ComplexMat4::Zero();
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(hermitian_eig(m), NotHermitian);
  }
  SUBCASE("symmetrizes round-off asymmetry") {
    ComplexMat4 m = ComplexMat4::Identity();
    m(0, 1) = Complex(1.0, 1e-13);
    m(1, 0) = 1.0;
    CHECK_NOTHROW(hermitian_eig(m));
  }
}

TEST_CASE("hermitian_eig matches characteristic polynomial roots") {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 200; ++trial) {
    const ComplexMat4 m = oracle::random_hermitian(rng, trial % 2 ? 1.0 : 100.0);
    const EigenSystem es = hermitian_eig(m);
    const auto roots = oracle::quartic_real_roots(oracle::char_poly(m));
    const double scale = std::abs(roots[0]) + std::abs(roots[3]);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(es.energies(k) - roots[k]) <= 1e-8 * scale);

    for (int k = 0; k < 3; ++k) CHECK(es.energies(k) >= es.energies(k + 1));
    const ComplexMat4 recon =
        es.vectors * es.energies.cast<Complex>().asDiagonal() * es.vectors.adjoint();
    CHECK(max_abs(recon - m) <= 1e-10 * max_abs(m));
    CHECK(max_abs(es.vectors.adjoint() * es.vectors - kId) < 1e-10);
  }
}

TEST_CASE("hermitian_eig of the ground Hamiltonian at the crossover field") {
  const CenterParams center;
  const double b = 1.25;
  const ComplexMat4 h = build_hamiltonian(Level::ground, center, b);
  const EigenSystem es = hermitian_eig(h);
  const auto ref = oracle::sector_energies(center.d_g_MHz, center.reduced_field(Level::ground, b));
  for (int k = 0; k < 4; ++k) CHECK(es.energies(k) == doctest::Approx(ref[k]).epsilon(1e-12));
  for (int k = 0; k < 3; ++k) CHECK(es.energies(k) - es.energies(k + 1) > 1.0);
}

TEST_CASE("hermitian_eig output is deterministic and phase fixed") {
  std::mt19937_64 rng(5);
  const ComplexMat4 m = oracle::random_hermitian(rng);
  const EigenSystem a = hermitian_eig(m);
  const EigenSystem b = hermitian_eig(m);
  CHECK((a.energies.array() == b.energies.array()).all());
  CHECK((a.vectors.array() == b.vectors.array()).all());
  for (int c = 0; c < 4; ++c) {
    int best = 0;
    for (int r = 1; r < 4; ++r) {
      if (std::abs(a.vectors(r, c)) > std::abs(a.vectors(best, c)) + 1e-12) best = r;
    }
    CHECK(a.vectors(best, c).imag() == 0.0);
    CHECK(a.vectors(best, c).real() > 0.0);
  }
}

TEST_CASE("unitary propagator of Hermitian generators is unitary") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const ComplexMat4 h = oracle::random_hermitian(rng, 3.0);
    const ComplexMat4 u = unitary_propagator(h, 0.7);
    CHECK(max_abs(u.adjoint() * u - kId) < 1e-10);
  }
  const SpinOperators& ops = spin_operators();
  // Taylor oracle for a small step.
  const double t = 1e-3;
  const ComplexMat4 taylor = kId - kI * t * ops.sx - 0.5 * t * t * ops.sx * ops.sx;
  CHECK(max_abs(unitary_propagator(ops.sx, t) - taylor) < 1e-9);
}

TEST_CASE("rotation operator") {
  CHECK(max_abs(rotation_operator(0.0, 0.0) - kId) < 1e-12);

  const ComplexVec4 flipped = rotation_operator(std::numbers::pi, 0.0).col(0);
  CHECK(std::abs(flipped(3)) == doctest::Approx(1.0));
  CHECK(flipped.head<3>().norm() < 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 100; ++trial) {
    const ComplexMat4 u = rotation_operator(angle(rng), angle(rng));
    CHECK(max_abs(u.adjoint() * u - kId) < 1e-10);
  }

  // The coherent state at (theta, phi) has <S> = (3/2) n(theta, phi).
  const SpinOperators& ops = spin_operators();
  const double theta = 0.8, phi = 2.1;
  const ComplexVec4 psi = rotation_operator(theta, phi).col(0);
  CHECK(psi.dot(ops.sx * psi).real() ==
        doctest::Approx(1.5 * std::sin(theta) * std::cos(phi)));
  CHECK(psi.dot(ops.sy * psi).real() ==
        doctest::Approx(1.5 * std::sin(theta) * std::sin(phi)));
  CHECK(psi.dot(ops.sz * psi).real() == doctest::Approx(1.5 * std::cos(theta)));
}
