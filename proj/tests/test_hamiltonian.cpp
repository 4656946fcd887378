// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "spinquad/errors.hpp"
#include "spinquad/hamiltonian.hpp"

using namespace spinquad;

TEST_CASE("zero-field Hamiltonians") {
  const CenterParams center;
  ComplexMat4 expected = ComplexMat4::Zero();
  expected.diagonal() << 35.0, -35.0, -35.0, 35.0;
  CHECK(max_abs(build_hamiltonian(Level::ground, center, 0.0) - expected) == 0.0);

  const EigenSystem es = level_eigensystem(Level::excited, center, 0.0);
  CHECK(es.energies(0) - es.energies(3) == doctest::Approx(440.0));
  CHECK(es.level == Level::excited);
}

TEST_CASE("Zeeman term is gyro * B * Sx") {
  const CenterParams center;
  const double b = 5.0;
  const oracle::Spin spin;
  ComplexMat4 expected = 2.0 * 13.9962 * b * spin.sx;
  expected.diagonal() << 35.0, -35.0, -35.0, 35.0;
  CHECK(max_abs(build_hamiltonian(Level::ground, center, b) - expected) < 1e-12);
  CHECK(center.gyro(Level::ground) == doctest::Approx(27.9924));
}

TEST_CASE("Hamiltonian invariants over random fields") {
  const CenterParams center;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> field(-50.0, 50.0);
  const ComplexMat4 r = rotation_operator(0.0, std::numbers::pi);  // exp(-i pi Sz)
  for (int trial = 0; trial < 50; ++trial) {
    const double b = field(rng);
    for (Level level : {Level::ground, Level::excited}) {
      const ComplexMat4 h = build_hamiltonian(level, center, b);
      CHECK(std::abs(h.trace()) < 1e-10);
      CHECK(max_abs(h - h.adjoint()) == 0.0);
      // H(-B) = R H(B) R^dagger, so the spectra agree.
      CHECK(max_abs(build_hamiltonian(level, center, -b) - r * h * r.adjoint()) < 1e-9);
      const EigenSystem plus = level_eigensystem(level, center, b);
      const EigenSystem minus = level_eigensystem(level, center, -b);
      CHECK((plus.energies - minus.energies).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + std::abs(b) * 50));
      const auto ref = oracle::sector_energies(center.zfs(level),
                                               std::abs(center.reduced_field(level, b)));
      for (int k = 0; k < 4; ++k) {
        CHECK(plus.energies(k) == doctest::Approx(ref[k]).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("transition tables") {
  const CenterParams center;
  SUBCASE("ground state at zero field has one line at 70 MHz") {
    const TransitionTable tt = transition_table(Level::ground, center, 0.0);
    for (const Transition& t : tt.entries) {
      CHECK(t.freq_MHz >= 0.0);
      CHECK(t.m2 >= 0.0);
      CHECK(t.m2 <= 3.75);
      if (t.m2 > 1e-12 && t.freq_MHz > 1e-9) CHECK(t.freq_MHz == doctest::Approx(70.0));
    }
    CHECK(tt.find(0, 2).m2 == doctest::Approx(0.75));
  }
  SUBCASE("excited state at zero field has one line at 440 MHz") {
    const TransitionTable tt = transition_table(Level::excited, center, 0.0);
    for (const Transition& t : tt.entries) {
      if (t.m2 > 1e-12 && t.freq_MHz > 1e-9) CHECK(t.freq_MHz == doctest::Approx(440.0));
    }
  }
  SUBCASE("double-quantum transitions vanish at finite field") {
    for (double b : {0.3, 2.0, 10.0}) {
      const TransitionTable tt = transition_table(Level::ground, center, b);
      CHECK(tt.find(0, 2).m2 < 1e-20);
      CHECK(tt.find(1, 3).m2 < 1e-20);
      // Numerical oracle for the matrix elements.
      const EigenSystem es = level_eigensystem(Level::ground, center, b);
      const oracle::Spin spin;
      for (const Transition& t : tt.entries) {
        const Complex me = es.vectors.col(t.i).dot(spin.sy * es.vectors.col(t.j));
        CHECK(t.m2 == doctest::Approx(std::norm(me)).epsilon(1e-12));
        CHECK(t.freq_MHz == doctest::Approx(es.energies(t.i) - es.energies(t.j)));
      }
    }
  }
  SUBCASE("large-field single-quantum elements approach |<m|Sy|m+1>|^2") {
    const TransitionTable tt = transition_table(Level::ground, center, 1000.0);
    CHECK(tt.find(0, 1).m2 == doctest::Approx(0.75).epsilon(1e-3));
    CHECK(tt.find(1, 2).m2 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(tt.find(2, 3).m2 == doctest::Approx(0.75).epsilon(1e-3));
  }
}

TEST_CASE("crossover fields") {
  const CrossoverFields cf = crossover_fields(CenterParams{});
  CHECK(cf.ground_mT == doctest::Approx(1.25).epsilon(5e-3));
  CHECK(cf.excited_mT == doctest::Approx(7.86).epsilon(5e-3));
  CenterParams flat;
  flat.d_g_MHz = 0.0;
  CHECK(crossover_fields(flat).ground_mT == 0.0);
}

TEST_CASE("level sweep") {
  const CenterParams center;
  const double zero[] = {0.0};
  const auto single = level_sweep(Level::ground, center, zero);
  REQUIRE(single.size() == 1);
  CHECK(single[0].energies(0) == doctest::Approx(35.0));
  CHECK(single[0].energies(3) == doctest::Approx(-35.0));

  std::vector<double> grid;
  for (int k = 0; k <= 400; ++k) grid.push_back(0.05 * k);
  const auto sweep = level_sweep(Level::excited, center, grid);
  const double step_bound = center.gyro(Level::excited) * 0.05 * 3.0 + 1e-9;
  for (std::size_t k = 1; k < sweep.size(); ++k) {
    CHECK((sweep[k].energies - sweep[k - 1].energies).cwiseAbs().maxCoeff() <= step_bound);
  }

  const double big[] = {5000.0};
  const EigenSystem far = level_sweep(Level::ground, center, big)[0];
  const double zeeman = center.gyro(Level::ground) * 5000.0;
  CHECK(far.energies(0) / zeeman == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(far.energies(1) / zeeman == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(far.energies(3) / zeeman == doctest::Approx(-1.5).epsilon(1e-3));

  CHECK_THROWS_AS(level_sweep(Level::ground, center, std::span<const double>{}), ConfigError);
}

TEST_CASE("asymptotic labels") {
  const CenterParams center;
  CHECK(asymptotic_label(Level::ground, center, 10.0, 0) == "+3/2_x");
  CHECK(asymptotic_label(Level::ground, center, 10.0, 2) == "-1/2_x");
  CHECK(asymptotic_label(Level::ground, center, -10.0, 0) == "-3/2_x");
  CHECK(asymptotic_label(Level::ground, center, 0.0, 1) == "+-3/2_z");
  CHECK(asymptotic_label(Level::ground, center, 0.0, 3) == "+-1/2_z");
  // The top state carries <Sx> -> +3/2 at large positive field.
  const EigenSystem es = level_eigensystem(Level::ground, center, 500.0);
  const Complex sx = es.vectors.col(0).dot(spin_operators().sx * es.vectors.col(0));
  CHECK(sx.real() == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("center parameter validation") {
  CenterParams bad;
  bad.d_e_MHz = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_NOTHROW(CenterParams{}.validate());
}
