// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinquad/hamiltonian.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "spinquad/errors.hpp"

namespace spinquad {

void CenterParams::validate() const {
  auto require_positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      std::ostringstream msg;
      msg << "center." << name << " must be finite and > 0 (got " << value << ")";
      throw ConfigError(msg.str());
    }
  };
  require_positive(d_g_MHz, "d_g_MHz");
  require_positive(d_e_MHz, "d_e_MHz");
  require_positive(g_factor_g, "g_factor_g");
  require_positive(g_factor_e, "g_factor_e");
}

const ComplexMat4& drive_operator(DriveAxis axis) {
  const SpinOperators& ops = spin_operators();
  switch (axis) {
    case DriveAxis::x:
      return ops.sx;
    case DriveAxis::z:
      return ops.sz;
    case DriveAxis::y:
      break;
  }
  return ops.sy;
}

ComplexMat4 build_hamiltonian(Level level, const CenterParams& params, double bx_mT) {
  const SpinOperators& ops = spin_operators();
  const ComplexMat4 quad = ops.sz * ops.sz - 1.25 * ComplexMat4::Identity();
  return params.gyro(level) * bx_mT * ops.sx + params.zfs(level) * quad;
}

EigenSystem level_eigensystem(Level level, const CenterParams& params, double bx_mT) {
  EigenSystem es = hermitian_eig(build_hamiltonian(level, params, bx_mT));
  es.level = level;
  es.field_mT = bx_mT;
  return es;
}

const Transition& TransitionTable::find(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (const Transition& t : entries) {
    if (t.i == i && t.j == j) return t;
  }
  throw std::out_of_range("TransitionTable::find: no transition between given states");
}

TransitionTable transition_table(const EigenSystem& es, DriveAxis axis) {
  const ComplexMat4 op = es.vectors.adjoint() * drive_operator(axis) * es.vectors;
  TransitionTable table;
  table.level = es.level.value_or(Level::ground);
  table.field_mT = es.field_mT;
  int n = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      table.entries[n++] = Transition{i, j, es.energies(i) - es.energies(j), std::norm(op(i, j))};
    }
  }
  return table;
}

TransitionTable transition_table(Level level, const CenterParams& params, double bx_mT,
                                 DriveAxis axis) {
  return transition_table(level_eigensystem(level, params, bx_mT), axis);
}

CrossoverFields crossover_fields(const CenterParams& params) {
  return {params.d_g_MHz / params.gyro(Level::ground),
          params.d_e_MHz / params.gyro(Level::excited)};
}

std::vector<EigenSystem> level_sweep(Level level, const CenterParams& params,
                                     std::span<const double> grid_mT) {
  if (grid_mT.empty()) throw ConfigError("level_sweep: empty field grid");
  std::vector<EigenSystem> out;
  out.reserve(grid_mT.size());
  for (double b : grid_mT) out.push_back(level_eigensystem(level, params, b));
  return out;
}

std::string asymptotic_label(Level level, const CenterParams& params, double bx_mT, int index) {
  static const std::array<const char*, 4> kPositive = {"+3/2_x", "+1/2_x", "-1/2_x", "-3/2_x"};
  static const std::array<const char*, 4> kNegative = {"-3/2_x", "-1/2_x", "+1/2_x", "+3/2_x"};
  if (index < 0 || index > 3) throw std::out_of_range("asymptotic_label: index outside [0, 3]");
  if (bx_mT == 0.0) {
    const bool upper = index < 2;
    return (upper == (params.zfs(level) > 0.0)) ? "+-3/2_z" : "+-1/2_z";
  }
  return bx_mT > 0.0 ? kPositive[index] : kNegative[index];
}

}  // namespace spinquad
