// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include "output.hpp"

#include <fmt/format.h>

#include <fstream>
#include <stdexcept>

#include "spinquad/errors.hpp"

namespace spinquad::cli {

namespace {

void flatten(const nlohmann::json& node, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    }
    return;
  }
  if (node.is_number_float()) {
    out.emplace_back(prefix, format_number(node.get<double>()));
  } else if (node.is_string()) {
    out.emplace_back(prefix, node.get<std::string>());
  } else {
    out.emplace_back(prefix, node.dump());
  }
}

std::string cell_text(const Cell& cell) {
  if (const double* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const long long* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("output: cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("Table::add: row width mismatch");
  rows.push_back(std::move(row));
}

nlohmann::json Table::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const Cell& cell : row) std::visit([&](const auto& v) { r.push_back(v); }, cell);
    rows_json.push_back(std::move(r));
  }
  return {{"columns", columns}, {"rows", std::move(rows_json)}};
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

void write_csv(const std::filesystem::path& path, const std::string& subcommand,
               const nlohmann::json& meta, const Table& table) {
  std::ofstream out = open_output(path);
  out << "# spinquad-v1 " << subcommand << '\n';
  std::vector<std::pair<std::string, std::string>> entries;
  flatten(meta, "", entries);
  for (const auto& [key, value] : entries) out << "# " << key << ": " << value << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell_text(row[c]);
    out << '\n';
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& meta,
                const nlohmann::json& data) {
  std::ofstream out = open_output(path);
  out << nlohmann::json{{"meta", meta}, {"data", data}}.dump(2) << '\n';
}

}  // namespace spinquad::cli
