// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace spinquad::cli {

using Cell = std::variant<double, long long, std::string>;

/// Column-ordered result table written as CSV or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
  nlohmann::json to_json() const;
};

/// 17 significant digits, the format used for every CSV number.
std::string format_number(double value);

/**
 * Writes `# spinquad-v1 <subcommand>`, then one `# key: value` line per
 * metadata entry (nested objects flattened with dots), then the table.
 */
void write_csv(const std::filesystem::path& path, const std::string& subcommand,
               const nlohmann::json& meta, const Table& table);

/// Writes {"meta": meta, "data": data}.
void write_json(const std::filesystem::path& path, const nlohmann::json& meta,
                const nlohmann::json& data);

}  // namespace spinquad::cli
