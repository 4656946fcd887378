// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinquad/odmr.hpp"

namespace spinquad::cli {

/// Evenly spaced grid; `steps` is the number of points.
struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  int steps = 1;

  std::vector<double> values() const;
};

struct HusimiSettings {
  int n_theta = 91;
  int n_phi = 181;
  double field_mT = 0.0;
};

struct ExtractSettings {
  std::string areas_path;
  bool calibrated = false;
};

struct OutputSettings {
  std::string dir = "out";
  std::string format = "csv";  ///< csv | json | both
};

struct RunConfig {
  CenterParams center;
  RateParams rates;
  DriveParams drive;
  GridSpec field;
  GridSpec freq;
  double spectrum_field_mT = 7.0;
  HusimiSettings husimi;
  ExtractSettings extract;
  OutputSettings output;
};

/// The documented default configuration, identical to configs/default.json.
const nlohmann::json& default_config_json();

/**
 * Resolves a configuration: starts from the defaults, merges the file at
 * `path` ("default" means no file), then applies `key.path=value` overrides.
 * Unknown keys, type mismatches and invalid values throw ConfigError.
 */
nlohmann::json resolve_config(const std::string& path, const std::vector<std::string>& overrides);

/// Strict conversion of a resolved document; validates every value.
RunConfig parse_config(const nlohmann::json& doc);

nlohmann::json to_json(const RunConfig& cfg);

/// Informational warnings (rate hierarchy, grid resolution).
std::vector<std::string> config_warnings(const RunConfig& cfg);

/// Entry point shared by the executable and the tests; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spinquad::cli
