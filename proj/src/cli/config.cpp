// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spinquad/cli.hpp"
#include "spinquad/errors.hpp"

namespace spinquad::cli {

using nlohmann::json;

namespace {

// Kept in sync with configs/default.json (checked by the tests).
constexpr const char* kDefaultConfig = R"({
  "center": {"d_g_MHz": 35.0, "d_e_MHz": 220.0, "g_factor_g": 2.0, "g_factor_e": 2.0},
  "rates": {"pump_per_us": 1.0, "recomb_per_us": 10.0, "gamma_ms_per_us": 1.0,
            "eta_g": 0.5, "eta_e": 0.35, "gamma_g_per_us": 0.01, "gamma_e_per_us": 0.1},
  "drive": {"b1_mT": 0.0001, "b1_phase_rad": 0.0, "axis": "y"},
  "sweep": {"field_min_mT": 0.0, "field_max_mT": 15.0, "field_steps": 61,
            "freq_min_MHz": 1.0, "freq_max_MHz": 600.0, "freq_steps": 600},
  "spectrum": {"field_mT": 7.0},
  "husimi": {"n_theta": 91, "n_phi": 181, "field_mT": 0.0},
  "extract": {"areas_path": "", "calibrated": false},
  "output": {"dir": "out", "format": "csv"}
})";

constexpr double kHierarchyRatio = 0.2;

const char* type_name(const json& j) {
  if (j.is_object()) return "object";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_boolean()) return "boolean";
  return j.type_name();
}

void merge_strict(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) {
    throw ConfigError("config: expected an object at '" + (prefix.empty() ? "<root>" : prefix) + "'");
  }
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("config: unknown key '" + path + "'");
    json& target = base[key];
    if (target.is_object()) {
      merge_strict(target, value, path);
      continue;
    }
    const bool compatible = (target.is_number() && value.is_number()) ||
                            (target.is_string() && value.is_string()) ||
                            (target.is_boolean() && value.is_boolean());
    if (!compatible) {
      throw ConfigError("config: '" + path + "' must be a " + type_name(target) + ", got " +
                        type_name(value));
    }
    target = value;
  }
}

json override_patch(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("config: override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json patch = json::object();
  json* cursor = &patch;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError("config: override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*cursor)[part] = value;
      break;
    }
    cursor = &(*cursor)[part];
    start = dot + 1;
  }
  return patch;
}

double number(const json& doc, const char* section, const char* key) {
  const double v = doc.at(section).at(key).get<double>();
  if (!std::isfinite(v)) {
    throw ConfigError(std::string("config: '") + section + "." + key + "' must be finite");
  }
  return v;
}

int integer(const json& doc, const char* section, const char* key, int min_value) {
  const json& v = doc.at(section).at(key);
  const std::string path = std::string(section) + "." + key;
  if (!v.is_number_integer()) throw ConfigError("config: '" + path + "' must be an integer");
  const long long value = v.get<long long>();
  if (value < min_value || value > 10'000'000) {
    throw ConfigError("config: '" + path + "' must be an integer >= " + std::to_string(min_value));
  }
  return static_cast<int>(value);
}

GridSpec grid(const json& doc, const char* min_key, const char* max_key, const char* steps_key) {
  GridSpec g{number(doc, "sweep", min_key), number(doc, "sweep", max_key),
             integer(doc, "sweep", steps_key, 1)};
  if (g.min > g.max) {
    throw ConfigError(std::string("config: sweep.") + min_key + " must not exceed sweep." + max_key);
  }
  return g;
}

}  // namespace

std::vector<double> GridSpec::values() const {
  std::vector<double> out(steps);
  for (int k = 0; k < steps; ++k) {
    out[k] = steps == 1 ? min : min + (max - min) * static_cast<double>(k) / (steps - 1);
  }
  return out;
}

const json& default_config_json() {
  static const json doc = json::parse(kDefaultConfig);
  return doc;
}

json resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  json doc = default_config_json();
  if (path != "default") {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config: " + path + ": " + e.what());
    }
    merge_strict(doc, file, "");
  }
  for (const std::string& assignment : overrides) {
    try {
      merge_strict(doc, override_patch(assignment), "");
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (from --set " + assignment + ")");
    }
  }
  return doc;
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  cfg.center.d_g_MHz = number(doc, "center", "d_g_MHz");
  cfg.center.d_e_MHz = number(doc, "center", "d_e_MHz");
  cfg.center.g_factor_g = number(doc, "center", "g_factor_g");
  cfg.center.g_factor_e = number(doc, "center", "g_factor_e");
  cfg.center.validate();

  cfg.rates.pump = number(doc, "rates", "pump_per_us");
  cfg.rates.recomb = number(doc, "rates", "recomb_per_us");
  cfg.rates.gamma_ms = number(doc, "rates", "gamma_ms_per_us");
  cfg.rates.eta_g = number(doc, "rates", "eta_g");
  cfg.rates.eta_e = number(doc, "rates", "eta_e");
  cfg.rates.gamma_g = number(doc, "rates", "gamma_g_per_us");
  cfg.rates.gamma_e = number(doc, "rates", "gamma_e_per_us");
  cfg.rates.validate();

  const double b1 = number(doc, "drive", "b1_mT");
  if (b1 < 0.0) throw ConfigError("config: 'drive.b1_mT' must be >= 0");
  cfg.drive.b1_mT = std::polar(b1, number(doc, "drive", "b1_phase_rad"));
  const std::string axis = doc.at("drive").at("axis").get<std::string>();
  if (axis == "x") {
    cfg.drive.axis = DriveAxis::x;
  } else if (axis == "y") {
    cfg.drive.axis = DriveAxis::y;
  } else if (axis == "z") {
    cfg.drive.axis = DriveAxis::z;
  } else {
    throw ConfigError("config: 'drive.axis' must be one of x, y, z (got '" + axis + "')");
  }

  cfg.field = grid(doc, "field_min_mT", "field_max_mT", "field_steps");
  cfg.freq = grid(doc, "freq_min_MHz", "freq_max_MHz", "freq_steps");
  cfg.spectrum_field_mT = number(doc, "spectrum", "field_mT");

  cfg.husimi.n_theta = integer(doc, "husimi", "n_theta", 1);
  cfg.husimi.n_phi = integer(doc, "husimi", "n_phi", 1);
  cfg.husimi.field_mT = number(doc, "husimi", "field_mT");

  cfg.extract.areas_path = doc.at("extract").at("areas_path").get<std::string>();
  cfg.extract.calibrated = doc.at("extract").at("calibrated").get<bool>();

  cfg.output.dir = doc.at("output").at("dir").get<std::string>();
  cfg.output.format = doc.at("output").at("format").get<std::string>();
  if (cfg.output.format != "csv" && cfg.output.format != "json" && cfg.output.format != "both") {
    throw ConfigError("config: 'output.format' must be csv, json or both (got '" +
                      cfg.output.format + "')");
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const char* axis = cfg.drive.axis == DriveAxis::x ? "x" : cfg.drive.axis == DriveAxis::z ? "z" : "y";
  return {
      {"center",
       {{"d_g_MHz", cfg.center.d_g_MHz},
        {"d_e_MHz", cfg.center.d_e_MHz},
        {"g_factor_g", cfg.center.g_factor_g},
        {"g_factor_e", cfg.center.g_factor_e}}},
      {"rates",
       {{"pump_per_us", cfg.rates.pump},
        {"recomb_per_us", cfg.rates.recomb},
        {"gamma_ms_per_us", cfg.rates.gamma_ms},
        {"eta_g", cfg.rates.eta_g},
        {"eta_e", cfg.rates.eta_e},
        {"gamma_g_per_us", cfg.rates.gamma_g},
        {"gamma_e_per_us", cfg.rates.gamma_e}}},
      {"drive",
       {{"b1_mT", std::abs(cfg.drive.b1_mT)},
        {"b1_phase_rad", std::arg(cfg.drive.b1_mT)},
        {"axis", axis}}},
      {"sweep",
       {{"field_min_mT", cfg.field.min},
        {"field_max_mT", cfg.field.max},
        {"field_steps", cfg.field.steps},
        {"freq_min_MHz", cfg.freq.min},
        {"freq_max_MHz", cfg.freq.max},
        {"freq_steps", cfg.freq.steps}}},
      {"spectrum", {{"field_mT", cfg.spectrum_field_mT}}},
      {"husimi",
       {{"n_theta", cfg.husimi.n_theta},
        {"n_phi", cfg.husimi.n_phi},
        {"field_mT", cfg.husimi.field_mT}}},
      {"extract",
       {{"areas_path", cfg.extract.areas_path}, {"calibrated", cfg.extract.calibrated}}},
      {"output", {{"dir", cfg.output.dir}, {"format", cfg.output.format}}},
  };
}

std::vector<std::string> config_warnings(const RunConfig& cfg) {
  std::vector<std::string> warnings;
  auto check = [&](double num, double den, const char* num_name, const char* den_name) {
    if (num == 0.0) return;
    if (!(den > 0.0) || num / den > kHierarchyRatio) {
      std::ostringstream msg;
      msg << "rate hierarchy: " << num_name << "/" << den_name << " = "
          << (den > 0.0 ? num / den : std::numeric_limits<double>::infinity()) << " exceeds " << kHierarchyRatio
          << "; small- and large-field closed forms are outside their regime";
      warnings.push_back(msg.str());
    }
  };
  check(cfg.rates.gamma_g, cfg.rates.pump, "gamma_g", "pump");
  check(cfg.rates.gamma_e, cfg.rates.recomb, "gamma_e", "recomb");
  check(cfg.rates.gamma_ms, cfg.rates.recomb, "gamma_ms", "recomb");
  if (cfg.rates.pump == 0.0 || cfg.rates.recomb == 0.0 || cfg.rates.gamma_ms == 0.0) {
    warnings.push_back("rates: pump, recomb and gamma_ms must all be positive for a unique steady state");
  }
  return warnings;
}

}  // namespace spinquad::cli
