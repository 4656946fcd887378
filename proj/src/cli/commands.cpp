// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "output.hpp"
#include "spinquad/cli.hpp"
#include "spinquad/errors.hpp"
#include "spinquad/multipoles.hpp"
#include "spinquad/rate_model.hpp"

#ifndef SPINQUAD_VERSION
#define SPINQUAD_VERSION "0.0.0"
#endif

namespace spinquad::cli {
namespace {

using nlohmann::json;

const char* level_name(Level level) { return level == Level::ground ? "ground" : "excited"; }

/// Runs fn(0..n-1) on up to `jobs` threads; the first failing index rethrows.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Context {
  std::string subcommand;
  json resolved;
  RunConfig cfg;
  std::filesystem::path out_dir;
  int jobs = 1;
  std::ostream& out;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;

  json meta(json extra = json::object()) const {
    // The output location lives in the manifest only, so moving a run does not change its data files.
    json config = resolved;
    config["output"].erase("dir");
    json m = {{"subcommand", subcommand}, {"version", SPINQUAD_VERSION}, {"config", config}};
    for (auto& [key, value] : extra.items()) m[key] = value;
    return m;
  }

  bool want_csv() const { return cfg.output.format != "json"; }
  bool want_json() const { return cfg.output.format != "csv"; }

  void emit(const std::string& stem, const Table& table, json extra = json::object(),
            const json* json_data = nullptr) {
    const json m = meta(std::move(extra));
    if (want_csv()) {
      write_csv(out_dir / (stem + ".csv"), subcommand, m, table);
      outputs.push_back(stem + ".csv");
    }
    if (want_json()) {
      write_json(out_dir / (stem + ".json"), m, json_data ? *json_data : table.to_json());
      outputs.push_back(stem + ".json");
    }
  }
};

void cmd_levels(Context& ctx) {
  const std::vector<double> fields = ctx.cfg.field.values();
  std::vector<LevelReport> reports(fields.size());
  std::vector<std::array<TransitionTable, 2>> tables(fields.size());
  parallel_for(fields.size(), ctx.jobs, [&](std::size_t k) {
    reports[k] = level_report(ctx.cfg.center, ctx.cfg.rates, fields[k]);
    for (Level level : {Level::ground, Level::excited}) {
      tables[k][level == Level::ground ? 0 : 1] =
          transition_table(level, ctx.cfg.center, fields[k], ctx.cfg.drive.axis);
    }
  });

  Table levels{{"field_mT", "level", "state", "label", "energy_MHz", "population", "brightness"}, {}};
  Table transitions{{"field_mT", "level", "upper", "lower", "label_upper", "label_lower", "freq_MHz", "m2"},
                    {}};
  for (std::size_t k = 0; k < fields.size(); ++k) {
    for (Level level : {Level::ground, Level::excited}) {
      const auto& entries = level == Level::ground ? reports[k].ground : reports[k].excited;
      for (int s = 0; s < 4; ++s) {
        const LevelEntry& e = entries[s];
        levels.add({fields[k], level_name(level), static_cast<long long>(s + 1), e.label, e.energy_MHz,
                    e.population, e.brightness});
      }
      for (const Transition& t : tables[k][level == Level::ground ? 0 : 1].entries) {
        transitions.add({fields[k], level_name(level), static_cast<long long>(t.i + 1),
                         static_cast<long long>(t.j + 1), entries[t.i].label, entries[t.j].label,
                         t.freq_MHz, t.m2});
      }
    }
  }
  const CrossoverFields cross = crossover_fields(ctx.cfg.center);
  const json extra = {{"crossover_ground_mT", cross.ground_mT}, {"crossover_excited_mT", cross.excited_mT}};
  ctx.emit("levels", levels, extra);
  ctx.emit("transitions", transitions, extra);
}

void emit_odmr(Context& ctx, const std::string& stem, const OdmrResult& r) {
  Table table{{"freq_MHz", "field_mT", "dpl", "baseline_per_us"}, {}};
  json dpl = json::array();
  for (std::size_t f = 0; f < r.fields_mT.size(); ++f) {
    json row = json::array();
    for (std::size_t k = 0; k < r.freqs_MHz.size(); ++k) {
      table.add({r.freqs_MHz[k], r.fields_mT[f], r.at(f, k), r.baseline[f]});
      row.push_back(r.at(f, k));
    }
    dpl.push_back(std::move(row));
  }
  if (!r.perturbative) {
    ctx.warnings.push_back(fmt::format("drive: |dPL/PL| exceeds {} somewhere on the grid; "
                                       "lower drive.b1_mT for the perturbative regime",
                                       kPerturbativeLimit));
  }
  const json data = {{"freqs_MHz", r.freqs_MHz},
                     {"fields_mT", r.fields_mT},
                     {"dpl", dpl},
                     {"baseline_per_us", r.baseline}};
  ctx.emit(stem, table, {{"perturbative", r.perturbative}}, &data);
}

void cmd_spectrum(Context& ctx) {
  const std::vector<double> freqs = ctx.cfg.freq.values();
  emit_odmr(ctx, "spectrum",
            odmr_spectrum(ctx.cfg.center, ctx.cfg.rates, ctx.cfg.spectrum_field_mT, ctx.cfg.drive, freqs));
}

void cmd_map(Context& ctx) {
  const std::vector<double> freqs = ctx.cfg.freq.values();
  const std::vector<double> fields = ctx.cfg.field.values();
  emit_odmr(ctx, "map", odmr_map(ctx.cfg.center, ctx.cfg.rates, ctx.cfg.drive, freqs, fields, ctx.jobs));
}

void cmd_husimi(Context& ctx) {
  const double bx = ctx.cfg.husimi.field_mT;
  const SpinState s = steady_state(build_generator(ctx.cfg.center, ctx.cfg.rates, bx));
  for (Level level : {Level::ground, Level::excited}) {
    const ComplexMat4& rho = level == Level::ground ? s.rho_g : s.rho_e;
    const HusimiGrid grid = husimi(rho, ctx.cfg.husimi.n_theta, ctx.cfg.husimi.n_phi);
    Table table{{"theta_rad", "phi_rad", "value"}, {}};
    for (std::size_t i = 0; i < grid.thetas.size(); ++i) {
      for (std::size_t j = 0; j < grid.phis.size(); ++j) {
        table.add({grid.thetas[i], grid.phis[j], grid.at(i, j)});
      }
    }
    const json extra = {{"level", level_name(level)},
                        {"field_mT", bx},
                        {"trace", rho.trace().real()},
                        {"normalization", grid.normalization()}};
    ctx.emit(std::string("husimi_") + level_name(level), table, extra);
  }
}

void cmd_multipoles(Context& ctx) {
  const std::vector<double> fields = ctx.cfg.field.values();
  std::vector<SpinState> states(fields.size());
  parallel_for(fields.size(), ctx.jobs, [&](std::size_t k) {
    states[k] = steady_state(build_generator(ctx.cfg.center, ctx.cfg.rates, fields[k]));
  });
  Table table{{"field_mT", "quad_g", "quad_e", "dip_g", "dip_e", "tr_g", "tr_e", "n_m", "pl_per_us"}, {}};
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const SpinState& s = states[k];
    table.add({fields[k], quadrupole(s.rho_g), quadrupole(s.rho_e), dipole_x(s.rho_g), dipole_x(s.rho_e),
               s.rho_g.trace().real(), s.rho_e.trace().real(), s.n_m, pl_intensity(ctx.cfg.rates, s)});
  }
  ctx.emit("multipoles", table);
}

json ratecheck_report(const RunConfig& cfg) {
  const RateParams& r = cfg.rates;
  const CrossoverFields cross = crossover_fields(cfg.center);
  json report;
  report["eta_ratio"] = r.eta_g > 0.0 ? json(r.eta_e / r.eta_g) : json(nullptr);
  report["small_field"]["x_at_zero"] = small_field_x(0.0);
  report["small_field"]["gs_signal"] = gs_signal_sign_small_field(r);

  json crossover = {{"x_target", report["eta_ratio"]}, {"b_g", nullptr}, {"field_mT", nullptr}};
  if (r.eta_g > 0.0) {
    const double ratio = r.eta_e / r.eta_g;
    if (ratio > 0.25 && ratio <= 1.0) {
      const double b = small_field_b_for_x(ratio);
      crossover["b_g"] = b;
      crossover["field_mT"] = b * cfg.center.d_g_MHz / cfg.center.gyro(Level::ground);
    } else {
      crossover["note"] = "x(b_g) spans (1/4, 1]; no excited-state sign change for this ratio";
    }
  }
  report["small_field"]["es_sign_change"] = crossover;

  json es_table = json::array();
  for (int k = 1; k <= 20; ++k) {
    const double b = k / 10.0;
    const SmallFieldSignal sig = es_signal_small_field(r, b);
    es_table.push_back({{"b_g", b}, {"x", small_field_x(b)}, {"es_signal", sig.value}});
  }
  report["small_field"]["es_signal_table"] = es_table;

  json large;
  if (r.eta_g > 0.0) {
    const double ratio = r.eta_e / r.eta_g;
    large["regime"] = ratio < 1.0   ? "positive"
                      : ratio > 2.0 ? "negative"
                      : (ratio == 1.0 || ratio == 2.0) ? "boundary"
                                                       : "double sign change";
    if (const auto roots = large_field_sign_changes(ratio)) {
      large["sign_change_b_e"] = {roots->first, roots->second};
      large["root_product"] = roots->first * roots->second;
    }
  }
  json lf_table = json::array();
  for (double b : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    const LargeFieldSignals lf = large_field_signals(r, b);
    lf_table.push_back({{"b_e", b},
                        {"half_to_three_half", lf.half_to_three_half},
                        {"half_to_minus_half", lf.half_to_minus_half}});
  }
  large["signal_table"] = lf_table;
  report["large_field"] = large;

  report["crossover_fields_mT"] = {{"ground", cross.ground_mT}, {"excited", cross.excited_mT}};
  report["feedback_kappa"] = feedback_kappa(r);
  report["hierarchy_ok"] = rate_hierarchy_ok(r);
  return report;
}

void cmd_ratecheck(Context& ctx) {
  const json report = ratecheck_report(ctx.cfg);
  write_json(ctx.out_dir / "ratecheck.json", ctx.meta(), report);
  ctx.outputs.push_back("ratecheck.json");
}

std::pair<int, int> parse_transition_key(const std::string& key) {
  int i = 0;
  int j = 0;
  const char* first = key.data();
  const char* last = key.data() + key.size();
  auto [p, ec] = std::from_chars(first, last, i);
  bool ok = ec == std::errc() && p != last && *p == '-';
  if (ok) {
    auto [q, ec2] = std::from_chars(p + 1, last, j);
    ok = ec2 == std::errc() && q == last;
  }
  if (!ok || i < 1 || j > 4 || i >= j) {
    throw ConfigError("areas: transition key '" + key + "' must look like 'i-j' with 1 <= i < j <= 4");
  }
  return {i, j};
}

PeakAreaSet parse_area_set(const json& doc, const char* name, Level level, double field) {
  PeakAreaSet set{level, field, {}};
  if (!doc.contains(name) || !doc.at(name).is_object()) {
    throw ConfigError(std::string("areas: missing object '") + name + "'");
  }
  for (const auto& [key, value] : doc.at(name).items()) {
    if (!value.is_number()) throw ConfigError(std::string("areas: '") + name + "." + key + "' must be a number");
    set.areas[parse_transition_key(key)] = value.get<double>();
  }
  return set;
}

void cmd_extract(Context& ctx) {
  const std::string& path = ctx.cfg.extract.areas_path;
  if (path.empty()) {
    throw ConfigError("config: 'extract.areas_path' is empty; pass --set extract.areas_path=FILE");
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("areas: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("areas: " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("areas: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "field_mT" && key != "gs" && key != "es") throw ConfigError("areas: unknown key '" + key + "'");
  }
  if (!doc.contains("field_mT") || !doc.at("field_mT").is_number()) {
    throw ConfigError("areas: 'field_mT' must be a number");
  }
  const double field = doc.at("field_mT").get<double>();
  const PeakAreaSet gs = parse_area_set(doc, "gs", Level::ground, field);
  const PeakAreaSet es = parse_area_set(doc, "es", Level::excited, field);
  const ExtractionMode mode = ctx.cfg.extract.calibrated ? ExtractionMode::calibrated : ExtractionMode::relative;
  const ExtractionResult r = extract_from_peak_areas(gs, es, ctx.cfg.center, ctx.cfg.rates, field, mode);

  Table table{{"level", "df_1", "df_2", "df_3", "df_4", "quadrupole", "dipole_x", "residual"}, {}};
  for (Level level : {Level::ground, Level::excited}) {
    const LevelExtraction& e = level == Level::ground ? r.ground : r.excited;
    table.add({level_name(level), e.df(0), e.df(1), e.df(2), e.df(3), e.multipoles.quadrupole,
               e.multipoles.dipole_x, e.residual});
  }
  for (const std::string& w : r.warnings) ctx.warnings.push_back(w);
  ctx.emit("extract", table,
           {{"field_mT", field},
            {"mode", ctx.cfg.extract.calibrated ? "calibrated" : "relative"},
            {"scale", r.scale},
            {"extraction_warnings", r.warnings}});
}

void flatten_lines(const json& node, const std::string& prefix, std::ostream& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) flatten_lines(value, prefix.empty() ? key : prefix + "." + key, out);
    return;
  }
  out << prefix << " = " << node.dump() << '\n';
}

int cmd_validate(Context& ctx) {
  flatten_lines(ctx.resolved, "", ctx.out);
  ctx.out << "derived.gyro_g_MHz_per_mT = " << format_number(ctx.cfg.center.gyro(Level::ground)) << '\n';
  ctx.out << "derived.gyro_e_MHz_per_mT = " << format_number(ctx.cfg.center.gyro(Level::excited)) << '\n';
  ctx.out << "derived.field_points = " << ctx.cfg.field.steps << '\n';
  ctx.out << "derived.freq_points = " << ctx.cfg.freq.steps << '\n';
  for (const std::string& w : ctx.warnings) ctx.out << "warning: " << w << '\n';
  ctx.out << (ctx.warnings.empty() ? "OK" : fmt::format("OK with {} warning(s)", ctx.warnings.size())) << '\n';
  return 0;
}

std::string parameter_summary(const RunConfig& cfg) {
  return fmt::format("D_g={} MHz, D_e={} MHz, P={}, Gamma={}, Gamma_e={}, eta_g={}, eta_e={}, gamma_g={}, gamma_e={}",
                     cfg.center.d_g_MHz, cfg.center.d_e_MHz, cfg.rates.pump, cfg.rates.recomb,
                     cfg.rates.gamma_ms, cfg.rates.eta_g, cfg.rates.eta_e, cfg.rates.gamma_g,
                     cfg.rates.gamma_e);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spin-3/2 color-center kinetics and ODMR simulator", "spinquad"};
  app.set_version_flag("--version", SPINQUAD_VERSION);
  std::string config_path = "default";
  std::vector<std::string> sets;
  std::string out_flag;
  std::string format_flag;
  int jobs = 1;
  app.add_option("--config", config_path, "Config file, or 'default' for the built-in defaults");
  app.add_option("--set", sets, "Override a config value, key.path=value (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--out", out_flag, "Output directory (falls back to SPINQUAD_OUT, then output.dir)");
  app.add_option("--format", format_flag, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
  app.add_option("--jobs", jobs, "Worker threads for field sweeps")->check(CLI::PositiveNumber);

  const std::map<std::string, std::string> descriptions = {
      {"levels", "Energies, populations and brightness versus field"},
      {"spectrum", "ODMR spectrum at spectrum.field_mT"},
      {"map", "ODMR map over the field and frequency grids"},
      {"husimi", "Husimi maps of both steady-state density matrices"},
      {"multipoles", "Steady-state quadrupole and dipole versus field"},
      {"ratecheck", "Rate-equation closed forms (JSON report)"},
      {"extract", "Multipoles from measured ODMR peak areas"},
      {"validate", "Print the resolved configuration and warnings"},
  };
  for (const auto& [name, text] : descriptions) app.add_subcommand(name, text)->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  std::string stage = "config";
  RunConfig cfg;
  try {
    json resolved = resolve_config(config_path, sets);
    if (!format_flag.empty()) resolved["output"]["format"] = format_flag;
    if (!out_flag.empty()) {
      resolved["output"]["dir"] = out_flag;
    } else if (const char* env = std::getenv("SPINQUAD_OUT"); env && *env) {
      resolved["output"]["dir"] = env;
    }
    cfg = parse_config(resolved);

    Context ctx{subcommand, resolved, cfg, cfg.output.dir, jobs, out, {}, config_warnings(cfg)};
    if (subcommand == "validate") return cmd_validate(ctx);

    stage = subcommand;
    std::filesystem::create_directories(ctx.out_dir);
    if (subcommand == "levels") {
      cmd_levels(ctx);
    } else if (subcommand == "spectrum") {
      cmd_spectrum(ctx);
    } else if (subcommand == "map") {
      cmd_map(ctx);
    } else if (subcommand == "husimi") {
      cmd_husimi(ctx);
    } else if (subcommand == "multipoles") {
      cmd_multipoles(ctx);
    } else if (subcommand == "ratecheck") {
      cmd_ratecheck(ctx);
    } else if (subcommand == "extract") {
      cmd_extract(ctx);
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json manifest = {
        {"version", SPINQUAD_VERSION},
        {"subcommand", subcommand},
        {"config", resolved},
        {"constants", {{"bohr_MHz_per_mT", kBohrMHzPerMT}, {"perturbative_limit", kPerturbativeLimit}}},
        {"jobs", jobs},
        {"outputs", ctx.outputs},
        {"warnings", ctx.warnings},
        {"wall_time_s", wall},
    };
    std::ofstream mf(ctx.out_dir / "manifest.json");
    mf << manifest.dump(2) << '\n';
    if (!mf) throw Error("cannot write " + (ctx.out_dir / "manifest.json").string());
    for (const std::string& w : ctx.warnings) err << "spinquad: warning: " << w << '\n';
    for (const std::string& f : ctx.outputs) out << (ctx.out_dir / f).string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "spinquad: config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "spinquad " << stage << ": numerical failure: " << e.what() << " [" << parameter_summary(cfg)
        << "]\n";
    return 3;
  } catch (const std::exception& e) {
    err << "spinquad " << stage << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace spinquad::cli
