// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

// apdsim: batch runner for simulation, analysis, calibration and scans.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include "apd/acquisition.hpp"
#include "apd/calibration.hpp"
#include "apd/config.hpp"
#include "apd/error.hpp"
#include "apd/report.hpp"
#include "apd/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kCorrupt = 4, kInfeasible = 5 };

struct Options {
  std::string config;
  std::string out;
  std::string targets;
  std::string bundle;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  bool figures = false;
};

json read_config_document(const std::string& path) {
  if (path.empty()) return json::object();
  if (!fs::exists(path)) throw apd::Error("config file not found: " + path);
  return apd::load_yaml(path);
}

apd::SimConfig build_config(const json& doc, const Options& opt) {
  json sim = doc;
  if (opt.seed) sim["master_seed"] = *opt.seed;
  return apd::config_from_json(sim);
}

unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_simulate(const Options& opt) {
  const auto config = build_config(read_config_document(opt.config), opt);
  const fs::path out = opt.out.empty() ? fs::path(config.output) : fs::path(opt.out);
  const auto start = std::chrono::steady_clock::now();
  const auto bundle = apd::run_simulation(config, worker_count(opt.workers));
  try {
    apd::write_bundle(bundle, out);
  } catch (const apd::BundleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("gates: %zu\ntrigger fraction: %.4f\nelapsed: %.2f s\nbundle: %s\n",
              bundle.traces.size(), apd::trigger_fraction(bundle), elapsed, out.c_str());
  return kOk;
}

int cmd_analyze(const Options& opt) {
  apd::AnalysisSpec spec;
  if (opt.config.empty()) {
    spec.outputs = {"hist2d", "slices", "noise_factor", "mixture", "resolution", "mean_trace"};
  } else {
    const auto doc = read_config_document(opt.config);
    spec = apd::analysis_spec_from_json(doc.is_object() && doc.contains("analysis") ? doc["analysis"]
                                                                                  : json());
  }
  apd::TraceBundle bundle;
  try {
    bundle = apd::read_bundle(opt.bundle);
  } catch (const apd::BundleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == apd::BundleErrorKind::io ? kIo : kCorrupt;
  }
  const fs::path out = opt.out.empty() ? fs::path(opt.bundle) / "analysis" : fs::path(opt.out);
  const auto report = apd::analyze_bundle(bundle, spec, out, opt.figures);
  for (const auto& w : report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
  std::printf("report: %s\n", (out / "report.json").c_str());
  return kOk;
}

apd::CalibrationOptions search_options(const json& targets) {
  apd::CalibrationOptions o;
  if (!targets.is_object() || !targets.contains("search")) return o;
  const json& s = targets["search"];
  if (!s.is_object()) throw apd::ConfigError("targets.search", "expected a table");
  for (auto it = s.begin(); it != s.end(); ++it) {
    const std::string field = "targets.search." + it.key();
    if (!it->is_number()) throw apd::ConfigError(field, "expected a number");
    if (it.key() == "min_dead_steps") o.min_dead_steps = it->get<int>();
    else if (it.key() == "max_dead_steps") o.max_dead_steps = it->get<int>();
    else if (it.key() == "n_gates") o.n_gates = it->get<std::size_t>();
    else if (it.key() == "seed") o.seed = it->get<std::uint64_t>();
    else throw apd::ConfigError(field, "unknown key");
  }
  if (o.min_dead_steps < 0 || o.max_dead_steps < o.min_dead_steps) {
    throw apd::ConfigError("targets.search.max_dead_steps", "need 0 <= min_dead_steps <= max_dead_steps");
  }
  if (o.n_gates < 100) throw apd::ConfigError("targets.search.n_gates", "must be at least 100");
  return o;
}

void print_candidate(const apd::CalibrationCandidate& c, const apd::CalibrationTargets& targets) {
  std::cout << apd::describe(c, targets) << '\n';
}

int cmd_calibrate(const Options& opt) {
  const auto doc = read_config_document(opt.config);
  auto config = build_config(doc, opt);
  if (opt.targets.empty()) throw apd::ConfigError("targets", "--targets is required");
  if (!fs::exists(opt.targets)) throw apd::Error("targets file not found: " + opt.targets);
  const json tdoc = apd::load_yaml(opt.targets);
  const auto targets = apd::targets_from_json(tdoc);
  auto search = search_options(tdoc);
  search.dt = config.dt;
  try {
    const auto result = apd::calibrate_model(targets, config.device, apd::targets_tolerance(tdoc), search);
    print_candidate(result.best, targets);
    config.model = result.best.model;
    config.device.current_per_carrier_scale = result.best.current_per_carrier_scale;
    const fs::path out = opt.out.empty() ? fs::path("calibrated.yaml") : fs::path(opt.out);
    try {
      apd::save_config(config, out);
    } catch (const apd::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kIo;
    }
    std::printf("config: %s\n", out.c_str());
    return kOk;
  } catch (const apd::InfeasibleTargets& e) {
    std::cerr << "infeasible targets: " << e.what() << '\n';
    return kInfeasible;
  }
}

int cmd_scan(const Options& opt) {
  const auto doc = read_config_document(opt.config);
  const auto config = build_config(doc, opt);
  const auto spec =
      apd::scan_spec_from_json(doc.is_object() && doc.contains("scan") ? doc["scan"] : json());
  const fs::path out = opt.out.empty() ? fs::path("scan") : fs::path(opt.out);
  const auto report = apd::run_scan(config, spec, out, opt.figures);
  if (report.contains("spot")) {
    std::printf("spot fwhm: %.4f um (configured %.4f um)\n", report["spot"]["fwhm_um"].get<double>(),
                config.source.spot_fwhm);
  } else {
    std::printf("spot diameter estimation failed: %s\n",
                report["spot_error"].get<std::string>().c_str());
  }
  std::printf("scan: %s\n", out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator and analysis toolkit for gated avalanche photodiodes"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "YAML configuration file");
    sub->add_option("--out", opt.out, "output path");
    sub->add_option("--seed", seed, "override master_seed")->each([&](const std::string&) { opt.seed = seed; });
    sub->add_option("--workers", opt.workers, "worker threads (default: hardware concurrency)");
    sub->add_flag("--figures", opt.figures, "also write SVG figures");
  };

  auto* simulate = app.add_subcommand("simulate", "simulate gates and write a trace bundle");
  add_common(simulate);
  auto* analyze = app.add_subcommand("analyze", "analyze a trace bundle");
  add_common(analyze);
  analyze->add_option("bundle", opt.bundle, "bundle directory")->required();
  auto* calibrate = app.add_subcommand("calibrate", "fit the offspring model to targets");
  add_common(calibrate);
  calibrate->add_option("--targets", opt.targets, "targets file")->required();
  auto* scan = app.add_subcommand("scan", "photocurrent image and knife-edge scan");
  add_common(scan);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(opt);
    if (*analyze) return cmd_analyze(opt);
    if (*calibrate) return cmd_calibrate(opt);
    if (*scan) return cmd_scan(opt);
  } catch (const apd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const apd::BundleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == apd::BundleErrorKind::io ? kIo : kCorrupt;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const apd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
