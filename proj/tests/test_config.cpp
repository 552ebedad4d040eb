// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "apd/config.hpp"
#include "apd/error.hpp"
#include "apd/report.hpp"

using namespace apd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename F>
std::string config_error_field(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("apd_cfg_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("default configuration is valid") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.model.kind == OffspringKind::dead_space);
  CHECK(c.model.dead_steps == 18);
  CHECK(c.device.excess_bias() == doctest::Approx(3.5));
  CHECK(c.device.i_sat == doctest::Approx(25.0));
  const RecordWindow w = c.gate_window();
  CHECK(w.start == doctest::Approx(0.9));
  CHECK(w.end == doctest::Approx(4.0));
}

TEST_CASE("configuration survives a JSON and YAML round trip") {
  SimConfig c;
  c.n_gates = 1234;
  c.master_seed = 987654321987ULL;
  c.source.mu_detected = 2.14;
  c.source.spot_center = {1.5, -2.25};
  c.model = OffspringModel::dead_space(7, 0.123456789012345);
  c.device.current_per_carrier_scale = 0.08687809665763392;
  c.saturation = SaturationMode::local_density;
  c.record_window = {-0.05, 0.75};
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));

  const fs::path path = temp_file("roundtrip.yaml");
  save_config(c, path);
  const SimConfig r = load_config(path);
  fs::remove(path);
  CHECK(config_to_json(r) == config_to_json(c));
  CHECK(r.device.current_per_carrier_scale == c.device.current_per_carrier_scale);
  CHECK(r.model.p_post == c.model.p_post);
  CHECK(r.master_seed == c.master_seed);
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"fig1d_saturation.yaml", "fig2_single_photon.yaml", "fig3_number_resolution.yaml",
                           "fig4_slices.yaml"}) {
    CAPTURE(name);
    const json doc = load_yaml(fs::path(APDSIM_CONFIG_DIR) / name);
    const SimConfig c = config_from_json(doc);
    CHECK(c.model.dead_steps == default_offspring_model().dead_steps);
    CHECK(c.model.p_post == default_offspring_model().p_post);
    CHECK_NOTHROW(analysis_spec_from_json(doc.value("analysis", json())));
  }
  const json targets = load_yaml(fs::path(APDSIM_CONFIG_DIR) / "measured_targets.yaml");
  const CalibrationTargets t = targets_from_json(targets);
  CHECK(t.anchors.size() == 2);
  CHECK(t.width.has_value());
  CHECK(targets_tolerance(targets) == doctest::Approx(0.05));
}

TEST_CASE("unknown keys are rejected with their dotted path") {
  CHECK(config_error_field([] { config_from_json(json{{"n_gatez", 5}}); }) == "n_gatez");
  CHECK(config_error_field([] { config_from_json(json{{"device", {{"v_bd", 47.6}}}}); }) == "device.v_bd");
  CHECK(config_error_field([] { config_from_json(json{{"source", {{"mu", 1.0}}}}); }) == "source.mu");
  CHECK(config_error_field([] { config_from_json(json{{"model", {{"p", 0.5}}}}); }) == "model.p");
  // analysis and scan tables belong to other commands
  CHECK_NOTHROW(config_from_json(json{{"analysis", {{"k_max", 3}}}, {"scan", json::object()}}));
}

TEST_CASE("invalid values name the offending field") {
  CHECK(config_error_field([] { config_from_json(json{{"n_gates", 0}}); }) == "n_gates");
  CHECK(config_error_field([] { config_from_json(json{{"n_gates", -3}}); }) == "n_gates");
  CHECK(config_error_field([] { config_from_json(json{{"n_gates", "many"}}); }) == "n_gates");
  CHECK(config_error_field([] { config_from_json(json{{"dt", 0.0}}); }) == "dt");
  CHECK(config_error_field([] { config_from_json(json{{"device", {{"v_dc", 50.0}}}}); }) == "device.v_dc");
  CHECK(config_error_field([] { config_from_json(json{{"source", {{"mu_detected", -1.0}}}}); }) ==
        "source.mu_detected");
  CHECK(config_error_field([] { config_from_json(json{{"source", {{"spot_fwhm", 0.0}}}}); }) ==
        "source.spot_fwhm");
  CHECK(config_error_field([] { config_from_json(json{{"model", {{"p_post", 1.5}}}}); }).rfind("model.", 0) == 0);
  CHECK(config_error_field([] { config_from_json(json{{"model", {{"kind", "quantum"}}}}); }) == "model.kind");
  CHECK(config_error_field([] { config_from_json(json{{"saturation", "none"}}); }) == "saturation");
  CHECK(config_error_field([] { config_from_json(json{{"record_window", {-0.1, 9.0}}}); }) == "record_window");
  CHECK(config_error_field([] { config_from_json(json{{"noise", {{"sigma_electrical", -0.1}}}}); }) ==
        "noise.sigma_electrical");
  CHECK(config_error_field([] { config_from_json(json::array()); }) == "config");
}

TEST_CASE("malformed YAML is a config error") {
  const fs::path path = temp_file("bad.yaml");
  std::ofstream(path) << "n_gates: [1, 2\nsource: {";
  CHECK_THROWS_AS(load_yaml(path), ConfigError);
  fs::remove(path);
  CHECK_THROWS_AS(load_yaml(temp_file("missing.yaml")), ConfigError);
}

TEST_CASE("calibration targets parsing") {
  const json good = {{"anchors", {{{"t", 0.2}, {"current", 0.19}}, {{"t", 0.34}, {"current", 0.9}}}},
                     {"plateau", 1.07}};
  const CalibrationTargets t = targets_from_json(good);
  CHECK(t.plateau == doctest::Approx(1.07));
  CHECK_FALSE(t.width.has_value());

  json low = good;
  low["plateau"] = 0.9;
  CHECK(config_error_field([&] { targets_from_json(low); }) == "targets.plateau");
  json one = good;
  one["anchors"].erase(1);
  CHECK(config_error_field([&] { targets_from_json(one); }) == "targets.anchors");
  json unordered = good;
  unordered["anchors"][1]["t"] = 0.1;
  CHECK(config_error_field([&] { targets_from_json(unordered); }) == "targets.anchors");
  json extra = good;
  extra["anchors"][0]["sigma"] = 1.0;
  CHECK(config_error_field([&] { targets_from_json(extra); }) == "targets.anchors[0].sigma");
  json width = good;
  width["width"] = {{"t", 0.34}, {"fwhm", -0.42}};
  CHECK(config_error_field([&] { targets_from_json(width); }) == "targets.width");
}

TEST_CASE("analysis table parsing") {
  const AnalysisSpec empty = analysis_spec_from_json(json());
  CHECK(empty.outputs.empty());
  const AnalysisSpec s = analysis_spec_from_json(
      json{{"outputs", {"mixture", "noise_factor"}},
           {"times", {{"start", 0.0}, {"stop", 0.1}, {"step", 0.02}}},
           {"slice_times", {0.19, 0.34}},
           {"current_bins", {{"lo", -1.0}, {"hi", 8.0}, {"count", 90}}},
           {"selection", "by_truth"},
           {"mixture_weights", "free"},
           {"k_max", 5}});
  CHECK(s.outputs.size() == 2);
  CHECK(s.times.size() == 6);
  CHECK(s.times.back() == doctest::Approx(0.1));
  CHECK(s.slice_times.size() == 2);
  CHECK(s.bins.count == 90);
  CHECK(s.selection == BandSelection::by_truth);
  CHECK(s.weights == MixtureWeights::free);
  CHECK(s.k_max == 5);
  CHECK_FALSE(analysis_spec_from_json(json{{"selection", "auto"}}).selection.has_value());

  CHECK(config_error_field([] { analysis_spec_from_json(json{{"outputs", {"movie"}}}); }) == "analysis.outputs");
  CHECK(config_error_field([] { analysis_spec_from_json(json{{"k_max", 9}}); }) == "analysis.k_max");
  CHECK(config_error_field([] { analysis_spec_from_json(json{{"selection", "by_luck"}}); }) == "selection");
  CHECK(config_error_field([] { analysis_spec_from_json(json{{"bins", 3}}); }) == "analysis.bins");
  CHECK(config_error_field([] { analysis_spec_from_json(json{{"current_bins", {{"lo", 2.0}, {"hi", 1.0}}}}); }) ==
        "current_bins");
}
