// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <nlohmann/json.hpp>

#include "apd/acquisition.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(APDSIM_EXE) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[512];
  while (std::fgets(buf, sizeof(buf), pipe)) r.out += buf;
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Workspace {
  fs::path dir;
  Workspace() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("apd_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string file(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

double value_after(const std::string& text, const std::string& label) {
  const auto pos = text.find(label);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + label.size()));
}

}  // namespace

TEST_CASE("cli simulate reports the trigger fraction") {
  Workspace ws;
  const auto cfg = ws.file("low.yaml",
                           "n_gates: 100000\nmaster_seed: 3\nrecord_window: [-0.05, 0.05]\n"
                           "source: {mu_detected: 0.05}\n");
  const auto r = run("simulate --config " + cfg + " --out " + ws.path("b") + " --workers 2");
  REQUIRE(r.status == 0);
  CHECK(value_after(r.out, "trigger fraction: ") == doctest::Approx(0.0488).epsilon(0.003 / 0.0488));
  CHECK(fs::exists(ws.path("b") + "/traces.bin"));
  CHECK(fs::exists(ws.path("b") + "/manifest.json"));
}

TEST_CASE("cli simulate is byte-identical across runs and worker counts") {
  Workspace ws;
  const auto cfg = ws.file("c.yaml", "n_gates: 300\nmaster_seed: 17\nsource: {mu_detected: 2.14}\n"
                                     "record_window: [-0.1, 0.8]\n");
  REQUIRE(run("simulate --config " + cfg + " --out " + ws.path("a") + " --workers 1").status == 0);
  REQUIRE(run("simulate --config " + cfg + " --out " + ws.path("b") + " --workers 1").status == 0);
  REQUIRE(run("simulate --config " + cfg + " --out " + ws.path("c") + " --workers 5").status == 0);
  const std::string a = slurp(ws.path("a") + "/traces.bin");
  CHECK(a.size() == 32 + 300 * 91 * 4);
  CHECK(a == slurp(ws.path("b") + "/traces.bin"));
  CHECK(a == slurp(ws.path("c") + "/traces.bin"));
  // a different seed gives a different bundle
  REQUIRE(run("simulate --config " + cfg + " --seed 18 --out " + ws.path("d")).status == 0);
  CHECK(a != slurp(ws.path("d") + "/traces.bin"));
}

TEST_CASE("cli single all-noise gate") {
  Workspace ws;
  const auto cfg = ws.file("one.yaml", "n_gates: 1\nsource: {mu_detected: 0.0}\n");
  REQUIRE(run("simulate --config " + cfg + " --out " + ws.path("b")).status == 0);
  const auto bundle = apd::read_bundle(ws.path("b"));
  REQUIRE(bundle.traces.size() == 1);
  CHECK(bundle.manifest.photon_counts.at(0) == 0);
  double max_abs = 0.0;
  for (float v : bundle.traces[0].samples) max_abs = std::max(max_abs, std::abs(static_cast<double>(v)));
  CHECK(max_abs > 0.0);
  CHECK(max_abs < 0.3);
}

TEST_CASE("cli exit codes") {
  Workspace ws;
  SUBCASE("bad config") {
    const auto cfg = ws.file("bad.yaml", "n_gates: 10\nsource: {mu_detected: -2}\n");
    CHECK(run("simulate --config " + cfg + " --out " + ws.path("b")).status == 2);
    const auto unknown = ws.file("unknown.yaml", "n_gatess: 10\n");
    CHECK(run("simulate --config " + unknown + " --out " + ws.path("b")).status == 2);
  }
  SUBCASE("missing bundle") {
    CHECK(run("analyze " + ws.path("nothing")).status == 3);
  }
  SUBCASE("corrupt bundle") {
    const auto cfg = ws.file("c.yaml", "n_gates: 20\nrecord_window: [-0.1, 0.2]\n");
    REQUIRE(run("simulate --config " + cfg + " --out " + ws.path("b")).status == 0);
    std::string bytes = slurp(ws.path("b") + "/traces.bin");
    bytes.resize(bytes.size() - 7);
    std::ofstream(ws.path("b") + "/traces.bin", std::ios::binary | std::ios::trunc) << bytes;
    CHECK(run("analyze " + ws.path("b")).status == 4);
  }
  SUBCASE("infeasible targets") {
    const auto targets = ws.file("t.yaml",
                                 "anchors:\n  - {t: 0.2, current: 0.19}\n  - {t: 0.34, current: 0.9}\n"
                                 "plateau: 3.0\nsearch: {min_dead_steps: 0, max_dead_steps: 5, n_gates: 500}\n");
    CHECK(run("calibrate --targets " + targets + " --out " + ws.path("cal.yaml")).status == 5);
    CHECK_FALSE(fs::exists(ws.path("cal.yaml")));
  }
  SUBCASE("invalid targets") {
    const auto targets = ws.file("t.yaml", "anchors:\n  - {t: 0.2, current: 0.19}\n  - {t: 0.34, current: 0.9}\n"
                                           "plateau: 0.9\n");
    CHECK(run("calibrate --targets " + targets).status == 2);
  }
}

TEST_CASE("cli calibrate writes a loadable config") {
  Workspace ws;
  const auto out = ws.path("cal.yaml");
  const auto r = run("calibrate --targets " + std::string(APDSIM_CONFIG_DIR) + "/measured_targets.yaml --out " + out);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("dead_steps=18") != std::string::npos);
  REQUIRE(fs::exists(out));
  CHECK(run("simulate --config " + out + " --seed 1 --out " + ws.path("b") + " --workers 1").status == 0);
}

TEST_CASE("cli analyze is repeatable and honours an empty analysis table") {
  Workspace ws;
  const auto cfg = ws.file("c.yaml", "n_gates: 3000\nmaster_seed: 5\nsource: {mu_detected: 2.14}\n"
                                     "record_window: [-0.1, 0.7]\n");
  REQUIRE(run("simulate --config " + cfg + " --out " + ws.path("b")).status == 0);
  const auto spec = ws.file("spec.yaml",
                            "analysis:\n  outputs: [hist2d, slices, noise_factor, mixture, resolution, mean_trace]\n"
                            "  times: {start: 0.2, stop: 0.4, step: 0.1}\n  slice_times: [0.19, 0.34]\n");
  const std::string analyze = "analyze " + ws.path("b") + " --config " + spec + " --figures --out ";
  REQUIRE(run(analyze + ws.path("a1")).status == 0);
  REQUIRE(run(analyze + ws.path("a2")).status == 0);
  for (const char* name : {"report.json", "mixture.csv", "noise_factor.csv", "hist2d.csv", "slices.csv",
                           "resolution.csv", "mean_trace.csv", "fig3_mixture.svg"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(ws.path("a1") + "/" + name));
    CHECK(slurp(ws.path("a1") + "/" + name) == slurp(ws.path("a2") + "/" + name));
  }
  const json report = json::parse(slurp(ws.path("a1") + "/report.json"));
  CHECK(report.contains("mixture"));

  const auto empty = ws.file("empty.yaml", "analysis: {}\n");
  REQUIRE(run("analyze " + ws.path("b") + " --config " + empty + " --out " + ws.path("e")).status == 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(ws.path("e"))) {
    CHECK(entry.path().filename() == "report.json");
    ++files;
  }
  CHECK(files == 1);
  const json echo = json::parse(slurp(ws.path("e") + "/report.json"));
  CHECK(echo["manifest"]["gate_count"] == 3000);
  CHECK(echo["manifest"]["master_seed"] == 5);
  CHECK_FALSE(echo.contains("mixture"));
  CHECK_FALSE(echo.contains("noise_factor"));
}

TEST_CASE("cli scan estimates the configured spot") {
  Workspace ws;
  const auto cfg = ws.file("s.yaml", "source: {spot_fwhm: 3.8}\n");
  const auto r = run("scan --config " + cfg + " --out " + ws.path("s") + " --figures");
  REQUIRE(r.status == 0);
  CHECK(value_after(r.out, "spot fwhm: ") == doctest::Approx(3.8).epsilon(0.05));
  CHECK(fs::exists(ws.path("s") + "/scan_image.csv"));
  CHECK(fs::exists(ws.path("s") + "/fig1c_edge.svg"));

  const auto outside = ws.file("o.yaml",
                               "scan: {image_center: [200.0, 200.0], image_half_width: 10.0, edge_center: 200.0}\n");
  const auto o = run("scan --config " + outside + " --out " + ws.path("o"));
  CHECK(o.status == 0);
  CHECK(o.out.find("estimation failed") != std::string::npos);
  const json report = json::parse(slurp(ws.path("o") + "/scan.json"));
  CHECK(report.contains("spot_error"));
}
