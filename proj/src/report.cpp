// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "apd/error.hpp"
#include "apd/svg.hpp"

namespace apd {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

namespace {

const std::set<std::string> kOutputs = {"hist2d",     "slices",     "noise_factor",
                                        "mixture",    "resolution", "mean_trace"};

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  ~CsvWriter() = default;
  void close() {
    out_.close();
    if (!out_) throw Error("failed writing " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

std::vector<double> time_list(const json& v, const std::string& field) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(field, "expected numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (it.key() != "start" && it.key() != "stop" && it.key() != "step") {
        throw ConfigError(field + "." + it.key(), "unknown key");
      }
      if (!it->is_number()) throw ConfigError(field + "." + it.key(), "expected a number");
    }
    const double start = v.value("start", 0.0), stop = v.value("stop", 0.6),
                 step = v.value("step", 0.01);
    if (!(step > 0.0) || !(stop >= start)) throw ConfigError(field, "need step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  throw ConfigError(field, "expected a list or {start, stop, step}");
}

double config_number(const json& cfg, const char* section, const char* key, double fallback) {
  if (cfg.is_object() && cfg.contains(section) && cfg[section].is_object() &&
      cfg[section].contains(key) && cfg[section][key].is_number()) {
    return cfg[section][key].get<double>();
  }
  return fallback;
}

std::string ps_label(double t) { return format_number(std::round(t * 1000.0)) + " ps"; }

}  // namespace

AnalysisSpec analysis_spec_from_json(const json& j) {
  AnalysisSpec s;
  if (j.is_null()) return s;
  if (!j.is_object()) throw ConfigError("analysis", "expected a table");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = it.key();
    const std::string field = "analysis." + key;
    const json& v = it.value();
    if (key == "outputs") {
      if (!v.is_array()) throw ConfigError(field, "expected a list");
      for (const auto& o : v) {
        if (!o.is_string() || !kOutputs.count(o.get<std::string>())) {
          throw ConfigError(field, "unknown output " + o.dump());
        }
        s.outputs.insert(o.get<std::string>());
      }
    } else if (key == "times") {
      s.times = time_list(v, field);
    } else if (key == "slice_times") {
      s.slice_times = time_list(v, field);
    } else if (key == "current_bins") {
      if (!v.is_object()) throw ConfigError(field, "expected a table");
      for (auto b = v.begin(); b != v.end(); ++b) {
        if (b.key() == "lo" && b->is_number()) {
          s.bins.lo = b->get<double>();
        } else if (b.key() == "hi" && b->is_number()) {
          s.bins.hi = b->get<double>();
        } else if (b.key() == "count" && b->is_number_integer() && b->get<long long>() > 0) {
          s.bins.count = b->get<std::size_t>();
        } else {
          throw ConfigError(field + "." + b.key(), "unknown key or bad value");
        }
      }
      s.bins.edges();
    } else if (key == "selection") {
      if (!v.is_string()) throw ConfigError(field, "expected a string");
      if (v.get<std::string>() != "auto") s.selection = band_selection_from_string(v.get<std::string>());
    } else if (key == "mixture_weights") {
      if (!v.is_string()) throw ConfigError(field, "expected a string");
      s.weights = mixture_weights_from_string(v.get<std::string>());
    } else if (key == "k_max") {
      if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > 6) {
        throw ConfigError(field, "must be an integer in [1, 6]");
      }
      s.k_max = v.get<int>();
    } else {
      throw ConfigError(field, "unknown key");
    }
  }
  return s;
}

json analyze_bundle(const TraceBundle& bundle, const AnalysisSpec& spec_in, const fs::path& out,
                    bool figures) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error("cannot create " + out.string() + ": " + ec.message());

  AnalysisSpec spec = spec_in;
  const auto& m = bundle.manifest;
  const NoiseParams noise{config_number(m.config, "noise", "sigma_electrical",
                                        NoiseParams{}.sigma_electrical)};
  double mu = config_number(m.config, "source", "mu_detected", -1.0);
  if (mu < 0.0 && !m.photon_counts.empty()) {
    double sum = 0.0;
    for (auto c : m.photon_counts) sum += c;
    mu = sum / static_cast<double>(m.photon_counts.size());
  }
  const BandSelection selection =
      spec.selection.value_or(mu < 0.5 ? BandSelection::by_threshold : BandSelection::by_fit);

  std::size_t triggered = 0;
  for (auto c : m.photon_counts) triggered += c > 0;

  json report;
  report["manifest"] = {
      {"schema_version", m.schema_version},
      {"generator", m.generator},
      {"created_utc", m.created_utc},
      {"master_seed", m.master_seed},
      {"gate_count", m.gate_count},
      {"trigger_fraction",
       m.photon_counts.empty() ? 0.0 : static_cast<double>(triggered) / m.photon_counts.size()},
      {"config", m.config},
  };
  json warnings = json::array();
  json files = json::array();
  auto wants = [&](const char* name) { return spec.outputs.count(name) > 0; };

  if (!spec.outputs.empty() && bundle.traces.empty()) {
    warnings.push_back("bundle has no gates; nothing to analyze");
    spec.outputs.clear();
  }
  if (spec.times.empty()) {
    for (int i = 0; i <= 60; ++i) spec.times.push_back(0.01 * i);
  }
  if (spec.slice_times.empty()) spec.slice_times = {0.19, 0.34, 0.6};

  std::vector<svg::Panel> slice_panels;

  if (wants("mean_trace")) {
    const auto& first = bundle.traces.front();
    const std::size_t n = first.samples.size();
    std::vector<std::vector<double>> sums(4, std::vector<double>(n, 0.0));
    std::vector<std::size_t> counts(4, 0);
    for (std::size_t g = 0; g < bundle.traces.size(); ++g) {
      const auto photons = m.photon_counts[g];
      if (photons == 0) continue;
      for (std::size_t group : {std::size_t{0}, std::size_t{photons}}) {
        if (group > 3) continue;
        ++counts[group];
        for (std::size_t i = 0; i < n; ++i) sums[group][i] += bundle.traces[g].samples[i];
      }
    }
    CsvWriter csv(out / "mean_trace.csv",
                  {"t_ns", "mean_triggered_mA", "mean_1photon_mA", "mean_2photon_mA", "mean_3photon_mA"});
    std::vector<std::vector<double>> means(4, std::vector<double>(n, NAN));
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) {
      times[i] = first.time(i);
      std::vector<std::string> row{format_number(times[i])};
      for (std::size_t grp = 0; grp < 4; ++grp) {
        if (counts[grp]) means[grp][i] = sums[grp][i] / static_cast<double>(counts[grp]);
        row.push_back(format_number(means[grp][i]));
      }
      csv.row(row);
    }
    csv.close();
    files.push_back("mean_trace.csv");
    report["mean_trace"] = {{"gates", {{"triggered", counts[0]}, {"n1", counts[1]},
                                       {"n2", counts[2]}, {"n3", counts[3]}}}};
    if (counts[0] == 0) warnings.push_back("mean_trace: no triggered gates");
    if (figures && counts[0] > 0) {
      const double i_sat = config_number(m.config, "device", "i_sat", 25.0);
      svg::Panel p("Avalanche trace", "time delay (ns)", "current (mA)");
      int shown = 0;
      for (std::size_t g = 0; g < bundle.traces.size() && shown < 5; ++g) {
        if (m.photon_counts[g] != 1) continue;
        const auto& s = bundle.traces[g].samples;
        p.line(times, std::vector<double>(s.begin(), s.end()), "#bbbbbb", 0.8);
        ++shown;
      }
      p.line(times, means[0], "black", 2.0, "mean, triggered");
      p.hline(i_sat, "red");
      p.hline(0.8 * i_sat, "orange");
      svg::write_figure(out / "fig1d_trace.svg", {p});
      files.push_back("fig1d_trace.svg");
    }
  }

  if (wants("hist2d")) {
    const auto hist = histogram2d(bundle, spec.times, spec.bins);
    CsvWriter csv(out / "hist2d.csv", {"t_ns", "current_lo_mA", "current_hi_mA", "count"});
    for (const auto& h : hist) {
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        csv.row({format_number(h.t), format_number(h.edges[b]), format_number(h.edges[b + 1]),
                 std::to_string(h.counts[b])});
      }
    }
    csv.close();
    files.push_back("hist2d.csv");
    if (figures && hist.size() > 1) {
      std::vector<double> t_edges;
      for (std::size_t i = 0; i < hist.size(); ++i) {
        const double half = i + 1 < hist.size() ? 0.5 * (hist[i + 1].t - hist[i].t)
                                                : 0.5 * (hist[i].t - hist[i - 1].t);
        if (i == 0) t_edges.push_back(hist[i].t - half);
        t_edges.push_back(hist[i].t + half);
      }
      std::vector<std::vector<double>> grid;
      for (const auto& h : hist) grid.emplace_back(h.counts.begin(), h.counts.end());
      svg::Panel p("Current distribution vs time (log colour)", "time delay (ns)", "current (mA)");
      p.heatmap(t_edges, hist.front().edges, grid);
      p.set_x_range(t_edges.front(), t_edges.back());
      p.set_y_range(spec.bins.lo, spec.bins.hi);
      svg::write_figure(out / "fig2a_hist2d.svg", {p});
      files.push_back("fig2a_hist2d.svg");
    }
  }

  if (wants("slices")) {
    const auto hist = histogram2d(bundle, spec.slice_times, spec.bins);
    CsvWriter csv(out / "slices.csv",
                  {"t_ns", "current_lo_mA", "current_hi_mA", "count", "fraction"});
    std::vector<svg::Panel> panels;
    for (const auto& h : hist) {
      std::vector<double> frac;
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        frac.push_back(static_cast<double>(h.counts[b]) / static_cast<double>(h.n_gates));
        csv.row({format_number(h.t), format_number(h.edges[b]), format_number(h.edges[b + 1]),
                 std::to_string(h.counts[b]), format_number(frac.back())});
      }
      // Each slice is normalized to its own triggered mass so weak bands stay visible.
      double trig = 0.0;
      for (std::size_t b = 0; b < frac.size(); ++b) {
        if (h.edges[b] > 5.0 * noise.sigma_electrical) trig += frac[b];
      }
      std::vector<double> shown = frac;
      if (trig > 0.0) {
        for (auto& f : shown) f = std::min(f / trig, 1.0);
      }
      svg::Panel p("Slice at " + ps_label(h.t), "current (mA)", "fraction of triggered gates");
      p.steps(h.edges, shown, "#1f5fbf");
      p.set_y_range(0.0, std::max(1e-6, 1.1 * *std::max_element(
          shown.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(shown.size() - 1,
              static_cast<std::size_t>((5.0 * noise.sigma_electrical - spec.bins.lo) /
                                       ((spec.bins.hi - spec.bins.lo) / spec.bins.count)) + 1)),
          shown.end())));
      p.note("0-photon peak clipped; per-slice normalization");
      panels.push_back(std::move(p));
    }
    csv.close();
    files.push_back("slices.csv");
    if (figures && !panels.empty()) {
      svg::write_figure(out / "fig2b_slice.svg", {panels[std::min<std::size_t>(1, panels.size() - 1)]});
      svg::write_figure(out / "fig4_slices.svg", panels, 3, 420, 300);
      files.push_back("fig2b_slice.svg");
      files.push_back("fig4_slices.svg");
    }
  }

  if (wants("noise_factor")) {
    NoiseFactorOptions opt;
    opt.noise = noise;
    opt.k_max = spec.k_max;
    NoiseFactorSeries series;
    try {
      series = noise_factor_series(bundle, spec.times, selection, opt);
    } catch (const InsufficientSamples& e) {
      warnings.push_back(std::string("noise_factor: ") + e.what());
    }
    CsvWriter csv(out / "noise_factor.csv", {"t_ns", "noise_factor", "std_error", "n_selected"});
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      csv.row({format_number(series.times[i]), format_number(series.values[i]),
               format_number(series.std_errors[i]), std::to_string(series.counts[i])});
    }
    csv.close();
    files.push_back("noise_factor.csv");
    if (!series.omitted.empty()) {
      warnings.push_back("noise_factor: " + std::to_string(series.omitted.size()) +
                         " time points omitted (fewer than 100 band-1 samples)");
    }
    report["noise_factor"] = {{"selection", to_string(selection)},
                              {"times", series.times},
                              {"values", series.values},
                              {"std_errors", series.std_errors},
                              {"omitted", series.omitted}};
    if (figures && !series.times.empty()) {
      svg::Panel p("Time-dependent noise factor (band 1)", "time delay (ns)", "noise factor");
      p.error_bars(series.times, series.values, series.std_errors, "#888888");
      p.markers(series.times, series.values, "#c0392b");
      p.set_y_range(0.95, 1.35);
      p.hline(1.0, "black");
      svg::write_figure(out / "fig2c_noise_factor.svg", {p});
      files.push_back("fig2c_noise_factor.svg");
    }
  }

  if (wants("mixture") || wants("resolution")) {
    json fits = json::array();
    std::vector<svg::Panel> panels;
    std::unique_ptr<CsvWriter> mix_csv, res_csv;
    if (wants("mixture")) {
      mix_csv = std::make_unique<CsvWriter>(
          out / "mixture.csv",
          std::vector<std::string>{"t_ns", "k", "weight", "mean_mA", "sigma_mA", "fwhm_mA",
                                   "accuracy"});
    }
    if (wants("resolution")) {
      res_csv = std::make_unique<CsvWriter>(
          out / "resolution.csv",
          std::vector<std::string>{"t_ns", "k", "k_next", "separation_mA", "misclassification",
                                   "flux_estimate"});
    }
    for (double t : spec.slice_times) {
      const auto samples = slice_samples(bundle, t);
      MixtureFit fit;
      try {
        MixtureOptions mo;
        mo.weights = spec.weights;
        fit = fit_mixture(samples, spec.k_max, noise, mo);
      } catch (const Error& e) {
        warnings.push_back("mixture at " + ps_label(t) + ": " + e.what());
        continue;
      }
      const std::size_t K = fit.components.size();
      std::vector<std::size_t> correct(K, 0), total(K, 0);
      const bool truth = m.photon_counts.size() == samples.size();
      if (truth) {
        for (std::size_t g = 0; g < samples.size(); ++g) {
          const std::size_t k = std::min<std::size_t>(m.photon_counts[g], K - 1);
          ++total[k];
          correct[k] += static_cast<std::size_t>(classify_photon_number(samples[g], fit)) == k;
        }
      }
      json entry = {{"t", t}, {"log_likelihood", fit.log_likelihood}, {"iterations", fit.iterations}};
      json comps = json::array();
      for (std::size_t k = 0; k < K; ++k) {
        const auto& c = fit.components[k];
        const double acc = total[k] ? static_cast<double>(correct[k]) / total[k] : NAN;
        comps.push_back({{"k", k}, {"weight", c.weight}, {"mean", c.mean}, {"sigma", c.sigma},
                         {"accuracy", total[k] ? json(acc) : json(nullptr)},
                         {"true_count", total[k]}});
        if (mix_csv) {
          mix_csv->row({format_number(t), std::to_string(k), format_number(c.weight),
                        format_number(c.mean), format_number(c.sigma),
                        format_number(kFwhmPerSigma * c.sigma), format_number(acc)});
        }
      }
      entry["components"] = comps;
      if (wants("resolution")) {
        try {
          const auto r = resolution_report(fit);
          entry["resolution"] = {{"separations", r.separations},
                                 {"widths_fwhm", r.widths_fwhm},
                                 {"misclassification", r.misclassification},
                                 {"flux_estimate", r.flux_estimate}};
          for (std::size_t k = 0; k < r.separations.size(); ++k) {
            res_csv->row({format_number(t), std::to_string(k), std::to_string(k + 1),
                          format_number(r.separations[k]), format_number(r.misclassification[k]),
                          format_number(r.flux_estimate)});
          }
        } catch (const Error& e) {
          warnings.push_back("resolution at " + ps_label(t) + ": " + e.what());
        }
      }
      fits.push_back(entry);

      if (figures) {
        // Histogram of the slice with the fitted mixture density overlaid.
        const auto hist = histogram2d(bundle, std::vector<double>{t}, spec.bins).front();
        const double width = (spec.bins.hi - spec.bins.lo) / static_cast<double>(spec.bins.count);
        std::vector<double> density;
        for (auto c : hist.counts) {
          density.push_back(static_cast<double>(c) / (static_cast<double>(hist.n_gates) * width));
        }
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i <= 600; ++i) {
          const double x = spec.bins.lo + (spec.bins.hi - spec.bins.lo) * i / 600.0;
          double y = 0.0;
          for (const auto& c : fit.components) {
            if (c.weight <= 0.0) continue;
            const double z = (x - c.mean) / c.sigma;
            y += c.weight * std::exp(-0.5 * z * z) / (c.sigma * std::sqrt(2.0 * std::numbers::pi));
          }
          xs.push_back(x);
          ys.push_back(y);
        }
        double peak = 0.0;
        for (std::size_t b = 0; b < density.size(); ++b) {
          if (hist.edges[b] > 5.0 * noise.sigma_electrical) peak = std::max(peak, density[b]);
        }
        svg::Panel p("Photon-number bands at " + ps_label(t), "current (mA)", "density (1/mA)");
        p.steps(hist.edges, density, "#1f5fbf", "data");
        p.line(xs, ys, "#c0392b", 1.5, "mixture fit");
        p.set_y_range(0.0, peak > 0 ? 1.3 * peak : 1.0);
        p.note("0-photon peak clipped");
        panels.push_back(std::move(p));
      }
    }
    if (mix_csv) {
      mix_csv->close();
      files.push_back("mixture.csv");
    }
    if (res_csv) {
      res_csv->close();
      files.push_back("resolution.csv");
    }
    report["mixture"] = fits;
    report["mixture_weights"] = to_string(spec.weights);
    if (figures && !panels.empty()) {
      svg::write_figure(out / "fig3_mixture.svg", panels, 3, 420, 300);
      files.push_back("fig3_mixture.svg");
    }
  }

  report["outputs"] = files;
  report["warnings"] = warnings;
  std::ofstream rep(out / "report.json");
  rep << report.dump(2) << '\n';
  if (!rep) throw Error("failed writing " + (out / "report.json").string());
  return report;
}

ScanSpec scan_spec_from_json(const json& j) {
  ScanSpec s;
  if (j.is_null()) return s;
  if (!j.is_object()) throw ConfigError("scan", "expected a table");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string field = "scan." + it.key();
    if (it.key() == "image_center") {
      if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
        throw ConfigError(field, "expected a list of two numbers");
      }
      s.image_center = {(*it)[0].get<double>(), (*it)[1].get<double>()};
      continue;
    }
    if (!it->is_number()) throw ConfigError(field, "expected a number");
    const double v = it->get<double>();
    if (it.key() == "image_half_width") s.image_half_width = v;
    else if (it.key() == "image_step") s.image_step = v;
    else if (it.key() == "edge_center") s.edge_center = v;
    else if (it.key() == "edge_half_width") s.edge_half_width = v;
    else if (it.key() == "edge_step") s.edge_step = v;
    else throw ConfigError(field, "unknown key");
  }
  if (!(s.image_step > 0.0) || !(s.image_half_width > 0.0)) {
    throw ConfigError("scan.image_step", "image step and half width must be positive");
  }
  if (!(s.edge_step > 0.0) || !(s.edge_half_width > 0.0)) {
    throw ConfigError("scan.edge_step", "edge step and half width must be positive");
  }
  return s;
}

std::vector<ScanPoint> edge_scan(const SimConfig& config, const ScanSpec& spec) {
  std::vector<Point> line;
  const auto n = static_cast<std::size_t>(std::floor(2.0 * spec.edge_half_width / spec.edge_step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    line.push_back({spec.edge_center - spec.edge_half_width + static_cast<double>(i) * spec.edge_step, 0.0});
  }
  const auto values = scan_photocurrent_image(line, config.device.active_diameter, config.source);
  std::vector<ScanPoint> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({line[i].x, values[i]});
  return out;
}

json run_scan(const SimConfig& config, const ScanSpec& spec, const fs::path& out, bool figures) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error("cannot create " + out.string() + ": " + ec.message());

  const auto n = static_cast<std::size_t>(std::floor(2.0 * spec.image_half_width / spec.image_step + 1e-9)) + 1;
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i) axis[i] = -spec.image_half_width + static_cast<double>(i) * spec.image_step;
  std::vector<Point> grid;
  for (double y : axis) {
    for (double x : axis) grid.push_back({spec.image_center.x + x, spec.image_center.y + y});
  }
  const auto image = scan_photocurrent_image(grid, config.device.active_diameter, config.source);
  {
    CsvWriter csv(out / "scan_image.csv", {"x_um", "y_um", "photocurrent"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
      csv.row({format_number(grid[i].x), format_number(grid[i].y), format_number(image[i])});
    }
    csv.close();
  }

  const auto scan = edge_scan(config, spec);
  {
    CsvWriter csv(out / "edge_scan.csv", {"x_um", "photocurrent", "derivative_per_um"});
    for (std::size_t i = 0; i < scan.size(); ++i) {
      double d = NAN;
      if (i > 0 && i + 1 < scan.size()) {
        d = (scan[i + 1].value - scan[i - 1].value) / (scan[i + 1].x - scan[i - 1].x);
      }
      csv.row({format_number(scan[i].x), format_number(scan[i].value), format_number(d)});
    }
    csv.close();
  }

  json report = {{"configured_fwhm_um", config.source.spot_fwhm},
                 {"active_diameter_um", config.device.active_diameter},
                 {"image_points", grid.size()},
                 {"edge_points", scan.size()}};
  try {
    const auto est = estimate_spot_diameter(scan);
    report["spot"] = {{"fwhm_um", est.fwhm}, {"edge_um", est.center},
                      {"resolution_floor_um", est.resolution_floor}};
  } catch (const InvalidScan& e) {
    report["spot_error"] = e.what();
  }
  std::vector<std::string> files = {"scan_image.csv", "edge_scan.csv"};

  if (figures) {
    std::vector<double> edges;
    for (std::size_t i = 0; i <= n; ++i) edges.push_back(axis.front() - 0.5 * spec.image_step + i * spec.image_step);
    std::vector<double> x_edges = edges, y_edges = edges;
    for (auto& e : x_edges) e += spec.image_center.x;
    for (auto& e : y_edges) e += spec.image_center.y;
    std::vector<std::vector<double>> cells(n, std::vector<double>(n));
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) cells[ix][iy] = 100.0 * image[iy * n + ix];
    }
    svg::Panel img("Photocurrent vs spot position", "x (um)", "y (um)");
    img.heatmap(x_edges, y_edges, cells);
    img.set_x_range(x_edges.front(), x_edges.back());
    img.set_y_range(y_edges.front(), y_edges.back());
    svg::write_figure(out / "fig1b_scan_image.svg", {img}, 1, 420, 420);

    std::vector<double> xs, vs, ds, dx;
    for (std::size_t i = 0; i < scan.size(); ++i) {
      xs.push_back(scan[i].x);
      vs.push_back(scan[i].value);
      if (i > 0 && i + 1 < scan.size()) {
        dx.push_back(scan[i].x);
        ds.push_back(-(scan[i + 1].value - scan[i - 1].value) / (scan[i + 1].x - scan[i - 1].x));
      }
    }
    svg::Panel edge("Edge scan", "x (um)", "normalized photocurrent");
    edge.line(xs, vs, "#1f5fbf", 1.5);
    svg::Panel deriv("Photocurrent derivative", "x (um)", "-dI/dx (1/um)");
    deriv.line(dx, ds, "#c0392b", 1.5);
    if (report.contains("spot")) {
      deriv.note("FWHM " + format_number(std::round(report["spot"]["fwhm_um"].get<double>() * 1000) / 1000) + " um");
    }
    svg::write_figure(out / "fig1c_edge.svg", {edge, deriv}, 2, 420, 300);
    files.push_back("fig1b_scan_image.svg");
    files.push_back("fig1c_edge.svg");
  }
  report["outputs"] = files;
  std::ofstream rep(out / "scan.json");
  rep << report.dump(2) << '\n';
  if (!rep) throw Error("failed writing " + (out / "scan.json").string());
  return report;
}

}  // namespace apd
