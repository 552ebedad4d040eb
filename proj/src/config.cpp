// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <yaml-cpp/yaml.h>

#include "apd/error.hpp"

namespace apd {

using nlohmann::json;

OffspringModel default_offspring_model() {
  return OffspringModel::dead_space(18, 0.5961734018480616);
}

DeviceParams default_device() {
  DeviceParams d;
  d.current_per_carrier_scale = 0.08687809665763392;
  return d;
}

void SimConfig::validate() const {
  device.validate();
  source.validate();
  model.validate();
  noise.validate();
  if (n_gates < 1 || n_gates > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("n_gates", "must lie in [1, 2^32 - 1]");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be positive");
  if (!(source.arrival_time >= 0.0 && source.arrival_time < device.gate_width)) {
    throw ConfigError("source.arrival_time", "photons must arrive inside the gate");
  }
  const auto [lo, hi] = record_window;
  if (!(hi >= lo)) throw ConfigError("record_window", "end must not precede start");
  const RecordWindow w = gate_window();
  if (!(w.start >= 0.0 && w.end <= device.gate_width)) {
    throw ConfigError("record_window", "window shifted by source.arrival_time must lie within the gate");
  }
  if ((hi - lo) / dt + 1.0 > static_cast<double>(std::numeric_limits<std::uint32_t>::max())) {
    throw ConfigError("record_window", "too many samples per trace");
  }
}

RecordWindow SimConfig::gate_window() const noexcept {
  return {source.arrival_time + record_window.first, source.arrival_time + record_window.second};
}

std::string to_string(SaturationMode mode) {
  return mode == SaturationMode::local_density ? "local_density" : "global_feedback";
}

SaturationMode saturation_mode_from_string(const std::string& name) {
  if (name == "global_feedback") return SaturationMode::global_feedback;
  if (name == "local_density") return SaturationMode::local_density;
  throw ConfigError("saturation", "unknown saturation mode '" + name + "'");
}

json config_to_json(const SimConfig& c) {
  const auto& d = c.device;
  const auto& s = c.source;
  return json{
      {"n_gates", c.n_gates},
      {"master_seed", c.master_seed},
      {"dt", c.dt},
      {"record_window", {c.record_window.first, c.record_window.second}},
      {"saturation", to_string(c.saturation)},
      {"output", c.output},
      {"device",
       {{"v_breakdown", d.v_breakdown},
        {"v_dc", d.v_dc},
        {"v_pulse", d.v_pulse},
        {"gate_width", d.gate_width},
        {"rep_rate", d.rep_rate},
        {"r_series", d.r_series},
        {"r_feedback_total", d.r_feedback_total},
        {"i_sat", d.i_sat},
        {"active_diameter", d.active_diameter},
        {"v_lateral", d.v_lateral},
        {"temperature", d.temperature},
        {"current_per_carrier_scale", d.current_per_carrier_scale}}},
      {"source",
       {{"mu_detected", s.mu_detected},
        {"spot_fwhm", s.spot_fwhm},
        {"spot_center", {s.spot_center.x, s.spot_center.y}},
        {"arrival_time", s.arrival_time},
        {"arrival_jitter_sigma", s.arrival_jitter_sigma},
        {"wavelength", s.wavelength}}},
      {"model",
       {{"kind", to_string(c.model.kind)},
        {"p_ionize", c.model.p_ionize},
        {"dead_steps", c.model.dead_steps},
        {"p_post", c.model.p_post}}},
      {"noise", {{"sigma_electrical", c.noise.sigma_electrical}}},
  };
}

namespace {

// Reads the keys of one JSON object, remembering which were consumed so
// leftovers can be reported.
class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "config" : prefix_, "expected a table");
  }

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) throw ConfigError(path(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(path(key), "must be finite");
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
      const auto x = v->get<std::int64_t>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw ConfigError(path(key), "out of range");
      }
      out = static_cast<int>(x);
    }
  }

  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    if (const json* v = get(key)) {
      if (v->is_number_unsigned()) {
        out = v->get<std::uint64_t>();
      } else if (v->is_number_integer()) {
        throw ConfigError(path(key), "must be nonnegative");
      } else {
        throw ConfigError(path(key), "expected an integer");
      }
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw ConfigError(path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void pair(const std::string& key, double& a, double& b) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw ConfigError(path(key), "expected a list of two numbers");
      }
      a = (*v)[0].get<double>();
      b = (*v)[1].get<double>();
    }
  }

  const json* table(const std::string& key) {
    const json* v = get(key);
    if (v && !v->is_object()) throw ConfigError(path(key), "expected a table");
    return v;
  }

  void ignore(const std::string& key) { seen_.insert(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

}  // namespace

SimConfig config_from_json(const json& j) {
  SimConfig c;
  Reader top(j, "");
  top.unsigned_integer("n_gates", c.n_gates);
  top.unsigned_integer("master_seed", c.master_seed);
  top.number("dt", c.dt);
  top.pair("record_window", c.record_window.first, c.record_window.second);
  std::string mode = to_string(c.saturation);
  top.string("saturation", mode);
  c.saturation = saturation_mode_from_string(mode);
  top.string("output", c.output);
  for (const char* other : {"analysis", "scan", "name", "description"}) top.ignore(other);

  if (const json* t = top.table("device")) {
    Reader r(*t, "device");
    auto& d = c.device;
    r.number("v_breakdown", d.v_breakdown);
    r.number("v_dc", d.v_dc);
    r.number("v_pulse", d.v_pulse);
    r.number("gate_width", d.gate_width);
    r.number("rep_rate", d.rep_rate);
    r.number("r_series", d.r_series);
    r.number("r_feedback_total", d.r_feedback_total);
    r.number("i_sat", d.i_sat);
    r.number("active_diameter", d.active_diameter);
    r.number("v_lateral", d.v_lateral);
    r.number("temperature", d.temperature);
    r.number("current_per_carrier_scale", d.current_per_carrier_scale);
    r.finish();
  }
  if (const json* t = top.table("source")) {
    Reader r(*t, "source");
    auto& s = c.source;
    r.number("mu_detected", s.mu_detected);
    r.number("spot_fwhm", s.spot_fwhm);
    r.pair("spot_center", s.spot_center.x, s.spot_center.y);
    r.number("arrival_time", s.arrival_time);
    r.number("arrival_jitter_sigma", s.arrival_jitter_sigma);
    r.number("wavelength", s.wavelength);
    r.finish();
  }
  if (const json* t = top.table("model")) {
    Reader r(*t, "model");
    std::string kind = to_string(c.model.kind);
    r.string("kind", kind);
    c.model.kind = offspring_kind_from_string(kind);
    r.number("p_ionize", c.model.p_ionize);
    r.integer("dead_steps", c.model.dead_steps);
    r.number("p_post", c.model.p_post);
    r.finish();
  }
  if (const json* t = top.table("noise")) {
    Reader r(*t, "noise");
    r.number("sigma_electrical", c.noise.sigma_electrical);
    r.finish();
  }
  top.finish();
  c.validate();
  return c;
}

namespace {

json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;

  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  if (first != last && *first != '-') {
    std::uint64_t u = 0;
    auto [p, ec] = std::from_chars(first, last, u);
    if (ec == std::errc() && p == last) return u;
  } else if (first != last) {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(first, last, i);
    if (ec == std::errc() && p == last) return i;
  }
  double x = 0.0;
  auto [p, ec] = std::from_chars(first, last, x);
  if (ec == std::errc() && p == last) return x;
  if (s == ".inf" || s == ".Inf") return std::numeric_limits<double>::infinity();
  if (s == "-.inf" || s == "-.Inf") return -std::numeric_limits<double>::infinity();
  if (s == ".nan" || s == ".NaN") return std::numeric_limits<double>::quiet_NaN();
  return s;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

void emit(YAML::Emitter& out, const json& j) {
  switch (j.type()) {
    case json::value_t::object:
      out << YAML::BeginMap;
      for (auto it = j.begin(); it != j.end(); ++it) {
        out << YAML::Key << it.key() << YAML::Value;
        emit(out, it.value());
      }
      out << YAML::EndMap;
      break;
    case json::value_t::array: {
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
      out << (flat ? YAML::Flow : YAML::Block) << YAML::BeginSeq;
      for (const auto& v : j) emit(out, v);
      out << YAML::EndSeq;
      break;
    }
    case json::value_t::string:
      out << YAML::DoubleQuoted << j.get<std::string>();
      break;
    case json::value_t::boolean:
      out << (j.get<bool>() ? "true" : "false");
      break;
    case json::value_t::number_float: {
      // Shortest representation that reads back to the same double.
      char buf[64];
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), j.get<double>());
      std::string s(buf, p);
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      out << s;
      break;
    }
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
      out << j.dump();
      break;
    default:
      out << YAML::Null;
  }
}

}  // namespace

json load_yaml(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  try {
    return yaml_to_json(YAML::Load(in));
  } catch (const YAML::Exception& e) {
    throw ConfigError("config", path.string() + ": " + e.what());
  }
}

std::string to_yaml(const json& j) {
  YAML::Emitter out;
  emit(out, j);
  return std::string(out.c_str()) + "\n";
}

SimConfig load_config(const std::filesystem::path& path) { return config_from_json(load_yaml(path)); }

void save_config(const SimConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << to_yaml(config_to_json(config));
  if (!out) throw Error("failed writing " + path.string());
}

CalibrationTargets targets_from_json(const json& j) {
  CalibrationTargets t;
  Reader top(j, "targets");
  if (const json* a = top.get("anchors")) {
    if (!a->is_array()) throw ConfigError("targets.anchors", "expected a list");
    for (std::size_t i = 0; i < a->size(); ++i) {
      Reader r((*a)[i], "targets.anchors[" + std::to_string(i) + "]");
      GrowthAnchor g;
      r.number("t", g.t);
      r.number("current", g.current);
      r.finish();
      t.anchors.push_back(g);
    }
  }
  if (const json* p = top.get("plateau")) {
    if (p->is_number()) {
      t.plateau = p->get<double>();
    } else {
      Reader r(*p, "targets.plateau");
      r.number("value", t.plateau);
      if (r.get("window")) {
        double lo = 0.0, hi = 0.0;
        r.pair("window", lo, hi);
        t.plateau_window = std::pair{lo, hi};
      }
      if (const json* n = r.get("sigma_electrical")) {
        if (!n->is_number()) throw ConfigError("targets.plateau.sigma_electrical", "expected a number");
        t.noise = NoiseParams{n->get<double>()};
      }
      r.finish();
    }
  }
  if (const json* w = top.get("width")) {
    Reader r(*w, "targets.width");
    WidthTarget target;
    r.number("t", target.t);
    r.number("fwhm", target.fwhm);
    r.finish();
    t.width = target;
  }
  top.ignore("tolerance");
  top.ignore("search");
  top.finish();
  t.validate();
  return t;
}

double targets_tolerance(const json& j) {
  if (!j.is_object() || !j.contains("tolerance")) return 0.05;
  if (!j["tolerance"].is_number()) throw ConfigError("targets.tolerance", "expected a number");
  return j["tolerance"].get<double>();
}

}  // namespace apd
