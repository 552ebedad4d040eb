// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/acquisition.hpp"

#include <array>
#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iterator>

#include "apd/sampling.hpp"

namespace apd {

void NoiseParams::validate() const {
  if (!(sigma_electrical >= 0.0)) {
    throw ConfigError("noise.sigma_electrical", "must be nonnegative");
  }
}

Trace add_electrical_noise(Trace trace, const NoiseParams& noise, RngStream& rng) {
  if (noise.sigma_electrical <= 0.0) return trace;
  for (float& s : trace.samples) {
    s = static_cast<float>(static_cast<double>(s) + draw_normal(0.0, noise.sigma_electrical, rng));
  }
  return trace;
}

namespace {

constexpr std::array<char, 4> kMagic{'A', 'P', 'D', 'T'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 8 + 8;

template <typename U>
void put_le(std::vector<char>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFFu));
  }
}

template <typename U>
U get_le(const char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return value;
}

}  // namespace

nlohmann::json manifest_to_json(const BundleManifest& m) {
  return {{"schema_version", m.schema_version},
          {"generator", m.generator},
          {"created_utc", m.created_utc},
          {"master_seed", m.master_seed},
          {"gate_count", m.gate_count},
          {"config", m.config},
          {"photon_counts", m.photon_counts}};
}

BundleManifest manifest_from_json(const nlohmann::json& j) {
  BundleManifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kManifestSchemaVersion) {
      throw BundleError(BundleErrorKind::manifest,
                        "unsupported manifest schema version " + std::to_string(m.schema_version));
    }
    m.generator = j.value("generator", "");
    m.created_utc = j.value("created_utc", "");
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.gate_count = j.at("gate_count").get<std::uint64_t>();
    m.config = j.value("config", nlohmann::json::object());
    m.photon_counts = j.at("photon_counts").get<std::vector<std::uint32_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw BundleError(BundleErrorKind::manifest, std::string("malformed manifest: ") + e.what());
  }
  if (m.photon_counts.size() != m.gate_count) {
    throw BundleError(BundleErrorKind::count_mismatch,
                      "manifest lists " + std::to_string(m.photon_counts.size()) +
                          " photon counts for " + std::to_string(m.gate_count) + " gates");
  }
  return m;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_bundle(const TraceBundle& bundle, const std::filesystem::path& dir) {
  const auto& m = bundle.manifest;
  if (m.gate_count != bundle.traces.size() || m.photon_counts.size() != bundle.traces.size()) {
    throw BundleError(BundleErrorKind::count_mismatch,
                      "manifest gate count does not match the number of traces");
  }
  const std::size_t samples = bundle.traces.empty() ? 0 : bundle.traces.front().samples.size();
  const double dt = bundle.traces.empty() ? 0.0 : bundle.traces.front().dt;
  const double t0 = bundle.traces.empty() ? 0.0 : bundle.traces.front().t0;
  for (const auto& tr : bundle.traces) {
    if (tr.samples.size() != samples || tr.dt != dt || tr.t0 != t0) {
      throw BundleError(BundleErrorKind::count_mismatch, "traces do not share one time grid");
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw BundleError(BundleErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<char> bytes;
  bytes.reserve(kHeaderBytes + bundle.traces.size() * samples * 4);
  for (char c : kMagic) bytes.push_back(c);
  put_le<std::uint32_t>(bytes, kBundleVersion);
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(bundle.traces.size()));
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(samples));
  put_le<std::uint64_t>(bytes, std::bit_cast<std::uint64_t>(dt));
  put_le<std::uint64_t>(bytes, std::bit_cast<std::uint64_t>(t0));
  for (const auto& tr : bundle.traces) {
    for (float s : tr.samples) put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(s));
  }

  {
    std::ofstream out(dir / "traces.bin", std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw BundleError(BundleErrorKind::io, "failed writing traces.bin in " + dir.string());
  }
  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    out << manifest_to_json(m).dump(2) << '\n';
    if (!out) throw BundleError(BundleErrorKind::io, "failed writing manifest.json in " + dir.string());
  }
}

TraceBundle read_bundle(const std::filesystem::path& dir) {
  TraceBundle bundle;
  {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw BundleError(BundleErrorKind::io, "cannot open " + (dir / "manifest.json").string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw BundleError(BundleErrorKind::manifest, std::string("manifest is not valid JSON: ") + e.what());
    }
    bundle.manifest = manifest_from_json(j);
  }

  std::ifstream in(dir / "traces.bin", std::ios::binary);
  if (!in) throw BundleError(BundleErrorKind::io, "cannot open " + (dir / "traces.bin").string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() >= 4 && !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw BundleError(BundleErrorKind::bad_magic, "traces.bin does not start with APDT");
  }
  if (bytes.size() < kHeaderBytes) {
    throw BundleError(BundleErrorKind::truncated, "traces.bin header is truncated");
  }
  const char* p = bytes.data();
  const auto version = get_le<std::uint32_t>(p + 4);
  if (version != kBundleVersion) {
    throw BundleError(BundleErrorKind::bad_version,
                      "unsupported traces.bin version " + std::to_string(version));
  }
  const auto gates = get_le<std::uint32_t>(p + 8);
  const auto samples = get_le<std::uint32_t>(p + 12);
  const double dt = std::bit_cast<double>(get_le<std::uint64_t>(p + 16));
  const double t0 = std::bit_cast<double>(get_le<std::uint64_t>(p + 24));

  const std::size_t payload = bytes.size() - kHeaderBytes;
  const std::size_t record = static_cast<std::size_t>(samples) * 4;
  std::size_t records = 0;
  if (record == 0) {
    if (payload != 0) throw BundleError(BundleErrorKind::truncated, "unexpected payload bytes");
    records = gates;
  } else {
    if (payload % record != 0) {
      throw BundleError(BundleErrorKind::truncated, "traces.bin payload ends mid-record");
    }
    records = payload / record;
  }
  if (records != gates) {
    throw BundleError(BundleErrorKind::count_mismatch,
                      "header announces " + std::to_string(gates) + " gates but payload holds " +
                          std::to_string(records));
  }
  if (gates != bundle.manifest.gate_count) {
    throw BundleError(BundleErrorKind::count_mismatch,
                      "manifest gate count " + std::to_string(bundle.manifest.gate_count) +
                          " differs from traces.bin count " + std::to_string(gates));
  }

  bundle.traces.resize(gates);
  const char* q = p + kHeaderBytes;
  for (auto& tr : bundle.traces) {
    tr.t0 = t0;
    tr.dt = dt;
    tr.samples.resize(samples);
    for (auto& s : tr.samples) {
      s = std::bit_cast<float>(get_le<std::uint32_t>(q));
      q += 4;
    }
  }
  return bundle;
}

}  // namespace apd
