#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "trimix/chain.hpp"

// File formats: JSON-lines event logs (header record + one event per line),
// CSV with schema_version comments and 17-significant-digit floats, and JSON
// run manifests carrying content digests of every output.

namespace trimix {

using json = nlohmann::ordered_json;

#ifndef TRIMIX_VERSION
#define TRIMIX_VERSION "0.1.0"
#endif

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), for manifest output digests.
// ---------------------------------------------------------------------------

class Sha256 {
 public:
  Sha256() { reset(); }

  void reset() {
    state_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
              0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    buffer_len_ = 0;
    total_bits_ = 0;
  }

  void update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    total_bits_ += static_cast<std::uint64_t>(len) * 8;
    while (len > 0) {
      const std::size_t take = std::min(len, static_cast<std::size_t>(64 - buffer_len_));
      std::memcpy(buffer_.data() + buffer_len_, p, take);
      buffer_len_ += take;
      p += take;
      len -= take;
      if (buffer_len_ == 64) {
        compress(buffer_.data());
        buffer_len_ = 0;
      }
    }
  }

  std::string hex_digest() {
    std::array<unsigned char, 64> pad{};
    pad[0] = 0x80;
    const std::uint64_t bits = total_bits_;
    std::size_t pad_len = (buffer_len_ < 56) ? (56 - buffer_len_) : (120 - buffer_len_);
    update(pad.data(), pad_len);
    unsigned char len_be[8];
    for (int i = 0; i < 8; ++i) len_be[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    total_bits_ -= (pad_len + 8) * 8;  // length bytes are not message bytes
    update(len_be, 8);

    static const char* hexc = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint32_t word : state_) {
      for (int shift = 28; shift >= 0; shift -= 4) out.push_back(hexc[(word >> shift) & 0xF]);
    }
    return out;
  }

 private:
  static std::uint32_t rotr(std::uint32_t x, int k) { return (x >> k) | (x << (32 - k)); }

  void compress(const unsigned char* block) {
    static constexpr std::uint32_t K[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
        0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
        0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
        0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
        0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
        0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
        0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
        0xc67178f2};
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
      w[i] = (static_cast<std::uint32_t>(block[4 * i]) << 24) |
             (static_cast<std::uint32_t>(block[4 * i + 1]) << 16) |
             (static_cast<std::uint32_t>(block[4 * i + 2]) << 8) |
             static_cast<std::uint32_t>(block[4 * i + 3]);
    }
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t temp1 = h + S1 + ch + K[i] + w[i];
      const std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t temp2 = S0 + maj;
      h = g;
      g = f;
      f = e;
      e = d + temp1;
      d = c;
      c = b;
      b = a;
      a = temp1 + temp2;
    }
    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
    state_[4] += e;
    state_[5] += f;
    state_[6] += g;
    state_[7] += h;
  }

  std::array<std::uint32_t, 8> state_{};
  std::array<unsigned char, 64> buffer_{};
  std::size_t buffer_len_{0};
  std::uint64_t total_bits_{0};
};

inline std::string sha256_hex(const std::string& data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex_digest();
}

inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for digest: " + path);
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.hex_digest();
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

// 17 significant digits round-trip doubles exactly
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns,
            int schema_version = 1)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open CSV for writing: " + path);
    out_ << "# schema_version=" << schema_version << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
    out_ << "\n";
    width_ = columns.size();
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::invalid_argument("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << cells[i] << (i + 1 < cells.size() ? "," : "");
    out_ << "\n";
  }

 private:
  std::ofstream out_;
  std::size_t width_{0};
};

// ---------------------------------------------------------------------------
// EventLog <-> JSON lines
// ---------------------------------------------------------------------------

inline json config_to_json(const ChainConfig& cfg) {
  json j;
  j["schema_version"] = 1;
  j["type"] = "header";
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  j["variant"] = variant_name(cfg.variant);
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.seed;
  j["stream"] = cfg.stream;
  if (!cfg.start_upper.empty()) j["start_upper"] = cfg.start_upper;
  return j;
}

inline ChainConfig config_from_json(const json& j) {
  ChainConfig cfg;
  cfg.n = j.at("n").get<int>();
  cfg.m = j.at("m").get<i64>();
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "discrete")
    cfg.variant = Variant::discrete;
  else if (variant == "continuous")
    cfg.variant = Variant::continuous;
  else
    throw std::runtime_error("unknown chain variant: " + variant);
  cfg.horizon = j.at("horizon").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.stream = j.value("stream", std::uint64_t{0});
  if (j.contains("start_upper")) cfg.start_upper = j.at("start_upper").get<std::vector<i64>>();
  cfg.validate();
  return cfg;
}

inline void write_event_log(std::ostream& out, const EventLog& log) {
  out << config_to_json(log.config).dump() << "\n";
  const bool discrete = log.config.variant == Variant::discrete;
  for (const Event& ev : log.events) {
    json j;
    if (discrete)
      j["step"] = static_cast<i64>(ev.time);
    else
      j["t"] = ev.time;
    j["row"] = ev.row;
    j["sign"] = ev.sign;
    out << j.dump() << "\n";
  }
}

inline void write_event_log_file(const std::string& path, const EventLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open event log for writing: " + path);
  write_event_log(out, log);
}

inline EventLog read_event_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("event log is empty");
  EventLog log;
  log.config = config_from_json(json::parse(line));
  const bool discrete = log.config.variant == Variant::discrete;
  double prev_time = -1.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    Event ev;
    ev.time = discrete ? static_cast<double>(j.at("step").get<i64>()) : j.at("t").get<double>();
    ev.row = j.at("row").get<int>();
    ev.sign = j.at("sign").get<int>();
    if (ev.row < 2 || ev.row > log.config.n) throw std::runtime_error("event row out of range");
    if (ev.sign < -1 || ev.sign > 1) throw std::runtime_error("event sign out of range");
    if (ev.sign == 0 && !discrete) throw std::runtime_error("hold event in a continuous log");
    if (ev.time <= prev_time) throw std::runtime_error("event times must be strictly increasing");
    prev_time = ev.time;
    log.events.push_back(ev);
  }
  return log;
}

inline EventLog read_event_log_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open event log: " + path);
  return read_event_log(in);
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

struct ManifestOutput {
  std::string path;  // relative to the manifest's directory
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed{0};
  int threads{1};
  std::string version{TRIMIX_VERSION};
  std::string started_at;
  std::string finished_at;
  std::vector<ManifestOutput> outputs;
};

inline json manifest_to_json(const RunManifest& m) {
  json j;
  j["schema_version"] = 1;
  j["tool"] = "trimix";
  j["version"] = m.version;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["outputs"] = json::array();
  for (const auto& out : m.outputs) j["outputs"].push_back({{"path", out.path}, {"sha256", out.sha256}});
  return j;
}

inline RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.version = j.value("version", "");
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.seed = j.value("seed", std::uint64_t{0});
  m.threads = j.value("threads", 1);
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  for (const auto& out : j.at("outputs")) {
    m.outputs.push_back({out.at("path").get<std::string>(), out.at("sha256").get<std::string>()});
  }
  return m;
}

inline void write_manifest_file(const std::string& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
  out << manifest_to_json(m).dump(2) << "\n";
}

inline RunManifest read_manifest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  json j;
  in >> j;
  return manifest_from_json(j);
}

}  // namespace trimix
