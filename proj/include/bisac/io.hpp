#pragma once

// File formats: interleaved little-endian float32 I/Q with a JSON sidecar,
// CSV with stable formatting, and the canonical config hash.

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bisac/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "I/Q binary export assumes a little-endian host");

namespace bisac {

using json = nlohmann::json;

struct io_error : std::runtime_error {
  explicit io_error(const std::string& path, const std::string& what)
      : std::runtime_error(what + ": " + path) {}
};

/// FNV-1a 64-bit over the canonical (sorted-key, compact) JSON encoding.
inline std::uint64_t canonical_json_hash(const json& j) {
  const std::string dump = j.dump();  // nlohmann objects iterate sorted
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Deterministic float formatting for CSV (shortest round-trip-ish, fixed
/// precision so byte-identical reruns hold).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct IqSidecar {
  double sample_rate_hz = 0.0;
  std::uint64_t length = 0;
  int channel_id = 0;
  std::string config_hash;
};

inline void write_iq_binary(const std::filesystem::path& path, const cvec& samples,
                            const IqSidecar& meta) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error(path.string(), "cannot open for writing");
  std::vector<float> buf(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    buf[2 * i] = static_cast<float>(samples[i].real());
    buf[2 * i + 1] = static_cast<float>(samples[i].imag());
  }
  f.write(reinterpret_cast<const char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!f) throw io_error(path.string(), "write failed");

  json side;
  side["format"] = "interleaved-float32-le";
  side["sample_rate_hz"] = meta.sample_rate_hz;
  side["length"] = samples.size();
  side["channel_id"] = meta.channel_id;
  side["config_hash"] = meta.config_hash;
  std::ofstream s(path.string() + ".json");
  if (!s) throw io_error(path.string() + ".json", "cannot open for writing");
  s << side.dump(2) << "\n";
}

inline cvec read_iq_binary(const std::filesystem::path& path, IqSidecar* meta = nullptr) {
  std::ifstream s(path.string() + ".json");
  if (!s) throw io_error(path.string() + ".json", "missing sidecar");
  json side = json::parse(s);
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error(path.string(), "cannot open for reading");
  const std::uint64_t len = side.at("length").get<std::uint64_t>();
  std::vector<float> buf(len * 2);
  f.read(reinterpret_cast<char*>(buf.data()),
         static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!f) throw io_error(path.string(), "short read");
  cvec out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = cxd(buf[2 * i], buf[2 * i + 1]);
  if (meta) {
    meta->sample_rate_hz = side.at("sample_rate_hz").get<double>();
    meta->length = len;
    meta->channel_id = side.at("channel_id").get<int>();
    meta->config_hash = side.at("config_hash").get<std::string>();
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw io_error(path.string(), "cannot open for writing");
  f << content;
  if (!f) throw io_error(path.string(), "write failed");
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace bisac
