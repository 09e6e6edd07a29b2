#pragma once

// Shared numeric types, constants, deterministic RNG streams, and the
// error taxonomy used across the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bisac {

using cxd = std::complex<double>;
using cvec = std::vector<cxd>;
using dvec = std::vector<double>;

inline constexpr double kSpeedOfLight = 299792458.0;   // m/s, exact
inline constexpr double kBoltzmann = 1.380649e-23;     // J/K, exact (SI)
inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double db10(double power_ratio) { return 10.0 * std::log10(power_ratio); }
inline double db20(double amplitude_ratio) { return 20.0 * std::log10(amplitude_ratio); }
inline double undb10(double db) { return std::pow(10.0, db / 10.0); }
inline double undb20(double db) { return std::pow(10.0, db / 20.0); }

/// Floor used when a ratio underflows to zero in dB-domain reports.
inline constexpr double kDbClamp = -300.0;

inline double db10_clamped(double power_ratio) {
  if (!(power_ratio > 0.0)) return kDbClamp;
  return std::max(db10(power_ratio), kDbClamp);
}

inline double wrap_pm_pi(double angle) {
  angle = std::fmod(angle + kPi, kTwoPi);
  if (angle < 0.0) angle += kTwoPi;
  return angle - kPi;
}

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// ---------------------------------------------------------------------------
// Errors

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct capacity_error : std::runtime_error {
  std::size_t capacity_bits;
  std::size_t requested_bits;
  capacity_error(std::size_t capacity, std::size_t requested)
      : std::runtime_error("payload exceeds frame capacity of " + std::to_string(capacity) +
                           " bits (requested " + std::to_string(requested) + ")"),
        capacity_bits(capacity),
        requested_bits(requested) {}
};

struct calibration_error : std::runtime_error {
  int channel;
  int bin;
  calibration_error(int ch, int b, const std::string& what)
      : std::runtime_error(what + " (channel " + std::to_string(ch) + ", bin " +
                           std::to_string(b) + ")"),
        channel(ch),
        bin(b) {}
};

struct sync_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct model_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// All randomness flows through substreams derived from a master seed with
// splitmix64, so (seed, purpose path) -> identical draws on every platform.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Mixes a master seed with a purpose path ("stream coordinates") into an
/// independent substream seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = master ^ 0xA0761D6478BD642Full;
  (void)splitmix64(s);
  for (std::uint64_t p : path) {
    s ^= splitmix64(s) + p;
    (void)splitmix64(s);
  }
  return splitmix64(s);
}

/// xoshiro-free generator: splitmix64 is already a fine bit mixer and keeps
/// the draw sequence identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Decorrelate trivially related seeds.
    (void)splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (pair cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(kTwoPi * u2);
    have_cached_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  /// Circularly symmetric complex normal with total variance `var`.
  cxd cnormal(double var) {
    const double s = std::sqrt(var / 2.0);
    return {s * normal(), s * normal()};
  }

  /// Rayleigh draw parameterized by its standard deviation (not scale).
  /// std = scale * sqrt((4 - pi) / 2).
  double rayleigh_by_std(double std_dev) {
    const double scale = std_dev / std::sqrt((4.0 - kPi) / 2.0);
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return scale * std::sqrt(-2.0 * std::log(u));
  }

  /// One uniformly random QPSK point, unit magnitude.
  cxd qpsk() {
    static const cxd table[4] = {{M_SQRT1_2, M_SQRT1_2},
                                 {M_SQRT1_2, -M_SQRT1_2},
                                 {-M_SQRT1_2, M_SQRT1_2},
                                 {-M_SQRT1_2, -M_SQRT1_2}};
    return table[next_u64() & 3u];
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

namespace detail {
constexpr std::uint64_t kTagPayload = 0x01;
constexpr std::uint64_t kTagPilot = 0x02;
constexpr std::uint64_t kTagPreamble = 0x03;
constexpr std::uint64_t kTagNoise = 0x04;
constexpr std::uint64_t kTagAbe = 0x05;
constexpr std::uint64_t kTagAfe = 0x06;
constexpr std::uint64_t kTagDelays = 0x07;
constexpr std::uint64_t kTagPhase = 0x08;
constexpr std::uint64_t kTagFiller = 0x09;
}  // namespace detail

}  // namespace bisac
