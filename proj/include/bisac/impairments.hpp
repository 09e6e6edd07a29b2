#pragma once

// Bistatic multipath MIMO channel with transmitter/receiver offsets (STO,
// CFO, SFO, common phase), per-channel hardware responses, and AWGN.

#include "bisac/array_geometry.hpp"
#include "bisac/common.hpp"
#include "bisac/hardware_response.hpp"
#include "bisac/resample.hpp"

namespace bisac {

struct Path {
  double attenuation = 1.0;   // linear amplitude
  double tx_delay_s = 0.0;    // transmitter -> scatterer (or receiver, for LoS)
  double rx_delay_s = 0.0;    // scatterer -> receiver (0 for LoS by convention)
  double doppler_hz = 0.0;
  double dod_rad = 0.0;
  double doa_rad = 0.0;
  bool is_los = false;

  double total_delay_s() const { return tx_delay_s + rx_delay_s; }
};

struct PathSet {
  std::vector<Path> paths;

  const Path& los() const {
    for (const auto& p : paths)
      if (p.is_los) return p;
    throw model_error("path set has no LoS reference path");
  }

  void validate() const {
    std::size_t los_count = 0;
    for (const auto& p : paths) {
      if (p.tx_delay_s < 0.0 || p.rx_delay_s < 0.0)
        throw config_error("path delays must be nonnegative");
      if (p.is_los) {
        ++los_count;
        if (p.doppler_hz != 0.0)
          throw model_error("LoS path must have zero Doppler (static stations)");
        if (p.rx_delay_s != 0.0)
          throw model_error("LoS path carries its delay on the transmit side");
      }
    }
    if (los_count != 1) throw model_error("exactly one LoS path is required");
  }

  std::vector<double> steering_dods() const {
    std::vector<double> d;
    for (const auto& p : paths) d.push_back(p.dod_rad);
    return d;
  }
};

struct NoiseSpec {
  bool enabled = false;
  double noise_figure_db = 10.0;
  double temperature_k = 290.0;

  /// Complex noise power kB * B * T * NF in watts at critical sampling.
  double power_w(double bandwidth_hz) const {
    return kBoltzmann * bandwidth_hz * temperature_k * undb10(noise_figure_db);
  }
};

struct ImpairmentSpec {
  double sto_s = 0.0;            // tau_Delta
  double cfo_hz = 0.0;           // f_Delta
  double common_phase_rad = 0.0; // psi_Delta
  double normalized_sfo = 0.0;   // delta, receiver period (1 + delta) T_s
  NoiseSpec noise;
  HardwareResponseBank abe;  // per receive channel; empty = ideal
  HardwareResponseBank afe;  // per transmit channel; empty = ideal

  // Extra per-receive-channel delays (e.g. injected synchronization
  // mismatch). Realized at the stated carrier, so each delayed channel also
  // picks up exp(-i 2 pi f_ref tau).
  dvec rx_channel_delays_s;
  double delay_phase_carrier_hz = 0.0;

  void validate(std::size_t num_tx, std::size_t num_rx) const {
    if (std::fabs(normalized_sfo) >= 1e-3)
      throw config_error("normalized SFO must stay in the ppm regime (|delta| < 1e-3)");
    if (!abe.empty() && abe.size() != num_rx)
      throw config_error("ABE bank size must match the receive channel count");
    if (!afe.empty() && afe.size() != num_tx)
      throw config_error("AFE bank size must match the transmit channel count");
    if (!rx_channel_delays_s.empty() && rx_channel_delays_s.size() != num_rx)
      throw config_error("per-channel delay list must match the receive channel count");
  }
};

struct ChannelRealization {
  std::vector<cvec> rx;  // per receive channel, common time base
  // Immutable ground truth for oracle checks.
  PathSet paths;
  ImpairmentSpec impairments;
  std::uint64_t seed = 0;
  double sample_rate_hz = 0.0;
  std::size_t tx_length = 0;
};

/// Per-channel synchronization-mismatch delays: channel 0 is perfectly
/// aligned, the rest draw from a Rayleigh distribution with standard
/// deviation `sigma_tau_s`.
inline dvec sample_rayleigh_channel_delays(double sigma_tau_s, std::size_t num_channels,
                                           std::uint64_t seed) {
  if (sigma_tau_s < 0.0) throw std::invalid_argument("sigma_tau must be nonnegative");
  dvec delays(num_channels, 0.0);
  Rng rng(derive_seed(seed, {detail::kTagDelays}));
  for (std::size_t n = 1; n < num_channels; ++n)
    delays[n] = (sigma_tau_s == 0.0) ? 0.0 : rng.rayleigh_by_std(sigma_tau_s);
  return delays;
}

enum class HardwareProfile { ideal, measured_like };

/// Receive back-end bank: ideal impulses, or per-channel responses with a
/// dominant tap at a random delay in [0, 3 ns] and mild ripple.
inline HardwareResponseBank make_abe_bank(std::size_t num_channels, HardwareProfile profile,
                                          std::uint64_t seed, double tap_spacing_s) {
  HardwareResponseBank bank(num_channels);
  if (profile == HardwareProfile::ideal) return bank;
  Rng rng(derive_seed(seed, {detail::kTagAbe}));
  for (auto& r : bank) {
    r.dominant_delay_s = rng.uniform(0.0, 3e-9);
    r.tap_spacing_s = tap_spacing_s;
    const double a1 = rng.uniform(0.05, 0.12);
    const double a2 = rng.uniform(0.02, 0.05);
    r.taps = {cxd(1.0, 0.0), std::polar(a1, rng.uniform(0.0, kTwoPi)),
              std::polar(a2, rng.uniform(0.0, kTwoPi))};
  }
  return bank;
}

/// Transmit front-end bank. Dominant delay stays at zero (transmit timing is
/// calibrated); ripple taps model the per-channel CFR spread that DPD must
/// flatten.
inline HardwareResponseBank make_afe_bank(std::size_t num_channels, HardwareProfile profile,
                                          std::uint64_t seed, double tap_spacing_s) {
  HardwareResponseBank bank(num_channels);
  if (profile == HardwareProfile::ideal) return bank;
  Rng rng(derive_seed(seed, {detail::kTagAfe}));
  for (auto& r : bank) {
    r.dominant_delay_s = 0.0;
    r.tap_spacing_s = tap_spacing_s;
    const double a1 = rng.uniform(0.05, 0.12);
    const double a2 = rng.uniform(0.02, 0.05);
    r.taps = {cxd(1.0, 0.0), std::polar(a1, rng.uniform(0.0, kTwoPi)),
              std::polar(a2, rng.uniform(0.0, kTwoPi))};
  }
  return bank;
}

namespace detail {

/// Applies a sparse hardware response in the time domain: one fractional
/// delay per tap.
inline cvec apply_response_time(const cvec& x, const HardwareResponse& r, double sample_period_s,
                                const SincInterpolator& interp) {
  if (r.is_identity()) return x;
  cvec acc(x.size(), cxd(0.0, 0.0));
  for (std::size_t j = 0; j < r.taps.size(); ++j) {
    if (r.taps[j] == cxd(0.0, 0.0)) continue;
    const double d = (r.dominant_delay_s + static_cast<double>(j) * r.tap_spacing_s) /
                     sample_period_s;
    cvec shifted = fractional_delay(x, d, interp);
    for (std::size_t s = 0; s < x.size(); ++s) acc[s] += r.taps[j] * shifted[s];
  }
  return acc;
}

/// Complex exponential multiply with an incremental rotator (renormalized
/// periodically to stop drift).
inline void rotate_inplace(cvec& x, double phase_step_rad, double initial_phase_rad) {
  cxd w = std::polar(1.0, initial_phase_rad);
  const cxd step = std::polar(1.0, phase_step_rad);
  for (std::size_t s = 0; s < x.size(); ++s) {
    x[s] *= w;
    w *= step;
    if ((s & 0xFFF) == 0xFFF) w /= std::abs(w);
  }
}

}  // namespace detail

/// Propagates the per-transmit-channel streams through the multipath channel
/// and the receiver chain. Output streams share the transmit time base
/// (sample 0 of the output is transmit time 0), with enough margin appended
/// to hold the largest configured delay.
inline ChannelRealization propagate(const std::vector<cvec>& tx_channels,
                                    const UlaGeometry& geometry_tx,
                                    const UlaGeometry& geometry_rx, const PathSet& paths,
                                    const ImpairmentSpec& imp, double sample_rate_hz,
                                    std::uint64_t seed) {
  if (tx_channels.empty()) throw std::invalid_argument("no transmit channels");
  if (tx_channels.size() != geometry_tx.num_elements)
    throw std::invalid_argument("transmit stream count must match the transmit array");
  const std::size_t in_len = tx_channels[0].size();
  for (const auto& ch : tx_channels)
    if (ch.size() != in_len) throw std::invalid_argument("transmit streams differ in length");
  paths.validate();
  imp.validate(geometry_tx.num_elements, geometry_rx.num_elements);
  if (geometry_tx.carrier_frequency_hz != geometry_rx.carrier_frequency_hz)
    throw config_error("transmit and receive arrays disagree on carrier frequency");

  const double ts = 1.0 / sample_rate_hz;
  const double fc = geometry_tx.carrier_frequency_hz;
  const SincInterpolator interp;

  double max_delay_s = imp.sto_s;
  for (const auto& p : paths.paths) max_delay_s = std::max(max_delay_s, p.total_delay_s() + imp.sto_s);
  double max_ch_delay = 0.0;
  for (double d : imp.rx_channel_delays_s) max_ch_delay = std::max(max_ch_delay, d);
  for (const auto& r : imp.abe)
    max_ch_delay = std::max(max_ch_delay, r.dominant_delay_s +
                                              static_cast<double>(r.taps.size()) * r.tap_spacing_s);
  const std::size_t margin =
      static_cast<std::size_t>(std::ceil((max_delay_s + max_ch_delay) / ts)) +
      2 * SincInterpolator::kMaxTaps + 8;
  const std::size_t len = in_len + margin;
  if (margin > in_len + (1u << 22))
    throw config_error("configured delays exceed a reasonable stream buffer");

  // Transmit front ends.
  std::vector<cvec> tx(tx_channels.size());
  for (std::size_t c = 0; c < tx.size(); ++c) {
    tx[c].assign(len, cxd(0.0, 0.0));
    std::copy(tx_channels[c].begin(), tx_channels[c].end(), tx[c].begin());
    if (!imp.afe.empty()) tx[c] = detail::apply_response_time(tx[c], imp.afe[c], ts, interp);
  }

  // Per-path streams: beamformed departure sum, common delay, Doppler.
  std::vector<cvec> path_streams;
  path_streams.reserve(paths.paths.size());
  for (const auto& p : paths.paths) {
    cvec s(len, cxd(0.0, 0.0));
    for (std::size_t c = 0; c < tx.size(); ++c) {
      const cxd g = departure_phase(geometry_tx, c, p.dod_rad);
      for (std::size_t i = 0; i < len; ++i) s[i] += g * tx[c][i];
    }
    s = fractional_delay(s, (p.total_delay_s() + imp.sto_s) / ts, interp);
    if (p.doppler_hz != 0.0) detail::rotate_inplace(s, kTwoPi * p.doppler_hz * ts, 0.0);
    path_streams.push_back(std::move(s));
  }

  ChannelRealization out;
  out.rx.resize(geometry_rx.num_elements);
  out.paths = paths;
  out.impairments = imp;
  out.seed = seed;
  out.sample_rate_hz = sample_rate_hz;
  out.tx_length = in_len;

  for (std::size_t n = 0; n < geometry_rx.num_elements; ++n) {
    cvec y(len, cxd(0.0, 0.0));
    for (std::size_t pi = 0; pi < paths.paths.size(); ++pi) {
      const Path& p = paths.paths[pi];
      const cxd w = p.attenuation *
                    std::polar(1.0, -kTwoPi * fc * (p.tx_delay_s + p.rx_delay_s)) *
                    arrival_phase(geometry_rx, n, p.doa_rad);
      const cvec& s = path_streams[pi];
      for (std::size_t i = 0; i < len; ++i) y[i] += w * s[i];
    }

    // Injected per-channel delay with its carrier-referenced phase.
    if (!imp.rx_channel_delays_s.empty() && imp.rx_channel_delays_s[n] != 0.0) {
      const double d = imp.rx_channel_delays_s[n];
      y = fractional_delay(y, d / ts, interp);
      if (imp.delay_phase_carrier_hz != 0.0) {
        const cxd rot = std::polar(1.0, -kTwoPi * imp.delay_phase_carrier_hz * d);
        for (auto& v : y) v *= rot;
      }
    }

    // CFO and common phase, then the back end (this ordering is the model's
    // contract), then the receiver's sampling clock.
    if (imp.cfo_hz != 0.0 || imp.common_phase_rad != 0.0)
      detail::rotate_inplace(y, kTwoPi * imp.cfo_hz * ts, imp.common_phase_rad);
    if (!imp.abe.empty()) y = detail::apply_response_time(y, imp.abe[n], ts, interp);
    if (imp.normalized_sfo != 0.0)
      y = resample_by_ratio(y, 1.0 + imp.normalized_sfo, rate_interpolator(), len);

    if (imp.noise.enabled) {
      Rng noise(derive_seed(seed, {detail::kTagNoise, n}));
      const double pw = imp.noise.power_w(sample_rate_hz);
      for (auto& v : y) v += noise.cnormal(pw);
    }
    out.rx[n] = std::move(y);
  }
  return out;
}

}  // namespace bisac
