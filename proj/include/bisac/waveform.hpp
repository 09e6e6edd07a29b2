#pragma once

// Transmit side: payload coding and mapping onto the OFDM grid, pilot and
// preamble generation, OFDM modulation with cyclic prefix, per-channel
// pre-distortion and beamforming.

#include <span>

#include "bisac/array_geometry.hpp"
#include "bisac/common.hpp"
#include "bisac/fft.hpp"
#include "bisac/frame_grid.hpp"
#include "bisac/hardware_response.hpp"
#include "bisac/ldpc.hpp"

namespace bisac {

// Gray-mapped QPSK: bit pair (b0, b1) -> ((1-2 b0) + i (1-2 b1)) / sqrt(2).
inline cxd qpsk_map(std::uint8_t b0, std::uint8_t b1) {
  return {M_SQRT1_2 * (1.0 - 2.0 * b0), M_SQRT1_2 * (1.0 - 2.0 * b1)};
}

inline void qpsk_hard_demap(cxd y, std::uint8_t& b0, std::uint8_t& b1) {
  b0 = y.real() < 0.0 ? 1 : 0;
  b1 = y.imag() < 0.0 ? 1 : 0;
}

/// Info-bit capacity of one frame under the configured code (whole code
/// blocks only; leftover cells carry deterministic filler).
inline std::size_t frame_capacity_bits(const OfdmConfig& config) {
  const std::size_t coded_capacity =
      config.num_data_cells() * static_cast<std::size_t>(config.bits_per_cell());
  if (config.code.kind == CodeKind::none) return coded_capacity;
  const std::size_t blocks = coded_capacity / config.code.block_length_bits;
  return blocks * config.code.info_bits_per_block();
}

/// Pilot cell values in scan order (pilot symbols outer, pilot subcarriers
/// inner), reproducible from the frame seed.
inline cvec pilot_sequence(const OfdmConfig& config, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {detail::kTagPilot}));
  cvec seq(config.num_pilot_cells());
  for (auto& v : seq) v = rng.qpsk();
  return seq;
}

inline void place_pilots(FrameGrid& grid, const OfdmConfig& config, std::uint64_t seed) {
  const cvec seq = pilot_sequence(config, seed);
  std::size_t i = 0;
  for (std::size_t m = 0; m < config.num_symbols; m += config.pilot_symbol_spacing)
    for (std::size_t n = 0; n < config.num_subcarriers; n += config.pilot_subcarrier_spacing)
      grid.at(n, m) = seq[i++];
}

struct TxFrame {
  FrameGrid grid;
  BitVec payload_bits;   // caller payload, before padding
  BitVec info_bits;      // payload + deterministic pad, whole blocks
  BitVec coded_bits;     // as mapped onto the data cells (coded region only)
  std::size_t filler_cells = 0;  // data cells beyond the coded region
};

/// Builds the transmit frame X: encoded, QPSK-mapped payload on data cells,
/// seeded pilots on pilot cells. Deterministic in (config, payload, seed).
inline TxFrame build_frame(const OfdmConfig& config, const BitVec& payload_bits,
                           std::uint64_t seed) {
  config.validate();
  const std::size_t capacity = frame_capacity_bits(config);
  if (payload_bits.size() > capacity)
    throw capacity_error(capacity, payload_bits.size());

  TxFrame tx;
  tx.grid = FrameGrid::for_config(config);
  tx.payload_bits = payload_bits;

  // Pad the payload up to whole blocks with seeded filler bits.
  tx.info_bits = payload_bits;
  tx.info_bits.resize(capacity);
  {
    Rng pad(derive_seed(seed, {detail::kTagPayload}));
    for (std::size_t i = payload_bits.size(); i < capacity; ++i)
      tx.info_bits[i] = static_cast<std::uint8_t>(pad.next_u64() & 1u);
  }

  if (config.code.kind == CodeKind::ldpc) {
    LdpcCode code(config.code);
    const std::size_t blocks = capacity / code.info_bits();
    tx.coded_bits.reserve(blocks * code.block_bits());
    for (std::size_t b = 0; b < blocks; ++b) {
      BitVec info(tx.info_bits.begin() + static_cast<std::ptrdiff_t>(b * code.info_bits()),
                  tx.info_bits.begin() + static_cast<std::ptrdiff_t>((b + 1) * code.info_bits()));
      BitVec cw = code.encode(info);
      tx.coded_bits.insert(tx.coded_bits.end(), cw.begin(), cw.end());
    }
  } else {
    tx.coded_bits = tx.info_bits;
  }

  place_pilots(tx.grid, config, seed);

  // Data cells in scan order (symbols outer, subcarriers inner); cells past
  // the coded region carry seeded filler constellation points.
  Rng filler(derive_seed(seed, {detail::kTagFiller}));
  std::size_t bit = 0;
  for (std::size_t m = 0; m < config.num_symbols; ++m) {
    for (std::size_t n = 0; n < config.num_subcarriers; ++n) {
      if (tx.grid.is_pilot(n, m)) continue;
      if (bit + 2 <= tx.coded_bits.size()) {
        tx.grid.at(n, m) = qpsk_map(tx.coded_bits[bit], tx.coded_bits[bit + 1]);
        bit += 2;
      } else {
        tx.grid.at(n, m) = filler.qpsk();
        ++tx.filler_cells;
      }
    }
  }
  return tx;
}

/// One Schmidl-Cox style preamble symbol (plus CP): even subcarriers carry a
/// seeded constant-amplitude sequence, so the CP-stripped halves repeat.
inline cvec build_preamble(const OfdmConfig& config, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {detail::kTagPreamble}));
  cvec spectrum(config.num_subcarriers, cxd(0.0, 0.0));
  for (std::size_t k = 0; k < config.num_subcarriers; k += 2)
    spectrum[k] = std::sqrt(2.0) * rng.qpsk();
  cvec body = ifft(std::move(spectrum));
  cvec out(config.cp_length + config.num_subcarriers);
  const std::size_t n = config.num_subcarriers;
  for (std::size_t i = 0; i < config.cp_length; ++i)
    out[i] = body[(i + n - config.cp_length % n) % n];  // CP may exceed one period
  std::copy(body.begin(), body.end(), out.begin() + static_cast<std::ptrdiff_t>(config.cp_length));
  return out;
}

/// OFDM modulation: per symbol, inverse DFT (1/N) and CP prepend, appended
/// after the preamble when one is supplied.
inline cvec to_time_domain(const FrameGrid& frame, const OfdmConfig& config,
                           std::span<const cxd> preamble = {}) {
  if (frame.num_subcarriers() != config.num_subcarriers ||
      frame.num_symbols() != config.num_symbols)
    throw std::invalid_argument("frame dimensions do not match the OFDM config");
  const std::size_t sym_len = config.samples_per_symbol();
  cvec out;
  out.reserve(preamble.size() + config.num_symbols * sym_len);
  out.insert(out.end(), preamble.begin(), preamble.end());
  cvec col(config.num_subcarriers);
  const std::size_t n = config.num_subcarriers;
  for (std::size_t m = 0; m < config.num_symbols; ++m) {
    std::copy_n(frame.symbol_data(m), n, col.begin());
    cvec body = ifft(col);
    const std::size_t base = out.size();
    out.resize(base + sym_len);
    for (std::size_t i = 0; i < config.cp_length; ++i)
      out[base + i] = body[(i + n - config.cp_length % n) % n];
    std::copy(body.begin(), body.end(),
              out.begin() + static_cast<std::ptrdiff_t>(base + config.cp_length));
  }
  return out;
}

/// Forward DFT of one CP-stripped symbol back onto the grid.
inline cvec symbol_to_grid(std::span<const cxd> body) {
  cvec col(body.begin(), body.end());
  fft_inplace(col);
  return col;
}

/// Per-channel copies weighted by the sum of the steering vectors over all
/// steering directions.
inline std::vector<cvec> apply_tx_beamforming(const cvec& time_signal,
                                              const std::vector<SteeringVector>& steering) {
  if (steering.empty()) throw std::invalid_argument("need at least one steering direction");
  const std::size_t num_ch = steering[0].weights.size();
  for (const auto& sv : steering)
    if (sv.weights.size() != num_ch)
      throw std::invalid_argument("steering vectors disagree on element count");
  cvec w(num_ch, cxd(0.0, 0.0));
  for (const auto& sv : steering)
    for (std::size_t n = 0; n < num_ch; ++n) w[n] += sv.weights[n];
  std::vector<cvec> out(num_ch);
  for (std::size_t n = 0; n < num_ch; ++n) {
    out[n].resize(time_signal.size());
    for (std::size_t s = 0; s < time_signal.size(); ++s) out[n][s] = w[n] * time_signal[s];
  }
  return out;
}

/// Combined per-channel transmit weights (sum over steering directions).
inline cvec combined_tx_weights(const std::vector<SteeringVector>& steering) {
  cvec w(steering.at(0).weights.size(), cxd(0.0, 0.0));
  for (const auto& sv : steering)
    for (std::size_t n = 0; n < w.size(); ++n) w[n] += sv.weights[n];
  return w;
}

namespace detail {

/// Cyclic frequency-domain filter of a stream on a padded power-of-two
/// grid. `response` is evaluated at the padded grid's signed frequencies.
template <typename ResponseFn>
inline cvec filter_stream_fd(const cvec& x, double sample_rate_hz, ResponseFn&& response,
                             std::size_t pad = 2048) {
  const std::size_t len = next_pow2(x.size() + pad);
  cvec buf(len, cxd(0.0, 0.0));
  std::copy(x.begin(), x.end(), buf.begin());
  fft_inplace(buf);
  const double df = sample_rate_hz / static_cast<double>(len);
  for (std::size_t k = 0; k < len; ++k) buf[k] *= response(bin_frequency(k, len, df));
  ifft_inplace_unscaled(buf);
  const double scale = 1.0 / static_cast<double>(len);
  cvec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = buf[i] * scale;
  return out;
}

}  // namespace detail

/// Pre-distorts each transmit channel by the regularized inverse of its AFE
/// CFR, conj(H)/(|H|^2 + eps), so that the later AFE filtering is (near)
/// identity on the occupied band.
inline std::vector<cvec> apply_tx_predistortion(const std::vector<cvec>& channels,
                                                const HardwareResponseBank& afe,
                                                double sample_rate_hz,
                                                double magnitude_floor = 1e-3) {
  if (channels.size() != afe.size())
    throw std::invalid_argument("AFE bank size must match channel count");
  std::vector<cvec> out(channels.size());
  for (std::size_t ch = 0; ch < channels.size(); ++ch) {
    if (afe[ch].is_identity()) {
      out[ch] = channels[ch];
      continue;
    }
    // Floor check across the occupied band.
    double peak2 = 0.0, min_mag = std::numeric_limits<double>::infinity();
    int min_bin = 0;
    const std::size_t probe = 1024;
    for (std::size_t k = 0; k < probe; ++k) {
      const double f = bin_frequency(k, probe, sample_rate_hz / static_cast<double>(probe));
      const double mag = std::abs(afe[ch].response(f));
      peak2 = std::max(peak2, mag * mag);
      if (mag < min_mag) {
        min_mag = mag;
        min_bin = static_cast<int>(k);
      }
    }
    if (min_mag <= magnitude_floor * std::sqrt(peak2))
      throw calibration_error(static_cast<int>(ch), min_bin,
                              "AFE CFR magnitude below pre-distortion floor");
    const double eps = 1e-6 * peak2;
    out[ch] = detail::filter_stream_fd(channels[ch], sample_rate_hz, [&](double f) {
      const cxd h = afe[ch].response(f);
      return std::conj(h) / (std::norm(h) + eps);
    });
  }
  return out;
}

}  // namespace bisac
