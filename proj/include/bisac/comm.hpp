#pragma once

// Communication receive chain: pilot channel estimation with bilinear
// interpolation, zero-forcing equalization, maximum-ratio combining across
// receive channels, and QPSK + LDPC decode / re-encode.

#include "bisac/common.hpp"
#include "bisac/frame_grid.hpp"
#include "bisac/ldpc.hpp"
#include "bisac/sync.hpp"
#include "bisac/waveform.hpp"

namespace bisac {

/// One channel's interpolated CFR (same grid shape as the frame).
using CommCfr = FrameGrid;

/// LS estimate at the pilot cells, bilinear interpolation to all cells
/// (frequency first, then time; edges hold the nearest pilot estimate).
/// Interpolation runs in shifted subcarrier order so the band seam at
/// +/- Nyquist is not treated as adjacent.
inline CommCfr estimate_cfr(const FrameGrid& frame, const OfdmConfig& config,
                            std::uint64_t seed) {
  const std::size_t n = config.num_subcarriers;
  const std::size_t m = config.num_symbols;
  const std::size_t dn = config.pilot_subcarrier_spacing;
  const std::size_t dm = config.pilot_symbol_spacing;
  const cvec pilots = pilot_sequence(config, seed);
  for (const auto& p : pilots)
    if (p == cxd(0.0, 0.0)) throw model_error("degenerate pilot with zero transmit value");

  const std::size_t n_pil = config.num_pilot_subcarriers();
  const std::size_t m_pil = config.num_pilot_symbols();

  // Pilot estimates, addressed by shifted pilot index (see pilot_cfr).
  const std::size_t offset = (n / 2) % dn;
  std::vector<std::size_t> rows(n_pil);
  for (std::size_t kp = 0; kp < n_pil; ++kp) rows[kp] = (offset + kp * dn + n / 2) % n;

  std::vector<cvec> h_pil(m_pil, cvec(n_pil));
  for (std::size_t mp = 0; mp < m_pil; ++mp)
    for (std::size_t kp = 0; kp < n_pil; ++kp) {
      const std::size_t row = rows[kp];
      h_pil[mp][kp] = frame.at(row, mp * dm) / pilots[mp * n_pil + row / dn];
    }

  // Frequency interpolation within each pilot symbol (shifted order).
  std::vector<cvec> h_freq(m_pil, cvec(n));
  for (std::size_t mp = 0; mp < m_pil; ++mp) {
    for (std::size_t ns = 0; ns < n; ++ns) {
      double pos;
      if (ns < offset)
        pos = 0.0;  // hold below the first pilot
      else
        pos = static_cast<double>(ns - offset) / static_cast<double>(dn);
      const std::size_t k0 = std::min(static_cast<std::size_t>(pos), n_pil - 1);
      const std::size_t k1 = std::min(k0 + 1, n_pil - 1);
      const double frac = std::min(pos - static_cast<double>(k0), 1.0);
      h_freq[mp][ns] = (1.0 - frac) * h_pil[mp][k0] + frac * h_pil[mp][k1];
    }
  }

  // Time interpolation across pilot symbols, edges held.
  CommCfr cfr = FrameGrid::for_config(config);
  for (std::size_t mm = 0; mm < m; ++mm) {
    const double pos = static_cast<double>(mm) / static_cast<double>(dm);
    const std::size_t m0 = std::min(static_cast<std::size_t>(pos), m_pil - 1);
    const std::size_t m1 = std::min(m0 + 1, m_pil - 1);
    const double frac = std::min(pos - static_cast<double>(m0), 1.0);
    for (std::size_t ns = 0; ns < n; ++ns) {
      const cxd v = (1.0 - frac) * h_freq[m0][ns] + frac * h_freq[m1][ns];
      cfr.at((ns + n / 2) % n, mm) = v;  // unshift back to storage rows
    }
  }
  return cfr;
}

struct EqualizedFrame {
  FrameGrid grid;
  std::vector<std::uint8_t> erasures;  // cellwise, same layout as the grid

  std::size_t erasure_count() const {
    std::size_t c = 0;
    for (auto e : erasures) c += e;
    return c;
  }
};

inline constexpr double kZeroChannelFloor = 1e-30;

/// Cellwise Y / H; cells where the channel vanishes are flagged erased.
inline EqualizedFrame zf_equalize(const FrameGrid& frame, const CommCfr& cfr) {
  if (!frame.same_shape(cfr)) throw std::invalid_argument("frame/CFR shape mismatch");
  EqualizedFrame out;
  out.grid = frame;
  out.erasures.assign(frame.size(), 0);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const cxd h = cfr.cells()[i];
    if (std::norm(h) < kZeroChannelFloor) {
      out.grid.cells()[i] = 0.0;
      out.erasures[i] = 1;
    } else {
      out.grid.cells()[i] = frame.cells()[i] / h;
    }
  }
  return out;
}

/// Maximum-ratio combining across receive channels:
/// Y_mrc = sum_ch Y_ch conj(H_ch) / sum_ch |H_ch|^2, cellwise.
inline EqualizedFrame mrc_combine(const std::vector<FrameGrid>& frames,
                                  const std::vector<CommCfr>& cfrs) {
  if (frames.empty() || frames.size() != cfrs.size())
    throw std::invalid_argument("MRC needs matching frame/CFR sets");
  for (std::size_t c = 1; c < frames.size(); ++c)
    if (!frames[c].same_shape(frames[0]) || !cfrs[c].same_shape(frames[0]))
      throw std::invalid_argument("MRC inputs disagree on grid shape");
  EqualizedFrame out;
  out.grid = frames[0];  // shape/pilot layout carrier
  out.erasures.assign(frames[0].size(), 0);
  for (std::size_t i = 0; i < frames[0].size(); ++i) {
    cxd num = 0.0;
    double den = 0.0;
    for (std::size_t c = 0; c < frames.size(); ++c) {
      const cxd h = cfrs[c].cells()[i];
      num += frames[c].cells()[i] * std::conj(h);
      den += std::norm(h);
    }
    if (den < kZeroChannelFloor) {
      out.grid.cells()[i] = 0.0;
      out.erasures[i] = 1;
    } else {
      out.grid.cells()[i] = num / den;
    }
  }
  return out;
}

struct DecodeResult {
  BitVec payload_bits;       // decoded info bits (whole blocks)
  FrameGrid reencoded;       // X-hat: re-encoded + re-mapped frame
  bool genie = false;
  bool all_blocks_converged = true;
  std::size_t uncoded_bit_errors = 0;  // vs reference coded bits, when given
  std::size_t coded_bit_errors = 0;    // vs reference info bits, when given
  std::size_t compared_uncoded_bits = 0;
  std::size_t compared_coded_bits = 0;
  double noise_var_estimate = 0.0;
};

/// Post-equalization noise variance from the known pilot cells.
inline double estimate_noise_var_from_pilots(const FrameGrid& eq, const OfdmConfig& config,
                                             std::uint64_t seed) {
  const cvec pilots = pilot_sequence(config, seed);
  double acc = 0.0;
  std::size_t count = 0;
  std::size_t i = 0;
  for (std::size_t m = 0; m < config.num_symbols; m += config.pilot_symbol_spacing)
    for (std::size_t n = 0; n < config.num_subcarriers; n += config.pilot_subcarrier_spacing) {
      acc += std::norm(eq.at(n, m) - pilots[i]);
      ++i;
      ++count;
    }
  return std::max(acc / static_cast<double>(count), 1e-12);
}

/// Demodulates the equalized frame, decodes (unless genie), and re-encodes
/// into the transmit-frame estimate used by the radar chain. When the true
/// transmit frame is supplied, bit error counts are filled in.
inline DecodeResult demod_decode_reencode(const EqualizedFrame& eq, const OfdmConfig& config,
                                          std::uint64_t seed, bool genie = false,
                                          const TxFrame* truth = nullptr) {
  DecodeResult out;
  if (genie) {
    if (!truth) throw std::invalid_argument("genie decoding needs the true transmit frame");
    out.genie = true;
    out.payload_bits = truth->info_bits;
    out.reencoded = truth->grid;
    return out;
  }

  const std::size_t total_data_cells = config.num_data_cells();
  const std::size_t coded_capacity = total_data_cells * 2;
  const std::size_t used_coded =
      (config.code.kind == CodeKind::ldpc)
          ? (coded_capacity / config.code.block_length_bits) * config.code.block_length_bits
          : coded_capacity;

  // Soft demodulation over the data cells, scan order.
  out.noise_var_estimate = estimate_noise_var_from_pilots(eq.grid, config, seed);
  const double llr_scale = 2.0 * std::sqrt(2.0) / out.noise_var_estimate;
  dvec llr;
  llr.reserve(used_coded);
  BitVec hard;
  hard.reserve(used_coded);
  std::size_t taken = 0;
  for (std::size_t m = 0; m < config.num_symbols && taken < used_coded; ++m) {
    for (std::size_t n = 0; n < config.num_subcarriers && taken < used_coded; ++n) {
      if (eq.grid.is_pilot(n, m)) continue;
      const std::size_t i = n + config.num_subcarriers * m;
      const cxd y = eq.grid.cells()[i];
      const bool erased = eq.erasures[i] != 0;
      const double l0 = erased ? 0.0 : llr_scale * y.real();
      const double l1 = erased ? 0.0 : llr_scale * y.imag();
      llr.push_back(l0);
      llr.push_back(l1);
      hard.push_back(l0 < 0.0 ? 1 : 0);
      hard.push_back(l1 < 0.0 ? 1 : 0);
      taken += 2;
    }
  }

  if (truth) {
    out.compared_uncoded_bits = used_coded;
    for (std::size_t i = 0; i < used_coded; ++i)
      out.uncoded_bit_errors += (hard[i] != truth->coded_bits[i]);
  }

  if (config.code.kind == CodeKind::ldpc) {
    LdpcCode code(config.code);
    const std::size_t blocks = used_coded / code.block_bits();
    out.payload_bits.reserve(blocks * code.info_bits());
    for (std::size_t b = 0; b < blocks; ++b) {
      dvec block_llr(llr.begin() + static_cast<std::ptrdiff_t>(b * code.block_bits()),
                     llr.begin() + static_cast<std::ptrdiff_t>((b + 1) * code.block_bits()));
      auto dec = code.decode(block_llr);
      out.all_blocks_converged = out.all_blocks_converged && dec.converged;
      out.payload_bits.insert(out.payload_bits.end(), dec.info.begin(), dec.info.end());
    }
  } else {
    out.payload_bits = hard;
  }

  if (truth) {
    out.compared_coded_bits = out.payload_bits.size();
    for (std::size_t i = 0; i < out.payload_bits.size(); ++i)
      out.coded_bit_errors += (out.payload_bits[i] != truth->info_bits[i]);
  }

  // Re-encode and re-map, regenerating pilots and filler deterministically:
  // identical to build_frame on the decoded bits.
  TxFrame rebuilt = build_frame(config, out.payload_bits, seed);
  out.reencoded = std::move(rebuilt.grid);
  return out;
}

}  // namespace bisac
