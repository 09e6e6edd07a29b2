#pragma once

// Distributed synchronization: per-channel coarse CFO (half-symbol
// autocorrelation on the repeating preamble), preamble cross-correlation STO,
// pilot-slope SFO, fusion into global estimates (mean for CFO/SFO, min for
// STO), correction/framing, and pilot-based residual fine tuning.

#include <algorithm>
#include <optional>

#include "bisac/common.hpp"
#include "bisac/fft.hpp"
#include "bisac/frame_grid.hpp"
#include "bisac/resample.hpp"
#include "bisac/waveform.hpp"

namespace bisac {

struct SyncEstimates {
  dvec sto_s;             // per channel, integer-sample resolution
  dvec cfo_hz;            // per channel (coarse)
  dvec sfo;               // per channel, normalized
  dvec residual_sto_s;    // per channel, set by fusion / fine tuning
  dvec residual_cfo_hz;   // per channel, set by fine tuning
  double sto_mimo_s = 0.0;
  double cfo_mimo_hz = 0.0;
  double sfo_mimo = 0.0;
  bool fused = false;
};

namespace detail {

/// Pilots whose |f| stays below this fraction of Nyquist enter slope fits.
constexpr double kEdgeTrimFraction = 0.9;

struct PilotCfr {
  std::size_t n_pil = 0;
  std::size_t m_pil = 0;
  cvec h;        // k' + n_pil * m', k' ordered by signed frequency
  dvec freq_hz;  // per k'
  dvec weight;   // edge-trim weight per k'
};

/// LS pilot channel estimates, subcarriers reordered so k' walks the band
/// from the most negative to the most positive frequency (no wrap seam).
inline PilotCfr pilot_cfr(const FrameGrid& frame, const OfdmConfig& config, std::uint64_t seed) {
  const std::size_t n = config.num_subcarriers;
  const std::size_t dn = config.pilot_subcarrier_spacing;
  const std::size_t dm = config.pilot_symbol_spacing;
  PilotCfr out;
  out.n_pil = config.num_pilot_subcarriers();
  out.m_pil = config.num_pilot_symbols();
  out.h.resize(out.n_pil * out.m_pil);
  out.freq_hz.resize(out.n_pil);
  out.weight.resize(out.n_pil);

  // Shifted pilot positions form a regular grid with offset (N/2 mod dN).
  const std::size_t offset = (n / 2) % dn;
  const double df = config.subcarrier_spacing_hz();
  std::vector<std::size_t> rows(out.n_pil);
  for (std::size_t kp = 0; kp < out.n_pil; ++kp) {
    const std::size_t ns = offset + kp * dn;                   // shifted index
    const std::size_t row = (ns + n / 2) % n;                  // storage row
    rows[kp] = row;
    out.freq_hz[kp] = bin_frequency(row, n, df);
    out.weight[kp] =
        (std::fabs(out.freq_hz[kp]) <= kEdgeTrimFraction * config.bandwidth_hz / 2.0) ? 1.0 : 0.0;
  }
  const cvec pilots = pilot_sequence(config, seed);
  for (std::size_t mp = 0; mp < out.m_pil; ++mp) {
    const std::size_t m = mp * dm;
    for (std::size_t kp = 0; kp < out.n_pil; ++kp) {
      const std::size_t row = rows[kp];
      const std::size_t pilot_idx = mp * out.n_pil + row / dn;
      out.h[kp + out.n_pil * mp] = frame.at(row, m) / pilots[pilot_idx];
    }
  }
  return out;
}

/// Weighted least-squares slope of y against x.
inline double ls_slope(const dvec& x, const dvec& y, const dvec& w) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  if (sw <= 0.0) throw sync_error("slope fit has no usable points");
  const double mx = sx / sw, my = sy / sw;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += w[i] * (x[i] - mx) * (y[i] - my);
    den += w[i] * (x[i] - mx) * (x[i] - mx);
  }
  if (den <= 0.0) throw sync_error("slope fit is degenerate");
  return num / den;
}

inline dvec unwrap(const dvec& phase) {
  dvec out(phase.size());
  if (phase.empty()) return out;
  out[0] = phase[0];
  for (std::size_t i = 1; i < phase.size(); ++i)
    out[i] = out[i - 1] + wrap_pm_pi(phase[i] - phase[i - 1]);
  return out;
}

}  // namespace detail

/// De-rotates a stream by a CFO estimate (time origin at the first sample).
inline void derotate_cfo(cvec& x, double cfo_hz, double sample_period_s) {
  if (cfo_hz == 0.0) return;
  cxd w(1.0, 0.0);
  const cxd step = std::polar(1.0, -kTwoPi * cfo_hz * sample_period_s);
  for (std::size_t s = 0; s < x.size(); ++s) {
    x[s] *= w;
    w *= step;
    if ((s & 0xFFF) == 0xFFF) w /= std::abs(w);
  }
}

/// Coarse CFO from the repeating-halves preamble: locate the timing-metric
/// plateau, read the CFO off the half-symbol autocorrelation phase.
/// Unambiguous for |f_Delta| < subcarrier spacing.
inline double coarse_cfo_per_channel(const cvec& rx, const OfdmConfig& config,
                                     double metric_threshold = 0.4) {
  const std::size_t n = config.num_subcarriers;
  const std::size_t half = n / 2;
  if (rx.size() < n) throw sync_error("stream shorter than one preamble symbol");
  const std::size_t last = rx.size() - n;

  // Normalizing by both half energies keeps the metric <= 1 (Cauchy-Schwarz)
  // so quiet stream regions cannot out-score the true plateau; windows with
  // negligible energy are skipped outright.
  double total = 0.0;
  for (const auto& v : rx) total += std::norm(v);
  const double energy_floor =
      1e-3 * total * static_cast<double>(half) / static_cast<double>(rx.size());

  cxd p = 0.0;
  double r1 = 0.0, r2 = 0.0;
  for (std::size_t s = 0; s < half; ++s) {
    p += std::conj(rx[s]) * rx[s + half];
    r1 += std::norm(rx[s]);
    r2 += std::norm(rx[s + half]);
  }
  double best_metric = -1.0;
  cxd best_p = 0.0;
  for (std::size_t d = 0;; ++d) {
    if (r1 > energy_floor && r2 > energy_floor) {
      const double metric = std::norm(p) / (r1 * r2);
      if (metric > best_metric) {
        best_metric = metric;
        best_p = p;
      }
    }
    if (d == last) break;
    p += std::conj(rx[d + half]) * rx[d + n] - std::conj(rx[d]) * rx[d + half];
    r1 += std::norm(rx[d + half]) - std::norm(rx[d]);
    r2 += std::norm(rx[d + n]) - std::norm(rx[d + half]);
  }
  if (best_metric < metric_threshold)
    throw sync_error("preamble not found (timing metric below threshold)");
  const double ts = config.sampling_period_s();
  return std::arg(best_p) / (kTwoPi * static_cast<double>(half) * ts);
}

/// Frame start from cross-correlation against the full known preamble
/// (CP included: the repeating-halves body alone is N/2-periodic and would
/// leave the start ambiguous). Integer-sample resolution; expects coarse CFO
/// already removed.
inline double sto_per_channel(const cvec& rx, const cvec& preamble, const OfdmConfig& config,
                              double peak_over_floor = 5.0) {
  const std::size_t p = preamble.size();
  if (p == 0) throw std::invalid_argument("empty preamble");
  if (rx.size() < p) throw sync_error("stream shorter than the preamble");
  const std::size_t last = rx.size() - p;
  dvec mag(last + 1);
  std::size_t best = 0;
  for (std::size_t d = 0; d <= last; ++d) {
    cxd acc = 0.0;
    for (std::size_t s = 0; s < p; ++s) acc += rx[d + s] * std::conj(preamble[s]);
    mag[d] = std::abs(acc);
    if (mag[d] > mag[best]) best = d;
  }
  dvec floor_est = mag;
  std::nth_element(floor_est.begin(),
                   floor_est.begin() + static_cast<std::ptrdiff_t>(floor_est.size() / 2),
                   floor_est.end());
  const double floor_mag = floor_est[floor_est.size() / 2];
  if (mag[best] < peak_over_floor * floor_mag)
    throw sync_error("preamble correlation peak below detection threshold");
  return static_cast<double>(best) * config.sampling_period_s();
}

/// CP-strip + DFT framing of a stream beginning at `start_sample` (the
/// preamble's first CP sample). No corrections applied.
inline FrameGrid frame_from_stream(const cvec& rx, long start_sample, const OfdmConfig& config) {
  const std::size_t sym_len = config.samples_per_symbol();
  const long payload_start = start_sample + static_cast<long>(sym_len);  // skip preamble
  if (payload_start < 0 ||
      static_cast<std::size_t>(payload_start) + config.num_symbols * sym_len > rx.size())
    throw sync_error("frame start violates the stream bounds");
  FrameGrid grid = FrameGrid::for_config(config);
  cvec col(config.num_subcarriers);
  for (std::size_t m = 0; m < config.num_symbols; ++m) {
    const std::size_t base =
        static_cast<std::size_t>(payload_start) + m * sym_len + config.cp_length;
    std::copy_n(rx.begin() + static_cast<std::ptrdiff_t>(base), config.num_subcarriers,
                col.begin());
    fft_inplace(col);
    std::copy(col.begin(), col.end(), grid.symbol_data(m));
  }
  return grid;
}

/// Normalized SFO from the drift of the pilot-derived timing offset across
/// OFDM symbols (slope regression; stands in for the cited two-stage
/// estimator at the same accuracy class).
inline double sfo_per_channel(const FrameGrid& frame, const OfdmConfig& config,
                              std::uint64_t seed) {
  if (config.num_pilot_symbols() < 2) throw sync_error("SFO estimation needs >= 2 pilot symbols");
  const auto pc = detail::pilot_cfr(frame, config, seed);
  // Per pilot symbol: timing offset from the phase step between
  // frequency-adjacent pilots. Trimmed harder than the static fits: the
  // slope differentiates sub-mHz-scale drifts, so band-edge response ripple
  // must stay out of the product.
  const double trim = 0.8 * config.bandwidth_hz / 2.0;
  dvec t_off(pc.m_pil), sym_idx(pc.m_pil), w(pc.m_pil, 1.0);
  const double dfreq = pc.freq_hz[1] - pc.freq_hz[0];
  for (std::size_t mp = 0; mp < pc.m_pil; ++mp) {
    cxd acc = 0.0;
    for (std::size_t kp = 0; kp + 1 < pc.n_pil; ++kp) {
      const double ww =
          (std::fabs(pc.freq_hz[kp]) <= trim && std::fabs(pc.freq_hz[kp + 1]) <= trim) ? 1.0 : 0.0;
      acc += ww * pc.h[kp + 1 + pc.n_pil * mp] * std::conj(pc.h[kp + pc.n_pil * mp]);
    }
    t_off[mp] = -std::arg(acc) / (kTwoPi * dfreq);
    sym_idx[mp] = static_cast<double>(mp * config.pilot_symbol_spacing);
  }
  // Receiver clock period (1 + delta) T_s reads later content as the frame
  // progresses, so the apparent per-symbol delay drifts at -delta T_OFDM.
  const double slope_per_symbol = detail::ls_slope(sym_idx, t_off, w);
  return -slope_per_symbol / config.symbol_duration_s();
}

/// Mean-fuses CFO and SFO, min-fuses STO, and initializes per-channel
/// residual STO relative to the fused start point.
inline SyncEstimates fuse_global(SyncEstimates est) {
  const std::size_t nch = est.sto_s.size();
  if (nch == 0 || est.cfo_hz.size() != nch || est.sfo.size() != nch)
    throw sync_error("fusion needs complete per-channel estimates");
  est.cfo_mimo_hz = 0.0;
  est.sfo_mimo = 0.0;
  est.sto_mimo_s = est.sto_s[0];
  for (std::size_t n = 0; n < nch; ++n) {
    est.cfo_mimo_hz += est.cfo_hz[n];
    est.sfo_mimo += est.sfo[n];
    est.sto_mimo_s = std::min(est.sto_mimo_s, est.sto_s[n]);
  }
  est.cfo_mimo_hz /= static_cast<double>(nch);
  est.sfo_mimo /= static_cast<double>(nch);
  est.residual_sto_s.resize(nch);
  for (std::size_t n = 0; n < nch; ++n) est.residual_sto_s[n] = est.sto_s[n] - est.sto_mimo_s;
  est.residual_cfo_hz.assign(nch, 0.0);
  est.fused = true;
  return est;
}

/// Starts the stream at the fused STO, undoes SFO by resampling at
/// 1/(1 + delta), de-rotates the fused CFO, and frames into the
/// frequency-domain grid.
inline FrameGrid correct_and_frame(const cvec& rx, const SyncEstimates& globals,
                                   const OfdmConfig& config) {
  if (!globals.fused) throw sync_error("global estimates not fused yet");
  const double ts = config.sampling_period_s();
  const long start = static_cast<long>(std::llround(globals.sto_mimo_s / ts));
  if (start < 0) throw sync_error("fused frame start precedes the stream");
  const std::size_t needed = config.frame_samples_with_preamble();
  cvec seg;
  // Below a thousandth of a ppm the drift over one frame is sub-micro-sample;
  // engaging the interpolator would only add its own ripple.
  if (std::fabs(globals.sfo_mimo) > 1e-9) {
    // The receiver clock ran at (1 + delta) T_s; reading the stream at
    // positions u / (1 + delta) restores the nominal sample grid.
    cvec src(rx.begin() + start, rx.end());
    const double ratio = 1.0 / (1.0 + globals.sfo_mimo);
    if (static_cast<double>(needed) * ratio + SincInterpolator::kMaxTaps >
        static_cast<double>(src.size()))
      throw sync_error("stream too short for one frame at the fused start");
    seg = resample_by_ratio(src, ratio, rate_interpolator(), needed);
  } else {
    if (static_cast<std::size_t>(start) + needed > rx.size())
      throw sync_error("stream too short for one frame at the fused start");
    seg.assign(rx.begin() + start, rx.begin() + start + static_cast<long>(needed));
  }
  derotate_cfo(seg, globals.cfo_mimo_hz, ts);
  return frame_from_stream(seg, 0, config);
}

struct FineTuneResult {
  std::vector<FrameGrid> frames;
  dvec residual_sto_s;
  dvec residual_cfo_hz;
  std::vector<std::uint8_t> skipped;
  dvec pilot_snr_db;
};

/// Per-channel residual STO/CFO against the dominant (LoS) pilot tap:
/// integer tap from the pilot-domain CIR, fractional part and Doppler drift
/// from weighted phase-slope fits, then both removed so the LoS lands at
/// delay 0 and Doppler 0 on every channel.
inline FineTuneResult fine_tune_residuals(std::vector<FrameGrid> frames, const OfdmConfig& config,
                                          std::uint64_t seed, double min_pilot_snr_db = 12.0) {
  FineTuneResult out;
  const std::size_t nch = frames.size();
  out.residual_sto_s.assign(nch, 0.0);
  out.residual_cfo_hz.assign(nch, 0.0);
  out.skipped.assign(nch, 0);
  out.pilot_snr_db.assign(nch, 0.0);
  const double ts = config.sampling_period_s();
  const double df = config.subcarrier_spacing_hz();
  const double t_sym = config.symbol_duration_s();

  for (std::size_t ch = 0; ch < nch; ++ch) {
    const auto pc = detail::pilot_cfr(frames[ch], config, seed);
    const std::size_t np = pc.n_pil, mp = pc.m_pil;

    // Mean CFR across pilot symbols -> pilot-domain CIR -> dominant tap.
    cvec mean_h(np, cxd(0.0, 0.0));
    for (std::size_t m = 0; m < mp; ++m)
      for (std::size_t k = 0; k < np; ++k) mean_h[k] += pc.h[k + np * m];
    for (auto& v : mean_h) v /= static_cast<double>(mp);

    cvec cir(np, cxd(0.0, 0.0));
    for (std::size_t l = 0; l < np; ++l) {
      cxd acc = 0.0;
      for (std::size_t k = 0; k < np; ++k)
        acc += mean_h[k] * std::polar(1.0, kTwoPi * pc.freq_hz[k] * static_cast<double>(l) * ts);
      cir[l] = acc / static_cast<double>(np);
    }
    std::size_t peak = 0;
    double peak_pw = 0.0, total_pw = 0.0;
    for (std::size_t l = 0; l < np; ++l) {
      const double pw = std::norm(cir[l]);
      total_pw += pw;
      if (pw > peak_pw) {
        peak_pw = pw;
        peak = l;
      }
    }
    const double rest = (total_pw - peak_pw) / std::max<double>(1, np - 1);
    out.pilot_snr_db[ch] = db10_clamped(peak_pw / std::max(rest, 1e-300));
    if (out.pilot_snr_db[ch] < min_pilot_snr_db) {
      out.skipped[ch] = 1;  // leave the frame untouched, report diagnostics
      continue;
    }
    const double tap_delay_s =
        (peak <= np / 2 ? static_cast<double>(peak)
                        : static_cast<double>(peak) - static_cast<double>(np)) *
        ts;

    // Fractional delay from the de-rotated phase slope across pilots.
    dvec phase(np), wgt(np);
    for (std::size_t k = 0; k < np; ++k) {
      const cxd v = mean_h[k] * std::polar(1.0, kTwoPi * pc.freq_hz[k] * tap_delay_s);
      phase[k] = std::arg(v);
      wgt[k] = pc.weight[k] * std::norm(v);
    }
    const dvec uw = detail::unwrap(phase);
    const double slope = detail::ls_slope(pc.freq_hz, uw, wgt);  // rad per Hz
    const double tau_res = tap_delay_s - slope / kTwoPi;

    // Residual CFO from the gated tap's drift across pilot symbols.
    dvec tap_phase(mp), msym(mp), mw(mp, 1.0);
    for (std::size_t m = 0; m < mp; ++m) {
      cxd acc = 0.0;
      for (std::size_t k = 0; k < np; ++k)
        acc += pc.weight[k] * pc.h[k + np * m] * std::polar(1.0, kTwoPi * pc.freq_hz[k] * tau_res);
      tap_phase[m] = std::arg(acc);
      msym[m] = static_cast<double>(m * config.pilot_symbol_spacing);
    }
    const dvec tap_uw = detail::unwrap(tap_phase);
    const double cfo_res = detail::ls_slope(msym, tap_uw, mw) / (kTwoPi * t_sym);

    out.residual_sto_s[ch] = tau_res;
    out.residual_cfo_hz[ch] = cfo_res;

    // Remove both from the full grid.
    FrameGrid& g = frames[ch];
    for (std::size_t m = 0; m < config.num_symbols; ++m) {
      const cxd dop = std::polar(1.0, -kTwoPi * cfo_res * static_cast<double>(m) * t_sym);
      for (std::size_t n = 0; n < config.num_subcarriers; ++n) {
        const double f = bin_frequency(n, config.num_subcarriers, df);
        g.at(n, m) *= dop * std::polar(1.0, kTwoPi * f * tau_res);
      }
    }
  }
  out.frames = std::move(frames);
  return out;
}

}  // namespace bisac
