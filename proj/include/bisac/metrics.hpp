#pragma once

// Scalar performance figures: derived ISAC parameters, image SNR budgets,
// EVM, peak/sidelobe metrics, peak power loss, mean image SIR, and the
// delay-to-phase mismatch mapping.

#include "bisac/common.hpp"
#include "bisac/frame_grid.hpp"
#include "bisac/radar.hpp"

namespace bisac {

struct IsacParams {
  double comm_rate_bps = 0.0;
  double processing_gain_db = 0.0;     // 10 log10(N M)
  double range_resolution_m = 0.0;
  double max_unambiguous_range_m = 0.0;
  double max_isi_free_range_m = 0.0;
  double doppler_resolution_hz = 0.0;
  double max_unambiguous_doppler_hz = 0.0;  // one-sided (+/-)
  double max_ici_free_doppler_hz = 0.0;     // one-sided (+/-)
  double azimuth_resolution_rad = 0.0;
  double max_unambiguous_azimuth_rad = 0.0;  // one-sided (+/-)
};

inline IsacParams derive_isac_params(const OfdmConfig& config, std::size_t n_rx,
                                     double code_rate, int bits_per_symbol) {
  config.validate();
  IsacParams p;
  const double b = config.bandwidth_hz;
  const double ts = config.sampling_period_s();
  const double t_sym = config.symbol_duration_s();
  const double pilot_fraction =
      1.0 / (static_cast<double>(config.pilot_subcarrier_spacing) *
             static_cast<double>(config.pilot_symbol_spacing));
  p.comm_rate_bps = static_cast<double>(bits_per_symbol) * code_rate * (1.0 - pilot_fraction) *
                    static_cast<double>(config.num_subcarriers) / t_sym;
  p.processing_gain_db =
      db10(static_cast<double>(config.num_subcarriers) * static_cast<double>(config.num_symbols));
  p.range_resolution_m = kSpeedOfLight / b;
  p.max_unambiguous_range_m = kSpeedOfLight / config.subcarrier_spacing_hz();
  p.max_isi_free_range_m = kSpeedOfLight * static_cast<double>(config.cp_length) * ts;
  p.doppler_resolution_hz = 1.0 / (static_cast<double>(config.num_symbols) * t_sym);
  p.max_unambiguous_doppler_hz = 1.0 / (2.0 * t_sym);
  p.max_ici_free_doppler_hz = config.subcarrier_spacing_hz() / 10.0;
  p.azimuth_resolution_rad = 2.0 / static_cast<double>(n_rx);
  p.max_unambiguous_azimuth_rad = kPi / 2.0;
  return p;
}

struct LinkBudget {
  double tx_power_w = 1.0;
  double element_gain_tx = 1.0;   // linear
  double element_gain_rx = 1.0;   // linear
  double rcs_m2 = 1.0;
  double range_tx_m = 1.0;        // transmitter -> target
  double range_rx_m = 1.0;        // target -> receiver
  double temperature_k = 290.0;
  double noise_figure = 10.0;     // linear
  double bandwidth_hz = 491.52e6;
  double wavelength_m = kSpeedOfLight / 27.5e9;

  void validate() const {
    for (double v : {tx_power_w, element_gain_tx, element_gain_rx, rcs_m2, range_tx_m,
                     range_rx_m, temperature_k, noise_figure, bandwidth_hz, wavelength_m})
      if (!(v > 0.0)) throw std::invalid_argument("link budget entries must be positive");
  }
};

/// Bistatic image SNR of a target peak; with_doa_gain adds the coherent
/// receive-channel factor n_rx.
inline double image_snr_db(const LinkBudget& b, std::size_t n_tx, std::size_t n_rx,
                           double processing_gain_linear, bool with_doa_gain) {
  b.validate();
  const double rx_gain =
      with_doa_gain ? static_cast<double>(n_rx) * b.element_gain_rx : b.element_gain_rx;
  const double num = b.tx_power_w * (static_cast<double>(n_tx) * b.element_gain_tx) * rx_gain *
                     b.rcs_m2 * b.wavelength_m * b.wavelength_m * processing_gain_linear;
  const double four_pi = 4.0 * kPi;
  const double den = four_pi * four_pi * four_pi * b.range_tx_m * b.range_tx_m * b.range_rx_m *
                     b.range_rx_m * kBoltzmann * b.bandwidth_hz * b.temperature_k *
                     b.noise_figure;
  return db10(num / den);
}

struct EvmResult {
  double mean_db = kDbClamp;
  double spread_db = 0.0;  // std of the per-subcarrier EVM (dB)
};

inline constexpr double kEvmFloorDb = -150.0;

/// EVM over data cells: 20 log10(RMS(Y - X) / RMS(X)), floored at -150 dB.
inline EvmResult evm(const FrameGrid& frame, const FrameGrid& reference) {
  if (!frame.same_shape(reference)) throw std::invalid_argument("EVM grids disagree on shape");
  const std::size_t n = frame.num_subcarriers();
  const std::size_t m = frame.num_symbols();
  double err = 0.0, ref = 0.0;
  dvec per_sub_db;
  per_sub_db.reserve(n);
  for (std::size_t nn = 0; nn < n; ++nn) {
    double e = 0.0, r = 0.0;
    bool any = false;
    for (std::size_t mm = 0; mm < m; ++mm) {
      if (reference.is_pilot(nn, mm)) continue;
      e += std::norm(frame.at(nn, mm) - reference.at(nn, mm));
      r += std::norm(reference.at(nn, mm));
      any = true;
    }
    if (!any) continue;
    err += e;
    ref += r;
    per_sub_db.push_back(std::max(db10_clamped(e / std::max(r, 1e-300)), kEvmFloorDb));
  }
  if (ref <= 0.0) throw std::invalid_argument("EVM reference has no energy");
  EvmResult out;
  out.mean_db = std::max(db10_clamped(err / ref), kEvmFloorDb);
  double mu = 0.0;
  for (double v : per_sub_db) mu += v;
  mu /= static_cast<double>(per_sub_db.size());
  double var = 0.0;
  for (double v : per_sub_db) var += (v - mu) * (v - mu);
  out.spread_db = std::sqrt(var / static_cast<double>(per_sub_db.size()));
  return out;
}

struct SidelobeMetrics {
  double pslr_db = kDbClamp;
  double islr_db = kDbClamp;
  std::size_t peak = 0;
  std::size_t mainlobe_left = 0;
  std::size_t mainlobe_right = 0;  // cyclic extents around the peak
};

namespace detail {

/// Mainlobe extent around `peak` on a cyclic axis (both DFT axes here wrap):
/// walk outward while the profile strictly decreases; the lobe ends where it
/// turns up or plateaus. At least `guard` bins each side, at most half the
/// circle.
struct MainlobeExtent {
  std::size_t left = 0;   // bins before the peak (cyclic)
  std::size_t right = 0;  // bins after the peak (cyclic)

  bool contains(std::size_t idx, std::size_t peak, std::size_t n) const {
    const std::size_t fwd = (idx + n - peak) % n;
    return fwd <= right || (n - fwd) <= left;
  }
};

/// `level_drop_db`, when finite, also ends the lobe once the profile has
/// fallen that far below the peak (needed on noisy floors where no clean
/// null survives).
inline MainlobeExtent mainlobe_extent(const dvec& power, std::size_t peak, std::size_t guard,
                                      double level_drop_db = std::numeric_limits<double>::infinity()) {
  const std::size_t n = power.size();
  const std::size_t cap = n / 2 > 0 ? n / 2 - (n % 2 == 0 ? 1 : 0) : 0;
  const double level = power[peak] * std::pow(10.0, -level_drop_db / 10.0);
  auto walk = [&](std::size_t step) {
    // Monotone decay all the way to the cap means there is no lobe null to
    // find (off-bin peaks have none); the guard delimits in that case.
    std::size_t extent = std::min(guard, cap);
    for (std::size_t i = 1; i <= cap; ++i) {
      const std::size_t cur = (peak + step * i) % n;
      const std::size_t prev = (peak + step * (i - 1)) % n;
      if (power[cur] >= power[prev] || power[cur] <= level) {
        extent = i;  // the first minimum (or the level edge) stays inside
        break;
      }
    }
    return std::max(extent, std::min(guard, cap));
  };
  MainlobeExtent e;
  e.right = walk(1);
  e.left = walk(n - 1);
  return e;
}

}  // namespace detail

/// Peak-to-sidelobe and integrated-sidelobe ratios of a 1-D magnitude
/// profile. The mainlobe is bounded by the first local minima around the
/// unique global peak (guard of `mainlobe_width` bins as fallback).
inline SidelobeMetrics peak_sidelobe_metrics(const dvec& magnitude, std::size_t mainlobe_width = 2) {
  if (magnitude.size() < 3) throw std::invalid_argument("profile too short");
  dvec power(magnitude.size());
  for (std::size_t i = 0; i < magnitude.size(); ++i) power[i] = magnitude[i] * magnitude[i];
  std::size_t peak = 0;
  for (std::size_t i = 1; i < power.size(); ++i)
    if (power[i] > power[peak]) peak = i;
  std::size_t peak_count = 0;
  for (double v : power) peak_count += (v == power[peak]);
  if (power[peak] <= 0.0 || peak_count != 1)
    throw std::invalid_argument("profile has no unique peak");

  const detail::MainlobeExtent ext = detail::mainlobe_extent(power, peak, mainlobe_width);
  double main_sum = 0.0, side_sum = 0.0, side_peak = 0.0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    if (ext.contains(i, peak, power.size())) {
      main_sum += power[i];
    } else {
      side_sum += power[i];
      side_peak = std::max(side_peak, power[i]);
    }
  }
  SidelobeMetrics out;
  out.peak = peak;
  out.mainlobe_left = ext.left;
  out.mainlobe_right = ext.right;
  out.pslr_db = db10_clamped(side_peak / power[peak]);
  out.islr_db = db10_clamped(side_sum / std::max(main_sum, 1e-300));
  return out;
}

/// Peak power loss vs a reference peak (<= 0 dB within noise).
inline double pplr_db(double image_peak_power, double reference_peak_power) {
  if (!(reference_peak_power > 0.0)) throw std::invalid_argument("reference peak must be positive");
  return db10_clamped(image_peak_power / reference_peak_power);
}

/// Target peak power over the mean power of the rest of the zero-Doppler
/// cut, the target's mainlobe rectangle excluded. The lobe edges come from
/// the first local minima, additionally bounded at `lobe_level_db` below the
/// peak so a noise floor cannot stretch the walk. Clamped at +/-300 dB.
inline double mean_image_sir_db(const ImageCut& cut, std::size_t range_bin, std::size_t az_bin,
                                std::size_t guard = 2, double lobe_level_db = 40.0) {
  if (range_bin >= cut.num_range || az_bin >= cut.num_azimuth)
    throw std::invalid_argument("target cell outside the image");
  const double peak = cut.at(range_bin, az_bin);
  double total = 0.0;
  for (double v : cut.power) total += v;
  if (!(total > 0.0)) throw std::invalid_argument("degenerate image (no energy)");

  dvec range_profile(cut.num_range), az_profile(cut.num_azimuth);
  for (std::size_t l = 0; l < cut.num_range; ++l) range_profile[l] = cut.at(l, az_bin);
  for (std::size_t s = 0; s < cut.num_azimuth; ++s) az_profile[s] = cut.at(range_bin, s);
  const auto rext = detail::mainlobe_extent(range_profile, range_bin, guard, lobe_level_db);
  const auto aext = detail::mainlobe_extent(az_profile, az_bin, guard, lobe_level_db);

  double rest = 0.0;
  std::size_t count = 0;
  for (std::size_t l = 0; l < cut.num_range; ++l)
    for (std::size_t s = 0; s < cut.num_azimuth; ++s) {
      if (rext.contains(l, range_bin, cut.num_range) &&
          aext.contains(s, az_bin, cut.num_azimuth))
        continue;
      rest += cut.at(l, s);
      ++count;
    }
  if (count == 0) return -kDbClamp;  // nothing but mainlobe: clamp high
  const double mean_rest = rest / static_cast<double>(count);
  if (mean_rest <= 0.0) return -kDbClamp;
  return std::min(std::max(db10(peak / mean_rest), kDbClamp), -kDbClamp);
}

struct PhaseStd {
  double linear_rad = 0.0;             // 2 pi f_if sigma_tau, unwrapped
  double angular_deviation_rad = 0.0;  // circular-statistics variant, caps at sqrt(2)
};

inline PhaseStd delay_to_phase_std(double sigma_tau_s, double f_if_hz) {
  if (sigma_tau_s < 0.0 || f_if_hz < 0.0)
    throw std::invalid_argument("delay-to-phase mapping needs nonnegative inputs");
  PhaseStd out;
  out.linear_rad = kTwoPi * f_if_hz * sigma_tau_s;
  out.angular_deviation_rad =
      std::sqrt(2.0 * (1.0 - std::exp(-0.5 * out.linear_rad * out.linear_rad)));
  return out;
}

}  // namespace bisac
