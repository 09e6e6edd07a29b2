#include <catch2/catch_amalgamated.hpp>

#include "bisac/impairments.hpp"
#include "bisac/waveform.hpp"

using namespace bisac;
using Catch::Approx;

namespace {

constexpr double kFs = 491.52e6;
constexpr double kTs = 1.0 / kFs;

PathSet los_only(double doa_rad = 0.0, double dod_rad = 0.0, double delay_s = 0.0,
                 double att = 1.0) {
  Path p;
  p.is_los = true;
  p.attenuation = att;
  p.tx_delay_s = delay_s;
  p.dod_rad = dod_rad;
  p.doa_rad = doa_rad;
  return PathSet{{p}};
}

cvec random_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  cvec x(n);
  for (auto& v : x) v = rng.cnormal(1.0);
  return x;
}

}  // namespace

TEST_CASE("identity scenario: coherent transmit gain at the true DoD") {
  const auto tx_geom = UlaGeometry::make(4, 27.5e9);
  const auto rx_geom = UlaGeometry::make(2, 27.5e9);
  const cvec x = random_signal(512, 1);

  for (double dod_deg : {0.0, 30.0}) {
    const PathSet paths = los_only(0.0, deg2rad(dod_deg));
    const auto chans =
        apply_tx_beamforming(x, {transmit_steering_vector(tx_geom, deg2rad(dod_deg))});
    const auto r = propagate(chans, tx_geom, rx_geom, paths, {}, kFs, 7);
    REQUIRE(r.rx.size() == 2);
    // y = 4 x (up to a common carrier phase of exactly 1 here: tau = 0).
    for (std::size_t s = 0; s < x.size(); ++s)
      REQUIRE(std::abs(r.rx[0][s] - 4.0 * x[s]) < 1e-12 * 4.0 * std::abs(x[s]) + 1e-12);
  }
}

TEST_CASE("pure CFO shifts a tone by exactly the configured offset") {
  const auto g1 = UlaGeometry::make(1, 27.5e9);
  const std::size_t n = 1 << 15;
  const double f0 = 12.25e6;
  cvec x(n);
  for (std::size_t s = 0; s < n; ++s)
    x[s] = std::polar(1.0, kTwoPi * f0 * static_cast<double>(s) * kTs);

  ImpairmentSpec imp;
  imp.cfo_hz = 15.4e3;
  const auto r = propagate({x}, g1, g1, los_only(), imp, kFs, 3);

  // FFT-peak oracle with parabolic refinement on the padded spectrum.
  cvec buf(1 << 17, cxd(0.0, 0.0));
  std::copy(r.rx[0].begin(), r.rx[0].begin() + n, buf.begin());
  fft_inplace(buf);
  std::size_t peak = 0;
  for (std::size_t k = 1; k < buf.size(); ++k)
    if (std::abs(buf[k]) > std::abs(buf[peak])) peak = k;
  const double ym = std::abs(buf[(peak + buf.size() - 1) % buf.size()]);
  const double y0 = std::abs(buf[peak]);
  const double yp = std::abs(buf[(peak + 1) % buf.size()]);
  const double frac = 0.5 * (ym - yp) / (ym - 2.0 * y0 + yp);
  const double df_bin = kFs / static_cast<double>(buf.size());
  const double measured = bin_frequency(peak, buf.size(), df_bin) + frac * df_bin;

  const double delta_f = kFs / 2048.0;  // Table-I subcarrier spacing
  REQUIRE(std::fabs(measured - (f0 + imp.cfo_hz)) < delta_f / 1000.0);
}

TEST_CASE("LoS at +30 deg: adjacent receive channels differ by -pi/2") {
  const auto g1 = UlaGeometry::make(1, 27.5e9);
  const auto rx2 = UlaGeometry::make(2, 27.5e9);
  const cvec x = random_signal(256, 9);
  const auto r = propagate({x}, g1, rx2, los_only(deg2rad(30.0)), {}, kFs, 1);
  // Inter-channel phase on any strong sample.
  for (std::size_t s = 10; s < 50; ++s) {
    if (std::abs(x[s]) < 0.3) continue;
    const double diff = std::arg(r.rx[1][s] / r.rx[0][s]);
    REQUIRE(diff == Approx(-kPi / 2.0).margin(1e-6));
  }
}

TEST_CASE("rayleigh channel delays: anchor channel, support, and spread") {
  REQUIRE(sample_rayleigh_channel_delays(0.0, 8, 5) == dvec(8, 0.0));

  const dvec d = sample_rayleigh_channel_delays(1e-9, 8, 5);
  REQUIRE(d[0] == 0.0);
  for (double v : d) REQUIRE(v >= 0.0);

  // Monte-Carlo oracle: 1e6 draws, sample std within 1% of 1 ns.
  const std::size_t trials = 125000;
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const dvec dd = sample_rayleigh_channel_delays(1e-9, 9, 1000 + t);
    for (std::size_t n = 1; n < 9; ++n) {
      sum += dd[n];
      sum2 += dd[n] * dd[n];
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  const double var = sum2 / static_cast<double>(count) - mean * mean;
  REQUIRE(std::sqrt(var) == Approx(1e-9).epsilon(0.01));
  // Rayleigh mean/std ratio as a shape check.
  REQUIRE(mean / std::sqrt(var) == Approx(std::sqrt(kPi / (4.0 - kPi))).epsilon(0.01));
}

TEST_CASE("hardware banks: ideal and measured-like profiles") {
  const auto ideal = make_abe_bank(4, HardwareProfile::ideal, 1, kTs);
  for (const auto& r : ideal) {
    REQUIRE(r.is_identity());
    for (const auto& h : r.cfr_on_grid(64, 1e6)) REQUIRE(std::abs(h - cxd(1.0, 0.0)) < 1e-15);
  }

  const auto bank = make_abe_bank(8, HardwareProfile::measured_like, 2, kTs);
  dvec delays;
  for (const auto& r : bank) {
    REQUIRE(r.dominant_delay_s >= 0.0);
    REQUIRE(r.dominant_delay_s <= 3e-9);
    delays.push_back(r.dominant_delay_s);
    const double peak = std::abs(r.taps[0]);
    for (std::size_t j = 1; j < r.taps.size(); ++j) REQUIRE(peak >= 3.0 * std::abs(r.taps[j]));
    // Band ripple at most 3 dB.
    double lo = 1e300, hi = 0.0;
    for (const auto& h : r.cfr_on_grid(256, kFs / 256.0)) {
      lo = std::min(lo, std::abs(h));
      hi = std::max(hi, std::abs(h));
    }
    REQUIRE(db20(hi / lo) <= 3.0 + 1e-9);
  }
  double mean = 0.0, var = 0.0;
  for (double v : delays) mean += v;
  mean /= static_cast<double>(delays.size());
  for (double v : delays) var += (v - mean) * (v - mean);
  REQUIRE(var > 0.0);
}

TEST_CASE("propagation is linear in the transmit signal") {
  const auto tx_geom = UlaGeometry::make(2, 27.5e9);
  const auto rx_geom = UlaGeometry::make(2, 27.5e9);
  PathSet paths = los_only(deg2rad(10.0), deg2rad(5.0), 13.7 * kTs);
  Path extra;
  extra.attenuation = 0.4;
  extra.tx_delay_s = 40.3 * kTs;
  extra.rx_delay_s = 11.9 * kTs;
  extra.doppler_hz = 80e3;
  extra.dod_rad = deg2rad(25.0);
  extra.doa_rad = deg2rad(-20.0);
  paths.paths.push_back(extra);

  ImpairmentSpec imp;
  imp.sto_s = 5.4 * kTs;
  imp.cfo_hz = 11e3;
  imp.common_phase_rad = 0.7;
  imp.normalized_sfo = 20e-6;
  imp.abe = make_abe_bank(2, HardwareProfile::measured_like, 4, kTs);
  imp.rx_channel_delays_s = {0.0, 0.8e-9};
  imp.delay_phase_carrier_hz = 3.68e9;

  const cvec x = random_signal(2048, 11);
  const cvec y = random_signal(2048, 12);
  const cxd a(0.8, -0.3), b(-0.2, 1.1);
  cvec mix(2048);
  for (std::size_t s = 0; s < 2048; ++s) mix[s] = a * x[s] + b * y[s];

  const auto rx_x = propagate({x, x}, tx_geom, rx_geom, paths, imp, kFs, 1);
  const auto ry = propagate({y, y}, tx_geom, rx_geom, paths, imp, kFs, 1);
  const auto rm = propagate({mix, mix}, tx_geom, rx_geom, paths, imp, kFs, 1);
  for (std::size_t ch = 0; ch < 2; ++ch) {
    double err = 0.0, ref = 0.0;
    for (std::size_t s = 0; s < rm.rx[ch].size(); ++s) {
      const cxd lin = a * rx_x.rx[ch][s] + b * ry.rx[ch][s];
      err += std::norm(rm.rx[ch][s] - lin);
      ref += std::norm(lin);
    }
    REQUIRE(err <= 1e-20 * ref);
  }
}

TEST_CASE("noise calibration: null input measures k_B B T NF") {
  const auto g1 = UlaGeometry::make(1, 27.5e9);
  ImpairmentSpec imp;
  imp.noise.enabled = true;
  imp.noise.noise_figure_db = 10.0;
  imp.noise.temperature_k = 290.0;
  const cvec zeros(1 << 20, cxd(0.0, 0.0));
  const auto r = propagate({zeros}, g1, g1, los_only(), imp, kFs, 77);
  double p = 0.0;
  for (const auto& v : r.rx[0]) p += std::norm(v);
  p /= static_cast<double>(r.rx[0].size());
  const double expect = kBoltzmann * kFs * 290.0 * 10.0;
  REQUIRE(p == Approx(expect).epsilon(0.02));
}

TEST_CASE("static LoS keeps the frame-to-frame phase constant") {
  const auto g1 = UlaGeometry::make(1, 27.5e9);
  const std::size_t frame = 512;
  cvec x = random_signal(frame, 21);
  cvec two_frames(x);
  two_frames.insert(two_frames.end(), x.begin(), x.end());

  ImpairmentSpec imp;
  imp.abe = make_abe_bank(1, HardwareProfile::measured_like, 3, kTs);
  const auto r =
      propagate({two_frames}, g1, g1, los_only(deg2rad(12.0), 0.0, 31.4 * kTs), imp, kFs, 1);
  // Steady-state segments one frame apart must be identical.
  for (std::size_t s = 100; s < frame - 40; ++s)
    REQUIRE(std::abs(r.rx[0][s + frame] - r.rx[0][s]) < 1e-10);
}

TEST_CASE("SFO round trip recovers a band-limited signal within -60 dB") {
  // 75% band occupancy, 100 ppm each way.
  const std::size_t n = 1 << 16;
  cvec spec(n, cxd(0.0, 0.0));
  Rng rng(5);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = bin_frequency(k, n, 1.0 / static_cast<double>(n));
    if (std::fabs(f) <= 0.375) spec[k] = rng.cnormal(1.0);
  }
  cvec x = ifft(std::move(spec));
  const SincInterpolator interp;
  const double delta = 100e-6;
  const cvec up = resample_by_ratio(x, 1.0 + delta, interp, n);
  const cvec back = resample_by_ratio(up, 1.0 / (1.0 + delta), interp, n);
  double err = 0.0, ref = 0.0;
  for (std::size_t s = 64; s + 64 < n; ++s) {
    err += std::norm(back[s] - x[s]);
    ref += std::norm(x[s]);
  }
  REQUIRE(db10(err / ref) < -60.0);
}

TEST_CASE("fractional delay: integer part exact, fractional part accurate in band") {
  const SincInterpolator interp;
  // Integer delay is a pure shift.
  cvec x = random_signal(256, 31);
  const cvec d5 = fractional_delay(x, 5.0, interp);
  for (std::size_t s = 5; s < 256; ++s) REQUIRE(d5[s] == x[s - 5]);

  // Half-sample delay of a mid-band tone: compare against the exact shift.
  const double f = 0.19;  // cycles/sample
  cvec tone(4096);
  for (std::size_t s = 0; s < tone.size(); ++s)
    tone[s] = std::polar(1.0, kTwoPi * f * static_cast<double>(s));
  const cvec half = fractional_delay(tone, 0.5, interp);
  double err = 0.0;
  for (std::size_t s = 64; s + 64 < tone.size(); ++s)
    err = std::max(err, std::abs(half[s] - std::polar(1.0, kTwoPi * f * (static_cast<double>(s) - 0.5))));
  REQUIRE(err < 2e-4);
}

TEST_CASE("model validation errors") {
  const auto g1 = UlaGeometry::make(1, 27.5e9);
  PathSet no_los;
  Path p;
  p.is_los = false;
  no_los.paths = {p};
  const cvec x(64, cxd(1.0, 0.0));
  REQUIRE_THROWS_AS(propagate({x}, g1, g1, no_los, {}, kFs, 1), model_error);

  PathSet bad = los_only();
  bad.paths[0].doppler_hz = 10.0;  // LoS must be static
  REQUIRE_THROWS_AS(propagate({x}, g1, g1, bad, {}, kFs, 1), model_error);

  ImpairmentSpec imp;
  imp.normalized_sfo = 0.01;  // outside the ppm regime
  REQUIRE_THROWS_AS(propagate({x}, g1, g1, los_only(), imp, kFs, 1), config_error);

  ImpairmentSpec huge;
  huge.sto_s = 1.0;  // one full second of delay cannot fit any buffer here
  REQUIRE_THROWS_AS(propagate({x}, g1, g1, los_only(), huge, kFs, 1), config_error);
}
