#include <catch2/catch_amalgamated.hpp>

#include "bisac/metrics.hpp"
#include "bisac/waveform.hpp"

using namespace bisac;
using Catch::Approx;

namespace {

/// |computed - printed| at most one unit in the printed last digit.
void check_printed(double value, double printed, double ulp) {
  char buf[64];
  const int decimals = ulp >= 1.0 ? 0 : static_cast<int>(std::lround(-std::log10(ulp)));
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  REQUIRE(std::fabs(std::atof(buf) - printed) <= ulp + 1e-12);
}

}  // namespace

TEST_CASE("Table-I golden: the full right column at printed precision") {
  const OfdmConfig c = OfdmConfig::full_profile();
  const IsacParams p = derive_isac_params(c, 8, 2.0 / 3.0, 2);
  check_printed(p.comm_rate_bps / 1e9, 0.39, 0.01);
  check_printed(p.processing_gain_db, 60.22, 0.01);
  check_printed(p.range_resolution_m, 0.61, 0.01);
  check_printed(p.max_unambiguous_range_m, 1249.14, 0.01);
  check_printed(p.max_isi_free_range_m, 312.28, 0.01);
  check_printed(p.doppler_resolution_hz, 375.0, 1.0);
  check_printed(p.max_unambiguous_doppler_hz / 1e3, 96.0, 1.0);
  check_printed(p.max_ici_free_doppler_hz / 1e3, 24.0, 1.0);
  check_printed(rad2deg(p.azimuth_resolution_rad), 14.32, 0.01);
  check_printed(rad2deg(p.max_unambiguous_azimuth_rad), 90.0, 1.0);
}

TEST_CASE("ISAC parameter identities and proportionality") {
  const OfdmConfig c = OfdmConfig::full_profile();
  const IsacParams p = derive_isac_params(c, 8, 2.0 / 3.0, 2);
  REQUIRE(p.range_resolution_m * static_cast<double>(c.num_subcarriers) ==
          Approx(p.max_unambiguous_range_m).epsilon(1e-12));
  REQUIRE(p.range_resolution_m * static_cast<double>(c.cp_length) ==
          Approx(p.max_isi_free_range_m).epsilon(1e-12));

  OfdmConfig doubled = c;
  doubled.bandwidth_hz *= 2.0;
  const IsacParams p2 = derive_isac_params(doubled, 8, 2.0 / 3.0, 2);
  REQUIRE(p2.range_resolution_m == Approx(p.range_resolution_m / 2.0).epsilon(1e-12));
  REQUIRE(p2.max_unambiguous_range_m ==
          Approx(p.max_unambiguous_range_m / 2.0).epsilon(1e-12));

  OfdmConfig no_cp = c;
  no_cp.cp_length = 0;
  REQUIRE(derive_isac_params(no_cp, 8, 2.0 / 3.0, 2).max_isi_free_range_m == 0.0);
}

TEST_CASE("image SNR: DoA gain ratio, inverse-square law, and a numeric case") {
  LinkBudget b;
  b.range_tx_m = 100.0;
  b.range_rx_m = 100.0;
  const double gp = 2048.0 * 512.0;
  const double without = image_snr_db(b, 4, 8, gp, false);
  const double with = image_snr_db(b, 4, 8, gp, true);
  REQUIRE(with - without == Approx(db10(8.0)).margin(1e-12));
  REQUIRE(with - without == Approx(9.03).margin(0.005));

  LinkBudget far = b;
  far.range_tx_m *= 2.0;
  REQUIRE(image_snr_db(far, 4, 8, gp, false) - without == Approx(-6.0206).margin(1e-6));

  // Independent dB-domain evaluation of the full budget (n_tx = 1).
  const double lambda = kSpeedOfLight / 27.5e9;
  const double expected_db =
      db10(b.tx_power_w) + db10(1.0 * b.element_gain_tx) + db10(b.element_gain_rx) +
      db10(b.rcs_m2) + 2.0 * db10(lambda) + db10(gp) - 3.0 * db10(4.0 * kPi) -
      2.0 * db10(b.range_tx_m) - 2.0 * db10(b.range_rx_m) - db10(kBoltzmann) -
      db10(b.bandwidth_hz) - db10(b.temperature_k) - db10(b.noise_figure);
  REQUIRE(image_snr_db(b, 1, 8, gp, false) == Approx(expected_db).margin(1e-9));
}

TEST_CASE("EVM: floor, calibrated noise, and gain error") {
  const OfdmConfig c = OfdmConfig::desk_profile();
  const TxFrame tx = build_frame(c, {}, 1);
  REQUIRE(evm(tx.grid, tx.grid).mean_db == kEvmFloorDb);

  Rng rng(2);
  FrameGrid noisy = tx.grid;
  for (auto& v : noisy.cells()) v += rng.cnormal(0.01);
  REQUIRE(evm(noisy, tx.grid).mean_db == Approx(-20.0).margin(0.1));

  FrameGrid gained = tx.grid;
  for (auto& v : gained.cells()) v *= 1.122;
  REQUIRE(evm(gained, tx.grid).mean_db == Approx(-18.3).margin(0.06));
  REQUIRE(evm(gained, tx.grid).spread_db == Approx(0.0).margin(1e-9));
}

TEST_CASE("peak/sidelobe metrics: dense Dirichlet kernel of length 8") {
  // Rectangular 8-element azimuth response evaluated densely in sin space.
  const std::size_t points = 4096;
  dvec profile(points);
  for (std::size_t j = 0; j < points; ++j) {
    const double u = -1.0 + 2.0 * static_cast<double>(j) / points;
    cxd acc = 0.0;
    for (int n = 0; n < 8; ++n)
      acc += std::polar(1.0, kPi * (static_cast<double>(n) - 3.5) * u);
    profile[j] = std::abs(acc);
  }
  const SidelobeMetrics sm = peak_sidelobe_metrics(profile);
  // Analytic first sidelobe of the 8-element Dirichlet kernel.
  double analytic = 0.0;
  for (double u = 0.25; u <= 0.5; u += 1e-5)
    analytic = std::max(analytic, std::fabs(std::sin(4.0 * kPi * u) / std::sin(kPi * u / 2.0)));
  REQUIRE(sm.pslr_db == Approx(db20(analytic / 8.0)).margin(0.2));
  REQUIRE(sm.pslr_db == Approx(-12.8).margin(0.2));
  REQUIRE(sm.islr_db > sm.pslr_db);  // integrated sidelobes exceed the largest one
}

TEST_CASE("peak/sidelobe metrics: clamps and degenerate profiles") {
  dvec lonely(64, 0.0);
  lonely[20] = 3.0;
  const SidelobeMetrics sm = peak_sidelobe_metrics(lonely);
  REQUIRE(sm.pslr_db == kDbClamp);
  REQUIRE(sm.islr_db == kDbClamp);

  REQUIRE_THROWS_AS(peak_sidelobe_metrics(dvec(32, 1.0)), std::invalid_argument);
  REQUIRE_THROWS_AS(peak_sidelobe_metrics(dvec{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("PPLR: identities and the random-phasor expectation") {
  REQUIRE(pplr_db(4.0, 4.0) == Approx(0.0).margin(1e-12));
  REQUIRE(pplr_db(2.0, 4.0) == Approx(-3.0103).margin(1e-4));
  REQUIRE_THROWS_AS(pplr_db(1.0, 0.0), std::invalid_argument);

  // Eight i.i.d. uniform phasors vs the coherent sum: expect 8/64.
  Rng rng(3);
  double acc = 0.0;
  const int seeds = 20000;
  for (int t = 0; t < seeds; ++t) {
    cxd s = 0.0;
    for (int k = 0; k < 8; ++k) s += std::polar(1.0, rng.uniform(0.0, kTwoPi));
    acc += std::norm(s) / 64.0;
  }
  REQUIRE(db10(acc / seeds) == Approx(db10(8.0 / 64.0)).margin(0.2));
}

TEST_CASE("mean image SIR: delta and uniform images") {
  ImageCut cut;
  cut.num_range = 16;
  cut.num_azimuth = 8;
  cut.power.assign(16 * 8, 0.0);
  cut.power[3 + 8 * 5] = 9.0;
  REQUIRE(mean_image_sir_db(cut, 5, 3) == 300.0);

  ImageCut uniform = cut;
  uniform.power.assign(16 * 8, 2.5);
  REQUIRE(mean_image_sir_db(uniform, 5, 3) == Approx(0.0).margin(1e-12));

  ImageCut empty = cut;
  empty.power.assign(16 * 8, 0.0);
  REQUIRE_THROWS_AS(mean_image_sir_db(empty, 5, 3), std::invalid_argument);
}

TEST_CASE("delay-to-phase mapping: paper anchor points and linearity") {
  const double ts = 1.0 / 491.52e6;
  const double f_if = 3.68e9;
  const PhaseStd a = delay_to_phase_std(1e-3 * ts, f_if);
  REQUIRE(rad2deg(a.linear_rad) == Approx(2.70).margin(0.01));
  const PhaseStd b = delay_to_phase_std(1e-2 * ts, f_if);
  REQUIRE(rad2deg(b.linear_rad) == Approx(26.96).margin(0.01));
  REQUIRE(delay_to_phase_std(0.0, f_if).linear_rad == 0.0);
  // Linear below 1e-2 Ts: doubling sigma_tau doubles sigma_theta.
  for (double st : {1e-5 * ts, 1e-4 * ts, 1e-3 * ts}) {
    const PhaseStd lo = delay_to_phase_std(st, f_if);
    const PhaseStd hi = delay_to_phase_std(2.0 * st, f_if);
    REQUIRE(hi.linear_rad == Approx(2.0 * lo.linear_rad).epsilon(1e-12));
  }
  // The circular variant saturates at sqrt(2).
  REQUIRE(delay_to_phase_std(1e3 * ts, f_if).angular_deviation_rad ==
          Approx(std::sqrt(2.0)).epsilon(1e-6));
  REQUIRE_THROWS_AS(delay_to_phase_std(-1.0, f_if), std::invalid_argument);
}
