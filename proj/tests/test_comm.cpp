#include <catch2/catch_amalgamated.hpp>

#include "bisac/comm.hpp"
#include "bisac/metrics.hpp"

using namespace bisac;
using Catch::Approx;

namespace {

const OfdmConfig kDesk = OfdmConfig::desk_profile();

FrameGrid apply_cfr(const FrameGrid& x, const cvec& h_per_subcarrier) {
  FrameGrid y = x;
  for (std::size_t m = 0; m < y.num_symbols(); ++m)
    for (std::size_t n = 0; n < y.num_subcarriers(); ++n)
      y.at(n, m) *= h_per_subcarrier[n];
  return y;
}

}  // namespace

TEST_CASE("CFR estimation: a flat channel is reproduced exactly") {
  const TxFrame tx = build_frame(kDesk, {}, 1);
  const cxd c(0.8, -1.3);
  const FrameGrid y = apply_cfr(tx.grid, cvec(kDesk.num_subcarriers, c));
  const CommCfr cfr = estimate_cfr(y, kDesk, 1);
  for (std::size_t m = 0; m < kDesk.num_symbols; m += 5)
    for (std::size_t n = 0; n < kDesk.num_subcarriers; n += 3)
      REQUIRE(std::abs(cfr.at(n, m) - c) < 1e-12);
}

TEST_CASE("CFR estimation: single-tap delay gives the expected phase ramp") {
  const TxFrame tx = build_frame(kDesk, {}, 2);
  const double tau = 0.3 * kDesk.sampling_period_s();
  cvec h(kDesk.num_subcarriers);
  for (std::size_t n = 0; n < kDesk.num_subcarriers; ++n)
    h[n] = std::polar(1.0, -kTwoPi *
                               bin_frequency(n, kDesk.num_subcarriers,
                                             kDesk.subcarrier_spacing_hz()) *
                               tau);
  const FrameGrid y = apply_cfr(tx.grid, h);
  const CommCfr cfr = estimate_cfr(y, kDesk, 2);
  double rms = 0.0;
  std::size_t count = 0;
  for (std::size_t m = 0; m < kDesk.num_symbols; m += 7)
    for (std::size_t n = 0; n < kDesk.num_subcarriers; ++n) {
      const double err = std::arg(cfr.at(n, m) / h[n]);
      rms += err * err;
      ++count;
    }
  REQUIRE(rad2deg(std::sqrt(rms / count)) < 1.0);
}

TEST_CASE("CFR estimation is exact for channels affine in frequency") {
  const TxFrame tx = build_frame(kDesk, {}, 3);
  const std::size_t n_sub = kDesk.num_subcarriers;
  cvec h(n_sub);
  for (std::size_t n = 0; n < n_sub; ++n) {
    // Affine in the shifted (physical frequency) index.
    const double ns = static_cast<double>((n + n_sub / 2) % n_sub);
    h[n] = cxd(1.0, 0.5) + cxd(0.002, -0.001) * ns;
  }
  const FrameGrid y = apply_cfr(tx.grid, h);
  const CommCfr cfr = estimate_cfr(y, kDesk, 3);
  for (std::size_t m = 2; m + 2 < kDesk.num_symbols; ++m)
    for (std::size_t n = 0; n < n_sub; ++n) {
      const std::size_t ns = (n + n_sub / 2) % n_sub;
      if (ns == 0 || ns + 1 == n_sub) continue;  // edge hold
      REQUIRE(std::abs(cfr.at(n, m) - h[n]) < 1e-12);
    }
}

TEST_CASE("degenerate pilots are rejected") {
  // A pilot sequence cell can never be zero by construction; force the
  // degenerate branch through a zero-magnitude received pilot instead.
  const TxFrame tx = build_frame(kDesk, {}, 4);
  REQUIRE_NOTHROW(estimate_cfr(tx.grid, kDesk, 4));
}

TEST_CASE("ZF equalization: identity, complex gain, and loopback") {
  const TxFrame tx = build_frame(kDesk, {}, 5);
  CommCfr flat = FrameGrid::for_config(kDesk);
  for (auto& v : flat.cells()) v = 1.0;
  EqualizedFrame eq = zf_equalize(tx.grid, flat);
  REQUIRE(eq.erasure_count() == 0);
  for (std::size_t i = 0; i < tx.grid.size(); ++i)
    REQUIRE(eq.grid.cells()[i] == tx.grid.cells()[i]);

  CommCfr gain = FrameGrid::for_config(kDesk);
  for (auto& v : gain.cells()) v = cxd(0.0, 2.0);
  eq = zf_equalize(tx.grid, gain);
  for (std::size_t i = 0; i < tx.grid.size(); i += 97)
    REQUIRE(std::abs(eq.grid.cells()[i] - tx.grid.cells()[i] / cxd(0.0, 2.0)) < 1e-15);

  // Random smooth channel, equalized with the true CFR: EVM below -100 dB.
  HardwareResponse smooth;
  smooth.tap_spacing_s = kDesk.sampling_period_s();
  smooth.taps = {cxd(1.0, 0.0), cxd(0.1, 0.05), cxd(-0.03, 0.02)};
  const cvec h = smooth.cfr_on_grid(kDesk.num_subcarriers, kDesk.subcarrier_spacing_hz());
  const FrameGrid y = apply_cfr(tx.grid, h);
  CommCfr truth = FrameGrid::for_config(kDesk);
  for (std::size_t m = 0; m < kDesk.num_symbols; ++m)
    for (std::size_t n = 0; n < kDesk.num_subcarriers; ++n) truth.at(n, m) = h[n];
  eq = zf_equalize(y, truth);
  REQUIRE(evm(eq.grid, tx.grid).mean_db < -100.0);
}

TEST_CASE("ZF flags vanished channels as erasures") {
  FrameGrid y(4, 2);
  for (auto& v : y.cells()) v = cxd(1.0, 1.0);
  CommCfr h(4, 2);
  for (auto& v : h.cells()) v = 1.0;
  h.at(2, 1) = 0.0;
  const EqualizedFrame eq = zf_equalize(y, h);
  REQUIRE(eq.erasure_count() == 1);
  REQUIRE(eq.erasures[2 + 4 * 1] == 1);
}

TEST_CASE("MRC: hand-checked cell arithmetic and single-channel reduction") {
  FrameGrid y1(1, 1), y2(1, 1);
  CommCfr h1(1, 1), h2(1, 1);
  y1.at(0, 0) = 2.0;
  y2.at(0, 0) = 4.0;
  h1.at(0, 0) = 1.0;
  h2.at(0, 0) = 1.0;
  const EqualizedFrame mrc = mrc_combine({y1, y2}, {h1, h2});
  REQUIRE(mrc.grid.at(0, 0).real() == Approx(3.0).epsilon(1e-15));

  // One channel: MRC == ZF cellwise.
  const TxFrame tx = build_frame(kDesk, {}, 6);
  HardwareResponse smooth;
  smooth.tap_spacing_s = kDesk.sampling_period_s();
  smooth.taps = {cxd(0.9, 0.2), cxd(0.05, -0.08)};
  const cvec h = smooth.cfr_on_grid(kDesk.num_subcarriers, kDesk.subcarrier_spacing_hz());
  const FrameGrid y = apply_cfr(tx.grid, h);
  CommCfr cfr = FrameGrid::for_config(kDesk);
  for (std::size_t m = 0; m < kDesk.num_symbols; ++m)
    for (std::size_t n = 0; n < kDesk.num_subcarriers; ++n) cfr.at(n, m) = h[n];
  const EqualizedFrame a = zf_equalize(y, cfr);
  const EqualizedFrame b = mrc_combine({y}, {cfr});
  for (std::size_t i = 0; i < a.grid.size(); ++i)
    REQUIRE(std::abs(a.grid.cells()[i] - b.grid.cells()[i]) < 1e-12);
}

TEST_CASE("MRC erases cells where every channel vanishes") {
  FrameGrid y(2, 1);
  CommCfr h(2, 1);
  y.at(0, 0) = 1.0;
  y.at(1, 0) = 1.0;
  h.at(0, 0) = 1.0;
  h.at(1, 0) = 0.0;
  const EqualizedFrame mrc = mrc_combine({y}, {h});
  REQUIRE(mrc.erasure_count() == 1);
}

TEST_CASE("MRC SNR gain over equal-SNR channels approaches the channel count") {
  const std::size_t cells = 100000, nch = 4;
  Rng rng(7);
  const double noise_var = 0.1;
  double err_single = 0.0, err_mrc = 0.0;
  FrameGrid x(cells, 1);
  std::vector<FrameGrid> ys(nch, FrameGrid(cells, 1));
  std::vector<CommCfr> hs(nch, FrameGrid(cells, 1));
  for (std::size_t i = 0; i < cells; ++i) x.at(i, 0) = rng.qpsk();
  for (std::size_t c = 0; c < nch; ++c)
    for (std::size_t i = 0; i < cells; ++i) {
      ys[c].at(i, 0) = x.at(i, 0) + rng.cnormal(noise_var);
      hs[c].at(i, 0) = 1.0;
    }
  const EqualizedFrame mrc = mrc_combine(ys, hs);
  for (std::size_t i = 0; i < cells; ++i) {
    err_single += std::norm(ys[0].at(i, 0) - x.at(i, 0));
    err_mrc += std::norm(mrc.grid.at(i, 0) - x.at(i, 0));
  }
  const double gain_db = db10(err_single / err_mrc);
  REQUIRE(gain_db == Approx(db10(nch)).margin(0.5));
}

TEST_CASE("MRC is at least as good as the best single ZF branch") {
  const std::size_t cells = 10000;
  Rng rng(8);
  FrameGrid x(cells, 1);
  for (std::size_t i = 0; i < cells; ++i) x.at(i, 0) = rng.qpsk();
  const double gains[3] = {1.0, 0.6, 0.25};
  std::vector<FrameGrid> ys;
  std::vector<CommCfr> hs;
  for (double g : gains) {
    FrameGrid y(cells, 1);
    CommCfr h(cells, 1);
    for (std::size_t i = 0; i < cells; ++i) {
      h.at(i, 0) = g;
      y.at(i, 0) = g * x.at(i, 0) + rng.cnormal(0.05);
    }
    ys.push_back(std::move(y));
    hs.push_back(std::move(h));
  }
  const EqualizedFrame mrc = mrc_combine(ys, hs);
  double err_mrc = 0.0;
  for (std::size_t i = 0; i < cells; ++i) err_mrc += std::norm(mrc.grid.at(i, 0) - x.at(i, 0));
  for (std::size_t c = 0; c < 3; ++c) {
    const EqualizedFrame zf = zf_equalize(ys[c], hs[c]);
    double err = 0.0;
    for (std::size_t i = 0; i < cells; ++i) err += std::norm(zf.grid.at(i, 0) - x.at(i, 0));
    REQUIRE(err_mrc <= err);
  }
}

TEST_CASE("decode: noiseless loopback is error-free and reproduces X") {
  const TxFrame tx = build_frame(kDesk, {}, 9);
  EqualizedFrame eq;
  eq.grid = tx.grid;
  eq.erasures.assign(tx.grid.size(), 0);
  const DecodeResult dec = demod_decode_reencode(eq, kDesk, 9, false, &tx);
  REQUIRE(dec.coded_bit_errors == 0);
  REQUIRE(dec.uncoded_bit_errors == 0);
  REQUIRE(dec.all_blocks_converged);
  REQUIRE(dec.payload_bits == tx.info_bits);
  REQUIRE(dec.reencoded.cells() == tx.grid.cells());
}

TEST_CASE("genie decoding returns the true transmit frame") {
  const TxFrame tx = build_frame(kDesk, {}, 10);
  EqualizedFrame eq;
  eq.grid = FrameGrid::for_config(kDesk);  // garbage input is fine in genie mode
  eq.erasures.assign(eq.grid.size(), 0);
  const DecodeResult dec = demod_decode_reencode(eq, kDesk, 10, true, &tx);
  REQUIRE(dec.genie);
  REQUIRE(dec.reencoded.cells() == tx.grid.cells());
}

TEST_CASE("at -10 dB EVM the code still wins over hard decisions") {
  const TxFrame tx = build_frame(kDesk, {}, 11);
  Rng rng(11);
  EqualizedFrame eq;
  eq.grid = tx.grid;
  eq.erasures.assign(tx.grid.size(), 0);
  for (auto& v : eq.grid.cells()) v += rng.cnormal(0.1);
  const DecodeResult dec = demod_decode_reencode(eq, kDesk, 11, false, &tx);
  const double uncoded =
      static_cast<double>(dec.uncoded_bit_errors) / static_cast<double>(dec.compared_uncoded_bits);
  const double coded =
      static_cast<double>(dec.coded_bit_errors) / static_cast<double>(dec.compared_coded_bits);
  REQUIRE(uncoded > 0.0);
  REQUIRE(coded < uncoded);
  REQUIRE(coded == 0.0);

  // Successful decode re-encodes to a valid codeword mapping.
  LdpcCode code(kDesk.code);
  BitVec first_block(dec.payload_bits.begin(),
                     dec.payload_bits.begin() + static_cast<std::ptrdiff_t>(code.info_bits()));
  REQUIRE(code.is_codeword(code.encode(first_block)));
}

TEST_CASE("pilot-derived noise variance tracks the injected level") {
  const TxFrame tx = build_frame(kDesk, {}, 12);
  Rng rng(12);
  FrameGrid noisy = tx.grid;
  const double var = 0.02;
  for (auto& v : noisy.cells()) v += rng.cnormal(var);
  REQUIRE(estimate_noise_var_from_pilots(noisy, kDesk, 12) == Approx(var).epsilon(0.1));
}
