#include <catch2/catch_amalgamated.hpp>

#include "bisac/fft.hpp"
#include "bisac/window.hpp"

using namespace bisac;
using Catch::Approx;

namespace {

/// Peak sidelobe of the window's zero-padded spectrum in dB, mainlobe
/// excluded via the first spectral null.
double max_sidelobe_db(const Window& w, std::size_t pad = 1 << 14) {
  cvec buf(pad, cxd(0.0, 0.0));
  for (std::size_t i = 0; i < w.coeffs.size(); ++i) buf[i] = w.coeffs[i];
  fft_inplace(buf);
  dvec mag(pad);
  for (std::size_t i = 0; i < pad; ++i) mag[i] = std::abs(buf[i]);
  const double peak = mag[0];
  // First null walking up from DC.
  std::size_t null_idx = 1;
  while (null_idx + 1 < pad / 2 && mag[null_idx + 1] < mag[null_idx]) ++null_idx;
  double side = 0.0;
  for (std::size_t i = null_idx; i <= pad - null_idx; ++i) side = std::max(side, mag[i]);
  return db20(side / peak);
}

}  // namespace

TEST_CASE("rectangular window is all ones") {
  const Window w = make_window(WindowKind::rectangular, 17);
  REQUIRE(w.coeffs.size() == 17);
  for (double c : w.coeffs) REQUIRE(c == 1.0);
}

TEST_CASE("length-one window is [1]") {
  REQUIRE(make_window(WindowKind::rectangular, 1).coeffs == dvec{1.0});
  REQUIRE(make_window(WindowKind::chebyshev, 1, 100.0).coeffs == dvec{1.0});
}

TEST_CASE("invalid specs are rejected") {
  REQUIRE_THROWS_AS(make_window(WindowKind::rectangular, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(make_window(WindowKind::chebyshev, 8, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(make_window("bogus", 8), std::invalid_argument);
}

TEST_CASE("chebyshev windows hit the requested equiripple sidelobe level") {
  for (std::size_t len : {8u, 64u, 256u}) {
    const Window w = make_window(WindowKind::chebyshev, len, 100.0);
    REQUIRE(w.coeffs.size() == len);
    REQUIRE(*std::max_element(w.coeffs.begin(), w.coeffs.end()) == Approx(1.0));
    const double sl = max_sidelobe_db(w);
    REQUIRE(sl <= -99.0);
    REQUIRE(sl >= -101.0);
  }
  // A second suppression level, odd length.
  const Window w60 = make_window(WindowKind::chebyshev, 63, 60.0);
  const double sl = max_sidelobe_db(w60);
  REQUIRE(sl <= -59.0);
  REQUIRE(sl >= -61.0);
}

TEST_CASE("chebyshev windows are symmetric") {
  for (std::size_t len : {8u, 33u}) {
    const Window w = make_window(WindowKind::chebyshev, len, 80.0);
    for (std::size_t i = 0; i < len; ++i)
      REQUIRE(w.coeffs[i] == Approx(w.coeffs[len - 1 - i]).margin(1e-12));
  }
}
