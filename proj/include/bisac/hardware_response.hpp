#pragma once

// Per-channel analog front-end / back-end responses, modeled as a sparse
// complex FIR: a dominant tap at a (possibly fractional) delay followed by
// integer-spaced ripple taps. Evaluable in closed form at any frequency, so
// grid CFRs and stream filtering stay consistent.

#include "bisac/common.hpp"
#include "bisac/fft.hpp"

namespace bisac {

struct HardwareResponse {
  double dominant_delay_s = 0.0;  // delay of taps[0]
  double tap_spacing_s = 0.0;     // spacing of the ripple taps that follow
  cvec taps{cxd(1.0, 0.0)};       // taps[0] is the dominant tap

  static HardwareResponse identity() { return HardwareResponse{}; }

  bool is_identity() const {
    return dominant_delay_s == 0.0 && taps.size() == 1 && taps[0] == cxd(1.0, 0.0);
  }

  /// H(f) = sum_j taps[j] exp(-i 2 pi f (dominant_delay + j spacing)).
  cxd response(double f_hz) const {
    cxd acc = 0.0;
    for (std::size_t j = 0; j < taps.size(); ++j) {
      const double d = dominant_delay_s + static_cast<double>(j) * tap_spacing_s;
      acc += taps[j] * std::polar(1.0, -kTwoPi * f_hz * d);
    }
    return acc;
  }

  /// CFR sampled on the signed N-point subcarrier grid.
  cvec cfr_on_grid(std::size_t num_subcarriers, double delta_f) const {
    cvec h(num_subcarriers);
    for (std::size_t k = 0; k < num_subcarriers; ++k)
      h[k] = response(bin_frequency(k, num_subcarriers, delta_f));
    return h;
  }

  double peak_tap_magnitude() const {
    double peak = 0.0;
    for (const auto& t : taps) peak = std::max(peak, std::abs(t));
    return peak;
  }
};

using HardwareResponseBank = std::vector<HardwareResponse>;

}  // namespace bisac
