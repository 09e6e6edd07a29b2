#pragma once

// Windowed-sinc fractional delay and rate resampling. Static fractional
// delays use a 31-tap Kaiser(8) kernel; rate conversion (SFO) uses a longer
// 63-tap Kaiser(10) kernel because a drifting fractional phase turns in-band
// ripple into a bias on ppm-scale clock estimates.

#include "bisac/common.hpp"

namespace bisac {

namespace detail {

/// Modified Bessel function I0 (series; converges fast for the betas in use).
inline double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 96; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace detail

class SincInterpolator {
 public:
  static constexpr int kTaps = 31;  // default kernel length

  explicit SincInterpolator(int taps = kTaps, double kaiser_beta = 8.0)
      : taps_(taps), half_(taps / 2), window_(static_cast<std::size_t>(taps)) {
    if (taps < 3 || taps % 2 == 0) throw std::invalid_argument("kernel length must be odd, >= 3");
    const double denom = detail::bessel_i0(kaiser_beta);
    for (int k = -half_; k <= half_; ++k) {
      const double r = static_cast<double>(k) / half_;
      window_[static_cast<std::size_t>(k + half_)] =
          detail::bessel_i0(kaiser_beta * std::sqrt(1.0 - r * r)) / denom;
    }
  }

  int taps() const { return taps_; }
  int half_width() const { return half_; }

  /// Kernel for fractional offset mu in [-0.5, 0.5]; h[k+half] approximates
  /// sinc(k - mu) * kaiser(k). Normalized to unit DC gain.
  void kernel(double mu, double* h) const {
    if (mu == 0.0) {
      for (int k = 0; k < taps_; ++k) h[k] = 0.0;
      h[half_] = 1.0;
      return;
    }
    const double s = std::sin(kPi * mu);
    double sum = 0.0;
    for (int k = -half_; k <= half_; ++k) {
      // sinc(k - mu) = (-1)^(k+1) sin(pi mu) / (pi (k - mu))
      const double sinc = ((k & 1) ? s : -s) / (kPi * (static_cast<double>(k) - mu));
      h[k + half_] = sinc * window_[static_cast<std::size_t>(k + half_)];
      sum += h[k + half_];
    }
    const double inv = 1.0 / sum;
    for (int k = 0; k < taps_; ++k) h[k] *= inv;
  }

  /// x evaluated at fractional position `pos` (in samples); zero outside.
  cxd sample_at(const cvec& x, double pos) const {
    const double base_f = std::floor(pos + 0.5);
    const double mu = pos - base_f;
    const long base = static_cast<long>(base_f);
    double h[kMaxTaps];
    kernel(mu, h);
    cxd acc = 0.0;
    for (int k = -half_; k <= half_; ++k) {
      const long idx = base + k;
      if (idx < 0 || idx >= static_cast<long>(x.size())) continue;
      acc += h[k + half_] * x[static_cast<std::size_t>(idx)];
    }
    return acc;
  }

  static constexpr int kMaxTaps = 127;

 private:
  int taps_;
  int half_;
  dvec window_;
};

/// Kernel used for rate conversion (receiver clock modeling / correction).
inline const SincInterpolator& rate_interpolator() {
  static const SincInterpolator interp(63, 10.0);
  return interp;
}

/// Delays `x` by `delay_samples` (integer part exact, fractional part via the
/// windowed sinc). Output keeps the input length; content shifts right.
inline cvec fractional_delay(const cvec& x, double delay_samples,
                             const SincInterpolator& interp) {
  cvec out(x.size(), cxd(0.0, 0.0));
  const double int_part = std::floor(delay_samples + 0.5);
  const double mu = delay_samples - int_part;
  const long shift = static_cast<long>(int_part);
  if (mu == 0.0) {
    for (long s = 0; s < static_cast<long>(x.size()); ++s) {
      const long src = s - shift;
      if (src >= 0 && src < static_cast<long>(x.size()))
        out[static_cast<std::size_t>(s)] = x[static_cast<std::size_t>(src)];
    }
    return out;
  }
  double h[SincInterpolator::kMaxTaps];
  interp.kernel(-mu, h);  // reading at (s - delay) means sampling offset -mu
  const int half = interp.half_width();
  for (long s = 0; s < static_cast<long>(x.size()); ++s) {
    const long base = s - shift;
    cxd acc = 0.0;
    for (int k = -half; k <= half; ++k) {
      const long idx = base + k;
      if (idx < 0 || idx >= static_cast<long>(x.size())) continue;
      acc += h[k + half] * x[static_cast<std::size_t>(idx)];
    }
    out[static_cast<std::size_t>(s)] = acc;
  }
  return out;
}

/// Resamples by `ratio`: output[s] = x(s * ratio) in input-sample units.
/// ratio = 1 + delta models a receiver clock running at (1 + delta) T_s.
inline cvec resample_by_ratio(const cvec& x, double ratio, const SincInterpolator& interp,
                              std::size_t out_len = 0) {
  if (!(ratio > 0.0)) throw std::invalid_argument("resampling ratio must be positive");
  if (out_len == 0)
    out_len = static_cast<std::size_t>(std::floor(static_cast<double>(x.size() - 1) / ratio)) + 1;
  cvec out(out_len, cxd(0.0, 0.0));
  for (std::size_t s = 0; s < out_len; ++s)
    out[s] = interp.sample_at(x, static_cast<double>(s) * ratio);
  return out;
}

}  // namespace bisac
