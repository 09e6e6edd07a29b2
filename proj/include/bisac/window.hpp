#pragma once

// Tapering windows for the radar transforms: rectangular and Dolph-Chebyshev
// (equiripple sidelobes at a prescribed level).

#include <algorithm>
#include <string>

#include "bisac/common.hpp"

namespace bisac {

enum class WindowKind { rectangular, chebyshev };

struct Window {
  WindowKind kind = WindowKind::rectangular;
  double sidelobe_db = 0.0;  // meaningful for chebyshev only
  dvec coeffs;               // unit peak

  double sum() const {
    double s = 0.0;
    for (double c : coeffs) s += c;
    return s;
  }
  double sum_sq() const {
    double s = 0.0;
    for (double c : coeffs) s += c * c;
    return s;
  }
};

namespace detail {

/// Chebyshev polynomial T_m evaluated with the cosh extension outside [-1,1].
inline double cheb_poly(int m, double x) {
  if (x > 1.0) return std::cosh(m * std::acosh(x));
  if (x < -1.0) {
    const double t = std::cosh(m * std::acosh(-x));
    return (m % 2 == 0) ? t : -t;
  }
  return std::cos(m * std::acos(x));
}

}  // namespace detail

inline Window make_window(WindowKind kind, std::size_t length, double sidelobe_db = 0.0) {
  if (length < 1) throw std::invalid_argument("window length must be >= 1");
  Window w;
  w.kind = kind;
  w.sidelobe_db = sidelobe_db;
  if (kind == WindowKind::rectangular || length == 1) {
    w.coeffs.assign(length, 1.0);
    return w;
  }
  if (!(sidelobe_db > 0.0))
    throw std::invalid_argument("chebyshev window needs a positive sidelobe suppression in dB");

  // Dolph-Chebyshev: sample the closed-form spectrum, inverse-transform,
  // recentre. Mirrors the classic chebwin construction.
  const std::size_t L = length;
  const int order = static_cast<int>(L) - 1;
  const double ripple = undb20(sidelobe_db);
  const double beta = std::cosh(std::acosh(ripple) / order);
  dvec spec(L);
  for (std::size_t k = 0; k < L; ++k)
    spec[k] = detail::cheb_poly(order, beta * std::cos(kPi * static_cast<double>(k) /
                                                       static_cast<double>(L)));
  dvec coeffs(L, 0.0);
  if (L % 2 == 1) {
    // w[n] = sum_k spec[k] cos(2 pi k n / L), n symmetric about the centre.
    const std::size_t half = (L + 1) / 2;
    dvec first(half);
    for (std::size_t n = 0; n < half; ++n) {
      double acc = 0.0;
      for (std::size_t k = 0; k < L; ++k)
        acc += spec[k] * std::cos(kTwoPi * static_cast<double>(k) * static_cast<double>(n) /
                                  static_cast<double>(L));
      first[n] = acc;
    }
    for (std::size_t n = 0; n < half; ++n) {
      coeffs[half - 1 - n] = first[n];
      coeffs[half - 1 + n] = first[n];
    }
  } else {
    // Even length needs the half-sample phase term before the transform.
    const std::size_t half = L / 2 + 1;
    dvec first(half);
    for (std::size_t n = 0; n < half; ++n) {
      double acc = 0.0;
      for (std::size_t k = 0; k < L; ++k) {
        const double arg = kPi * static_cast<double>(k) / static_cast<double>(L);
        acc += spec[k] * std::cos(arg * (2.0 * static_cast<double>(n) + 1.0));
      }
      first[n] = acc;
    }
    for (std::size_t n = 0; n < L / 2; ++n) {
      coeffs[L / 2 - 1 - n] = first[n];
      coeffs[L / 2 + n] = first[n];
    }
  }
  const double peak = *std::max_element(coeffs.begin(), coeffs.end());
  for (auto& c : coeffs) c /= peak;
  w.coeffs = std::move(coeffs);
  return w;
}

inline Window make_window(const std::string& kind, std::size_t length, double sidelobe_db = 0.0) {
  if (kind == "rectangular" || kind == "rect") return make_window(WindowKind::rectangular, length);
  if (kind == "chebyshev" || kind == "cheb")
    return make_window(WindowKind::chebyshev, length, sidelobe_db);
  throw std::invalid_argument("unknown window kind: " + kind);
}

}  // namespace bisac
