#pragma once

// Iterative radix-2 FFT, sized for the power-of-two grids this library pins
// in its configuration invariants. Unscaled in both directions; callers own
// the normalization convention.

#include <bit>
#include <cstddef>

#include "bisac/common.hpp"

namespace bisac {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace detail {

inline void fft_radix2(cxd* data, std::size_t n, bool inverse) {
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const cxd wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cxd w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cxd u = data[i + k];
        const cxd v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace detail

/// In-place forward DFT, unscaled: X[k] = sum_s x[s] e^{-i 2 pi k s / N}.
inline void fft_inplace(cvec& x) {
  if (!is_pow2(x.size())) throw std::invalid_argument("fft: length must be a power of two");
  detail::fft_radix2(x.data(), x.size(), false);
}

/// In-place unscaled inverse kernel: x[s] = sum_k X[k] e^{+i 2 pi k s / N}.
inline void ifft_inplace_unscaled(cvec& x) {
  if (!is_pow2(x.size())) throw std::invalid_argument("ifft: length must be a power of two");
  detail::fft_radix2(x.data(), x.size(), true);
}

inline cvec fft(cvec x) {
  fft_inplace(x);
  return x;
}

/// Inverse DFT with the 1/N convention used throughout the OFDM chain.
inline cvec ifft(cvec x) {
  ifft_inplace_unscaled(x);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : x) v *= scale;
  return x;
}

/// Signed baseband frequency of DFT bin `k` for an N-point grid at spacing
/// `delta_f`: bins [0, N/2) map to [0, +N/2) delta_f, bins [N/2, N) to the
/// negative half.
inline double bin_frequency(std::size_t k, std::size_t n, double delta_f) {
  const auto half = n / 2;
  const double idx = (k < half) ? static_cast<double>(k)
                                : static_cast<double>(k) - static_cast<double>(n);
  return idx * delta_f;
}

/// Index permutation that rotates bin N/2 to the front (negative
/// frequencies first). shifted[i] = x[(i + N/2) mod N].
inline std::size_t fftshift_index(std::size_t i, std::size_t n) { return (i + n / 2) % n; }

template <typename T>
inline std::vector<T> fftshift(const std::vector<T>& x) {
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[fftshift_index(i, x.size())];
  return out;
}

}  // namespace bisac
