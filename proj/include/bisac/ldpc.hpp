#pragma once

// Systematic repeat-accumulate-style LDPC code with linear-time encoding and
// normalized min-sum belief-propagation decoding. The construction is fully
// determined by the CodeSpec, so transmitter and receiver always agree.

#include <cstdint>
#include <numeric>

#include "bisac/common.hpp"
#include "bisac/frame_grid.hpp"

namespace bisac {

using BitVec = std::vector<std::uint8_t>;

class LdpcCode {
 public:
  explicit LdpcCode(const CodeSpec& spec) : spec_(spec) {
    spec.validate();
    if (spec.kind != CodeKind::ldpc) throw config_error("LdpcCode requires kind=ldpc");
    n_ = spec.block_length_bits;
    k_ = spec.info_bits_per_block();
    p_ = n_ - k_;
    if (p_ == 0) throw config_error("rate-1 LDPC is not a code");
    build_graph();
  }

  std::size_t block_bits() const { return n_; }
  std::size_t info_bits() const { return k_; }
  std::size_t parity_bits() const { return p_; }

  /// info -> [info | parity] via the accumulator.
  BitVec encode(const BitVec& info) const {
    if (info.size() != k_) throw std::invalid_argument("info block size mismatch");
    BitVec cw(n_, 0);
    std::copy(info.begin(), info.end(), cw.begin());
    std::uint8_t acc = 0;
    for (std::size_t j = 0; j < p_; ++j) {
      std::uint8_t s = acc;
      for (std::size_t e = row_ptr_[j]; e < row_ptr_[j + 1]; ++e) {
        const std::size_t col = col_idx_[e];
        if (col < k_) s ^= cw[col];
      }
      cw[k_ + j] = s;
      acc = s;
    }
    return cw;
  }

  bool is_codeword(const BitVec& cw) const {
    if (cw.size() != n_) return false;
    for (std::size_t j = 0; j < p_; ++j) {
      std::uint8_t s = 0;
      for (std::size_t e = row_ptr_[j]; e < row_ptr_[j + 1]; ++e) s ^= cw[col_idx_[e]];
      if (s) return false;
    }
    return true;
  }

  struct DecodeResult {
    BitVec info;
    bool converged = false;
    int iterations = 0;
  };

  /// Min-sum decoding. LLR convention: positive favors bit 0.
  DecodeResult decode(const dvec& llr) const {
    if (llr.size() != n_) throw std::invalid_argument("LLR block size mismatch");
    const std::size_t edges = col_idx_.size();
    dvec c2v(edges, 0.0);
    dvec posterior(llr);
    BitVec hard(n_, 0);
    DecodeResult out;

    auto harden = [&] {
      for (std::size_t i = 0; i < n_; ++i) hard[i] = posterior[i] < 0.0 ? 1 : 0;
    };
    harden();
    if (is_codeword(hard)) {
      out.info.assign(hard.begin(), hard.begin() + static_cast<std::ptrdiff_t>(k_));
      out.converged = true;
      return out;
    }

    constexpr double kNorm = 0.8125;
    for (int iter = 1; iter <= spec_.bp_iterations; ++iter) {
      for (std::size_t j = 0; j < p_; ++j) {
        const std::size_t lo = row_ptr_[j], hi = row_ptr_[j + 1];
        // Two smallest magnitudes and the sign product over the row.
        double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
        std::size_t argmin = lo;
        int sign_prod = 1;
        for (std::size_t e = lo; e < hi; ++e) {
          const double v = posterior[col_idx_[e]] - c2v[e];
          const double a = std::fabs(v);
          if (v < 0.0) sign_prod = -sign_prod;
          if (a < min1) {
            min2 = min1;
            min1 = a;
            argmin = e;
          } else if (a < min2) {
            min2 = a;
          }
        }
        for (std::size_t e = lo; e < hi; ++e) {
          const double v = posterior[col_idx_[e]] - c2v[e];
          const double mag = kNorm * (e == argmin ? min2 : min1);
          const int sign = (v < 0.0 ? -1 : 1) * sign_prod;
          const double msg = sign * mag;
          posterior[col_idx_[e]] = v + msg;  // fold the new message back in
          c2v[e] = msg;
        }
      }
      harden();
      if (is_codeword(hard)) {
        out.converged = true;
        out.iterations = iter;
        break;
      }
      out.iterations = iter;
    }
    out.info.assign(hard.begin(), hard.begin() + static_cast<std::ptrdiff_t>(k_));
    return out;
  }

 private:
  void build_graph() {
    // Row j holds the info taps of parity j plus the accumulator taps
    // (p_{j-1}, p_j). Info columns get weight 3 through three seeded
    // round-robin permutations, with collision probing to keep edges unique.
    const int layers = 3;
    std::vector<std::vector<std::uint32_t>> rows(p_);
    Rng rng(derive_seed(0xC0DEC0DEull, {n_, k_, static_cast<std::uint64_t>(layers)}));
    std::vector<std::uint32_t> perm(k_);
    for (int l = 0; l < layers; ++l) {
      std::iota(perm.begin(), perm.end(), 0u);
      for (std::size_t i = k_; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(perm[i - 1], perm[j]);
      }
      for (std::size_t i = 0; i < k_; ++i) {
        const std::uint32_t col = perm[i];
        std::size_t row = i % p_;
        auto taken = [&](std::size_t r) {
          for (std::uint32_t c : rows[r])
            if (c == col) return true;
          return false;
        };
        while (taken(row)) row = (row + 1) % p_;
        rows[row].push_back(col);
      }
    }
    row_ptr_.assign(p_ + 1, 0);
    for (std::size_t j = 0; j < p_; ++j) {
      std::size_t deg = rows[j].size() + (j == 0 ? 1 : 2);
      row_ptr_[j + 1] = row_ptr_[j] + deg;
    }
    col_idx_.resize(row_ptr_[p_]);
    for (std::size_t j = 0; j < p_; ++j) {
      std::size_t e = row_ptr_[j];
      for (std::uint32_t c : rows[j]) col_idx_[e++] = c;
      if (j > 0) col_idx_[e++] = static_cast<std::uint32_t>(k_ + j - 1);
      col_idx_[e++] = static_cast<std::uint32_t>(k_ + j);
    }
  }

  CodeSpec spec_;
  std::size_t n_ = 0, k_ = 0, p_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_idx_;
};

}  // namespace bisac
