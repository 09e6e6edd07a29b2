#pragma once

// OFDM configuration and the N x M frequency-domain grid shared by transmit
// frames, per-channel receive frames, CFR matrices, and radar matrices.

#include <cstddef>

#include "bisac/common.hpp"
#include "bisac/fft.hpp"

namespace bisac {

enum class Modulation { qpsk };
enum class CodeKind { none, ldpc };

struct CodeSpec {
  CodeKind kind = CodeKind::ldpc;
  // Rate as a rational so derived parameters stay exact.
  int rate_num = 2;
  int rate_den = 3;
  std::size_t block_length_bits = 3072;  // coded bits per block
  int bp_iterations = 50;

  double rate() const { return static_cast<double>(rate_num) / static_cast<double>(rate_den); }
  std::size_t info_bits_per_block() const {
    return block_length_bits * static_cast<std::size_t>(rate_num) /
           static_cast<std::size_t>(rate_den);
  }
  void validate() const {
    if (rate_num <= 0 || rate_den <= 0 || rate_num > rate_den)
      throw config_error("code rate must lie in (0, 1]");
    if (kind == CodeKind::none && rate_num != rate_den)
      throw config_error("kind=none implies rate 1");
    if (kind == CodeKind::ldpc) {
      if (block_length_bits % static_cast<std::size_t>(rate_den) != 0)
        throw config_error("LDPC block length must be divisible by the rate denominator");
      if (block_length_bits == 0) throw config_error("LDPC block length must be positive");
    }
  }
};

struct OfdmConfig {
  std::size_t num_subcarriers = 2048;  // N
  std::size_t num_symbols = 512;       // M
  std::size_t cp_length = 512;         // N_CP, samples
  double bandwidth_hz = 491.52e6;      // B
  std::size_t pilot_subcarrier_spacing = 2;  // dN_pil
  std::size_t pilot_symbol_spacing = 2;      // dM_pil
  Modulation modulation = Modulation::qpsk;
  CodeSpec code;

  double subcarrier_spacing_hz() const {
    return bandwidth_hz / static_cast<double>(num_subcarriers);
  }
  double sampling_period_s() const { return 1.0 / bandwidth_hz; }
  double symbol_duration_s() const {
    return static_cast<double>(num_subcarriers + cp_length) * sampling_period_s();
  }
  std::size_t samples_per_symbol() const { return num_subcarriers + cp_length; }
  std::size_t frame_samples_with_preamble() const {
    return (num_symbols + 1) * samples_per_symbol();
  }
  std::size_t num_pilot_subcarriers() const { return num_subcarriers / pilot_subcarrier_spacing; }
  std::size_t num_pilot_symbols() const { return num_symbols / pilot_symbol_spacing; }
  std::size_t num_pilot_cells() const { return num_pilot_subcarriers() * num_pilot_symbols(); }
  std::size_t num_data_cells() const {
    return num_subcarriers * num_symbols - num_pilot_cells();
  }
  int bits_per_cell() const { return 2; }  // QPSK

  void validate() const {
    if (!is_pow2(num_subcarriers) || !is_pow2(num_symbols))
      throw config_error("N and M must be powers of two");
    if (pilot_subcarrier_spacing == 0 || num_subcarriers % pilot_subcarrier_spacing != 0)
      throw config_error("pilot subcarrier spacing must divide N");
    if (pilot_symbol_spacing == 0 || num_symbols % pilot_symbol_spacing != 0)
      throw config_error("pilot symbol spacing must divide M");
    if (!(bandwidth_hz > 0.0)) throw config_error("bandwidth must be positive");
    code.validate();
  }

  /// Table-I-sized profile.
  static OfdmConfig full_profile() { return OfdmConfig{}; }

  /// Minutes-scale profile for desk experiments. Same sample rate and the
  /// same absolute CP length in samples, so every delay/T_s axis (and the
  /// inter-symbol-interference onset) lines up with the full profile.
  static OfdmConfig desk_profile() {
    OfdmConfig c;
    c.num_subcarriers = 256;
    c.num_symbols = 64;
    c.cp_length = 512;
    return c;
  }
};

class FrameGrid {
 public:
  FrameGrid() = default;
  FrameGrid(std::size_t num_subcarriers, std::size_t num_symbols,
            std::size_t pilot_subcarrier_spacing = 0, std::size_t pilot_symbol_spacing = 0)
      : n_(num_subcarriers),
        m_(num_symbols),
        dn_pil_(pilot_subcarrier_spacing),
        dm_pil_(pilot_symbol_spacing),
        cells_(num_subcarriers * num_symbols, cxd(0.0, 0.0)) {}

  static FrameGrid for_config(const OfdmConfig& c) {
    return FrameGrid(c.num_subcarriers, c.num_symbols, c.pilot_subcarrier_spacing,
                     c.pilot_symbol_spacing);
  }

  std::size_t num_subcarriers() const { return n_; }
  std::size_t num_symbols() const { return m_; }
  std::size_t size() const { return cells_.size(); }

  cxd& at(std::size_t subcarrier, std::size_t symbol) { return cells_[subcarrier + n_ * symbol]; }
  const cxd& at(std::size_t subcarrier, std::size_t symbol) const {
    return cells_[subcarrier + n_ * symbol];
  }

  cvec& cells() { return cells_; }
  const cvec& cells() const { return cells_; }

  /// Symbol column view (contiguous storage is symbol-major).
  cxd* symbol_data(std::size_t symbol) { return cells_.data() + n_ * symbol; }
  const cxd* symbol_data(std::size_t symbol) const { return cells_.data() + n_ * symbol; }

  bool has_pilot_layout() const { return dn_pil_ != 0 && dm_pil_ != 0; }
  bool is_pilot(std::size_t subcarrier, std::size_t symbol) const {
    return has_pilot_layout() && subcarrier % dn_pil_ == 0 && symbol % dm_pil_ == 0;
  }
  std::size_t pilot_subcarrier_spacing() const { return dn_pil_; }
  std::size_t pilot_symbol_spacing() const { return dm_pil_; }

  std::vector<std::uint8_t> pilot_mask() const {
    std::vector<std::uint8_t> mask(cells_.size(), 0);
    if (!has_pilot_layout()) return mask;
    for (std::size_t m = 0; m < m_; m += dm_pil_)
      for (std::size_t n = 0; n < n_; n += dn_pil_) mask[n + n_ * m] = 1;
    return mask;
  }

  /// Signed baseband frequency of subcarrier row `n`.
  double subcarrier_frequency_hz(std::size_t n, double delta_f) const {
    return bin_frequency(n, n_, delta_f);
  }

  bool same_shape(const FrameGrid& other) const {
    return n_ == other.n_ && m_ == other.m_;
  }

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t dn_pil_ = 0;
  std::size_t dm_pil_ = 0;
  cvec cells_;
};

}  // namespace bisac
