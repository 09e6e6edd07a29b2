#pragma once

// Bistatic radar processing: magnitude-calibrated radar CFR matrices,
// per-channel range-Doppler periodogram images, and the range-Doppler-azimuth
// cube via Fourier beamforming across the receive channels.
//
// Transform conventions: range uses the unnormalized conjugate DFT across
// subcarriers, Doppler the unnormalized forward DFT across symbols, so a unit
// single-target CFR with rectangular windows peaks at exactly N * M (the
// range-Doppler processing gain).

#include "bisac/array_geometry.hpp"
#include "bisac/common.hpp"
#include "bisac/fft.hpp"
#include "bisac/frame_grid.hpp"
#include "bisac/hardware_response.hpp"
#include "bisac/window.hpp"

namespace bisac {

struct RadarCfr {
  std::vector<FrameGrid> d;   // per receive channel
  std::size_t masked_cells = 0;  // zero-magnitude X-hat cells, zero-filled
};

/// D_ch = Y_ch / (|H_ABE,ch(f_n)| * Xhat), Eq.-style magnitude-only back-end
/// calibration (the back-end delay is already handled by synchronization, so
/// its phase must not be divided out).
inline RadarCfr build_radar_cfr(const std::vector<FrameGrid>& frames, const FrameGrid& xhat,
                                const HardwareResponseBank& abe, const OfdmConfig& config,
                                double calibration_floor = 1e-3) {
  if (frames.empty()) throw std::invalid_argument("no receive frames");
  if (!abe.empty() && abe.size() != frames.size())
    throw std::invalid_argument("ABE bank size must match the channel count");
  RadarCfr out;
  out.d.reserve(frames.size());
  const std::size_t n = config.num_subcarriers;
  const std::size_t m = config.num_symbols;
  const double df = config.subcarrier_spacing_hz();

  for (std::size_t ch = 0; ch < frames.size(); ++ch) {
    if (!frames[ch].same_shape(xhat)) throw std::invalid_argument("frame/Xhat shape mismatch");
    dvec abe_mag(n, 1.0);
    if (!abe.empty() && !abe[ch].is_identity()) {
      double peak = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        abe_mag[k] = std::abs(abe[ch].response(bin_frequency(k, n, df)));
        peak = std::max(peak, abe_mag[k]);
      }
      for (std::size_t k = 0; k < n; ++k)
        if (abe_mag[k] <= calibration_floor * peak)
          throw calibration_error(static_cast<int>(ch), static_cast<int>(k),
                                  "ABE CFR magnitude below calibration floor");
    }
    FrameGrid d = FrameGrid::for_config(config);
    for (std::size_t mm = 0; mm < m; ++mm)
      for (std::size_t nn = 0; nn < n; ++nn) {
        const cxd x = xhat.at(nn, mm);
        if (std::norm(x) == 0.0) {
          d.at(nn, mm) = 0.0;
          if (ch == 0) ++out.masked_cells;
        } else {
          d.at(nn, mm) = frames[ch].at(nn, mm) / (abe_mag[nn] * x);
        }
      }
    out.d.push_back(std::move(d));
  }
  return out;
}

struct RangeDopplerImage {
  std::size_t num_range = 0;    // N
  std::size_t num_doppler = 0;  // M, Doppler axis fftshifted (0 Hz at M/2)
  cvec values;                  // l + num_range * doppler_index
  dvec range_axis_m;
  dvec doppler_axis_hz;

  cxd at(std::size_t range_bin, std::size_t doppler_bin) const {
    return values[range_bin + num_range * doppler_bin];
  }
  std::size_t zero_doppler_index() const { return num_doppler / 2; }
};

/// Windowed periodogram: conjugate DFT over subcarriers (range), forward DFT
/// over symbols (Doppler), Doppler axis shifted to put 0 Hz in the middle.
inline RangeDopplerImage range_doppler_image(const FrameGrid& d, const OfdmConfig& config,
                                             const Window& window_range,
                                             const Window& window_doppler) {
  const std::size_t n = d.num_subcarriers();
  const std::size_t m = d.num_symbols();
  if (window_range.coeffs.size() != n || window_doppler.coeffs.size() != m)
    throw std::invalid_argument("window lengths must match the grid");

  RangeDopplerImage img;
  img.num_range = n;
  img.num_doppler = m;
  img.values.resize(n * m);

  // Range transform per symbol. The range window tapers the physical band
  // edges, so its coefficients are indexed in shifted (frequency) order.
  cvec col(n);
  for (std::size_t mm = 0; mm < m; ++mm) {
    for (std::size_t nn = 0; nn < n; ++nn)
      col[nn] = d.at(nn, mm) * window_range.coeffs[fftshift_index(nn, n)];
    ifft_inplace_unscaled(col);
    for (std::size_t l = 0; l < n; ++l) img.values[l + n * mm] = col[l];
  }
  // Doppler transform per range bin, then shift.
  cvec row(m), shifted(m);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t mm = 0; mm < m; ++mm)
      row[mm] = img.values[l + n * mm] * window_doppler.coeffs[mm];
    fft_inplace(row);
    for (std::size_t k = 0; k < m; ++k) shifted[k] = row[fftshift_index(k, m)];
    for (std::size_t k = 0; k < m; ++k) img.values[l + n * k] = shifted[k];
  }

  img.range_axis_m.resize(n);
  const double bin_range = kSpeedOfLight / config.bandwidth_hz;
  for (std::size_t l = 0; l < n; ++l) img.range_axis_m[l] = static_cast<double>(l) * bin_range;
  img.doppler_axis_hz.resize(m);
  const double dfd = 1.0 / (static_cast<double>(m) * config.symbol_duration_s());
  for (std::size_t k = 0; k < m; ++k)
    img.doppler_axis_hz[k] =
        (static_cast<double>(k) - static_cast<double>(m / 2)) * dfd;
  return img;
}

struct RadarCube {
  std::size_t num_range = 0;
  std::size_t num_doppler = 0;
  std::size_t num_azimuth = 0;
  cvec values;  // s + num_azimuth * (l + num_range * doppler_index)
  dvec range_axis_m;
  dvec doppler_axis_hz;
  dvec azimuth_axis_rad;
  std::string window_range, window_doppler, window_azimuth;

  cxd at(std::size_t range_bin, std::size_t doppler_bin, std::size_t az_bin) const {
    return values[az_bin + num_azimuth * (range_bin + num_range * doppler_bin)];
  }
};

/// Fourier beamforming across the per-channel range-Doppler images:
/// cube(l, k, s) = sum_ch I_ch(l, k) w_az[ch] exp(+i 2 pi (x_ch/lambda0) sin(phi_s)).
inline RadarCube doa_cube(const std::vector<RangeDopplerImage>& images, const UlaGeometry& geometry,
                          const dvec& azimuth_grid_rad, const Window& window_az) {
  if (images.empty()) throw std::invalid_argument("no channel images");
  if (images.size() != geometry.num_elements)
    throw std::invalid_argument("channel count must match the receive array");
  if (window_az.coeffs.size() != images.size())
    throw std::invalid_argument("azimuth window length must match the channel count");
  const std::size_t n = images[0].num_range;
  const std::size_t m = images[0].num_doppler;
  for (const auto& img : images)
    if (img.num_range != n || img.num_doppler != m)
      throw std::invalid_argument("channel images disagree on shape");
  const std::size_t s_count = azimuth_grid_rad.size();

  // Steering phases ch x s.
  cvec steer(images.size() * s_count);
  for (std::size_t s = 0; s < s_count; ++s) {
    const double sin_phi = std::sin(azimuth_grid_rad[s]);
    for (std::size_t ch = 0; ch < images.size(); ++ch) {
      const double phase =
          kTwoPi * (geometry.element_x_positions_m[ch] / geometry.wavelength_m) * sin_phi;
      steer[ch * s_count + s] = window_az.coeffs[ch] * std::polar(1.0, phase);
    }
  }

  RadarCube cube;
  cube.num_range = n;
  cube.num_doppler = m;
  cube.num_azimuth = s_count;
  cube.values.assign(n * m * s_count, cxd(0.0, 0.0));
  cube.range_axis_m = images[0].range_axis_m;
  cube.doppler_axis_hz = images[0].doppler_axis_hz;
  cube.azimuth_axis_rad = azimuth_grid_rad;

  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < n; ++l) {
      cxd* dst = cube.values.data() + (l + n * k) * s_count;
      for (std::size_t ch = 0; ch < images.size(); ++ch) {
        const cxd v = images[ch].at(l, k);
        const cxd* st = steer.data() + ch * s_count;
        for (std::size_t s = 0; s < s_count; ++s) dst[s] += v * st[s];
      }
    }
  return cube;
}

struct ImageCut {
  std::size_t num_range = 0;
  std::size_t num_azimuth = 0;
  dvec power;  // s + num_azimuth * l
  dvec range_axis_m;
  dvec azimuth_axis_rad;

  double at(std::size_t range_bin, std::size_t az_bin) const {
    return power[az_bin + num_azimuth * range_bin];
  }
};

/// Range-azimuth power cut of the cube at one Doppler bin.
inline ImageCut range_azimuth_cut(const RadarCube& cube, std::size_t doppler_bin) {
  ImageCut cut;
  cut.num_range = cube.num_range;
  cut.num_azimuth = cube.num_azimuth;
  cut.power.resize(cube.num_range * cube.num_azimuth);
  cut.range_axis_m = cube.range_axis_m;
  cut.azimuth_axis_rad = cube.azimuth_axis_rad;
  for (std::size_t l = 0; l < cube.num_range; ++l)
    for (std::size_t s = 0; s < cube.num_azimuth; ++s)
      cut.power[s + cut.num_azimuth * l] = std::norm(cube.at(l, doppler_bin, s));
  return cut;
}

/// Zero-Doppler range-azimuth cut computed directly from the radar CFRs
/// (Doppler DFT bin 0 is just the windowed symbol sum). Identical to slicing
/// the full cube, at a fraction of the work; the sweep leans on this.
inline ImageCut zero_doppler_cut(const RadarCfr& rcfr, const OfdmConfig& config,
                                 const UlaGeometry& geometry, const dvec& azimuth_grid_rad,
                                 const Window& window_range, const Window& window_doppler,
                                 const Window& window_az) {
  const std::size_t n = config.num_subcarriers;
  const std::size_t m = config.num_symbols;
  const std::size_t nch = rcfr.d.size();
  if (window_az.coeffs.size() != nch)
    throw std::invalid_argument("azimuth window length must match the channel count");

  // Per channel: windowed symbol sum, then range transform.
  std::vector<cvec> profiles(nch);
  cvec acc(n);
  for (std::size_t ch = 0; ch < nch; ++ch) {
    std::fill(acc.begin(), acc.end(), cxd(0.0, 0.0));
    for (std::size_t mm = 0; mm < m; ++mm) {
      const double wd = window_doppler.coeffs[mm];
      const cxd* colv = rcfr.d[ch].symbol_data(mm);
      for (std::size_t nn = 0; nn < n; ++nn) acc[nn] += wd * colv[nn];
    }
    for (std::size_t nn = 0; nn < n; ++nn)
      acc[nn] *= window_range.coeffs[fftshift_index(nn, n)];
    cvec prof = acc;
    ifft_inplace_unscaled(prof);
    profiles[ch] = std::move(prof);
  }

  const std::size_t s_count = azimuth_grid_rad.size();
  ImageCut cut;
  cut.num_range = n;
  cut.num_azimuth = s_count;
  cut.power.assign(n * s_count, 0.0);
  cut.range_axis_m.resize(n);
  const double bin_range = kSpeedOfLight / config.bandwidth_hz;
  for (std::size_t l = 0; l < n; ++l) cut.range_axis_m[l] = static_cast<double>(l) * bin_range;
  cut.azimuth_axis_rad = azimuth_grid_rad;

  cvec steer(nch);
  for (std::size_t s = 0; s < s_count; ++s) {
    const double sin_phi = std::sin(azimuth_grid_rad[s]);
    for (std::size_t ch = 0; ch < nch; ++ch)
      steer[ch] = window_az.coeffs[ch] *
                  std::polar(1.0, kTwoPi *
                                      (geometry.element_x_positions_m[ch] / geometry.wavelength_m) *
                                      sin_phi);
    for (std::size_t l = 0; l < n; ++l) {
      cxd v = 0.0;
      for (std::size_t ch = 0; ch < nch; ++ch) v += profiles[ch][l] * steer[ch];
      cut.power[s + s_count * l] = std::norm(v);
    }
  }
  return cut;
}

}  // namespace bisac
