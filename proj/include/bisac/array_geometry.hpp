#pragma once

// Uniform linear array geometry: element positions, path-length differences,
// and transmit/receive steering vectors.
//
// Conventions (fixed across the whole library):
//   * Elements lie on the x axis at x_n = (lambda0/2) [(-N_A+1)/2 + n],
//     symmetric about the origin, half-wavelength spacing.
//   * Azimuth angles are radians in [-pi/2, pi/2), positive towards +x.
//   * Transmit steering weight:  exp(-i 2 pi (x_n/lambda0) sin(dod)).
//     The matching departure phase picked up in propagation is the
//     conjugate, so weighting-then-propagating sums coherently to N_A.
//   * Receive steering weight:   exp(+i 2 pi (x_n/lambda0) sin(doa));
//     arrival phases across the receive array are the conjugate of this,
//     which is what makes Fourier beamforming peak at the true DoA.

#include <cstddef>

#include "bisac/common.hpp"

namespace bisac {

struct UlaGeometry {
  std::size_t num_elements = 0;
  double carrier_frequency_hz = 0.0;
  double wavelength_m = 0.0;
  dvec element_x_positions_m;

  static UlaGeometry make(std::size_t num_elements, double carrier_frequency_hz) {
    if (num_elements == 0) throw std::invalid_argument("ULA needs at least one element");
    if (!(carrier_frequency_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
    UlaGeometry g;
    g.num_elements = num_elements;
    g.carrier_frequency_hz = carrier_frequency_hz;
    g.wavelength_m = kSpeedOfLight / carrier_frequency_hz;
    g.element_x_positions_m.resize(num_elements);
    const double n0 = (-static_cast<double>(num_elements) + 1.0) / 2.0;
    for (std::size_t n = 0; n < num_elements; ++n)
      g.element_x_positions_m[n] = (g.wavelength_m / 2.0) * (n0 + static_cast<double>(n));
    return g;
  }
};

struct SteeringVector {
  double angle_rad = 0.0;
  cvec weights;
};

namespace detail {
inline void check_angle(double angle_rad) {
  // Closed at +pi/2 so endfire evaluations stay expressible.
  if (!(angle_rad >= -kPi / 2.0 && angle_rad <= kPi / 2.0))
    throw std::invalid_argument("angle must lie in [-pi/2, pi/2]");
}
}  // namespace detail

/// Propagation length difference of element `element_index` relative to the
/// array origin for a plane wave at `angle_rad`. Divide by c0 for the
/// per-element delay.
inline double path_length_difference(const UlaGeometry& g, std::size_t element_index,
                                     double angle_rad) {
  if (element_index >= g.num_elements) throw std::invalid_argument("element index out of range");
  detail::check_angle(angle_rad);
  return -g.element_x_positions_m[element_index] * std::sin(angle_rad);
}

inline SteeringVector transmit_steering_vector(const UlaGeometry& g, double dod_rad) {
  detail::check_angle(dod_rad);
  SteeringVector sv;
  sv.angle_rad = dod_rad;
  sv.weights.resize(g.num_elements);
  const double s = std::sin(dod_rad);
  for (std::size_t n = 0; n < g.num_elements; ++n) {
    const double phase = -kTwoPi * (g.element_x_positions_m[n] / g.wavelength_m) * s;
    sv.weights[n] = std::polar(1.0, phase);
  }
  return sv;
}

inline SteeringVector receive_steering_vector(const UlaGeometry& g, double doa_rad) {
  detail::check_angle(doa_rad);
  SteeringVector sv = transmit_steering_vector(g, doa_rad);
  for (auto& w : sv.weights) w = std::conj(w);
  return sv;
}

/// Per-element carrier phase a departing wave accumulates towards `dod_rad`
/// (conjugate of the transmit steering weight).
inline cxd departure_phase(const UlaGeometry& g, std::size_t element, double dod_rad) {
  const double dl = path_length_difference(g, element, dod_rad);
  return std::polar(1.0, -kTwoPi * dl / g.wavelength_m);
}

/// Per-element carrier phase of an arriving wave from `doa_rad` at the
/// receive array (conjugate of the receive steering weight).
inline cxd arrival_phase(const UlaGeometry& g, std::size_t element, double doa_rad) {
  return std::conj(receive_steering_vector(g, doa_rad).weights[element]);
}

/// Coherent array response of arbitrary per-element weights towards `angle`:
/// sum_n w[n] * departure_phase(n, angle). Peaks at N_A for matched steering.
inline cxd array_response(const UlaGeometry& g, const cvec& element_weights, double angle_rad) {
  if (element_weights.size() != g.num_elements)
    throw std::invalid_argument("weight count must match element count");
  cxd acc = 0.0;
  for (std::size_t n = 0; n < g.num_elements; ++n)
    acc += element_weights[n] * departure_phase(g, n, angle_rad);
  return acc;
}

/// DoA evaluation grid, uniform in sin-space over [-1, 1) (the natural grid
/// for Fourier beamforming). `num_points` defaults to an oversampled grid at
/// the caller's discretion.
inline dvec azimuth_grid_sin_space(std::size_t num_points) {
  if (num_points == 0) throw std::invalid_argument("azimuth grid needs at least one point");
  dvec grid(num_points);
  for (std::size_t j = 0; j < num_points; ++j) {
    const double s = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(num_points);
    grid[j] = std::asin(s);
  }
  return grid;
}

/// Linear-in-angle alternative over [-pi/2, pi/2).
inline dvec azimuth_grid_linear(std::size_t num_points) {
  if (num_points == 0) throw std::invalid_argument("azimuth grid needs at least one point");
  dvec grid(num_points);
  for (std::size_t j = 0; j < num_points; ++j)
    grid[j] = -kPi / 2.0 + kPi * static_cast<double>(j) / static_cast<double>(num_points);
  return grid;
}

}  // namespace bisac
