#ifndef SHDOA_STEERING_HPP
#define SHDOA_STEERING_HPP

// Array geometries and SH-domain steering matrices V(omega). Rigid-sphere
// steering is analytic; measured or externally simulated steering loads from
// the text format documented next to save_steering().

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shdoa/sh_core.hpp"

namespace shdoa {

struct MicPos {
  double theta = 0.0;  // elevation [0, pi]
  double phi = 0.0;    // azimuth
};

struct ArrayGeometry {
  double radius = 0.0;  // meters, > 0
  std::vector<MicPos> mics;
  std::string label;

  void validate() const;
  static ArrayGeometry load_csv(const std::string& path);
  void save_csv(const std::string& path) const;
};

struct SteeringMatrix {
  double k = 0.0;  // rad/m
  int order = 0;
  Eigen::MatrixXcd matrix;  // M x (order+1)^2
  std::vector<int> underflowed_orders;  // orders whose mode strength underflowed to 0
};

// A steering matrix per frequency bin, sorted by frequency.
struct SteeringSet {
  std::vector<double> freqs_hz;
  std::vector<SteeringMatrix> matrices;
  double fs = 0.0;
  double radius = 0.0;

  const SteeringMatrix& at_freq(double f_hz) const;  // nearest bin
};

// Rigid-sphere mode strength b_n(x) for surface-mounted pressure microphones,
// 4pi j^n (j_n(x) - j_n'(x)/h_n'(x) h_n(x)) with h_n = j_n - i y_n.
Cplx mode_strength(int n, double x);

SteeringMatrix rigid_sphere_steering(const ArrayGeometry& geom, double k, int order);

// 13-microphone rigid equiangular layout: one pole microphone plus rings at
// 45/90/135 degrees elevation, 90-degree azimuth spacing.
ArrayGeometry equiangular_13(double radius);

// Near-uniform spherical layouts from an embedded table; M in {4,12,20,24,32}.
ArrayGeometry near_uniform(int m, double radius);

// Latitude-staggered 4-microphone layout used as the rigid-sphere stand-in
// for a 4-microphone humanoid-head array.
ArrayGeometry head_substitute_4(double radius);

SteeringSet load_steering(const std::string& path);
void save_steering(const SteeringSet& set, const std::string& path);

// Directions of an M-point near-uniform set (for source-direction protocols).
std::vector<MicPos> near_uniform_directions(int m);

constexpr double kSpeedOfSound = 343.0;  // m/s

inline double wavenumber(double f_hz, double c = kSpeedOfSound) { return 2.0 * std::numbers::pi * f_hz / c; }

}  // namespace shdoa

#endif
