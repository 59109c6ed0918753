#ifndef SHDOA_MOTION_HPP
#define SHDOA_MOTION_HPP

// SH-domain rotation, translation and composed motion transformation matrices.
//
// Conventions (fixed by the plane-wave oracle tests in tests/test_motion.cpp):
//  * a field's PWD coefficients are a_{nm} = conj(Y_n^m(u_s)) for a unit plane
//    wave arriving from u_s, pressure p(x) = e^{+j k u_s . x};
//  * rotation_matrix(angles) rotates the FIELD actively by the zyz rotation
//    R_z(alpha) R_y(beta) R_z(gamma);
//  * translation_matrix(t) re-expands the field about an origin displaced by
//    the cartesian vector of t, so plane-wave coefficients gain e^{+j k d.u_s};
//  * a physical array pose (rotation R_A, origin displacement c) therefore maps
//    reference coefficients through W = T(R_A^{-1} c) * Rot(euler(R_A^{-1})).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shdoa/sh_core.hpp"

namespace shdoa {

struct EulerAngles {
  double alpha = 0.0;  // zyz intrinsic, radians
  double beta = 0.0;
  double gamma = 0.0;

  static EulerAngles normalized(double a, double b, double g);
  bool is_identity(double tol = 1e-12) const;
  // Angles of the inverse rotation, (-gamma, -beta, -alpha).
  EulerAngles inverse() const { return {-gamma, -beta, -alpha}; }
};

struct TranslationVec {
  double r = 0.0;      // meters, >= 0
  double theta = 0.0;  // elevation, [0, pi]
  double phi = 0.0;    // azimuth

  static TranslationVec checked(double r, double theta, double phi);
  Eigen::Vector3d cartesian() const;
  static TranslationVec from_cartesian(const Eigen::Vector3d& v);
};

// Physical array pose relative to the reference frame: orientation of the
// array axes and displacement of the array origin, both in reference
// coordinates.
struct FramePose {
  EulerAngles rotation;
  TranslationVec translation;

  bool is_identity(double tol = 1e-12) const;
};

enum class TrajectoryConvention { absolute, delta };

struct Trajectory {
  std::vector<FramePose> poses;  // one per STFT frame, poses[0] == identity
  TrajectoryConvention convention = TrajectoryConvention::absolute;

  void validate() const;
  static Trajectory load_csv(const std::string& path);
  void save_csv(const std::string& path) const;
};

struct MotionTransform {
  Eigen::MatrixXcd matrix;  // (outputOrder+1)^2 x (inputOrder+1)^2
  int input_order = 0;
  int output_order = 0;

  static MotionTransform identity(int order);
};

// Block-diagonal Wigner-D field-rotation operator (square, unitary, no k).
MotionTransform rotation_matrix(int order, const EulerAngles& field_angles);

// Translation coefficient C_{n',m'}^{n,m,q} of the addition theorem, exactly
// zero off the Wigner-3j selection rules.
Cplx translation_coeff(int n_out, int m_out, int n_in, int m_in, int q);

constexpr int kDefaultQMargin = 4;

// Field translation operator for a displacement t (see header comment). The
// q-sum is capped at ceil(k r) + q_margin; output order defaults to the
// ceil(k r) growth rule when n_out < 0.
MotionTransform translation_matrix(int n_in, double k, const TranslationVec& t,
                                   int n_out = -1, int q_margin = kDefaultQMargin);

// First-order small-translation form, valid for k r < 1; output order n_in+1.
MotionTransform small_translation_matrix(int n_in, double k, const TranslationVec& t);

struct ComposeOptions {
  int order_cap = -1;    // intermediate truncation cap; < 0 = n_in + ceil(k r_total) + 2
  int q_margin = kDefaultQMargin;
};

// W_frame = T * Rot for the given trajectory frame. Delta-tagged trajectories
// chain per-step transforms with intermediate orders truncated at the cap.
MotionTransform compose_transform(const Trajectory& traj, int frame, double k,
                                  int n_in, const ComposeOptions& opts = {});

// Apply a motion transform to a coefficient vector (input truncated or
// zero-extended to the transform's input order).
Eigen::VectorXcd apply_transform(const MotionTransform& w, const Eigen::VectorXcd& coeffs);

}  // namespace shdoa

#endif
