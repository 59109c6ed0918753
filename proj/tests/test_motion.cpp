#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "shdoa/error.hpp"
#include "shdoa/motion.hpp"
#include "shdoa/steering.hpp"

using namespace shdoa;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix3d rot_zyz_mat(double a, double b, double g) {
  return (Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ())
          * Eigen::AngleAxisd(b, Eigen::Vector3d::UnitY())
          * Eigen::AngleAxisd(g, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

MicPos dir_of(const Eigen::Vector3d& u) {
  return {std::acos(std::clamp(u.z(), -1.0, 1.0)), std::atan2(u.y(), u.x())};
}

Eigen::Vector3d unit_of(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

// PWD coefficient vector of a unit plane wave arriving from (theta, phi).
Eigen::VectorXcd plane_wave_coeffs(int order, double theta, double phi) {
  Eigen::VectorXcd a(sh_count(order));
  for (int n = 0; n <= order; ++n)
    for (int m = -n; m <= n; ++m) a(acn_index(n, m)) = std::conj(sph_harm(n, m, theta, phi));
  return a;
}

}  // namespace

TEST_CASE("rotation matrix: zero rotation is the identity") {
  MotionTransform r = rotation_matrix(3, EulerAngles{});
  CHECK((r.matrix - Eigen::MatrixXcd::Identity(16, 16)).norm() < 1e-14);
}

TEST_CASE("rotation matrix: horizontal rotation is diagonal e^{-j m alpha}") {
  double alpha = 0.87;
  MotionTransform r = rotation_matrix(2, EulerAngles::normalized(alpha, 0, 0));
  for (int n = 0; n <= 2; ++n) {
    for (int m = -n; m <= n; ++m) {
      for (int m2 = -n; m2 <= n; ++m2) {
        Cplx v = r.matrix(acn_index(n, m), acn_index(n, m2));
        Cplx want = (m == m2) ? std::polar(1.0, -m * alpha) : Cplx{0, 0};
        CHECK(std::abs(v - want) < 1e-14);
      }
    }
  }
}

TEST_CASE("rotation matrix: plane-wave oracle at random angles") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ua(-kPi, kPi), uth(0.15, kPi - 0.15), uph(0, 2 * kPi);
  const int order = 5;
  for (int trial = 0; trial < 20; ++trial) {
    double a = ua(rng), b = std::abs(ua(rng)), g = ua(rng);
    double th = uth(rng), ph = uph(rng);
    MotionTransform r = rotation_matrix(order, EulerAngles::normalized(a, b, g));
    Eigen::Vector3d rotated = rot_zyz_mat(a, b, g) * unit_of(th, ph);
    MicPos rd = dir_of(rotated);
    Eigen::VectorXcd got = r.matrix * plane_wave_coeffs(order, th, ph);
    Eigen::VectorXcd want = plane_wave_coeffs(order, rd.theta, rd.phi);
    CHECK((got - want).norm() / want.norm() < 1e-9);
  }
}

TEST_CASE("rotation matrix: unitary, block diagonal, composition in azimuth") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> ua(-kPi, kPi);
  for (int trial = 0; trial < 25; ++trial) {
    int order = 1 + trial % 8;
    EulerAngles e = EulerAngles::normalized(ua(rng), ua(rng), ua(rng));
    MotionTransform r = rotation_matrix(order, e);
    const int d = sh_count(order);
    CHECK((r.matrix * r.matrix.adjoint() - Eigen::MatrixXcd::Identity(d, d)).norm() < 1e-10);
    // entries coupling different orders are exactly zero
    for (int n = 0; n <= order; ++n)
      for (int n2 = 0; n2 <= order; ++n2) {
        if (n == n2) continue;
        for (int m = -n; m <= n; ++m)
          for (int m2 = -n2; m2 <= n2; ++m2)
            CHECK(r.matrix(acn_index(n, m), acn_index(n2, m2)) == Cplx{0, 0});
      }
  }
  // horizontal homomorphism
  double a1 = 0.63, a2 = -1.41;
  Eigen::MatrixXcd lhs = rotation_matrix(4, EulerAngles::normalized(a1, 0, 0)).matrix
                         * rotation_matrix(4, EulerAngles::normalized(a2, 0, 0)).matrix;
  Eigen::MatrixXcd rhs = rotation_matrix(4, EulerAngles::normalized(a1 + a2, 0, 0)).matrix;
  CHECK((lhs - rhs).norm() < 1e-10);
}

TEST_CASE("rotation matrix: reciprocal angles give the adjoint") {
  // inverse of R_z(a)R_y(b)R_z(g) is R_z(-g)R_y(-b)R_z(-a)
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> ua(-kPi, kPi);
  for (int trial = 0; trial < 10; ++trial) {
    double a = ua(rng), b = ua(rng), g = ua(rng);
    MotionTransform r = rotation_matrix(6, EulerAngles::normalized(a, b, g));
    MotionTransform rinv = rotation_matrix(6, EulerAngles{a, b, g}.inverse());
    CHECK((rinv.matrix - r.matrix.adjoint()).norm() < 1e-12);
  }
}

TEST_CASE("translation coefficient: selection rules") {
  // |n - n'| > q forces zero
  CHECK(translation_coeff(3, 0, 0, 0, 1) == Cplx{0, 0});
  CHECK(translation_coeff(4, 1, 1, 0, 2) == Cplx{0, 0});
  // q = 0: Y_0^0 * C = delta_{nn'} delta_{mm'}
  for (int n = 0; n <= 4; ++n) {
    for (int m = -n; m <= n; ++m) {
      Cplx v = sph_harm(0, 0, 0.3, 0.4) * translation_coeff(n, m, n, m, 0);
      CHECK(std::abs(v - 1.0) < 1e-13);
      if (m < n) CHECK(std::abs(translation_coeff(n, m, n, m + 1, 0)) < 1e-14);
    }
  }
  // q = 1 never couples equal orders
  for (int n = 0; n <= 4; ++n)
    for (int m = -n; m <= n; ++m)
      for (int m2 = -n; m2 <= n; ++m2)
        CHECK(std::abs(translation_coeff(n, m, n, m2, 1)) < 1e-14);
}

TEST_CASE("translation matrix: zero displacement, order growth, truncation error") {
  MotionTransform t0 = translation_matrix(3, 25.0, TranslationVec{0, 0, 0});
  CHECK(t0.output_order == 3);
  CHECK((t0.matrix - Eigen::MatrixXcd::Identity(16, 16)).norm() == 0.0);

  // default output order follows the ceil(kr) growth rule
  TranslationVec t = TranslationVec::checked(0.05, 1.0, 2.0);
  double k = 36.0;  // kr = 1.8 -> growth 2
  MotionTransform tr = translation_matrix(3, k, t);
  CHECK(tr.output_order == 5);
  CHECK(tr.matrix.rows() == sh_count(5));
  CHECK(tr.matrix.cols() == sh_count(3));
  CHECK_THROWS_AS(translation_matrix(3, k, t, 2), Error);
}

TEST_CASE("translation matrix: plane-wave phase oracle") {
  // translated coefficients of a plane wave equal e^{+j k d.u_s} times the
  // original ones; checked rows limited to orders where the q-capped input
  // expansion has converged
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> uth(0.2, kPi - 0.2), uph(0, 2 * kPi), ukr(0.05, 2.0);
  const int n_check = 3;
  for (int trial = 0; trial < 20; ++trial) {
    double kr = ukr(rng);
    double k = 30.0, r = kr / k;
    double tth = uth(rng), tph = uph(rng);
    double sth = uth(rng), sph_ = uph(rng);
    int margin = 9;  // q-cap margin for 1e-6 convergence at kr <= 2
    int qcap_growth = static_cast<int>(std::ceil(kr));
    int n_in = n_check + qcap_growth + margin;
    TranslationVec t = TranslationVec::checked(r, tth, tph);
    MotionTransform tr = translation_matrix(n_in, k, t, n_in + qcap_growth, margin);
    Eigen::VectorXcd out = tr.matrix * plane_wave_coeffs(n_in, sth, sph_);
    double phase = k * t.cartesian().dot(unit_of(sth, sph_));
    Eigen::VectorXcd want = std::polar(1.0, phase) * plane_wave_coeffs(n_in + qcap_growth, sth, sph_);
    int d = sh_count(n_check);
    double rel = (out.head(d) - want.head(d)).norm() / want.head(d).norm();
    CHECK(rel < 1e-6);
  }
}

TEST_CASE("small translation matrix: definition and accuracy") {
  double k = 20.0;
  TranslationVec t = TranslationVec::checked(0.005, 1.3, 0.7);  // kr = 0.1
  MotionTransform small = small_translation_matrix(4, k, t);
  CHECK(small.output_order == 5);
  // agrees entrywise with the full form capped at q = 1
  MotionTransform full_q1 = translation_matrix(4, k, t, 5, 1 - static_cast<int>(std::ceil(k * t.r)));
  CHECK((small.matrix - full_q1.matrix).norm() < 1e-15);
  // close to the converged operator at kr = 0.1; the independent scipy
  // evaluation of both operators puts the gap at 1.3625e-3
  MotionTransform full = translation_matrix(4, k, t, 5, 12);
  double gap = (small.matrix - full.matrix).norm() / full.matrix.norm();
  CHECK(gap == doctest::Approx(1.3625e-3).epsilon(0.01));
  CHECK(gap < 1.5e-3);
  // zero translation degenerates to the padded identity
  MotionTransform z = small_translation_matrix(4, k, TranslationVec{0, 0, 0});
  Eigen::MatrixXcd eye = Eigen::MatrixXcd::Zero(sh_count(5), sh_count(4));
  eye.topLeftCorner(sh_count(4), sh_count(4)).setIdentity();
  CHECK((z.matrix - eye).norm() == 0.0);
  CHECK_THROWS_AS(small_translation_matrix(4, 300.0, TranslationVec{0.01, 0, 0}), Error);
}

TEST_CASE("translation matrix: round trip restores low orders") {
  double k = 25.0;
  TranslationVec fwd = TranslationVec::checked(0.03, 0.9, 1.1);  // kr = 0.75
  TranslationVec bwd = TranslationVec::checked(0.03, kPi - 0.9, std::fmod(1.1 + kPi, 2 * kPi));
  const int n_in = 3, margin = 8;
  MotionTransform a = translation_matrix(n_in, k, fwd, n_in + 6, margin);
  MotionTransform b = translation_matrix(a.output_order, k, bwd, a.output_order + 6, margin);
  Eigen::MatrixXcd round = b.matrix * a.matrix;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uth(0.2, kPi - 0.2), uph(0, 2 * kPi);
  double th = uth(rng), ph = uph(rng);
  Eigen::VectorXcd in = plane_wave_coeffs(n_in, th, ph);
  Eigen::VectorXcd out = round * in;
  CHECK((out.head(in.size()) - in).norm() / in.norm() < 1e-5);
}

TEST_CASE("compose: frame zero is the identity; pure rotation stays unitary") {
  Trajectory traj;
  traj.convention = TrajectoryConvention::absolute;
  for (int i = 0; i < 4; ++i) {
    FramePose p;
    p.rotation = EulerAngles::normalized(0.3 * i, 0, 0);
    traj.poses.push_back(p);
  }
  MotionTransform w0 = compose_transform(traj, 0, 30.0, 3);
  CHECK((w0.matrix - Eigen::MatrixXcd::Identity(16, 16)).norm() == 0.0);
  MotionTransform w2 = compose_transform(traj, 2, 30.0, 3);
  CHECK(w2.matrix.rows() == w2.matrix.cols());
  CHECK((w2.matrix * w2.matrix.adjoint() - Eigen::MatrixXcd::Identity(16, 16)).norm() < 1e-10);
}

TEST_CASE("compose: delta chaining matches one-shot translation") {
  // two successive small z translations vs a single translation of the sum
  double k = 20.0;
  double step = 0.0005;  // kr = 0.01 per step, well inside the small-form regime
  Trajectory deltas;
  deltas.convention = TrajectoryConvention::delta;
  deltas.poses.push_back(FramePose{});
  for (int i = 0; i < 2; ++i) {
    FramePose p;
    p.translation = TranslationVec::checked(step, 0.0, 0.0);
    deltas.poses.push_back(p);
  }
  ComposeOptions opts;
  opts.order_cap = 8;
  opts.q_margin = 8;
  MotionTransform chained = compose_transform(deltas, 2, k, 3, opts);

  MotionTransform oneshot = translation_matrix(3, k, TranslationVec::checked(2 * step, 0.0, 0.0),
                                               chained.output_order, 8);
  double rel = (chained.matrix - oneshot.matrix).norm() / oneshot.matrix.norm();
  CHECK(rel < 1e-4);
}

TEST_CASE("compose: array pose inversion against the plane-wave picture") {
  // array rotated by alpha about z: a source at azimuth phi appears at
  // phi - alpha in the array frame
  Trajectory traj;
  traj.convention = TrajectoryConvention::absolute;
  traj.poses.push_back(FramePose{});
  FramePose p;
  double alpha = 0.6;
  p.rotation = EulerAngles::normalized(alpha, 0, 0);
  traj.poses.push_back(p);
  MotionTransform w = compose_transform(traj, 1, 10.0, 4);
  double th = 1.2, ph = 2.0;
  Eigen::VectorXcd got = w.matrix * plane_wave_coeffs(4, th, ph);
  Eigen::VectorXcd want = plane_wave_coeffs(4, th, ph - alpha);
  CHECK((got - want).norm() / want.norm() < 1e-10);
}

TEST_CASE("trajectory csv: round trip and validation") {
  Trajectory traj;
  traj.convention = TrajectoryConvention::absolute;
  traj.poses.push_back(FramePose{});
  FramePose p;
  p.rotation = EulerAngles::normalized(0.1, 0.2, -0.3);
  p.translation = TranslationVec::checked(0.04, 1.0, 2.0);
  traj.poses.push_back(p);
  auto path = std::filesystem::temp_directory_path() / "shdoa_traj_test.csv";
  traj.save_csv(path.string());
  Trajectory back = Trajectory::load_csv(path.string());
  REQUIRE(back.poses.size() == 2);
  CHECK(back.convention == TrajectoryConvention::absolute);
  CHECK(back.poses[1].rotation.alpha == doctest::Approx(0.1));
  CHECK(back.poses[1].translation.r == doctest::Approx(0.04));
  std::filesystem::remove(path);

  Trajectory bad;
  bad.convention = TrajectoryConvention::absolute;
  FramePose nonidentity;
  nonidentity.rotation = EulerAngles::normalized(0.5, 0, 0);
  bad.poses.push_back(nonidentity);
  CHECK_THROWS_AS(bad.validate(), Error);
}
