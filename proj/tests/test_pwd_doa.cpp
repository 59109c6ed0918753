#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shdoa/error.hpp"
#include "shdoa/pwd_doa.hpp"

using namespace shdoa;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXcd plane_wave_coeffs(int order, double theta, double phi) {
  Eigen::VectorXcd a(sh_count(order));
  for (int n = 0; n <= order; ++n)
    for (int m = -n; m <= n; ++m) a(acn_index(n, m)) = std::conj(sph_harm(n, m, theta, phi));
  return a;
}

Eigen::MatrixXcd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = Cplx{g(rng), g(rng)};
  return a;
}

double cosine_similarity(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

// frames holding a fixed per-frame mic vector at a single bin
STFTFrameSet frames_from_vectors(const std::vector<Eigen::VectorXcd>& p, int bin, int nbins,
                                 const STFTParams& params) {
  STFTFrameSet f;
  f.params = params;
  for (const auto& v : p) {
    Eigen::MatrixXcd frame = Eigen::MatrixXcd::Zero(v.size(), nbins);
    frame.col(bin) = v;
    f.frames.push_back(frame);
  }
  return f;
}

}  // namespace

TEST_CASE("pseudo-inverse contract on random instances") {
  for (unsigned s : {1u, 2u, 3u}) {
    Eigen::MatrixXcd a = random_matrix(9, 5, s);
    Eigen::MatrixXcd ap = pinv(a);
    CHECK((ap * a * ap - ap).norm() < 1e-9);
    Eigen::MatrixXcd proj = a * ap;
    CHECK((proj - proj.adjoint()).norm() < 1e-9);
    Eigen::MatrixXcd wide = random_matrix(4, 11, s + 7);
    Eigen::MatrixXcd wp = pinv(wide);
    CHECK((wide * wp - Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-9);
  }
}

TEST_CASE("truncated pinv: threshold semantics and degenerate input") {
  // singular values {1, 0.5, 0.3}: threshold 1/3 inverts exactly two
  Eigen::VectorXd sv(3);
  sv << 1.0, 0.5, 0.3;
  Eigen::MatrixXcd u = random_matrix(6, 3, 4);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qru(u);
  Eigen::MatrixXcd qu = qru.householderQ() * Eigen::MatrixXcd::Identity(6, 3);
  Eigen::MatrixXcd v = random_matrix(3, 3, 5);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qrv(v);
  Eigen::MatrixXcd qv = qrv.householderQ();
  Eigen::MatrixXcd a = qu * sv.asDiagonal() * qv.adjoint();
  Eigen::MatrixXcd ap = truncated_pinv(a, 1.0 / 3.0);
  // rank of the inverse equals the number of inverted values
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ap);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-10) ++rank;
  CHECK(rank == 2);
  CHECK_THROWS_AS(truncated_pinv(Eigen::MatrixXcd::Zero(3, 3), 0.5), Error);
  CHECK_THROWS_AS(truncated_pinv(a, 1.5), Error);
}

TEST_CASE("stationary pwd: recovery, zero input, plane-wave structure") {
  ArrayGeometry g = near_uniform(24, 0.06);
  double k = wavenumber(2500.0);
  const int order = 3;
  SteeringSet set;
  set.fs = 10000.0;
  set.freqs_hz = {2500.0};
  set.matrices = {rigid_sphere_steering(g, k, order)};

  STFTParams params;
  params.fs = 10000.0;

  std::mt19937 rng(8);
  std::normal_distribution<double> gd;
  Eigen::VectorXcd a_true(sh_count(order));
  for (int i = 0; i < a_true.size(); ++i) a_true(i) = Cplx{gd(rng), gd(rng)};
  Eigen::VectorXcd p = set.matrices[0].matrix * a_true;
  const int bin = params.nearest_bin(2500.0);
  STFTFrameSet frames = frames_from_vectors({p, Eigen::VectorXcd::Zero(24)}, bin, params.bins(), params);
  PWDEstimate est = pwd_stationary(frames, set, {bin});
  CHECK((est.estimates[0][0] - a_true).norm() / a_true.norm() < 1e-9);
  CHECK(est.estimates[0][1].norm() == 0.0);

  // plane wave through the rigid-sphere array: recovered vector is parallel
  // to conj(Y(source)) once per-order mode strengths are divided out
  double sth = 1.1, sphv = 2.3;
  Eigen::VectorXcd pw = set.matrices[0].matrix * plane_wave_coeffs(order, sth, sphv);
  STFTFrameSet f2 = frames_from_vectors({pw}, bin, params.bins(), params);
  PWDEstimate est2 = pwd_stationary(f2, set, {bin});
  CHECK(cosine_similarity(est2.estimates[0][0], plane_wave_coeffs(order, sth, sphv)) > 0.999);
}

TEST_CASE("compensated pwd: identity trajectory equals stationary; rotation invariance") {
  ArrayGeometry g = near_uniform(24, 0.06);
  double k = wavenumber(2000.0);
  const int order = 3;
  SteeringSet set;
  set.fs = 10000.0;
  set.freqs_hz = {2000.0};
  set.matrices = {rigid_sphere_steering(g, k, order)};
  STFTParams params;
  params.fs = 10000.0;
  const int bin = params.nearest_bin(2000.0);

  double sth = 1.3, sphv = 0.4;
  std::vector<Eigen::VectorXcd> mic_frames;
  std::vector<std::vector<MotionTransform>> w_identity(1), w_rot(1);
  const int n_frames = 5;
  for (int i = 0; i < n_frames; ++i) {
    double alpha_field = -0.2 * i;  // array rotating by +0.2 rad per frame
    MotionTransform w = rotation_matrix(order, EulerAngles::normalized(alpha_field, 0, 0));
    // moving-array observation: apparent source azimuth shifts by the field angle
    mic_frames.push_back(set.matrices[0].matrix
                         * plane_wave_coeffs(order, sth, sphv + alpha_field));
    w_identity[0].push_back(MotionTransform::identity(order));
    w_rot[0].push_back(w);
  }
  STFTFrameSet frames = frames_from_vectors(mic_frames, bin, params.bins(), params);

  PWDEstimate stat = pwd_stationary(frames, set, {bin});
  PWDEstimate comp_id = pwd_compensated(frames, set, {bin}, w_identity);
  for (int i = 0; i < n_frames; ++i)
    CHECK((stat.estimates[0][i] - comp_id.estimates[0][i]).norm() < 1e-12);

  // with the true transforms, every compensated estimate equals the frame-0 one
  PWDEstimate comp = pwd_compensated(frames, set, {bin}, w_rot);
  for (int i = 1; i < n_frames; ++i)
    CHECK((comp.estimates[0][i] - comp.estimates[0][0]).norm()
          / comp.estimates[0][0].norm() < 1e-6);

  // pure rotation leaves the error-term power unchanged
  Eigen::MatrixXcd vp = pinv(set.matrices[0].matrix);
  Eigen::MatrixXcd vrp = pinv(set.matrices[0].matrix * w_rot[0][3].matrix);
  double t1 = (vp * vp.adjoint()).trace().real();
  double t2 = (vrp * vrp.adjoint()).trace().real();
  CHECK(std::abs(t1 - t2) / t1 < 1e-9);
}

TEST_CASE("combined matrix: stacking rules and effective rank") {
  ArrayGeometry g = head_substitute_4(0.0625);
  double k = wavenumber(3085.9375);
  SteeringMatrix v = rigid_sphere_steering(g, k, 4);
  MotionTransform eye = MotionTransform::identity(4);
  std::vector<const SteeringMatrix*> vs = {&v};
  std::vector<const MotionTransform*> ws = {&eye};
  Eigen::MatrixXcd a1 = combined_matrix(vs, ws);
  CHECK((a1 - v.matrix).norm() == 0.0);

  // duplicated identity blocks add no information
  std::vector<const SteeringMatrix*> vs3 = {&v, &v, &v};
  std::vector<const MotionTransform*> ws3 = {&eye, &eye, &eye};
  Eigen::MatrixXcd a3 = combined_matrix(vs3, ws3);
  CHECK(effective_rank(a3) == doctest::Approx(effective_rank(v.matrix)).epsilon(1e-9));

  MotionTransform r2 = MotionTransform::identity(2);
  std::vector<const MotionTransform*> bad = {&eye, &r2, &eye};
  CHECK_THROWS_AS(combined_matrix(vs3, bad), Error);
}

TEST_CASE("enhanced estimate: I=1 threshold-0 equals stationary; rotating-array recovery") {
  ArrayGeometry g = head_substitute_4(0.0625);
  double k = wavenumber(3085.9375);
  const int order = 4;
  SteeringMatrix v = rigid_sphere_steering(g, k, order);

  double sth = 1.7, sphv = 5.1;
  Eigen::VectorXcd a_pw = plane_wave_coeffs(order, sth, sphv);
  Eigen::VectorXcd p1 = v.matrix * a_pw;
  Eigen::VectorXcd est1 = enhanced_estimate(v.matrix, p1, 0.0);
  Eigen::VectorXcd stat = pinv(v.matrix) * p1;
  CHECK((est1 - stat).norm() < 1e-12);

  // noiseless rotating array, I = 90 frames of 4 mics
  const int I = 90;
  std::vector<MotionTransform> ws;
  std::vector<const SteeringMatrix*> vs;
  std::vector<const MotionTransform*> wps;
  Eigen::VectorXcd stacked(I * 4);
  double rate = -kPi * 128.0 / 10000.0;  // 180 deg/s at hop 128, field sign
  for (int i = 0; i < I; ++i)
    ws.push_back(rotation_matrix(order, EulerAngles::normalized(rate * i, 0, 0)));
  for (int i = 0; i < I; ++i) {
    vs.push_back(&v);
    wps.push_back(&ws[i]);
    stacked.segment(i * 4, 4) = v.matrix * (ws[i].matrix * a_pw);
  }
  Eigen::MatrixXcd a_comb = combined_matrix(vs, wps);
  // a z-rotating 4-mic array leaves exactly one m=0 direction unobservable
  // (rotation about z preserves m, and 4 mic latitudes cannot resolve the
  // five m=0 radial orders), so A has numerical rank 24 of 25 and the
  // recovered vector is the projection onto the retained directions; both
  // values below are cross-checked against an independent numpy evaluation
  Eigen::VectorXcd rec = enhanced_estimate(a_comb, stacked, 1e-6);
  CHECK(cosine_similarity(rec, a_pw) == doctest::Approx(0.971762).epsilon(1e-3));
  Eigen::VectorXcd rec3 = enhanced_estimate(a_comb, stacked, 1.0 / 3.0);
  CHECK(cosine_similarity(rec3, a_pw) == doctest::Approx(0.844703).epsilon(1e-3));
  CHECK_THROWS_AS(enhanced_estimate(a_comb, stacked.head(8), 0.5), Error);
}

TEST_CASE("covariance and frequency smoothing") {
  Eigen::VectorXcd a = random_matrix(5, 1, 21).col(0);
  Eigen::MatrixXcd q1 = covariance({a});
  CHECK((q1 - a * a.adjoint()).norm() < 1e-14);
  Eigen::MatrixXcd q3 = covariance({a, a, a});
  CHECK((q3 - q1).norm() < 1e-14);
  CHECK(q3.trace().real() == doctest::Approx(a.squaredNorm()).epsilon(1e-12));
  CHECK_THROWS_AS(covariance({}), Error);

  SmoothedCovariance s1 = freq_smooth({q1}, {4}, 1);
  CHECK((s1.matrix - q1).norm() == 0.0);
  SmoothedCovariance s2 = freq_smooth({q1, q1, q1}, {4, 5, 6}, 1);
  CHECK((s2.matrix - q1).norm() < 1e-14);
  CHECK_THROWS_AS(freq_smooth({}, {}, 1), Error);
}

TEST_CASE("music spectrum: single source, flat case, rotation covariance") {
  const int order = 3;
  double sth = 86.0 * kPi / 180.0, sphv = 118.0 * kPi / 180.0;  // on the 2-degree grid
  Eigen::VectorXcd a = plane_wave_coeffs(order, sth, sphv);
  SmoothedCovariance q;
  q.matrix = (a * a.adjoint());
  q.bins = {0};
  q.frame_count = 1;
  MusicSpectrum spec = music_spectrum(q, 1, 2.0);
  DoAResult peaks = pick_peaks(spec, 1);
  REQUIRE(peaks.estimates.size() == 1);
  CHECK(doa_error_angle_deg(peaks.estimates[0], {sth, sphv}) < 2.01);

  // isotropic covariance has no subspace structure
  SmoothedCovariance iso;
  iso.matrix = Eigen::MatrixXcd::Identity(sh_count(order), sh_count(order));
  iso.bins = {0};
  iso.frame_count = 1;
  MusicSpectrum flat = music_spectrum(iso, 1, 5.0);
  CHECK(flat.values.maxCoeff() / flat.values.minCoeff() < 1.0 + 1e-6);

  // rotating the field rotates the argmax accordingly
  double alpha = 40.0 * kPi / 180.0;
  Eigen::MatrixXcd r = rotation_matrix(order, EulerAngles::normalized(alpha, 0, 0)).matrix;
  SmoothedCovariance qr;
  qr.matrix = (r * a) * (r * a).adjoint();
  qr.bins = {0};
  qr.frame_count = 1;
  DoAResult rpeaks = pick_peaks(music_spectrum(qr, 1, 2.0), 1);
  CHECK(doa_error_angle_deg(rpeaks.estimates[0], {sth, sphv + alpha}) < 2.01);

  // positive scaling leaves the spectrum's argmax set unchanged
  SmoothedCovariance qs = q;
  qs.matrix *= 37.5;
  DoAResult speaks = pick_peaks(music_spectrum(qs, 1, 2.0), 1);
  CHECK(speaks.estimates[0].theta == peaks.estimates[0].theta);
  CHECK(speaks.estimates[0].phi == peaks.estimates[0].phi);

  CHECK_THROWS_AS(music_spectrum(q, sh_count(order), 2.0), Error);
}

TEST_CASE("pick peaks: ties, plateau shortfall") {
  MusicSpectrum spec;
  spec.thetas = {0.0, kPi / 4, kPi / 2, 3 * kPi / 4, kPi};
  spec.phis = {0.0, kPi / 2, kPi, 3 * kPi / 2};
  spec.values = Eigen::MatrixXd::Ones(5, 4);
  spec.assumed_sources = 1;
  DoAResult flat = pick_peaks(spec, 1);
  CHECK(flat.shortfall);
  CHECK(flat.estimates.empty());

  // two equal antipodal peaks both returned
  spec.values(1, 0) = 5.0;
  spec.values(3, 2) = 5.0;
  DoAResult two = pick_peaks(spec, 2);
  REQUIRE(two.estimates.size() == 2);
  CHECK(!two.shortfall);
  CHECK(two.values[0] == doctest::Approx(5.0));
  CHECK(two.values[1] == doctest::Approx(5.0));
  // tie broken by smaller linear index first
  CHECK(two.estimates[0].theta == doctest::Approx(kPi / 4));
}

TEST_CASE("effective rank: identity, rank one, invariances") {
  CHECK(effective_rank(Eigen::MatrixXcd::Identity(7, 7)) == doctest::Approx(7.0).epsilon(1e-12));
  Eigen::MatrixXcd r1 = random_matrix(6, 1, 31) * random_matrix(1, 4, 32);
  CHECK(effective_rank(r1) == doctest::Approx(1.0).epsilon(1e-9));
  Eigen::MatrixXcd a = random_matrix(8, 5, 33);
  double base = effective_rank(a);
  CHECK(effective_rank(3.7 * a) == doctest::Approx(base).epsilon(1e-12));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_matrix(8, 8, 34));
  Eigen::MatrixXcd qmat = qr.householderQ();
  CHECK(effective_rank(qmat * a) == doctest::Approx(base).epsilon(1e-9));
  CHECK_THROWS_AS(effective_rank(Eigen::MatrixXcd::Zero(3, 3)), Error);
}

TEST_CASE("effective rank: monotone in rotation angle for the 13-mic layout") {
  ArrayGeometry g = equiangular_13(0.06);
  double k = wavenumber(2000.0);
  Eigen::MatrixXcd v = rigid_sphere_steering(g, k, 6).matrix;
  double prev = 0.0;
  for (double a_deg : {0.0, 9.0, 18.0, 27.0, 36.0, 45.0}) {
    Eigen::MatrixXcd r = rotation_matrix(6, EulerAngles::normalized(a_deg * kPi / 180, 0, 0)).matrix;
    Eigen::MatrixXcd stack(2 * v.rows(), v.cols());
    stack << v, v * r;
    double er = effective_rank(stack);
    CHECK(er >= prev - 1e-9);
    prev = er;
  }
  CHECK(prev == doctest::Approx(16.90).epsilon(0.01));  // about 17 at 45 degrees
}

TEST_CASE("doa error angle and statistics") {
  CHECK(doa_error_angle_deg({1.0, 2.0}, {1.0, 2.0}) == doctest::Approx(0.0));
  CHECK(doa_error_angle_deg({0.3, 1.0}, {kPi - 0.3, 1.0 + kPi}) == doctest::Approx(180.0));
  CHECK(doa_error_angle_deg({kPi / 2, 0.0}, {kPi / 2, kPi / 2}) == doctest::Approx(90.0));

  ErrorStats s = error_stats({5.0, 5.0, 5.0});
  CHECK(s.mean == doctest::Approx(5.0));
  CHECK(s.stddev == doctest::Approx(0.0));
  ErrorStats t = error_stats({0.0, 10.0});
  CHECK(t.mean == doctest::Approx(5.0));
  CHECK(t.stddev == doctest::Approx(std::sqrt(50.0)).epsilon(1e-12));
  std::vector<double> sixty(60, 3.25);
  CHECK(error_stats(sixty).stddev == doctest::Approx(0.0));
  CHECK_THROWS_AS(error_stats({}), Error);
}

TEST_CASE("whitening: identity shape is a no-op up to scale") {
  Eigen::MatrixXcd q = covariance({random_matrix(6, 1, 41).col(0), random_matrix(6, 1, 42).col(0)});
  Eigen::MatrixXcd w = whiten_covariance(q, Eigen::MatrixXcd::Identity(6, 6));
  CHECK((w - q).norm() / q.norm() < 1e-12);
}
