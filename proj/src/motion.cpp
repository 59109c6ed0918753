#include "shdoa/motion.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "shdoa/error.hpp"

namespace shdoa {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
  if (!std::isfinite(a)) fail(ErrorKind::invalid_argument, "non-finite Euler angle");
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;  // into (-pi, pi]
  return w;
}

Eigen::Matrix3d rot_zyz(const EulerAngles& e) {
  return (Eigen::AngleAxisd(e.alpha, Eigen::Vector3d::UnitZ())
          * Eigen::AngleAxisd(e.beta, Eigen::Vector3d::UnitY())
          * Eigen::AngleAxisd(e.gamma, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

}  // namespace

EulerAngles EulerAngles::normalized(double a, double b, double g) {
  return {wrap_angle(a), wrap_angle(b), wrap_angle(g)};
}

bool EulerAngles::is_identity(double tol) const {
  // beta = 0 leaves only alpha+gamma observable
  if (std::abs(beta) <= tol) return std::abs(wrap_angle(alpha + gamma)) <= tol;
  return false;
}

TranslationVec TranslationVec::checked(double r, double theta, double phi) {
  if (!(r >= 0.0)) fail(ErrorKind::invalid_argument, "translation radius must be >= 0");
  if (theta < 0.0 || theta > kPi) fail(ErrorKind::invalid_argument, "translation elevation outside [0, pi]");
  return {r, theta, phi};
}

Eigen::Vector3d TranslationVec::cartesian() const {
  return {r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi), r * std::cos(theta)};
}

TranslationVec TranslationVec::from_cartesian(const Eigen::Vector3d& v) {
  double r = v.norm();
  if (r < 1e-300) return {0.0, 0.0, 0.0};
  return {r, std::acos(std::clamp(v.z() / r, -1.0, 1.0)), std::atan2(v.y(), v.x())};
}

bool FramePose::is_identity(double tol) const {
  return rotation.is_identity(tol) && translation.r <= tol;
}

void Trajectory::validate() const {
  if (poses.empty()) fail(ErrorKind::validation, "trajectory must contain at least one pose");
  if (!poses.front().is_identity(1e-9))
    fail(ErrorKind::validation, "trajectory pose[0] must be the identity pose");
}

MotionTransform MotionTransform::identity(int order) {
  MotionTransform w;
  w.input_order = w.output_order = order;
  w.matrix = Eigen::MatrixXcd::Identity(sh_count(order), sh_count(order));
  return w;
}

MotionTransform rotation_matrix(int order, const EulerAngles& e) {
  if (order < 0) fail(ErrorKind::invalid_argument, "negative SH order");
  MotionTransform w;
  w.input_order = w.output_order = order;
  w.matrix = Eigen::MatrixXcd::Zero(sh_count(order), sh_count(order));
  for (int n = 0; n <= order; ++n) {
    for (int m1 = -n; m1 <= n; ++m1) {
      for (int m2 = -n; m2 <= n; ++m2) {
        w.matrix(acn_index(n, m1), acn_index(n, m2)) = wigner_D(n, m1, m2, e.alpha, e.beta, e.gamma);
      }
    }
  }
  return w;
}

Cplx translation_coeff(int n_out, int m_out, int n_in, int m_in, int q) {
  if (n_out < 0 || n_in < 0 || q < 0) fail(ErrorKind::invalid_argument, "negative order in translation coefficient");
  double g0 = wigner_3j(n_in, n_out, q, 0, 0, 0);
  if (g0 == 0.0) return {0.0, 0.0};
  double gm = wigner_3j(n_in, n_out, q, -m_in, m_out, m_in - m_out);
  if (gm == 0.0) return {0.0, 0.0};
  double mag = 4.0 * kPi * ((m_in & 1) ? -1.0 : 1.0)
               * std::sqrt((2.0 * n_in + 1) * (2.0 * n_out + 1) * (2.0 * q + 1) / (4.0 * kPi));
  static const Cplx jp[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return jp[((n_out + q - n_in) % 4 + 4) % 4] * mag * g0 * gm;
}

namespace {

// Entry of the field translation operator. The printed addition-theorem
// coefficient acts on regular-wave coefficients 4pi j^n a_{nm}; conjugating by
// diag(j^n) gives the operator acting on the PWD coefficients themselves,
// which replaces the j^{n'+q-n} phase with j^q. The plane-wave oracle in the
// tests pins this variant.
Cplx translation_entry(int n_out, int m_out, int n_in, int m_in, double kr,
                       double theta, double phi, int q_cap) {
  static const Cplx jp[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  Cplx sum = 0.0;
  int q_lo = std::max(std::abs(n_in - n_out), std::abs(m_in - m_out));
  int q_hi = std::min(q_cap, n_in + n_out);
  for (int q = q_lo; q <= q_hi; ++q) {
    Cplx c = translation_coeff(n_out, m_out, n_in, m_in, q);
    if (c == Cplx{0.0, 0.0}) continue;
    // phase correction j^{n-n'} turns the printed coefficient into the PWD one
    c *= jp[((n_in - n_out) % 4 + 4) % 4];
    sum += sph_bessel_j(q, kr) * sph_harm(q, m_in - m_out, theta, phi) * c;
  }
  return sum;
}

MotionTransform build_translation(int n_in, double k, const TranslationVec& t, int n_out, int q_cap) {
  MotionTransform w;
  w.input_order = n_in;
  w.output_order = n_out;
  w.matrix = Eigen::MatrixXcd::Zero(sh_count(n_out), sh_count(n_in));
  if (k * t.r == 0.0) {
    int d = std::min(sh_count(n_in), sh_count(n_out));
    w.matrix.topLeftCorner(d, d).setIdentity();
    return w;
  }
  double kr = k * t.r;
  for (int no = 0; no <= n_out; ++no)
    for (int mo = -no; mo <= no; ++mo)
      for (int ni = 0; ni <= n_in; ++ni)
        for (int mi = -ni; mi <= ni; ++mi)
          w.matrix(acn_index(no, mo), acn_index(ni, mi)) =
              translation_entry(no, mo, ni, mi, kr, t.theta, t.phi, q_cap);
  return w;
}

}  // namespace

MotionTransform translation_matrix(int n_in, double k, const TranslationVec& t, int n_out, int q_margin) {
  if (n_in < 0) fail(ErrorKind::invalid_argument, "negative SH order");
  if (k < 0) fail(ErrorKind::invalid_argument, "negative wavenumber");
  int growth = static_cast<int>(std::ceil(k * t.r));
  if (n_out < 0) n_out = n_in + growth;
  if (n_out < n_in) fail(ErrorKind::invalid_argument, "translation output order below input order");
  return build_translation(n_in, k, t, n_out, growth + q_margin);
}

MotionTransform small_translation_matrix(int n_in, double k, const TranslationVec& t) {
  if (n_in < 0) fail(ErrorKind::invalid_argument, "negative SH order");
  if (!(k * t.r < 1.0))
    fail(ErrorKind::invalid_argument, "small-translation form requires k*r < 1; use translation_matrix");
  return build_translation(n_in, k, t, n_in + 1, 1);
}

Eigen::VectorXcd apply_transform(const MotionTransform& w, const Eigen::VectorXcd& coeffs) {
  Eigen::VectorXcd in = Eigen::VectorXcd::Zero(w.matrix.cols());
  int d = std::min<int>(in.size(), coeffs.size());
  in.head(d) = coeffs.head(d);
  return w.matrix * in;
}

namespace {

// W-factors of one pose step: rotation of the field by the inverse array
// rotation, then translation by the displacement expressed in the rotated
// array frame.
struct PoseFactors {
  EulerAngles field_rot;
  TranslationVec local_shift;
};

PoseFactors factors_of(const FramePose& pose) {
  PoseFactors f;
  f.field_rot = pose.rotation.inverse();
  Eigen::Vector3d local = rot_zyz(pose.rotation).transpose() * pose.translation.cartesian();
  f.local_shift = TranslationVec::from_cartesian(local);
  return f;
}

MotionTransform pose_transform(const FramePose& pose, double k, int n_in, int order_cap, int q_margin) {
  PoseFactors f = factors_of(pose);
  MotionTransform rot = rotation_matrix(n_in, f.field_rot);
  if (f.local_shift.r == 0.0) return rot;
  int growth = static_cast<int>(std::ceil(k * f.local_shift.r));
  int n_out = std::min(n_in + growth, std::max(order_cap, n_in));
  MotionTransform tr = (k * f.local_shift.r < 1.0 && n_out == n_in + 1)
                           ? small_translation_matrix(n_in, k, f.local_shift)
                           : translation_matrix(n_in, k, f.local_shift, n_out, q_margin);
  MotionTransform w;
  w.input_order = n_in;
  w.output_order = tr.output_order;
  w.matrix = tr.matrix * rot.matrix;
  return w;
}

}  // namespace

MotionTransform compose_transform(const Trajectory& traj, int frame, double k, int n_in,
                                  const ComposeOptions& opts) {
  traj.validate();
  if (frame < 0 || frame >= static_cast<int>(traj.poses.size()))
    fail(ErrorKind::invalid_argument, "frame index outside trajectory");
  if (frame == 0) return MotionTransform::identity(n_in);

  int cap = opts.order_cap;
  if (cap < 0) {
    double r_total = 0.0;
    if (traj.convention == TrajectoryConvention::absolute) {
      r_total = traj.poses[frame].translation.r;
    } else {
      for (int l = 1; l <= frame; ++l) r_total += traj.poses[l].translation.r;
    }
    cap = n_in + static_cast<int>(std::ceil(k * r_total)) + 2;
  }
  if (cap < n_in) fail(ErrorKind::invalid_argument, "order cap below input order");

  if (traj.convention == TrajectoryConvention::absolute) {
    return pose_transform(traj.poses[frame], k, n_in, cap, opts.q_margin);
  }
  // delta: chain per-step transforms, frame-to-frame, truncating at the cap
  MotionTransform w = MotionTransform::identity(n_in);
  for (int l = 1; l <= frame; ++l) {
    MotionTransform step = pose_transform(traj.poses[l], k, w.output_order, cap, opts.q_margin);
    MotionTransform next;
    next.input_order = n_in;
    next.output_order = step.output_order;
    next.matrix = step.matrix * w.matrix;
    w = std::move(next);
  }
  return w;
}

Trajectory Trajectory::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open trajectory file: " + path);
  Trajectory traj;
  std::string line;
  bool have_convention = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') {
      auto at = line.find("convention=");
      if (at != std::string::npos) {
        std::string c = line.substr(at + 11);
        if (c.find("absolute") == 0) traj.convention = TrajectoryConvention::absolute;
        else if (c.find("delta") == 0) traj.convention = TrajectoryConvention::delta;
        else fail(ErrorKind::format, "trajectory line " + std::to_string(lineno) + ": unknown convention");
        have_convention = true;
      }
      continue;
    }
    if (line.find("frame") == 0) continue;  // header row
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        fail(ErrorKind::format, "trajectory line " + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
    }
    if (vals.size() != 7)
      fail(ErrorKind::format, "trajectory line " + std::to_string(lineno) + ": want 7 columns, got "
                                  + std::to_string(vals.size()));
    FramePose p;
    p.rotation = EulerAngles::normalized(vals[1], vals[2], vals[3]);
    p.translation = TranslationVec::checked(vals[4], vals[5], vals[6]);
    traj.poses.push_back(p);
  }
  if (!have_convention) fail(ErrorKind::format, "trajectory file missing '# convention=' line");
  traj.validate();
  return traj;
}

void Trajectory::save_csv(const std::string& path) const {
  validate();
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write trajectory file: " + path);
  out << "# convention=" << (convention == TrajectoryConvention::absolute ? "absolute" : "delta") << "\n";
  out << "frame,alpha,beta,gamma,r,theta,phi\n";
  out.precision(17);
  for (size_t i = 0; i < poses.size(); ++i) {
    const FramePose& p = poses[i];
    out << i << ',' << p.rotation.alpha << ',' << p.rotation.beta << ',' << p.rotation.gamma << ','
        << p.translation.r << ',' << p.translation.theta << ',' << p.translation.phi << "\n";
  }
}

}  // namespace shdoa
