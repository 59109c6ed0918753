#include "shdoa/steering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "shdoa/error.hpp"

namespace shdoa {

namespace {

constexpr double kPi = std::numbers::pi;

MicPos to_angles(double x, double y, double z) {
  double r = std::sqrt(x * x + y * y + z * z);
  x /= r; y /= r; z /= r;
  double phi = std::atan2(y, x);
  if (phi < 0) phi += 2.0 * kPi;
  return {std::acos(std::clamp(z, -1.0, 1.0)), phi};
}

std::vector<MicPos> tetrahedron_pts() {
  return {to_angles(1, 1, 1), to_angles(1, -1, -1), to_angles(-1, 1, -1), to_angles(-1, -1, 1)};
}

std::vector<MicPos> icosahedron_pts() {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<MicPos> out;
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0}) {
      out.push_back(to_angles(0, s1, s2 * g));
      out.push_back(to_angles(s1, s2 * g, 0));
      out.push_back(to_angles(s2 * g, 0, s1));
    }
  return out;
}

std::vector<MicPos> dodecahedron_pts() {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<MicPos> out;
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0}) {
      for (double s3 : {1.0, -1.0}) out.push_back(to_angles(s1, s2, s3));
      out.push_back(to_angles(0, s1 / g, s2 * g));
      out.push_back(to_angles(s1 / g, s2 * g, 0));
      out.push_back(to_angles(s2 * g, 0, s1 / g));
    }
  return out;
}

// Snub cube vertices (one chirality): even permutations of (1, 1/t, t) with an
// even number of sign flips plus odd permutations with an odd number, t the
// tribonacci constant. Min pairwise separation ~43.7 deg.
std::vector<MicPos> snub_cube_pts() {
  const double t = 1.8392867552141612;
  const double base[3] = {1.0, 1.0 / t, t};
  const int even[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
  const int odd[3][3] = {{0, 2, 1}, {1, 0, 2}, {2, 1, 0}};
  std::vector<MicPos> out;
  auto emit = [&](const int* p, bool want_odd_signs) {
    for (int sx : {1, -1})
      for (int sy : {1, -1})
        for (int sz : {1, -1}) {
          int neg = (sx < 0) + (sy < 0) + (sz < 0);
          if ((neg % 2 == 1) == want_odd_signs)
            out.push_back(to_angles(sx * base[p[0]], sy * base[p[1]], sz * base[p[2]]));
        }
  };
  for (auto& p : even) emit(p, false);
  for (auto& p : odd) emit(p, true);
  return out;
}

}  // namespace

void ArrayGeometry::validate() const {
  if (!(radius > 0.0)) fail(ErrorKind::invalid_argument, "array radius must be > 0");
  if (mics.empty()) fail(ErrorKind::invalid_argument, "array needs at least one microphone");
  for (const MicPos& p : mics)
    if (p.theta < 0.0 || p.theta > kPi)
      fail(ErrorKind::invalid_argument, "microphone elevation outside [0, pi]");
}

Cplx mode_strength(int n, double x) {
  if (n < 0) fail(ErrorKind::invalid_argument, "negative order");
  if (x == 0.0) return (n == 0) ? Cplx{4.0 * kPi, 0.0} : Cplx{0.0, 0.0};
  Cplx h{sph_bessel_j(n, x), -sph_bessel_y(n, x)};
  Cplx hd{sph_bessel_j_deriv(n, x), -sph_bessel_y_deriv(n, x)};
  Cplx core = sph_bessel_j(n, x) - sph_bessel_j_deriv(n, x) / hd * h;
  static const Cplx jp[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return 4.0 * kPi * jp[n % 4] * core;
}

SteeringMatrix rigid_sphere_steering(const ArrayGeometry& geom, double k, int order) {
  geom.validate();
  if (!(k > 0.0)) fail(ErrorKind::invalid_argument, "wavenumber must be > 0");
  if (order < 0) fail(ErrorKind::invalid_argument, "negative SH order");
  SteeringMatrix v;
  v.k = k;
  v.order = order;
  v.matrix.resize(static_cast<int>(geom.mics.size()), sh_count(order));
  for (int n = 0; n <= order; ++n) {
    Cplx bn = mode_strength(n, k * geom.radius);
    if (std::abs(bn) < 1e-280) {
      bn = 0.0;
      v.underflowed_orders.push_back(n);
    }
    for (int q = 0; q < static_cast<int>(geom.mics.size()); ++q) {
      for (int m = -n; m <= n; ++m) {
        v.matrix(q, acn_index(n, m)) = bn * sph_harm(n, m, geom.mics[q].theta, geom.mics[q].phi);
      }
    }
  }
  return v;
}

ArrayGeometry equiangular_13(double radius) {
  if (!(radius > 0.0)) fail(ErrorKind::invalid_argument, "array radius must be > 0");
  ArrayGeometry g;
  g.radius = radius;
  g.label = "equiangular13";
  g.mics.push_back({0.0, 0.0});
  for (double th : {45.0, 90.0, 135.0})
    for (double ph : {0.0, 90.0, 180.0, 270.0})
      g.mics.push_back({th * kPi / 180.0, ph * kPi / 180.0});
  return g;
}

std::vector<MicPos> near_uniform_directions(int m) {
  switch (m) {
    case 4: return tetrahedron_pts();
    case 12: return icosahedron_pts();
    case 20: return dodecahedron_pts();
    case 24: return snub_cube_pts();
    case 32: {
      auto pts = icosahedron_pts();
      auto d = dodecahedron_pts();
      pts.insert(pts.end(), d.begin(), d.end());
      return pts;
    }
    default:
      fail(ErrorKind::unsupported, "no near-uniform layout for M=" + std::to_string(m)
                                       + " (supported: 4, 12, 20, 24, 32)");
  }
}

ArrayGeometry near_uniform(int m, double radius) {
  if (!(radius > 0.0)) fail(ErrorKind::invalid_argument, "array radius must be > 0");
  ArrayGeometry g;
  g.radius = radius;
  g.label = "near_uniform" + std::to_string(m);
  g.mics = near_uniform_directions(m);
  return g;
}

ArrayGeometry head_substitute_4(double radius) {
  if (!(radius > 0.0)) fail(ErrorKind::invalid_argument, "array radius must be > 0");
  ArrayGeometry g;
  g.radius = radius;
  g.label = "head4";
  g.mics = {{40.0 * kPi / 180.0, 0.0},
            {75.0 * kPi / 180.0, 90.0 * kPi / 180.0},
            {105.0 * kPi / 180.0, 180.0 * kPi / 180.0},
            {140.0 * kPi / 180.0, 270.0 * kPi / 180.0}};
  return g;
}

const SteeringMatrix& SteeringSet::at_freq(double f_hz) const {
  if (matrices.empty()) fail(ErrorKind::invalid_argument, "empty steering set");
  size_t best = 0;
  double bd = std::abs(freqs_hz[0] - f_hz);
  for (size_t i = 1; i < freqs_hz.size(); ++i) {
    double d = std::abs(freqs_hz[i] - f_hz);
    if (d < bd) { bd = d; best = i; }
  }
  return matrices[best];
}

void save_steering(const SteeringSet& set, const std::string& path) {
  if (set.matrices.empty()) fail(ErrorKind::invalid_argument, "empty steering set");
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write steering file: " + path);
  int m = static_cast<int>(set.matrices.front().matrix.rows());
  int order = set.matrices.front().order;
  out << "shdoa-steering 1\n";
  out << "M " << m << "\n";
  out << "N " << order << "\n";
  out.precision(17);
  out << "radius " << set.radius << "\n";
  out << "fs " << set.fs << "\n";
  out << "nbins " << set.matrices.size() << "\n";
  out << "freqs";
  for (double f : set.freqs_hz) out << ' ' << f;
  out << "\n";
  for (const SteeringMatrix& v : set.matrices) {
    for (int q = 0; q < v.matrix.rows(); ++q) {
      for (int c = 0; c < v.matrix.cols(); ++c) {
        if (c) out << ' ';
        out << v.matrix(q, c).real() << ',' << v.matrix(q, c).imag();
      }
      out << "\n";
    }
  }
}

SteeringSet load_steering(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open steering file: " + path);
  auto bad = [&](int line, const std::string& what) {
    fail(ErrorKind::format, path + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line) || line != "shdoa-steering 1") bad(1, "missing 'shdoa-steering 1' magic");
  SteeringSet set;
  int m = -1, order = -1, nbins = -1;
  for (int i = 0; i < 5; ++i) {
    ++lineno;
    if (!std::getline(in, line)) bad(lineno, "truncated header");
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "M") ss >> m;
    else if (key == "N") ss >> order;
    else if (key == "radius") ss >> set.radius;
    else if (key == "fs") ss >> set.fs;
    else if (key == "nbins") ss >> nbins;
    else bad(lineno, "unknown header key '" + key + "'");
    if (!ss) bad(lineno, "bad header value");
  }
  if (m <= 0 || order < 0 || nbins <= 0) bad(lineno, "incomplete header");
  ++lineno;
  if (!std::getline(in, line)) bad(lineno, "missing frequency grid");
  {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key != "freqs") bad(lineno, "expected 'freqs' line");
    double f;
    while (ss >> f) set.freqs_hz.push_back(f);
  }
  if (static_cast<int>(set.freqs_hz.size()) != nbins) bad(lineno, "frequency grid length != nbins");
  for (size_t i = 1; i < set.freqs_hz.size(); ++i)
    if (set.freqs_hz[i] <= set.freqs_hz[i - 1]) bad(lineno, "frequency grid not strictly increasing");

  int cols = sh_count(order);
  for (int b = 0; b < nbins; ++b) {
    SteeringMatrix v;
    v.order = order;
    v.k = wavenumber(set.freqs_hz[b]);
    v.matrix.resize(m, cols);
    for (int q = 0; q < m; ++q) {
      ++lineno;
      if (!std::getline(in, line)) bad(lineno, "truncated matrix data");
      std::istringstream ss(line);
      std::string tok;
      int c = 0;
      while (ss >> tok) {
        if (c >= cols) bad(lineno, "row has more than (N+1)^2 columns");
        auto comma = tok.find(',');
        if (comma == std::string::npos) bad(lineno, "entry is not 're,im'");
        try {
          double re = std::stod(tok.substr(0, comma));
          double im = std::stod(tok.substr(comma + 1));
          if (!std::isfinite(re) || !std::isfinite(im)) bad(lineno, "non-finite entry");
          v.matrix(q, c++) = Cplx{re, im};
        } catch (const Error&) {
          throw;
        } catch (const std::exception&) {
          bad(lineno, "bad entry '" + tok + "'");
        }
      }
      if (c != cols) bad(lineno, "row has fewer than (N+1)^2 columns");
    }
    set.matrices.push_back(std::move(v));
  }
  return set;
}

ArrayGeometry ArrayGeometry::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open geometry file: " + path);
  ArrayGeometry g;
  g.label = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto at = line.find("radius=");
      if (at != std::string::npos) g.radius = std::stod(line.substr(at + 7));
      continue;
    }
    if (line.find("theta") == 0) continue;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      fail(ErrorKind::format, path + ":" + std::to_string(lineno) + ": want 'theta,phi'");
    try {
      g.mics.push_back({std::stod(a), std::stod(b)});
    } catch (const std::exception&) {
      fail(ErrorKind::format, path + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  g.validate();
  return g;
}

void ArrayGeometry::save_csv(const std::string& path) const {
  validate();
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write geometry file: " + path);
  out.precision(17);
  out << "# radius=" << radius << "\n";
  out << "theta,phi\n";
  for (const MicPos& p : mics) out << p.theta << ',' << p.phi << "\n";
}

}  // namespace shdoa
