#include "shdoa/sh_core.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "shdoa/error.hpp"

namespace shdoa {

namespace {

void check_degree(int n, int m) {
  if (n < 0) fail(ErrorKind::invalid_argument, "negative order n");
  if (m < -n || m > n) fail(ErrorKind::invalid_argument, "degree |m| exceeds order n");
}

double parity(int p) { return (p & 1) ? -1.0 : 1.0; }

// Jacobi polynomial P_s^{(a,b)}(x) by the three-term recurrence.
double jacobi(int s, int a, int b, double x) {
  if (s == 0) return 1.0;
  double pm1 = 1.0;
  double p = 0.5 * (a - b) + 0.5 * (a + b + 2) * x;
  for (int k = 2; k <= s; ++k) {
    double c1 = 2.0 * k * (k + a + b) * (2.0 * k + a + b - 2);
    double c2 = (2.0 * k + a + b - 1) * ((2.0 * k + a + b) * (2.0 * k + a + b - 2) * x + a * a - b * b);
    double c3 = 2.0 * (k + a - 1) * (k + b - 1) * (2.0 * k + a + b);
    double next = (c2 * p - c3 * pm1) / c1;
    pm1 = p;
    p = next;
  }
  return p;
}

}  // namespace

double log_factorial(int x) {
  static const std::array<double, 21> exact = [] {
    std::array<double, 21> t{};
    double f = 1.0;
    t[0] = 0.0;
    for (int i = 1; i <= 20; ++i) {
      f *= i;
      t[i] = std::log(f);
    }
    return t;
  }();
  if (x < 0) fail(ErrorKind::invalid_argument, "factorial of negative integer");
  if (x <= 20) return exact[x];
  return std::lgamma(x + 1.0);
}

int acn_index(int n, int m) {
  check_degree(n, m);
  return n * n + n + m;
}

SHIndex sh_index_of(int linear) {
  if (linear < 0) fail(ErrorKind::invalid_argument, "negative linear index");
  int n = static_cast<int>(std::sqrt(static_cast<double>(linear)));
  while ((n + 1) * (n + 1) <= linear) ++n;
  while (n * n > linear) --n;
  return {n, linear - n * n - n};
}

Cplx sph_harm(int n, int m, double theta, double phi) {
  check_degree(n, m);
  // std::sph_legendre carries the orthonormal normalization and the
  // Condon-Shortley phase; m < 0 via conj(Y_n^m) = (-1)^m Y_n^{-m}.
  int ma = std::abs(m);
  double leg = std::sph_legendre(static_cast<unsigned>(n), static_cast<unsigned>(ma), theta);
  Cplx y = leg * std::polar(1.0, ma * phi);
  if (m < 0) y = parity(ma) * std::conj(y);
  return y;
}

double sph_bessel_j(int q, double x) {
  if (q < 0) fail(ErrorKind::invalid_argument, "negative Bessel order");
  if (x < 0) fail(ErrorKind::invalid_argument, "negative Bessel argument");
  return std::sph_bessel(static_cast<unsigned>(q), x);
}

double sph_bessel_y(int q, double x) {
  if (q < 0 || x <= 0) fail(ErrorKind::invalid_argument, "spherical Neumann needs q >= 0, x > 0");
  return std::sph_neumann(static_cast<unsigned>(q), x);
}

double sph_bessel_j_deriv(int q, double x) {
  if (q == 0) return (x == 0.0) ? 0.0 : -sph_bessel_j(1, x);
  if (x == 0.0) return (q == 1) ? 1.0 / 3.0 : 0.0;
  return sph_bessel_j(q - 1, x) - (q + 1.0) / x * sph_bessel_j(q, x);
}

double sph_bessel_y_deriv(int q, double x) {
  if (q == 0) return -sph_bessel_y(1, x);
  return sph_bessel_y(q - 1, x) - (q + 1.0) / x * sph_bessel_y(q, x);
}

double wigner_3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (j1 < 0 || j2 < 0 || j3 < 0) fail(ErrorKind::invalid_argument, "negative angular momentum");
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if (m1 + m2 + m3 != 0) return 0.0;
  if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;

  // Racah single-sum formula, factorials in log space.
  auto lf = [](int v) { return log_factorial(v); };
  double tri = 0.5 * (lf(j1 + j2 - j3) + lf(j1 - j2 + j3) + lf(-j1 + j2 + j3) - lf(j1 + j2 + j3 + 1));
  double pre = 0.5 * (lf(j1 + m1) + lf(j1 - m1) + lf(j2 + m2) + lf(j2 - m2) + lf(j3 + m3) + lf(j3 - m3));
  int tmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
  int tmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
  double sum = 0.0;
  for (int t = tmin; t <= tmax; ++t) {
    double ln = tri + pre - lf(t) - lf(j3 - j2 + m1 + t) - lf(j3 - j1 - m2 + t)
                - lf(j1 + j2 - j3 - t) - lf(j1 - m1 - t) - lf(j2 + m2 - t);
    sum += parity(t) * std::exp(ln);
  }
  return sum * parity(j1 - j2 - m3);
}

double wigner_d(int n, int m1, int m2, double beta) {
  check_degree(n, m1);
  check_degree(n, m2);
  int mu = std::abs(m1 - m2);
  int nu = std::abs(m1 + m2);
  int s = n - (mu + nu) / 2;  // Jacobi index; see tests for the unitarity check
  double eta = (m2 >= m1) ? 1.0 : parity(m2 - m1);
  double lnf = 0.5 * (log_factorial(s) + log_factorial(s + mu + nu)
                      - log_factorial(s + mu) - log_factorial(s + nu));
  double sh = std::sin(0.5 * beta);
  double ch = std::cos(0.5 * beta);
  double pw = 1.0;
  for (int i = 0; i < mu; ++i) pw *= sh;
  for (int i = 0; i < nu; ++i) pw *= ch;
  return eta * std::exp(lnf) * pw * jacobi(s, mu, nu, std::cos(beta));
}

Cplx wigner_D(int n, int m1, int m2, double alpha, double beta, double gamma) {
  double d = wigner_d(n, m1, m2, beta);
  return std::polar(1.0, -m1 * alpha) * d * std::polar(1.0, -m2 * gamma);
}

}  // namespace shdoa
