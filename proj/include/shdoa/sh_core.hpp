#ifndef SHDOA_SH_CORE_HPP
#define SHDOA_SH_CORE_HPP

// Special functions and index bookkeeping shared by every spherical-harmonics
// domain computation: complex orthonormal harmonics (Condon-Shortley phase),
// spherical Bessel functions, Wigner 3j symbols and Wigner d/D functions.

#include <complex>

namespace shdoa {

using Cplx = std::complex<double>;

// Linear index of (n,m) in the n^2+n+m coefficient ordering.
int acn_index(int n, int m);

// Number of coefficients of a field of order N, (N+1)^2.
inline int sh_count(int order) { return (order + 1) * (order + 1); }

struct SHIndex {
  int n;
  int m;
};

// Inverse of acn_index.
SHIndex sh_index_of(int linear);

// Complex orthonormal spherical harmonic Y_n^m(theta, phi).
Cplx sph_harm(int n, int m, double theta, double phi);

// Spherical Bessel function of the first kind, j_q(x), x >= 0.
double sph_bessel_j(int q, double x);

// Spherical Neumann function y_q(x) and the derivatives of both kinds.
double sph_bessel_y(int q, double x);
double sph_bessel_j_deriv(int q, double x);
double sph_bessel_y_deriv(int q, double x);

// Wigner 3j symbol (j1 j2 j3; m1 m2 m3). Zero outside the triangle rule or
// when m1+m2+m3 != 0; throws for negative j.
double wigner_3j(int j1, int j2, int j3, int m1, int m2, int m3);

// Real Wigner-d function d^n_{m1,m2}(beta) via the Jacobi-polynomial form.
double wigner_d(int n, int m1, int m2, double beta);

// Complex Wigner-D function, e^{-j m1 alpha} d^n_{m1,m2}(beta) e^{-j m2 gamma}.
Cplx wigner_D(int n, int m1, int m2, double alpha, double beta, double gamma);

// log(x!) with exact low-integer table.
double log_factorial(int x);

}  // namespace shdoa

#endif
