#ifndef SHDOA_FFT_HPP
#define SHDOA_FFT_HPP

// Thin FFTW wrapper with a mutex-guarded plan cache. Plan creation is not
// thread safe in FFTW; execution on caller-owned buffers is.

#include <complex>
#include <vector>

namespace shdoa {

// out[k] = sum_t in[t] e^{-2 pi j k t / n}, k = 0..n/2 (real input)
std::vector<std::complex<double>> fft_r2c(const std::vector<double>& in);

// inverse of fft_r2c scaled by 1/n; spec must hold n/2+1 bins for length n
std::vector<double> fft_c2r(const std::vector<std::complex<double>>& spec, int n);

std::vector<std::complex<double>> fft_c2c(const std::vector<std::complex<double>>& in, bool inverse);

}  // namespace shdoa

#endif
