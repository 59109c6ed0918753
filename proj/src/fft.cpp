#include "shdoa/fft.hpp"

#include <cstring>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "shdoa/error.hpp"

namespace shdoa {

namespace {

std::mutex g_plan_mutex;

struct R2cPlan {
  fftw_plan plan;
  double* in;
  fftw_complex* out;
  int n;
};

struct C2rPlan {
  fftw_plan plan;
  fftw_complex* in;
  double* out;
  int n;
};

struct C2cPlan {
  fftw_plan plan;
  fftw_complex* in;
  fftw_complex* out;
  int n;
};

// Plans keep their own fftw buffers; callers copy in/out under the lock. All
// transform sizes in this project are small (<= 64k), so serializing execute
// is cheaper than per-thread plan tables.
R2cPlan& r2c_plan(int n) {
  static std::map<int, R2cPlan> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    R2cPlan p;
    p.n = n;
    p.in = fftw_alloc_real(n);
    p.out = fftw_alloc_complex(n / 2 + 1);
    p.plan = fftw_plan_dft_r2c_1d(n, p.in, p.out, FFTW_ESTIMATE);
    it = cache.emplace(n, p).first;
  }
  return it->second;
}

C2rPlan& c2r_plan(int n) {
  static std::map<int, C2rPlan> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    C2rPlan p;
    p.n = n;
    p.in = fftw_alloc_complex(n / 2 + 1);
    p.out = fftw_alloc_real(n);
    p.plan = fftw_plan_dft_c2r_1d(n, p.in, p.out, FFTW_ESTIMATE);
    it = cache.emplace(n, p).first;
  }
  return it->second;
}

C2cPlan& c2c_plan(int n, bool inverse) {
  static std::map<std::pair<int, bool>, C2cPlan> cache;
  auto key = std::make_pair(n, inverse);
  auto it = cache.find(key);
  if (it == cache.end()) {
    C2cPlan p;
    p.n = n;
    p.in = fftw_alloc_complex(n);
    p.out = fftw_alloc_complex(n);
    p.plan = fftw_plan_dft_1d(n, p.in, p.out, inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    it = cache.emplace(key, p).first;
  }
  return it->second;
}

}  // namespace

std::vector<std::complex<double>> fft_r2c(const std::vector<double>& in) {
  if (in.empty()) fail(ErrorKind::invalid_argument, "empty FFT input");
  int n = static_cast<int>(in.size());
  std::vector<std::complex<double>> out(n / 2 + 1);
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  R2cPlan& p = r2c_plan(n);
  std::memcpy(p.in, in.data(), n * sizeof(double));
  fftw_execute(p.plan);
  std::memcpy(static_cast<void*>(out.data()), p.out, (n / 2 + 1) * sizeof(fftw_complex));
  return out;
}

std::vector<double> fft_c2r(const std::vector<std::complex<double>>& spec, int n) {
  if (static_cast<int>(spec.size()) != n / 2 + 1)
    fail(ErrorKind::invalid_argument, "spectrum length does not match n/2+1");
  std::vector<double> out(n);
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  C2rPlan& p = c2r_plan(n);
  std::memcpy(p.in, spec.data(), (n / 2 + 1) * sizeof(fftw_complex));
  fftw_execute(p.plan);
  for (int i = 0; i < n; ++i) out[i] = p.out[i] / n;
  return out;
}

std::vector<std::complex<double>> fft_c2c(const std::vector<std::complex<double>>& in, bool inverse) {
  if (in.empty()) fail(ErrorKind::invalid_argument, "empty FFT input");
  int n = static_cast<int>(in.size());
  std::vector<std::complex<double>> out(n);
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  C2cPlan& p = c2c_plan(n, inverse);
  std::memcpy(p.in, in.data(), n * sizeof(fftw_complex));
  fftw_execute(p.plan);
  std::memcpy(static_cast<void*>(out.data()), p.out, n * sizeof(fftw_complex));
  if (inverse)
    for (auto& v : out) v /= n;
  return out;
}

}  // namespace shdoa
