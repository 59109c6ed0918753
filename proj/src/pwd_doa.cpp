#include "shdoa/pwd_doa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "shdoa/error.hpp"

namespace shdoa {

namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::MatrixXcd pinv(const Eigen::MatrixXcd& a, double rcond) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return Eigen::MatrixXcd::Zero(a.cols(), a.rows());
  double cut = s(0) * rcond;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

Eigen::MatrixXcd truncated_pinv(const Eigen::MatrixXcd& a, double sv_threshold) {
  if (sv_threshold < 0.0 || sv_threshold >= 1.0)
    fail(ErrorKind::invalid_argument, "singular-value threshold must be in [0, 1)");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0)
    fail(ErrorKind::degenerate_system, "all singular values below threshold");
  double cut = s(0) * sv_threshold;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  int kept = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > cut || (sv_threshold == 0.0 && s(i) > s(0) * 1e-13)) {
      inv(i) = 1.0 / s(i);
      ++kept;
    }
  }
  if (kept == 0) fail(ErrorKind::degenerate_system, "all singular values below threshold");
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

PWDEstimate pwd_stationary(const STFTFrameSet& frames, const SteeringSet& v,
                           const std::vector<int>& bins) {
  PWDEstimate out;
  out.method = PwdMethod::stationary;
  out.bins = bins;
  out.estimates.resize(bins.size());
  for (size_t bi = 0; bi < bins.size(); ++bi) {
    const int b = bins[bi];
    const SteeringMatrix& vb = v.at_freq(frames.params.bin_freq(b));
    out.order = vb.order;
    Eigen::MatrixXcd vp = pinv(vb.matrix);
    out.estimates[bi].reserve(frames.n_frames());
    for (int i = 0; i < frames.n_frames(); ++i)
      out.estimates[bi].push_back(vp * frames.frames[i].col(b));
  }
  return out;
}

PWDEstimate pwd_compensated(const STFTFrameSet& frames, const SteeringSet& v,
                            const std::vector<int>& bins,
                            const std::vector<std::vector<MotionTransform>>& w_per_bin) {
  if (w_per_bin.size() != bins.size())
    fail(ErrorKind::configuration, "need one transform list per processed bin");
  PWDEstimate out;
  out.method = PwdMethod::compensated;
  out.bins = bins;
  out.estimates.resize(bins.size());
  for (size_t bi = 0; bi < bins.size(); ++bi) {
    const int b = bins[bi];
    const auto& ws = w_per_bin[bi];
    if (static_cast<int>(ws.size()) != frames.n_frames())
      fail(ErrorKind::configuration, "need one motion transform per frame");
    const SteeringMatrix& vb = v.at_freq(frames.params.bin_freq(b));
    out.order = ws.front().input_order;
    // cache pseudo-inverses across frames with identical transforms
    std::map<const Eigen::MatrixXcd*, int> dummy;
    Eigen::MatrixXcd prev_w;
    Eigen::MatrixXcd prev_pinv;
    bool have_prev = false;
    for (int i = 0; i < frames.n_frames(); ++i) {
      const MotionTransform& w = ws[i];
      if (vb.matrix.cols() != w.matrix.rows())
        fail(ErrorKind::configuration,
             "steering columns do not match transform rows (order mismatch)");
      if (!have_prev || w.matrix != prev_w) {
        prev_pinv = pinv(vb.matrix * w.matrix);
        prev_w = w.matrix;
        have_prev = true;
      }
      out.estimates[bi].push_back(prev_pinv * frames.frames[i].col(b));
    }
  }
  return out;
}

Eigen::MatrixXcd combined_matrix(const std::vector<const SteeringMatrix*>& v,
                                 const std::vector<const MotionTransform*>& w) {
  if (v.empty() || v.size() != w.size())
    fail(ErrorKind::configuration, "combined matrix needs matching V_i and W_i lists");
  const int n_cols = static_cast<int>(w.front()->matrix.cols());
  int rows = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    if (w[i]->matrix.cols() != n_cols)
      fail(ErrorKind::configuration, "inconsistent input order across combined blocks");
    if (v[i]->matrix.cols() != w[i]->matrix.rows())
      fail(ErrorKind::configuration, "steering/transform order mismatch in combined block");
    rows += static_cast<int>(v[i]->matrix.rows());
  }
  Eigen::MatrixXcd a(rows, n_cols);
  int at = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    a.middleRows(at, v[i]->matrix.rows()) = v[i]->matrix * w[i]->matrix;
    at += static_cast<int>(v[i]->matrix.rows());
  }
  return a;
}

Eigen::VectorXcd enhanced_estimate(const Eigen::MatrixXcd& a_comb,
                                   const Eigen::VectorXcd& stacked, double sv_threshold) {
  if (stacked.size() != a_comb.rows())
    fail(ErrorKind::configuration, "stacked pressure length does not match combined matrix");
  return truncated_pinv(a_comb, sv_threshold) * stacked;
}

Eigen::MatrixXcd covariance(const std::vector<Eigen::VectorXcd>& estimates) {
  if (estimates.empty()) fail(ErrorKind::insufficient_data, "no estimates to average");
  const int d = static_cast<int>(estimates.front().size());
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& a : estimates) {
    if (a.size() != d) fail(ErrorKind::configuration, "estimate dimension mismatch");
    q.noalias() += a * a.adjoint();
  }
  q /= static_cast<double>(estimates.size());
  return 0.5 * (q + q.adjoint().eval());  // enforce Hermitian symmetry
}

SmoothedCovariance freq_smooth(const std::vector<Eigen::MatrixXcd>& q_per_bin,
                               const std::vector<int>& bins, int frame_count) {
  if (q_per_bin.empty() || bins.empty())
    fail(ErrorKind::configuration, "frequency smoothing needs a nonempty bin set");
  if (q_per_bin.size() != bins.size())
    fail(ErrorKind::configuration, "one covariance per bin required");
  SmoothedCovariance out;
  out.bins = bins;
  out.frame_count = frame_count;
  out.matrix = q_per_bin.front();
  for (size_t i = 1; i < q_per_bin.size(); ++i) out.matrix += q_per_bin[i];
  out.matrix /= static_cast<double>(q_per_bin.size());
  return out;
}

Eigen::MatrixXcd whiten_covariance(const Eigen::MatrixXcd& q, const Eigen::MatrixXcd& noise_shape) {
  Eigen::MatrixXcd ns = noise_shape;
  double tr = ns.trace().real();
  if (tr <= 0.0) fail(ErrorKind::invalid_argument, "noise shape must have positive trace");
  ns *= static_cast<double>(ns.rows()) / tr;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ns);
  Eigen::VectorXd ev = es.eigenvalues();
  double floor = ev.maxCoeff() * 1e-12;
  Eigen::VectorXd inv_sqrt(ev.size());
  for (int i = 0; i < ev.size(); ++i) inv_sqrt(i) = 1.0 / std::sqrt(std::max(ev(i), floor));
  Eigen::MatrixXcd w = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
  Eigen::MatrixXcd out = w * q * w;
  return 0.5 * (out + out.adjoint().eval());
}

namespace {

// Cached conj(Y) direction tables per (order, grid resolution).
struct SteeringTable {
  std::vector<double> thetas, phis;
  Eigen::MatrixXcd y;  // (order+1)^2 x n_grid, column-major over (it, ip)
};

const SteeringTable& steering_table(int order, double grid_deg) {
  static std::map<std::pair<int, long>, SteeringTable> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(order, std::lround(grid_deg * 1e6));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  SteeringTable tab;
  double step = grid_deg * kPi / 180.0;
  for (double th = 0.0; th <= kPi + 1e-12; th += step) tab.thetas.push_back(std::min(th, kPi));
  for (double ph = 0.0; ph < 2.0 * kPi - 1e-12; ph += step) tab.phis.push_back(ph);
  const int nt = static_cast<int>(tab.thetas.size());
  const int np = static_cast<int>(tab.phis.size());
  tab.y.resize(sh_count(order), static_cast<long>(nt) * np);
  for (int it_ = 0; it_ < nt; ++it_) {
    for (int ip = 0; ip < np; ++ip) {
      long col = static_cast<long>(it_) * np + ip;
      for (int n = 0; n <= order; ++n)
        for (int m = -n; m <= n; ++m)
          tab.y(acn_index(n, m), col) = std::conj(sph_harm(n, m, tab.thetas[it_], tab.phis[ip]));
    }
  }
  return cache.emplace(key, std::move(tab)).first->second;
}

int order_of_dim(int dim) {
  int order = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim)))) - 1;
  if (sh_count(order) != dim)
    fail(ErrorKind::configuration, "covariance dimension is not a perfect square count");
  return order;
}

}  // namespace

MusicSpectrum music_spectrum(const SmoothedCovariance& q, int n_sources, double grid_deg) {
  const int dim = static_cast<int>(q.matrix.rows());
  if (n_sources < 1 || n_sources >= dim)
    fail(ErrorKind::invalid_argument, "source count must satisfy 1 <= S < (N+1)^2");
  if (!(grid_deg > 0.0)) fail(ErrorKind::invalid_argument, "grid resolution must be > 0");
  const int order = order_of_dim(dim);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(q.matrix);
  // ascending eigenvalues: noise subspace = first dim - S columns, widened to
  // absorb signal-slot eigenvalues indistinguishable from the noise boundary
  // (an isotropic covariance then yields a flat spectrum instead of leaking
  // the solver's arbitrary basis choice)
  int n_noise = dim - n_sources;
  const auto& ev = es.eigenvalues();
  double boundary = ev(n_noise - 1);
  double tol = 1e-9 * std::max(std::abs(ev(dim - 1)), 1e-300);
  while (n_noise < dim && ev(n_noise) <= boundary + tol) ++n_noise;
  Eigen::MatrixXcd en = es.eigenvectors().leftCols(n_noise);

  const SteeringTable& tab = steering_table(order, grid_deg);
  const int nt = static_cast<int>(tab.thetas.size());
  const int np = static_cast<int>(tab.phis.size());

  Eigen::MatrixXcd proj = en.adjoint() * tab.y;  // (dim-S) x n_grid
  MusicSpectrum spec;
  spec.thetas = tab.thetas;
  spec.phis = tab.phis;
  spec.assumed_sources = n_sources;
  spec.values.resize(nt, np);
  for (int it_ = 0; it_ < nt; ++it_) {
    for (int ip = 0; ip < np; ++ip) {
      double denom = proj.col(static_cast<long>(it_) * np + ip).squaredNorm();
      spec.values(it_, ip) = 1.0 / std::max(denom, 1e-300);
    }
  }
  return spec;
}

DoAResult pick_peaks(const MusicSpectrum& spec, int n_sources) {
  if (n_sources < 1) fail(ErrorKind::invalid_argument, "need at least one source");
  const int nt = static_cast<int>(spec.thetas.size());
  const int np = static_cast<int>(spec.phis.size());
  struct Peak {
    double value;
    long linear;
    int it, ip;
  };
  std::vector<Peak> peaks;
  for (int it_ = 0; it_ < nt; ++it_) {
    for (int ip = 0; ip < np; ++ip) {
      double v = spec.values(it_, ip);
      bool is_max = true;
      for (int dt = -1; dt <= 1 && is_max; ++dt) {
        int t2 = it_ + dt;
        if (t2 < 0 || t2 >= nt) continue;
        for (int dp = -1; dp <= 1; ++dp) {
          if (dt == 0 && dp == 0) continue;
          int p2 = (ip + dp + np) % np;  // azimuth wraps
          if (spec.values(t2, p2) >= v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({v, static_cast<long>(it_) * np + ip, it_, ip});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.linear < b.linear;
  });
  DoAResult out;
  out.shortfall = static_cast<int>(peaks.size()) < n_sources;
  const int take = std::min<int>(n_sources, static_cast<int>(peaks.size()));
  for (int i = 0; i < take; ++i) {
    out.estimates.push_back({spec.thetas[peaks[i].it], spec.phis[peaks[i].ip]});
    out.values.push_back(peaks[i].value);
  }
  return out;
}

double effective_rank(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) fail(ErrorKind::invalid_argument, "effective rank of empty matrix");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  const auto& s = svd.singularValues();
  double total = s.sum();
  if (total <= 0.0) fail(ErrorKind::invalid_argument, "effective rank of zero matrix is undefined");
  double h = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    double p = s(i) / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::exp(h);
}

double doa_error_angle_deg(const MicPos& est, const MicPos& truth) {
  double dot = std::sin(est.theta) * std::sin(truth.theta) * std::cos(est.phi - truth.phi)
               + std::cos(est.theta) * std::cos(truth.theta);
  return std::acos(std::clamp(dot, -1.0, 1.0)) * 180.0 / kPi;
}

ErrorStats error_stats(const std::vector<double>& errors_deg) {
  if (errors_deg.empty()) fail(ErrorKind::insufficient_data, "no error samples");
  ErrorStats st;
  st.count = static_cast<int>(errors_deg.size());
  double sum = 0.0;
  for (double e : errors_deg) sum += e;
  st.mean = sum / st.count;
  if (st.count > 1) {
    double ss = 0.0;
    for (double e : errors_deg) ss += (e - st.mean) * (e - st.mean);
    st.stddev = std::sqrt(ss / (st.count - 1));
  }
  return st;
}

}  // namespace shdoa
