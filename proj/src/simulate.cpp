#include "shdoa/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shdoa/error.hpp"
#include "shdoa/fft.hpp"
#include "shdoa/rng.hpp"

namespace shdoa {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kFftLen = 1024;  // overlap-save transform size (>= block + taps - 1)

std::vector<double> bandlimited_noise(long n, double fs, double lo, double hi, double amp,
                                      uint64_t seed) {
  NoiseStream stream(seed, stream_id(0x736f7572u));
  std::vector<double> x(n);
  for (long i = 0; i < n; ++i) x[i] = amp * stream.gaussian(static_cast<uint64_t>(i));
  auto spec = fft_r2c(x);
  for (size_t b = 0; b < spec.size(); ++b) {
    double f = static_cast<double>(b) * fs / static_cast<double>(n);
    if (f < lo || f > hi) spec[b] = 0.0;
  }
  return fft_c2r(spec, static_cast<int>(n));
}

}  // namespace

std::vector<double> make_source(const SourceSpec& spec, double duration_s, double fs,
                                uint64_t seed) {
  if (!(duration_s > 0.0)) fail(ErrorKind::invalid_argument, "source duration must be > 0");
  const long n = std::lround(duration_s * fs);
  if (spec.kind != SourceKind::wideband && spec.frequency_hz >= 0.5 * fs)
    fail(ErrorKind::invalid_argument, "source frequency at or above Nyquist (aliasing)");

  std::vector<double> x(n);
  switch (spec.kind) {
    case SourceKind::tone:
      for (long i = 0; i < n; ++i)
        x[i] = spec.amplitude * std::sin(2.0 * kPi * spec.frequency_hz * i / fs);
      break;
    case SourceKind::am_tone: {
      // max/min amplitude ratio of am_level_db; depth m keeps the swing linear
      double ratio = std::pow(10.0, spec.am_level_db / 20.0);
      double m = (ratio - 1.0) / (ratio + 1.0);
      for (long i = 0; i < n; ++i) {
        double t = i / fs;
        x[i] = spec.amplitude * (1.0 + m * std::sin(2.0 * kPi * spec.mod_rate_hz * t))
               * std::sin(2.0 * kPi * spec.frequency_hz * t);
      }
      break;
    }
    case SourceKind::fm_tone: {
      if (spec.fm_deviation_hz != 0.0 && spec.mod_rate_hz <= 0.0)
        fail(ErrorKind::invalid_argument, "fm modulation needs mod_rate > 0");
      for (long i = 0; i < n; ++i) {
        double t = i / fs;
        double phase = 2.0 * kPi * spec.frequency_hz * t;
        if (spec.fm_deviation_hz != 0.0)
          phase += spec.fm_deviation_hz / spec.mod_rate_hz
                   * (1.0 - std::cos(2.0 * kPi * spec.mod_rate_hz * t));
        x[i] = spec.amplitude * std::sin(phase);
      }
      break;
    }
    case SourceKind::wideband:
      x = bandlimited_noise(n, fs, spec.band_lo_hz, spec.band_hi_hz, spec.amplitude, seed);
      break;
  }
  return x;
}

double SynthResult::array_angle(long sample) const {
  if (!angle_table.empty()) {
    long i = std::clamp<long>(sample, 0, static_cast<long>(angle_table.size()) - 1);
    return angle_table[i];
  }
  return angle_rate_rad_per_sample * static_cast<double>(sample);
}

namespace {

// Array angle lookup in raw synthesis clock; output sample 0 sits at raw
// sample `trim`, where the angle is defined to be zero.
struct AnglePath {
  double rate = 0.0;
  std::vector<double> table;  // per raw sample
  long trim = 0;

  double at_raw(double raw_sample) const {
    if (!table.empty()) {
      long i = std::clamp<long>(std::lround(raw_sample), 0, static_cast<long>(table.size()) - 1);
      return table[i];
    }
    return rate * (raw_sample - static_cast<double>(trim));
  }
};

AnglePath build_angle_path(const MotionSpec& motion, double fs, long nraw, long trim) {
  AnglePath path;
  path.trim = trim;
  switch (motion.mode) {
    case MotionMode::static_pose:
      path.rate = 0.0;
      break;
    case MotionMode::rotate_z:
      path.rate = motion.angular_velocity_deg * kPi / 180.0 / fs;
      break;
    case MotionMode::trajectory_file: {
      Trajectory traj = Trajectory::load_csv(motion.trajectory_path);
      // synthesis supports z-rotation trajectories only; translation or tilt
      // would need a moving-source free-field model we do not provide
      std::vector<double> alphas;
      double accum = 0.0;
      for (size_t i = 0; i < traj.poses.size(); ++i) {
        const FramePose& p = traj.poses[i];
        if (p.translation.r != 0.0 || std::abs(p.rotation.beta) > 1e-12)
          fail(ErrorKind::unsupported,
               "synthesis from trajectories supports pure z-rotation only");
        double a = p.rotation.alpha + p.rotation.gamma;
        if (traj.convention == TrajectoryConvention::delta) {
          accum += a;
          alphas.push_back(accum);
        } else {
          alphas.push_back(a);
        }
      }
      if (!(motion.pose_spacing_s > 0.0))
        fail(ErrorKind::configuration, "trajectory synthesis needs pose_spacing_s > 0");
      // piecewise-linear between pose timestamps, clamped at both ends
      path.table.resize(nraw);
      for (long t = 0; t < nraw; ++t) {
        double t_out = static_cast<double>(t - trim) / fs;
        double pos = (t_out - motion.first_pose_s) / motion.pose_spacing_s;
        double lo = std::floor(std::clamp(pos, 0.0, static_cast<double>(alphas.size() - 1)));
        double hi = std::min(lo + 1.0, static_cast<double>(alphas.size() - 1));
        double w = std::clamp(pos - lo, 0.0, 1.0);
        path.table[t] = (1.0 - w) * alphas[static_cast<size_t>(lo)]
                        + w * alphas[static_cast<size_t>(hi)];
      }
      break;
    }
  }
  return path;
}

}  // namespace

SynthResult synth_moving_array(const ArrayGeometry& geom, const MotionSpec& motion,
                               const std::vector<SourceSpec>& sources, double duration_s,
                               double fs) {
  geom.validate();
  if (sources.empty()) fail(ErrorKind::invalid_argument, "need at least one source");
  if (!(motion.filter_update_s > 0.0))
    fail(ErrorKind::invalid_argument, "filter update interval must be > 0");
  const int blk = static_cast<int>(std::lround(motion.filter_update_s * fs));
  if (blk <= 0 || blk > kFftLen - kSynthFilterLen + 1)
    fail(ErrorKind::invalid_argument, "filter update interval outside supported range");

  const int m = static_cast<int>(geom.mics.size());
  const long nout = std::lround(duration_s * fs);
  const long trim = kSynthFilterLen + kSynthFilterLen / 2;  // transient + bulk delay
  const long nraw = ((nout + trim) / blk + 2) * blk;
  const int nblk = static_cast<int>(nraw / blk);
  const int nbins = kSynthFilterLen / 2 + 1;

  AnglePath path = build_angle_path(motion, fs, nraw, trim);

  // mode-strength table per filter bin, up to an adaptive synthesis order
  const double kr_max = wavenumber(0.5 * fs) * geom.radius;
  const int n_syn = std::min(40, static_cast<int>(std::ceil(kr_max)) + 8);
  Eigen::MatrixXcd btab(nbins, n_syn + 1);
  for (int b = 0; b < nbins; ++b) {
    double k = wavenumber(b * fs / kSynthFilterLen);
    for (int n = 0; n <= n_syn; ++n)
      btab(b, n) = mode_strength(n, k * geom.radius) * (2.0 * n + 1.0) / (4.0 * kPi);
  }

  // half-Hamming taper on the first/last 64 taps of the rolled FIR
  std::vector<double> taper(kSynthFilterLen, 1.0);
  {
    auto edge = make_window(Window::hamming, 129);
    for (int i = 0; i < 64; ++i) {
      taper[i] = edge[i];
      taper[kSynthFilterLen - 1 - i] = edge[128 - i];
    }
  }

  Eigen::MatrixXd unit_mics(3, m);
  for (int q = 0; q < m; ++q)
    unit_mics.col(q) = Eigen::Vector3d(std::sin(geom.mics[q].theta) * std::cos(geom.mics[q].phi),
                                       std::sin(geom.mics[q].theta) * std::sin(geom.mics[q].phi),
                                       std::cos(geom.mics[q].theta));

  SynthResult out;
  out.fs = fs;
  out.signals = Eigen::MatrixXd::Zero(m, nout);
  if (path.table.empty()) {
    out.angle_rate_rad_per_sample = path.rate;
  } else {
    out.angle_table.assign(path.table.begin() + trim, path.table.begin() + trim + nout);
  }

  std::vector<double> legendre(n_syn + 1);
  std::vector<std::complex<double>> hspec(nbins);
  std::vector<std::complex<double>> seg_fft;
  std::vector<double> seg(kFftLen);

  for (const SourceSpec& src : sources) {
    std::vector<double> s = make_source(src, static_cast<double>(nraw) / fs, fs,
                                        stream_id(0x73796e74u, std::lround(src.frequency_hz * 64),
                                                  static_cast<uint64_t>(src.kind)));
    Eigen::Vector3d u_world(std::sin(src.direction.theta) * std::cos(src.direction.phi),
                            std::sin(src.direction.theta) * std::sin(src.direction.phi),
                            std::cos(src.direction.theta));
    double prev_angle = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<std::complex<double>>> hos(m);

    for (int b = 0; b < nblk; ++b) {
      // trimmed output sample t holds content from raw time t + trim - 256
      // (transient trim minus the FIR bulk delay); anchoring the angle at the
      // raw block center with zero at `trim` therefore aligns array_angle(t)
      // with the content of output sample t
      double angle = path.at_raw(b * blk + 0.5 * blk);
      if (angle != prev_angle) {
        prev_angle = angle;
        // apparent direction in array frame: azimuth shifted by -angle
        double cph = std::cos(src.direction.phi - angle);
        double sph = std::sin(src.direction.phi - angle);
        Eigen::Vector3d u_app(std::sin(src.direction.theta) * cph,
                              std::sin(src.direction.theta) * sph,
                              std::cos(src.direction.theta));
        for (int q = 0; q < m; ++q) {
          double cg = std::clamp(unit_mics.col(q).dot(u_app), -1.0, 1.0);
          legendre[0] = 1.0;
          if (n_syn >= 1) legendre[1] = cg;
          for (int n = 1; n < n_syn; ++n)
            legendre[n + 1] = ((2.0 * n + 1.0) * cg * legendre[n] - n * legendre[n - 1]) / (n + 1.0);
          for (int fb = 0; fb < nbins; ++fb) {
            Cplx h = 0.0;
            for (int n = 0; n <= n_syn; ++n) h += btab(fb, n) * legendre[n];
            hspec[fb] = h;
          }
          hspec[0] = Cplx(hspec[0].real(), 0.0);
          hspec[nbins - 1] = Cplx(hspec[nbins - 1].real(), 0.0);
          std::vector<double> h_raw = fft_c2r(hspec, kSynthFilterLen);
          std::vector<double> h_causal(kFftLen, 0.0);
          for (int t = 0; t < kSynthFilterLen; ++t) {
            int src_idx = (t - kSynthFilterLen / 2 + kSynthFilterLen) % kSynthFilterLen;
            h_causal[t] = h_raw[src_idx] * taper[t];
          }
          hos[q] = fft_r2c(h_causal);
        }
      }
      // overlap-save: segment ending at this block's last sample
      long endi = static_cast<long>(b) * blk + blk;
      std::fill(seg.begin(), seg.end(), 0.0);
      for (int t = 0; t < kFftLen; ++t) {
        long idx = endi - kFftLen + t;
        if (idx >= 0 && idx < nraw) seg[t] = s[idx];
      }
      seg_fft = fft_r2c(seg);
      for (int q = 0; q < m; ++q) {
        std::vector<std::complex<double>> prod(seg_fft.size());
        for (size_t i = 0; i < prod.size(); ++i) prod[i] = seg_fft[i] * hos[q][i];
        std::vector<double> y = fft_c2r(prod, kFftLen);
        for (int t = 0; t < blk; ++t) {
          long oi = endi - blk + t - trim;
          if (oi >= 0 && oi < nout) out.signals(q, oi) += y[kFftLen - blk + t];
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd add_noise(const Eigen::MatrixXd& signals, const NoiseSpec& spec,
                          const std::optional<STFTParams>& stft_params) {
  if (std::isinf(spec.snr_db)) return signals;
  if (!std::isfinite(spec.snr_db)) fail(ErrorKind::invalid_argument, "SNR must be finite or +inf");

  double sigma2;
  if (spec.narrowband) {
    if (!stft_params) fail(ErrorKind::configuration, "narrowband SNR needs STFT parameters");
    stft_params->validate();
    const int bin = stft_params->nearest_bin(spec.narrowband_hz);
    STFTFrameSet f = stft(signals, *stft_params);
    if (f.n_frames() == 0) fail(ErrorKind::insufficient_data, "signal shorter than one frame");
    double psig = 0.0;
    for (const auto& frame : f.frames) psig += frame.col(bin).squaredNorm();
    psig /= static_cast<double>(f.n_frames()) * signals.rows();
    if (psig <= 0.0) fail(ErrorKind::invalid_argument, "zero-power reference signal, SNR undefined");
    auto win = make_window(stft_params->window, stft_params->frame_len);
    double wsum2 = 0.0;
    for (double w : win) wsum2 += w * w;
    sigma2 = psig / (wsum2 * std::pow(10.0, spec.snr_db / 10.0));
  } else {
    double psig = signals.squaredNorm() / static_cast<double>(signals.size());
    if (psig <= 0.0) fail(ErrorKind::invalid_argument, "zero-power reference signal, SNR undefined");
    sigma2 = psig / std::pow(10.0, spec.snr_db / 10.0);
  }

  const double sigma = std::sqrt(sigma2);
  Eigen::MatrixXd noisy = signals;
  for (int q = 0; q < signals.rows(); ++q) {
    NoiseStream stream(spec.seed, stream_id(0x6e6f6973u, static_cast<uint64_t>(q)));
    for (long t = 0; t < signals.cols(); ++t)
      noisy(q, t) += sigma * stream.gaussian(static_cast<uint64_t>(t));
  }
  return noisy;
}

}  // namespace shdoa
