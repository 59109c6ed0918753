#include "shdoa/spectral.hpp"

#include <cmath>
#include <numbers>

#include "shdoa/error.hpp"
#include "shdoa/fft.hpp"

namespace shdoa {

namespace {
constexpr double kPi = std::numbers::pi;
}

Window window_from_name(const std::string& name) {
  if (name == "rectangular" || name == "rect") return Window::rectangular;
  if (name == "hamming") return Window::hamming;
  if (name == "hann") return Window::hann;
  fail(ErrorKind::invalid_argument, "unknown window '" + name + "'");
}

std::vector<double> make_window(Window w, int length) {
  if (length <= 0) fail(ErrorKind::invalid_argument, "window length must be > 0");
  std::vector<double> win(length, 1.0);
  switch (w) {
    case Window::rectangular:
      break;
    case Window::hamming:
      for (int t = 0; t < length; ++t)
        win[t] = 0.54 - 0.46 * std::cos(2.0 * kPi * t / (length - 1));
      break;
    case Window::hann:
      for (int t = 0; t < length; ++t)
        win[t] = 0.5 - 0.5 * std::cos(2.0 * kPi * t / (length - 1));
      break;
  }
  return win;
}

void STFTParams::validate() const {
  if (frame_len <= 0) fail(ErrorKind::validation, "stft.frame_len must be > 0");
  if (hop <= 0 || hop > frame_len) fail(ErrorKind::validation, "stft.hop must satisfy 0 < D <= T");
  if (!(fs > 0.0)) fail(ErrorKind::validation, "stft.fs must be > 0");
}

int STFTParams::nearest_bin(double f_hz) const {
  int b = static_cast<int>(std::lround(f_hz * frame_len / fs));
  return std::clamp(b, 0, frame_len / 2);
}

int STFTParams::frame_count(long signal_len) const {
  if (signal_len < frame_len) return 0;
  return static_cast<int>((signal_len - frame_len) / hop) + 1;
}

STFTFrameSet stft(const Eigen::MatrixXd& signals, const STFTParams& params) {
  params.validate();
  const int m = static_cast<int>(signals.rows());
  const long len = signals.cols();
  if (len < params.frame_len)
    fail(ErrorKind::insufficient_data, "signal shorter than one STFT frame");
  const int nfrm = params.frame_count(len);
  const int t_len = params.frame_len;
  const int nbins = params.bins();
  const std::vector<double> win = make_window(params.window, t_len);

  STFTFrameSet out;
  out.params = params;
  out.frames.reserve(nfrm);
  std::vector<double> buf(t_len);
  for (int i = 0; i < nfrm; ++i) {
    Eigen::MatrixXcd frame(m, nbins);
    const long off = static_cast<long>(i) * params.hop;
    for (int q = 0; q < m; ++q) {
      for (int t = 0; t < t_len; ++t) buf[t] = win[t] * signals(q, off + t);
      auto spec = fft_r2c(buf);
      for (int b = 0; b < nbins; ++b) frame(q, b) = spec[b];
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

STFTFrameSet time_align(const STFTFrameSet& frames, int reference_frame) {
  if (reference_frame < 0 || reference_frame >= frames.n_frames())
    fail(ErrorKind::invalid_argument, "reference frame outside frame set");
  STFTFrameSet out = frames;
  const int t_len = frames.params.frame_len;
  const int hop = frames.params.hop;
  for (int i = 0; i < frames.n_frames(); ++i) {
    if (i == reference_frame) continue;
    for (int b = 0; b < static_cast<int>(out.frames[i].cols()); ++b) {
      Cplx ph = std::polar(1.0, -2.0 * kPi * hop * static_cast<double>(b)
                                    * (i - reference_frame) / t_len);
      out.frames[i].col(b) *= ph;
    }
  }
  return out;
}

}  // namespace shdoa
