#ifndef SHDOA_SPECTRAL_HPP
#define SHDOA_SPECTRAL_HPP

// STFT analysis of multichannel signals and the phase alignment used by the
// motion-based enhancement path. Frames follow p(i,w) = sum_t w(t) p(t+iD)
// e^{-2 pi j w t / T}; only bins 0..T/2 are kept (real inputs).

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shdoa/sh_core.hpp"

namespace shdoa {

enum class Window { rectangular, hamming, hann };

Window window_from_name(const std::string& name);
std::vector<double> make_window(Window w, int length);

struct STFTParams {
  int frame_len = 256;  // T, samples
  int hop = 128;        // D, samples
  Window window = Window::hamming;
  double fs = 10000.0;

  void validate() const;
  int bins() const { return frame_len / 2 + 1; }
  double bin_freq(int bin) const { return bin * fs / frame_len; }
  int nearest_bin(double f_hz) const;
  int frame_count(long signal_len) const;  // floor((L-T)/D)+1
  // Sample index of the center of frame i, T/2 + i D.
  double frame_center(int i) const { return 0.5 * frame_len + static_cast<double>(i) * hop; }
};

struct STFTFrameSet {
  // frames[i] is an M x bins matrix for STFT frame i
  std::vector<Eigen::MatrixXcd> frames;
  STFTParams params;

  int n_frames() const { return static_cast<int>(frames.size()); }
  int n_mics() const { return frames.empty() ? 0 : static_cast<int>(frames.front().rows()); }
};

STFTFrameSet stft(const Eigen::MatrixXd& signals, const STFTParams& params);

// Multiply frame i, bin w by e^{-2 pi j D w (i - reference) / T}.
STFTFrameSet time_align(const STFTFrameSet& frames, int reference_frame);

}  // namespace shdoa

#endif
