#ifndef SHDOA_WAV_HPP
#define SHDOA_WAV_HPP

// RIFF/WAVE I/O: PCM 16/24-bit and 32-bit float read, 32-bit float write.

#include <string>

#include <Eigen/Dense>

namespace shdoa {

struct WavData {
  Eigen::MatrixXd samples;  // channels x frames, in [-1, 1] for PCM
  double fs = 0.0;
};

WavData read_wav(const std::string& path);
void write_wav_float32(const std::string& path, const Eigen::MatrixXd& samples, double fs);

}  // namespace shdoa

#endif
