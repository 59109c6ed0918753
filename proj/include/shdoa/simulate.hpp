#ifndef SHDOA_SIMULATE_HPP
#define SHDOA_SIMULATE_HPP

// Synthesis of microphone signals for a rigid-sphere array moving through a
// sound field: block-wise time-varying FIR filtering (overlap-save), additive
// seeded noise, and the source models used by the studies.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shdoa/motion.hpp"
#include "shdoa/spectral.hpp"
#include "shdoa/steering.hpp"

namespace shdoa {

enum class SourceKind { tone, am_tone, fm_tone, wideband };

struct SourceSpec {
  SourceKind kind = SourceKind::tone;
  double frequency_hz = 1000.0;    // carrier (tone family); ignored for wideband
  double am_level_db = 0.0;        // peak-to-trough amplitude ratio in dB
  double fm_deviation_hz = 0.0;
  double mod_rate_hz = 0.0;
  MicPos direction{std::numbers::pi / 2.0, 0.0};  // arrival direction, world frame
  double amplitude = 1.0;
  double band_lo_hz = 300.0;       // wideband proxy band
  double band_hi_hz = 3400.0;
};

enum class MotionMode { static_pose, rotate_z, trajectory_file };

struct MotionSpec {
  MotionMode mode = MotionMode::static_pose;
  double angular_velocity_deg = 0.0;   // rotate_z rate
  double filter_update_s = 1e-3;
  std::string trajectory_path;         // trajectory_file mode
  // trajectory pose timing in output-signal seconds: pose i applies at
  // first_pose_s + i * pose_spacing_s (typically STFT frame centers)
  double first_pose_s = 0.0;
  double pose_spacing_s = 0.0;
};

struct NoiseSpec {
  double snr_db = std::numeric_limits<double>::infinity();  // +inf disables
  bool narrowband = false;   // SNR in a single analysis bin instead of wideband
  double narrowband_hz = 0.0;
  uint64_t seed = 0;
};

// Source pressure at the array origin.
std::vector<double> make_source(const SourceSpec& spec, double duration_s, double fs,
                                uint64_t seed);

struct SynthResult {
  Eigen::MatrixXd signals;  // M x L, transient-trimmed and delay-aligned
  double fs = 0.0;
  // Array azimuth about +z at output sample t is angle_rate * t / fs + per-
  // frame table for trajectory-driven motion; query through array_angle().
  double array_angle(long sample) const;
  double angle_rate_rad_per_sample = 0.0;
  std::vector<double> angle_table;  // trajectory_file mode, per output sample
};

// Block-filtered synthesis; sources sum linearly. The array angle is zero at
// output sample 0 and advances per the motion spec.
SynthResult synth_moving_array(const ArrayGeometry& geom, const MotionSpec& motion,
                               const std::vector<SourceSpec>& sources, double duration_s,
                               double fs);

// Additive white Gaussian noise at the requested SNR. Wideband SNR references
// the array-averaged time-domain signal power; narrowband SNR references the
// array-averaged STFT power in the bin nearest spec.narrowband_hz.
Eigen::MatrixXd add_noise(const Eigen::MatrixXd& signals, const NoiseSpec& spec,
                          const std::optional<STFTParams>& stft_params = std::nullopt);

constexpr int kSynthFilterLen = 512;  // taps of the per-block FIR

}  // namespace shdoa

#endif
