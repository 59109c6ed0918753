#ifndef SHDOA_PWD_DOA_HPP
#define SHDOA_PWD_DOA_HPP

// Plane-wave-decomposition estimation (stationary, motion compensated, and
// motion-based enhancement paths) plus frequency-smoothed SH-MUSIC with its
// diagnostics: effective rank, error angles, error statistics.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "shdoa/motion.hpp"
#include "shdoa/spectral.hpp"
#include "shdoa/steering.hpp"

namespace shdoa {

enum class PwdMethod { stationary, compensated, enhanced };

struct PWDEstimate {
  PwdMethod method = PwdMethod::stationary;
  int order = 0;
  std::vector<int> bins;  // processed bin indices
  // per bin: one coefficient vector per frame (compensation path) or per
  // group (enhancement path)
  std::vector<std::vector<Eigen::VectorXcd>> estimates;
  // smallest singular value ratio seen in any inverted system, for diagnostics
  double min_sv_ratio = 1.0;
};

// Moore-Penrose pseudo-inverse with relative cutoff.
Eigen::MatrixXcd pinv(const Eigen::MatrixXcd& a, double rcond = 1e-13);

// Truncated-SVD pseudo-inverse: only singular values > threshold * max are
// inverted. Throws degenerate_system when none qualify.
Eigen::MatrixXcd truncated_pinv(const Eigen::MatrixXcd& a, double sv_threshold);

PWDEstimate pwd_stationary(const STFTFrameSet& frames, const SteeringSet& v,
                           const std::vector<int>& bins);

// One motion transform per frame referring all estimates to the reference
// pose; transforms[i] maps reference coefficients to frame-i coefficients at
// the given bin's wavenumber.
PWDEstimate pwd_compensated(const STFTFrameSet& frames, const SteeringSet& v,
                            const std::vector<int>& bins,
                            const std::vector<std::vector<MotionTransform>>& w_per_bin);

// Row-stacked [V_i W_i] blocks, one per combined frame.
Eigen::MatrixXcd combined_matrix(const std::vector<const SteeringMatrix*>& v,
                                 const std::vector<const MotionTransform*>& w);

// Enhancement estimate a(1,w) = A^+ p_tilde for one stacked system.
Eigen::VectorXcd enhanced_estimate(const Eigen::MatrixXcd& a_comb,
                                   const Eigen::VectorXcd& stacked, double sv_threshold);

Eigen::MatrixXcd covariance(const std::vector<Eigen::VectorXcd>& estimates);

struct SmoothedCovariance {
  Eigen::MatrixXcd matrix;
  std::vector<int> bins;
  int frame_count = 0;
};

SmoothedCovariance freq_smooth(const std::vector<Eigen::MatrixXcd>& q_per_bin,
                               const std::vector<int>& bins, int frame_count);

// Optional pre-whitening by a noise-shaping matrix scaled to unit trace.
Eigen::MatrixXcd whiten_covariance(const Eigen::MatrixXcd& q, const Eigen::MatrixXcd& noise_shape);

struct MusicSpectrum {
  std::vector<double> thetas;  // grid rows
  std::vector<double> phis;    // grid cols
  Eigen::MatrixXd values;      // thetas.size() x phis.size()
  int assumed_sources = 0;
};

MusicSpectrum music_spectrum(const SmoothedCovariance& q, int n_sources, double grid_deg);

struct DoAResult {
  std::vector<MicPos> estimates;
  std::vector<double> values;
  bool shortfall = false;  // fewer local maxima than requested
};

DoAResult pick_peaks(const MusicSpectrum& spec, int n_sources);

double effective_rank(const Eigen::MatrixXcd& a);

double doa_error_angle_deg(const MicPos& est, const MicPos& truth);

struct ErrorStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  int count = 0;
};

ErrorStats error_stats(const std::vector<double>& errors_deg);

}  // namespace shdoa

#endif
