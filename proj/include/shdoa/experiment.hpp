#ifndef SHDOA_EXPERIMENT_HPP
#define SHDOA_EXPERIMENT_HPP

// Experiment runner: executes synth -> stft -> (align) -> pwd -> covariance ->
// smoothing -> MUSIC -> peaks -> stats over the config's sweep axes and trial
// count, and persists JSON/CSV reports.

#include <string>
#include <vector>

#include "shdoa/config.hpp"
#include "shdoa/pwd_doa.hpp"

namespace shdoa {

struct ExperimentRow {
  std::string method;          // none | compensated | enhanced
  int combine = 0;             // I (enhanced path), 0 otherwise
  double omega_deg = 0.0;
  double snr_db = 0.0;
  ModulationPoint modulation;
  double mean_deg = 0.0;
  double std_deg = 0.0;
  int n = 0;
  double half_angle_deg = 0.0;  // analytic bias reference for the uncompensated path
  std::vector<double> pooled_errors;  // over directions x trials, direction-major
  int trial_failures = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<std::string> warnings;
  std::string json_text;  // full report (deterministic except the timestamp line)
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs_override = -1);

struct ErankRow {
  std::string mode;   // study-dependent label
  double x = 0.0;     // sweep coordinate (deg, m, Hz, or I)
  double erank = 0.0;
  int significant_sv = 0;  // singular values above threshold * max
};

struct ErankResult {
  std::vector<ErankRow> rows;
  std::string csv_text;
  std::string json_text;
};

ErankResult run_erank(const ExperimentConfig& cfg);

// Writers shared by the CLI and the acceptance suite. Returns the JSON path.
std::string write_experiment_outputs(const ExperimentResult& res, const ExperimentConfig& cfg,
                                     const std::string& out_dir);
std::string write_erank_outputs(const ErankResult& res, const ExperimentConfig& cfg,
                                const std::string& out_dir);

// synth subcommand: writes multichannel WAVE + trajectory CSV, returns wav path.
std::string run_synth_to_files(const ExperimentConfig& cfg, const std::string& out_dir);

struct EstimateResult {
  std::vector<MicPos> estimates;  // per configured method, S peaks each, flattened
  std::vector<std::string> methods;
  std::string json_text;
};

// estimate subcommand: pipeline on provided audio + trajectory.
EstimateResult run_estimate(const ExperimentConfig& cfg, const std::string& wav_path,
                            const std::string& trajectory_path);
std::string write_estimate_outputs(const EstimateResult& res, const ExperimentConfig& cfg,
                                   const std::string& out_dir);

}  // namespace shdoa

#endif
