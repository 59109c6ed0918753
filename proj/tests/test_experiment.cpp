#include <doctest.h>

#include <filesystem>
#include <numbers>
#include <sstream>

#include "shdoa/config.hpp"
#include "shdoa/error.hpp"
#include "shdoa/experiment.hpp"

using namespace shdoa;

namespace {

constexpr double kPi = std::numbers::pi;

// Small but complete pipeline config: 12-mic sphere, N=2, bin-centered tone.
ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.seed = 99;
  cfg.trials = 2;
  cfg.array.type = "near_uniform";
  cfg.array.mics = 12;
  cfg.array.radius = 0.06;
  cfg.stft.frame_len = 256;
  cfg.stft.hop = 128;
  cfg.stft.fs = 10000.0;
  cfg.motion.mode = MotionMode::rotate_z;
  cfg.motion.angular_velocity_deg = {90.0};
  SourceConfig src;
  src.kind = SourceKind::tone;
  src.frequency_hz = 39 * 10000.0 / 256;  // bin 39, 1523.4 Hz
  src.direction = {kPi / 2, 50.0 * kPi / 180.0};
  cfg.sources.push_back(src);
  cfg.noise.snr_db = {20.0};
  cfg.noise.narrowband = false;
  cfg.estimator.methods = {EstimatorMethod::none, EstimatorMethod::compensated};
  cfg.estimator.order = 2;
  cfg.estimator.frames = 20;
  cfg.estimator.freq_lo_hz = 1400.0;
  cfg.estimator.freq_hi_hz = 1650.0;
  cfg.estimator.n_sources = 1;
  cfg.estimator.grid_deg = 2.0;
  return cfg;
}

std::string strip_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos) out << line << "\n";
  return out.str();
}

}  // namespace

TEST_CASE("experiment: compensation beats the stationary model under rotation") {
  ExperimentConfig cfg = small_config();
  ExperimentResult res = run_experiment(cfg, 2);
  REQUIRE(res.rows.size() == 2);
  double err_none = -1.0, err_comp = -1.0;
  for (const ExperimentRow& r : res.rows) {
    CHECK(r.n == cfg.trials);
    CHECK(r.trial_failures == 0);
    if (r.method == "none") err_none = r.mean_deg;
    if (r.method == "compensated") err_comp = r.mean_deg;
  }
  // 90 deg/s over 20 frames sweeps ~22 deg; half-angle bias ~11 deg
  CHECK(err_none > 5.0);
  CHECK(err_comp < 4.0);
  CHECK(err_comp < err_none);
  // half-angle diagnostic uses the acquisition time
  CHECK(res.rows[0].half_angle_deg
        == doctest::Approx(90.0 * (256 + 19 * 128) / 10000.0 / 2.0));
}

TEST_CASE("experiment: determinism of the report for a fixed seed") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  ExperimentResult a = run_experiment(cfg, 2);
  ExperimentResult b = run_experiment(cfg, 1);  // different worker count
  CHECK(strip_timestamp(a.json_text) == strip_timestamp(b.json_text));
  cfg.seed = 100;
  ExperimentResult c = run_experiment(cfg, 2);
  CHECK(strip_timestamp(a.json_text) != strip_timestamp(c.json_text));
  CHECK(a.json_text.find("\"schema_version\"") != std::string::npos);
}

TEST_CASE("experiment: enhanced I=1 equals the stationary baseline") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  cfg.motion.angular_velocity_deg = {120.0};
  cfg.noise.narrowband = true;
  cfg.noise.narrowband_hz = cfg.sources[0].frequency_hz;
  cfg.estimator.methods = {EstimatorMethod::none, EstimatorMethod::enhanced};
  cfg.estimator.combine = {1};
  cfg.estimator.freq_lo_hz = cfg.estimator.freq_hi_hz = 0.0;
  cfg.estimator.narrowband_hz = cfg.sources[0].frequency_hz;
  cfg.estimator.sv_threshold = 0.0;
  ExperimentResult res = run_experiment(cfg, 2);
  REQUIRE(res.rows.size() == 2);
  CHECK(res.rows[0].mean_deg == doctest::Approx(res.rows[1].mean_deg).epsilon(1e-12));
}

TEST_CASE("erank runner: combine-frames study is monotone") {
  ExperimentConfig cfg;
  cfg.array.type = "head_4";
  cfg.array.mics = 4;
  cfg.array.radius = 0.0625;
  cfg.sources.push_back(SourceConfig{});
  cfg.motion.mode = MotionMode::rotate_z;
  cfg.motion.angular_velocity_deg = {180.0};
  ErankConfig ec;
  ec.study = "combine_frames";
  ec.order = 4;
  ec.frequency_hz = 3100.0;
  ec.combine = {1, 15, 30};
  cfg.erank = ec;
  ErankResult res = run_erank(cfg);
  REQUIRE(res.rows.size() == 3);
  CHECK(res.rows[0].erank == doctest::Approx(3.985).epsilon(0.01));
  CHECK(res.rows[1].erank > res.rows[0].erank);
  CHECK(res.rows[2].erank > res.rows[1].erank);
  CHECK(res.csv_text.find("effective_rank") != std::string::npos);
}

TEST_CASE("synth to files and estimate from files round trip") {
  ExperimentConfig cfg = small_config();
  cfg.noise.snr_db = {std::numeric_limits<double>::infinity()};
  cfg.estimator.methods = {EstimatorMethod::compensated};
  auto dir = std::filesystem::temp_directory_path() / "shdoa_synth_test";
  std::filesystem::remove_all(dir);
  std::string wav = run_synth_to_files(cfg, dir.string());
  CHECK(std::filesystem::exists(wav));
  CHECK(std::filesystem::exists(dir / "trajectory.csv"));

  EstimateResult est = run_estimate(cfg, wav, (dir / "trajectory.csv").string());
  REQUIRE(est.estimates.size() == 1);
  // truth: apparent direction at the frame-0 center
  MicPos truth = cfg.sources[0].direction;
  truth.phi -= (90.0 * kPi / 180.0) * (0.5 * cfg.stft.frame_len / cfg.stft.fs);
  CHECK(doa_error_angle_deg(est.estimates[0], truth) < 4.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("experiment outputs: files and config echo") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  cfg.estimator.methods = {EstimatorMethod::none};
  ExperimentResult res = run_experiment(cfg, 2);
  auto dir = std::filesystem::temp_directory_path() / "shdoa_out_test";
  std::filesystem::remove_all(dir);
  std::string json_path = write_experiment_outputs(res, cfg, dir.string());
  CHECK(std::filesystem::exists(json_path));
  CHECK(std::filesystem::exists(dir / "results.csv"));
  // the echoed config re-validates
  ExperimentConfig echo = ExperimentConfig::from_file((dir / "config_resolved.toml").string());
  CHECK_NOTHROW(echo.validate());
  std::filesystem::remove_all(dir);
}
