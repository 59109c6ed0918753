#ifndef SHDOA_CONFIG_HPP
#define SHDOA_CONFIG_HPP

// Declarative experiment configuration: a small TOML-subset reader, the typed
// experiment description, cross-field validation, and round-trippable
// serialization of the resolved configuration.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shdoa/simulate.hpp"
#include "shdoa/spectral.hpp"

namespace shdoa {

struct ConfigValue {
  enum class Type { number, string, boolean, array };
  Type type = Type::number;
  double num = 0.0;
  std::string str;
  bool boolean = false;
  std::vector<ConfigValue> arr;
};

using ConfigTable = std::map<std::string, ConfigValue>;

struct ConfigDoc {
  ConfigTable root;
  std::map<std::string, ConfigTable> tables;
  std::map<std::string, std::vector<ConfigTable>> table_arrays;

  static ConfigDoc parse_file(const std::string& path);
  static ConfigDoc parse_string(const std::string& text, const std::string& origin = "<string>");
};

enum class EstimatorMethod { none, compensated, enhanced };

struct ModulationPoint {
  std::string kind = "none";  // none | am | fm
  double depth = 0.0;         // dB for am, Hz for fm
};

struct ArrayConfig {
  std::string type = "near_uniform";  // near_uniform | equiangular_13 | head_4 | geometry_file | steering_file
  int mics = 24;
  double radius = 0.06;
  std::string file;
};

struct MotionConfig {
  MotionMode mode = MotionMode::static_pose;
  std::vector<double> angular_velocity_deg = {0.0};  // sweep axis
  double filter_update_s = 1e-3;
  std::string file;
};

struct SourceConfig {
  SourceKind kind = SourceKind::tone;
  double frequency_hz = 1000.0;
  double amplitude = 1.0;
  MicPos direction{std::numbers::pi / 2.0, 0.0};
  double mod_rate_hz = 3.0;
  double band_lo_hz = 300.0;
  double band_hi_hz = 3400.0;
};

struct NoiseConfig {
  std::vector<double> snr_db = {std::numeric_limits<double>::infinity()};  // sweep axis
  bool narrowband = false;
  double narrowband_hz = 0.0;
};

struct EstimatorConfig {
  std::vector<EstimatorMethod> methods = {EstimatorMethod::none};
  int order = 3;                   // N
  int frames = 60;                 // frames per DoA estimate (total frames for enhanced)
  std::vector<int> combine = {1};  // I sweep (enhanced path)
  double sv_threshold = 1.0 / 3.0;
  double freq_lo_hz = 0.0;         // smoothing band; single bin when narrowband_hz set
  double freq_hi_hz = 0.0;
  double narrowband_hz = 0.0;
  int n_sources = 1;
  double grid_deg = 2.0;
  bool whiten = false;
};

struct ErankConfig {
  std::string study;  // rotation | translation | frequency | combine_frames
  int order = 6;
  double frequency_hz = 2000.0;
  std::vector<double> alpha_deg;       // rotation study
  std::vector<double> radius_m;        // translation study
  std::vector<double> frequencies_hz;  // frequency study
  double rot_deg = 3.0;                // combined-mode parameters
  double trans_m = 0.005;
  MicPos trans_direction{std::numbers::pi / 2.0, std::numbers::pi / 2.0};
  std::vector<int> combine = {1};      // combine_frames study
  double sv_threshold = 1.0 / 3.0;
};

struct ExperimentConfig {
  int schema = 1;
  uint64_t seed = 0;
  int trials = 1;
  std::string out_dir = "results";
  bool dump_spectra = false;
  int jobs = 0;  // 0 = hardware default

  ArrayConfig array;
  MotionConfig motion;
  std::vector<SourceConfig> sources;
  std::vector<MicPos> directions;              // per-direction protocol; empty = use source dirs
  std::vector<ModulationPoint> modulations = {{"none", 0.0}};
  NoiseConfig noise;
  STFTParams stft;
  EstimatorConfig estimator;
  std::optional<ErankConfig> erank;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_doc(const ConfigDoc& doc);

  // Throws ErrorKind::validation with a field path on the first failure;
  // returns human-readable warnings (e.g. the MTF frame-length guard).
  std::vector<std::string> validate() const;

  std::string to_toml() const;  // resolved, re-parseable echo
};

ArrayGeometry build_geometry(const ArrayConfig& cfg);

}  // namespace shdoa

#endif
