#include "shdoa/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "shdoa/error.hpp"

namespace shdoa {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& what) {
  fail(ErrorKind::format, origin + ":" + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Remove a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

ConfigValue parse_value(const std::string& raw, const std::string& origin, int line);

ConfigValue parse_array(const std::string& raw, const std::string& origin, int line) {
  ConfigValue v;
  v.type = ConfigValue::Type::array;
  std::string body = strip(raw.substr(1, raw.size() - 2));
  if (body.empty()) return v;
  int depth = 0;
  bool quoted = false;
  size_t start = 0;
  for (size_t i = 0; i <= body.size(); ++i) {
    bool end = (i == body.size());
    char c = end ? ',' : body[i];
    if (!end && c == '"') quoted = !quoted;
    if (!quoted && c == '[') ++depth;
    if (!quoted && c == ']') --depth;
    if (c == ',' && depth == 0 && !quoted) {
      std::string item = strip(body.substr(start, i - start));
      if (!item.empty()) v.arr.push_back(parse_value(item, origin, line));
      start = i + 1;
    }
  }
  return v;
}

ConfigValue parse_value(const std::string& raw, const std::string& origin, int line) {
  ConfigValue v;
  if (raw.empty()) parse_fail(origin, line, "empty value");
  if (raw.front() == '[') {
    if (raw.back() != ']') parse_fail(origin, line, "unterminated array");
    return parse_array(raw, origin, line);
  }
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') parse_fail(origin, line, "unterminated string");
    v.type = ConfigValue::Type::string;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.type = ConfigValue::Type::boolean;
    v.boolean = (raw == "true");
    return v;
  }
  if (raw == "inf") {
    v.num = std::numeric_limits<double>::infinity();
    return v;
  }
  if (raw == "-inf") {
    v.num = -std::numeric_limits<double>::infinity();
    return v;
  }
  try {
    size_t used = 0;
    v.num = std::stod(raw, &used);
    if (used != raw.size()) parse_fail(origin, line, "bad number '" + raw + "'");
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    parse_fail(origin, line, "bad value '" + raw + "'");
  }
  return v;
}

}  // namespace

ConfigDoc ConfigDoc::parse_string(const std::string& text, const std::string& origin) {
  ConfigDoc doc;
  ConfigTable* current = &doc.root;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip(strip_comment(line));
    if (s.empty()) continue;
    if (s.size() >= 4 && s.substr(0, 2) == "[[") {
      if (s.substr(s.size() - 2) != "]]") parse_fail(origin, lineno, "malformed [[table]]");
      std::string name = strip(s.substr(2, s.size() - 4));
      doc.table_arrays[name].emplace_back();
      current = &doc.table_arrays[name].back();
      continue;
    }
    if (s.front() == '[') {
      if (s.back() != ']') parse_fail(origin, lineno, "malformed [table]");
      std::string name = strip(s.substr(1, s.size() - 2));
      current = &doc.tables[name];
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) parse_fail(origin, lineno, "expected key = value");
    std::string key = strip(s.substr(0, eq));
    std::string val = strip(s.substr(eq + 1));
    if (key.empty()) parse_fail(origin, lineno, "empty key");
    (*current)[key] = parse_value(val, origin, lineno);
  }
  return doc;
}

ConfigDoc ConfigDoc::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

namespace {

const ConfigValue* find(const ConfigTable& t, const std::string& key) {
  auto it = t.find(key);
  return it == t.end() ? nullptr : &it->second;
}

double need_num(const ConfigTable& t, const std::string& key, const std::string& path, double dflt,
                bool* found = nullptr) {
  const ConfigValue* v = find(t, key);
  if (found) *found = (v != nullptr);
  if (!v) return dflt;
  if (v->type != ConfigValue::Type::number)
    fail(ErrorKind::validation, path + "." + key + ": expected a number");
  return v->num;
}

std::string need_str(const ConfigTable& t, const std::string& key, const std::string& path,
                     const std::string& dflt) {
  const ConfigValue* v = find(t, key);
  if (!v) return dflt;
  if (v->type != ConfigValue::Type::string)
    fail(ErrorKind::validation, path + "." + key + ": expected a string");
  return v->str;
}

bool need_bool(const ConfigTable& t, const std::string& key, const std::string& path, bool dflt) {
  const ConfigValue* v = find(t, key);
  if (!v) return dflt;
  if (v->type != ConfigValue::Type::boolean)
    fail(ErrorKind::validation, path + "." + key + ": expected true/false");
  return v->boolean;
}

std::vector<double> num_list(const ConfigTable& t, const std::string& key, const std::string& path,
                             std::vector<double> dflt) {
  const ConfigValue* v = find(t, key);
  if (!v) return dflt;
  if (v->type == ConfigValue::Type::number) return {v->num};
  if (v->type != ConfigValue::Type::array)
    fail(ErrorKind::validation, path + "." + key + ": expected a number or array");
  std::vector<double> out;
  for (const auto& e : v->arr) {
    if (e.type != ConfigValue::Type::number)
      fail(ErrorKind::validation, path + "." + key + ": array entries must be numbers");
    out.push_back(e.num);
  }
  if (out.empty()) fail(ErrorKind::validation, path + "." + key + ": empty list");
  return out;
}

MicPos dir_from_pair(const ConfigValue& v, const std::string& where) {
  if (v.type != ConfigValue::Type::array || v.arr.size() != 2
      || v.arr[0].type != ConfigValue::Type::number || v.arr[1].type != ConfigValue::Type::number)
    fail(ErrorKind::validation, where + ": expected [theta_deg, phi_deg]");
  return {v.arr[0].num * kPi / 180.0, v.arr[1].num * kPi / 180.0};
}

SourceKind source_kind(const std::string& s, const std::string& where) {
  if (s == "tone") return SourceKind::tone;
  if (s == "am_tone") return SourceKind::am_tone;
  if (s == "fm_tone") return SourceKind::fm_tone;
  if (s == "wideband") return SourceKind::wideband;
  fail(ErrorKind::validation, where + ": unknown source kind '" + s + "'");
}

EstimatorMethod method_of(const std::string& s, const std::string& where) {
  if (s == "none") return EstimatorMethod::none;
  if (s == "compensated") return EstimatorMethod::compensated;
  if (s == "enhanced") return EstimatorMethod::enhanced;
  fail(ErrorKind::validation, where + ": unknown estimator method '" + s + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_doc(const ConfigDoc& doc) {
  ExperimentConfig c;
  c.schema = static_cast<int>(need_num(doc.root, "schema", "", 1));
  c.seed = static_cast<uint64_t>(need_num(doc.root, "seed", "", 0));
  c.trials = static_cast<int>(need_num(doc.root, "trials", "", 1));
  c.out_dir = need_str(doc.root, "out", "", "results");
  c.dump_spectra = need_bool(doc.root, "dump_spectra", "", false);
  c.jobs = static_cast<int>(need_num(doc.root, "jobs", "", 0));

  if (auto it = doc.tables.find("array"); it != doc.tables.end()) {
    const ConfigTable& t = it->second;
    c.array.type = need_str(t, "type", "array", c.array.type);
    c.array.mics = static_cast<int>(need_num(t, "mics", "array", c.array.mics));
    c.array.radius = need_num(t, "radius", "array", c.array.radius);
    c.array.file = need_str(t, "file", "array", "");
  }

  if (auto it = doc.tables.find("stft"); it != doc.tables.end()) {
    const ConfigTable& t = it->second;
    c.stft.frame_len = static_cast<int>(need_num(t, "frame_len", "stft", c.stft.frame_len));
    c.stft.hop = static_cast<int>(need_num(t, "hop", "stft", c.stft.hop));
    c.stft.fs = need_num(t, "fs", "stft", c.stft.fs);
    c.stft.window = window_from_name(need_str(t, "window", "stft", "hamming"));
  }

  if (auto it = doc.tables.find("motion"); it != doc.tables.end()) {
    const ConfigTable& t = it->second;
    std::string mode = need_str(t, "mode", "motion", "static");
    if (mode == "static") c.motion.mode = MotionMode::static_pose;
    else if (mode == "rotate_z") c.motion.mode = MotionMode::rotate_z;
    else if (mode == "trajectory_file") c.motion.mode = MotionMode::trajectory_file;
    else fail(ErrorKind::validation, "motion.mode: unknown mode '" + mode + "'");
    c.motion.angular_velocity_deg = num_list(t, "angular_velocity", "motion", {0.0});
    c.motion.filter_update_s = need_num(t, "filter_update", "motion", 1e-3);
    c.motion.file = need_str(t, "file", "motion", "");
  }

  if (auto it = doc.table_arrays.find("source"); it != doc.table_arrays.end()) {
    for (size_t i = 0; i < it->second.size(); ++i) {
      const ConfigTable& t = it->second[i];
      std::string where = "source[" + std::to_string(i) + "]";
      SourceConfig s;
      s.kind = source_kind(need_str(t, "kind", where, "tone"), where);
      s.frequency_hz = need_num(t, "frequency", where, 1000.0);
      s.amplitude = need_num(t, "amplitude", where, 1.0);
      if (const ConfigValue* d = find(t, "direction")) s.direction = dir_from_pair(*d, where + ".direction");
      s.mod_rate_hz = need_num(t, "mod_rate", where, 3.0);
      std::vector<double> band = num_list(t, "band", where, {300.0, 3400.0});
      if (band.size() != 2) fail(ErrorKind::validation, where + ".band: expected [lo, hi]");
      s.band_lo_hz = band[0];
      s.band_hi_hz = band[1];
      c.sources.push_back(s);
    }
  }
  if (c.sources.empty()) c.sources.push_back(SourceConfig{});

  if (const ConfigValue* d = find(doc.root, "directions")) {
    if (d->type != ConfigValue::Type::array)
      fail(ErrorKind::validation, "directions: expected an array of [theta,phi] pairs");
    for (size_t i = 0; i < d->arr.size(); ++i)
      c.directions.push_back(dir_from_pair(d->arr[i], "directions[" + std::to_string(i) + "]"));
  }

  if (const ConfigValue* mv = find(doc.root, "modulations")) {
    if (mv->type != ConfigValue::Type::array)
      fail(ErrorKind::validation, "modulations: expected an array of [kind, depth] pairs");
    c.modulations.clear();
    for (const auto& e : mv->arr) {
      if (e.type != ConfigValue::Type::array || e.arr.size() != 2
          || e.arr[0].type != ConfigValue::Type::string || e.arr[1].type != ConfigValue::Type::number)
        fail(ErrorKind::validation, "modulations: entries must be [\"none|am|fm\", depth]");
      c.modulations.push_back({e.arr[0].str, e.arr[1].num});
    }
  }

  if (auto it = doc.tables.find("noise"); it != doc.tables.end()) {
    const ConfigTable& t = it->second;
    c.noise.snr_db = num_list(t, "snr", "noise", c.noise.snr_db);
    std::string bw = need_str(t, "bandwidth", "noise", "wideband");
    if (bw == "wideband") c.noise.narrowband = false;
    else if (bw == "narrowband") c.noise.narrowband = true;
    else fail(ErrorKind::validation, "noise.bandwidth: expected wideband|narrowband");
    c.noise.narrowband_hz = need_num(t, "narrowband_freq", "noise", 0.0);
  }

  if (auto it = doc.tables.find("estimator"); it != doc.tables.end()) {
    const ConfigTable& t = it->second;
    c.estimator.methods.clear();
    if (const ConfigValue* mv = find(t, "method")) {
      if (mv->type == ConfigValue::Type::string) {
        c.estimator.methods.push_back(method_of(mv->str, "estimator.method"));
      } else if (mv->type == ConfigValue::Type::array) {
        for (const auto& e : mv->arr) {
          if (e.type != ConfigValue::Type::string)
            fail(ErrorKind::validation, "estimator.method: expected strings");
          c.estimator.methods.push_back(method_of(e.str, "estimator.method"));
        }
      } else {
        fail(ErrorKind::validation, "estimator.method: expected string or array");
      }
    } else {
      c.estimator.methods.push_back(EstimatorMethod::none);
    }
    c.estimator.order = static_cast<int>(need_num(t, "order", "estimator", 3));
    c.estimator.frames = static_cast<int>(need_num(t, "frames", "estimator", 60));
    auto comb = num_list(t, "combine", "estimator", {1.0});
    c.estimator.combine.clear();
    for (double v : comb) c.estimator.combine.push_back(static_cast<int>(v));
    c.estimator.sv_threshold = need_num(t, "sv_threshold", "estimator", 1.0 / 3.0);
    c.estimator.freq_lo_hz = need_num(t, "freq_lo", "estimator", 0.0);
    c.estimator.freq_hi_hz = need_num(t, "freq_hi", "estimator", 0.0);
    c.estimator.narrowband_hz = need_num(t, "narrowband_freq", "estimator", 0.0);
    c.estimator.n_sources = static_cast<int>(need_num(t, "sources_count", "estimator", 1));
    c.estimator.grid_deg = need_num(t, "grid", "estimator", 2.0);
    c.estimator.whiten = need_bool(t, "whiten", "estimator", false);
  }

  if (auto it = doc.tables.find("erank"); it != doc.tables.end()) {
    const ConfigTable& t = it->second;
    ErankConfig e;
    e.study = need_str(t, "study", "erank", "");
    e.order = static_cast<int>(need_num(t, "order", "erank", 6));
    e.frequency_hz = need_num(t, "frequency", "erank", 2000.0);
    e.alpha_deg = num_list(t, "alpha", "erank", {});
    e.radius_m = num_list(t, "radius", "erank", {});
    e.frequencies_hz = num_list(t, "frequencies", "erank", {});
    e.rot_deg = need_num(t, "rot_deg", "erank", 3.0);
    e.trans_m = need_num(t, "trans_m", "erank", 0.005);
    if (const ConfigValue* d = find(t, "direction")) e.trans_direction = dir_from_pair(*d, "erank.direction");
    auto comb = num_list(t, "combine", "erank", {1.0});
    e.combine.clear();
    for (double v : comb) e.combine.push_back(static_cast<int>(v));
    e.sv_threshold = need_num(t, "sv_threshold", "erank", 1.0 / 3.0);
    c.erank = e;
  }

  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_doc(ConfigDoc::parse_file(path));
}

ArrayGeometry build_geometry(const ArrayConfig& cfg) {
  if (cfg.type == "near_uniform") return near_uniform(cfg.mics, cfg.radius);
  if (cfg.type == "equiangular_13") return equiangular_13(cfg.radius);
  if (cfg.type == "head_4") return head_substitute_4(cfg.radius);
  if (cfg.type == "geometry_file") return ArrayGeometry::load_csv(cfg.file);
  fail(ErrorKind::validation, "array.type: unknown geometry '" + cfg.type + "'");
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> warnings;
  if (trials < 1) fail(ErrorKind::validation, "trials: must be >= 1");
  stft.validate();
  if (stft.frame_len / stft.fs < 0.010)
    warnings.push_back("stft.frame_len: frame shorter than the 10 ms multiplicative-transfer-"
                       "function guideline; narrowband model may degrade");

  if (array.type != "steering_file") {
    ArrayGeometry g = build_geometry(array);  // throws on bad geometry
    if (array.type == "near_uniform" && static_cast<int>(g.mics.size()) != array.mics)
      fail(ErrorKind::validation, "array.mics: table size mismatch");
  } else if (array.file.empty()) {
    fail(ErrorKind::validation, "array.file: steering_file type needs a path");
  }

  for (size_t i = 0; i < sources.size(); ++i) {
    const SourceConfig& s = sources[i];
    std::string where = "source[" + std::to_string(i) + "]";
    if (s.kind != SourceKind::wideband && s.frequency_hz >= 0.5 * stft.fs)
      fail(ErrorKind::validation, where + ".frequency: at or above Nyquist");
    if (s.direction.theta < 0 || s.direction.theta > kPi)
      fail(ErrorKind::validation, where + ".direction: elevation outside [0, 180] deg");
  }
  for (const ModulationPoint& m : modulations)
    if (m.kind != "none" && m.kind != "am" && m.kind != "fm")
      fail(ErrorKind::validation, "modulations: kind must be none|am|fm");

  const int coeffs = sh_count(estimator.order);
  if (estimator.n_sources < 1 || estimator.n_sources >= coeffs)
    fail(ErrorKind::validation, "estimator.sources_count: must satisfy 1 <= S < (N+1)^2");
  if (estimator.sv_threshold < 0.0 || estimator.sv_threshold >= 1.0)
    fail(ErrorKind::validation, "estimator.sv_threshold: must be in [0, 1)");
  if (!(estimator.grid_deg > 0.0)) fail(ErrorKind::validation, "estimator.grid: must be > 0");
  if (estimator.frames < 1) fail(ErrorKind::validation, "estimator.frames: must be >= 1");
  bool enhanced = false;
  for (EstimatorMethod m : estimator.methods) enhanced |= (m == EstimatorMethod::enhanced);
  if (enhanced) {
    for (int i : estimator.combine) {
      if (i < 1) fail(ErrorKind::validation, "estimator.combine: I must be >= 1");
      if (i > estimator.frames)
        fail(ErrorKind::validation, "estimator.combine: I exceeds frames per estimate");
    }
    if (estimator.narrowband_hz <= 0.0 && estimator.freq_hi_hz <= 0.0)
      fail(ErrorKind::validation, "estimator: enhanced path needs narrowband_freq or freq band");
  }
  if (estimator.freq_hi_hz > 0.0 && estimator.freq_lo_hz > estimator.freq_hi_hz)
    fail(ErrorKind::validation, "estimator.freq_lo: exceeds freq_hi");
  if (noise.narrowband && noise.narrowband_hz <= 0.0)
    fail(ErrorKind::validation, "noise.narrowband_freq: required for narrowband SNR");
  if (motion.mode == MotionMode::trajectory_file && motion.file.empty())
    fail(ErrorKind::validation, "motion.file: required for trajectory_file mode");
  if (!(motion.filter_update_s > 0.0))
    fail(ErrorKind::validation, "motion.filter_update: must be > 0");
  if (erank) {
    const std::string& s = erank->study;
    if (s != "rotation" && s != "translation" && s != "frequency" && s != "combine_frames")
      fail(ErrorKind::validation, "erank.study: unknown study '" + s + "'");
  }
  return warnings;
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

std::string fmt_list(const std::vector<int>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

const char* kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::tone: return "tone";
    case SourceKind::am_tone: return "am_tone";
    case SourceKind::fm_tone: return "fm_tone";
    case SourceKind::wideband: return "wideband";
  }
  return "tone";
}

const char* method_name(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::none: return "none";
    case EstimatorMethod::compensated: return "compensated";
    case EstimatorMethod::enhanced: return "enhanced";
  }
  return "none";
}

}  // namespace

std::string ExperimentConfig::to_toml() const {
  std::ostringstream o;
  o << "schema = " << schema << "\n";
  o << "seed = " << seed << "\n";
  o << "trials = " << trials << "\n";
  o << "out = \"" << out_dir << "\"\n";
  o << "dump_spectra = " << (dump_spectra ? "true" : "false") << "\n";
  o << "jobs = " << jobs << "\n";
  if (!directions.empty()) {
    o << "directions = [";
    for (size_t i = 0; i < directions.size(); ++i)
      o << (i ? ", " : "") << "[" << fmt(directions[i].theta * 180.0 / kPi) << ", "
        << fmt(directions[i].phi * 180.0 / kPi) << "]";
    o << "]\n";
  }
  o << "modulations = [";
  for (size_t i = 0; i < modulations.size(); ++i)
    o << (i ? ", " : "") << "[\"" << modulations[i].kind << "\", " << fmt(modulations[i].depth) << "]";
  o << "]\n";
  o << "\n[array]\n";
  o << "type = \"" << array.type << "\"\n";
  o << "mics = " << array.mics << "\n";
  o << "radius = " << fmt(array.radius) << "\n";
  if (!array.file.empty()) o << "file = \"" << array.file << "\"\n";
  o << "\n[stft]\n";
  o << "frame_len = " << stft.frame_len << "\n";
  o << "hop = " << stft.hop << "\n";
  o << "fs = " << fmt(stft.fs) << "\n";
  const char* wname = stft.window == Window::rectangular ? "rectangular"
                      : stft.window == Window::hamming   ? "hamming"
                                                         : "hann";
  o << "window = \"" << wname << "\"\n";
  o << "\n[motion]\n";
  const char* mode = motion.mode == MotionMode::static_pose    ? "static"
                     : motion.mode == MotionMode::rotate_z     ? "rotate_z"
                                                               : "trajectory_file";
  o << "mode = \"" << mode << "\"\n";
  o << "angular_velocity = " << fmt_list(motion.angular_velocity_deg) << "\n";
  o << "filter_update = " << fmt(motion.filter_update_s) << "\n";
  if (!motion.file.empty()) o << "file = \"" << motion.file << "\"\n";
  for (const SourceConfig& s : sources) {
    o << "\n[[source]]\n";
    o << "kind = \"" << kind_name(s.kind) << "\"\n";
    o << "frequency = " << fmt(s.frequency_hz) << "\n";
    o << "amplitude = " << fmt(s.amplitude) << "\n";
    o << "direction = [" << fmt(s.direction.theta * 180.0 / kPi) << ", "
      << fmt(s.direction.phi * 180.0 / kPi) << "]\n";
    o << "mod_rate = " << fmt(s.mod_rate_hz) << "\n";
    o << "band = [" << fmt(s.band_lo_hz) << ", " << fmt(s.band_hi_hz) << "]\n";
  }
  o << "\n[noise]\n";
  o << "snr = " << fmt_list(noise.snr_db) << "\n";
  o << "bandwidth = \"" << (noise.narrowband ? "narrowband" : "wideband") << "\"\n";
  o << "narrowband_freq = " << fmt(noise.narrowband_hz) << "\n";
  o << "\n[estimator]\n";
  o << "method = [";
  for (size_t i = 0; i < estimator.methods.size(); ++i)
    o << (i ? ", " : "") << "\"" << method_name(estimator.methods[i]) << "\"";
  o << "]\n";
  o << "order = " << estimator.order << "\n";
  o << "frames = " << estimator.frames << "\n";
  o << "combine = " << fmt_list(estimator.combine) << "\n";
  o << "sv_threshold = " << fmt(estimator.sv_threshold) << "\n";
  o << "freq_lo = " << fmt(estimator.freq_lo_hz) << "\n";
  o << "freq_hi = " << fmt(estimator.freq_hi_hz) << "\n";
  o << "narrowband_freq = " << fmt(estimator.narrowband_hz) << "\n";
  o << "sources_count = " << estimator.n_sources << "\n";
  o << "grid = " << fmt(estimator.grid_deg) << "\n";
  o << "whiten = " << (estimator.whiten ? "true" : "false") << "\n";
  if (erank) {
    o << "\n[erank]\n";
    o << "study = \"" << erank->study << "\"\n";
    o << "order = " << erank->order << "\n";
    o << "frequency = " << fmt(erank->frequency_hz) << "\n";
    if (!erank->alpha_deg.empty()) o << "alpha = " << fmt_list(erank->alpha_deg) << "\n";
    if (!erank->radius_m.empty()) o << "radius = " << fmt_list(erank->radius_m) << "\n";
    if (!erank->frequencies_hz.empty()) o << "frequencies = " << fmt_list(erank->frequencies_hz) << "\n";
    o << "rot_deg = " << fmt(erank->rot_deg) << "\n";
    o << "trans_m = " << fmt(erank->trans_m) << "\n";
    o << "direction = [" << fmt(erank->trans_direction.theta * 180.0 / kPi) << ", "
      << fmt(erank->trans_direction.phi * 180.0 / kPi) << "]\n";
    o << "combine = " << fmt_list(erank->combine) << "\n";
    o << "sv_threshold = " << fmt(erank->sv_threshold) << "\n";
  }
  return o.str();
}

}  // namespace shdoa
