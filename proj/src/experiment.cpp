#include "shdoa/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "shdoa/error.hpp"
#include "shdoa/rng.hpp"
#include "shdoa/wav.hpp"

namespace shdoa {

namespace {

constexpr double kPi = std::numbers::pi;
using json = nlohmann::json;

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < n) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<int> bins_for(const EstimatorConfig& est, const STFTParams& stft) {
  std::vector<int> bins;
  if (est.narrowband_hz > 0.0) {
    bins.push_back(stft.nearest_bin(est.narrowband_hz));
    return bins;
  }
  for (int b = 0; b <= stft.frame_len / 2; ++b) {
    double f = stft.bin_freq(b);
    if (f >= est.freq_lo_hz && f <= est.freq_hi_hz) bins.push_back(b);
  }
  if (bins.empty()) fail(ErrorKind::validation, "estimator: no STFT bins inside the frequency band");
  return bins;
}

SteeringSet steering_for_bins(const ExperimentConfig& cfg, const std::vector<int>& bins) {
  SteeringSet set;
  set.fs = cfg.stft.fs;
  if (cfg.array.type == "steering_file") {
    SteeringSet loaded = load_steering(cfg.array.file);
    for (int b : bins) {
      set.freqs_hz.push_back(cfg.stft.bin_freq(b));
      set.matrices.push_back(loaded.at_freq(cfg.stft.bin_freq(b)));
    }
    set.radius = loaded.radius;
    return set;
  }
  ArrayGeometry geom = build_geometry(cfg.array);
  set.radius = geom.radius;
  for (int b : bins) {
    double f = cfg.stft.bin_freq(b);
    set.freqs_hz.push_back(f);
    set.matrices.push_back(rigid_sphere_steering(geom, wavenumber(std::max(f, 1e-6)), cfg.estimator.order));
  }
  return set;
}

// Per-frame field-rotation operators for constant-rate z rotation: frame i
// relative to the frame-0 center is a field rotation by -omega * i * D / fs.
Eigen::MatrixXcd field_rot_z(int order, double alpha_field) {
  return rotation_matrix(order, EulerAngles::normalized(alpha_field, 0.0, 0.0)).matrix;
}

struct Plan {
  EstimatorMethod method = EstimatorMethod::none;
  int combine = 1;  // I
  std::vector<int> bins;
  std::vector<Eigen::MatrixXcd> stat_pinv;                // [bin]
  std::vector<std::vector<Eigen::MatrixXcd>> comp_pinv;   // [bin][frame]
  std::vector<std::vector<Eigen::MatrixXcd>> enh_pinv;    // [bin][group]
  Eigen::MatrixXcd noise_shape;
  bool whiten = false;
  int frames = 0;
};

// W per (bin, frame) from either a constant rotation rate or a trajectory.
struct MotionModel {
  bool from_trajectory = false;
  double omega_rad_s = 0.0;
  const Trajectory* traj = nullptr;

  bool frequency_independent() const {
    if (!from_trajectory) return true;
    for (const FramePose& p : traj->poses)
      if (p.translation.r != 0.0) return false;
    return true;
  }

  MotionTransform transform(int frame, double k, int order, double frame_dt_s) const {
    if (!from_trajectory) {
      return rotation_matrix(order, EulerAngles::normalized(-omega_rad_s * frame * frame_dt_s, 0.0, 0.0));
    }
    return compose_transform(*traj, frame, k, order);
  }
};

Plan build_plan(EstimatorMethod method, int combine, const MotionModel& motion,
                const ExperimentConfig& cfg, const SteeringSet& steering,
                const std::vector<int>& bins) {
  Plan plan;
  plan.method = method;
  plan.combine = combine;
  plan.bins = bins;
  plan.frames = cfg.estimator.frames;
  plan.whiten = cfg.estimator.whiten;
  const double frame_dt = cfg.stft.hop / cfg.stft.fs;
  const int order = cfg.estimator.order;
  const int n_shape = sh_count(order);
  Eigen::MatrixXcd shape = Eigen::MatrixXcd::Zero(n_shape, n_shape);
  int shape_terms = 0;

  const bool freq_indep = motion.frequency_independent();
  std::vector<MotionTransform> shared_w;  // per frame, when frequency independent

  auto w_for = [&](int bi, int frame) -> const MotionTransform& {
    if (freq_indep) {
      if (static_cast<int>(shared_w.size()) <= frame) {
        for (int i = static_cast<int>(shared_w.size()); i <= frame; ++i)
          shared_w.push_back(motion.transform(i, steering.matrices[bi].k, order, frame_dt));
      }
      return shared_w[frame];
    }
    static thread_local MotionTransform scratch;
    scratch = motion.transform(frame, steering.matrices[bi].k, order, frame_dt);
    return scratch;
  };

  if (method == EstimatorMethod::none
      || (method == EstimatorMethod::enhanced && combine == 1)) {
    // enhanced with I = 1 is the no-enhancement baseline: plain stationary
    // estimation, truncated at the configured singular-value threshold
    for (size_t bi = 0; bi < bins.size(); ++bi) {
      const Eigen::MatrixXcd& v = steering.matrices[bi].matrix;
      Eigen::MatrixXcd p = (method == EstimatorMethod::enhanced)
                               ? truncated_pinv(v, cfg.estimator.sv_threshold)
                               : pinv(v);
      if (plan.whiten) {
        shape += p * p.adjoint();
        ++shape_terms;
      }
      plan.stat_pinv.push_back(std::move(p));
    }
  } else if (method == EstimatorMethod::compensated) {
    plan.comp_pinv.resize(bins.size());
    for (size_t bi = 0; bi < bins.size(); ++bi) {
      const Eigen::MatrixXcd& v = steering.matrices[bi].matrix;
      plan.comp_pinv[bi].reserve(cfg.estimator.frames);
      for (int i = 0; i < cfg.estimator.frames; ++i) {
        const MotionTransform& w = w_for(static_cast<int>(bi), i);
        if (v.cols() != w.matrix.rows())
          fail(ErrorKind::configuration, "steering/transform dimension mismatch");
        Eigen::MatrixXcd p = pinv(v * w.matrix);
        if (plan.whiten) {
          shape += p * p.adjoint();
          ++shape_terms;
        }
        plan.comp_pinv[bi].push_back(std::move(p));
      }
    }
  } else {
    const int groups = cfg.estimator.frames / combine;
    if (groups < 1) fail(ErrorKind::validation, "estimator.combine: I exceeds available frames");
    plan.enh_pinv.resize(bins.size());
    for (size_t bi = 0; bi < bins.size(); ++bi) {
      const SteeringMatrix& v = steering.matrices[bi];
      for (int g = 0; g < groups; ++g) {
        std::vector<MotionTransform> ws;
        std::vector<const SteeringMatrix*> vs;
        std::vector<const MotionTransform*> wps;
        ws.reserve(combine);
        for (int ii = 0; ii < combine; ++ii)
          ws.push_back(w_for(static_cast<int>(bi), g * combine + ii));
        for (int ii = 0; ii < combine; ++ii) {
          vs.push_back(&v);
          wps.push_back(&ws[ii]);
        }
        Eigen::MatrixXcd a = combined_matrix(vs, wps);
        Eigen::MatrixXcd p = truncated_pinv(a, cfg.estimator.sv_threshold);
        if (plan.whiten) {
          shape += p * p.adjoint();
          ++shape_terms;
        }
        plan.enh_pinv[bi].push_back(std::move(p));
      }
    }
  }
  if (plan.whiten && shape_terms > 0) plan.noise_shape = shape / static_cast<double>(shape_terms);
  return plan;
}

MicPos run_single_estimate(const STFTFrameSet& frames, const Plan& plan,
                           const EstimatorConfig& est, MusicSpectrum* spectrum_out) {
  std::vector<Eigen::MatrixXcd> q_per_bin;
  q_per_bin.reserve(plan.bins.size());

  if (!plan.stat_pinv.empty()) {
    for (size_t bi = 0; bi < plan.bins.size(); ++bi) {
      std::vector<Eigen::VectorXcd> ests;
      ests.reserve(frames.n_frames());
      for (int i = 0; i < plan.frames; ++i)
        ests.push_back(plan.stat_pinv[bi] * frames.frames[i].col(plan.bins[bi]));
      q_per_bin.push_back(covariance(ests));
    }
  } else if (!plan.comp_pinv.empty()) {
    for (size_t bi = 0; bi < plan.bins.size(); ++bi) {
      std::vector<Eigen::VectorXcd> ests;
      ests.reserve(plan.frames);
      for (int i = 0; i < plan.frames; ++i)
        ests.push_back(plan.comp_pinv[bi][i] * frames.frames[i].col(plan.bins[bi]));
      q_per_bin.push_back(covariance(ests));
    }
  } else {
    STFTFrameSet aligned = time_align(frames, 0);
    const int m = aligned.n_mics();
    for (size_t bi = 0; bi < plan.bins.size(); ++bi) {
      const int b = plan.bins[bi];
      std::vector<Eigen::VectorXcd> ests;
      const int groups = static_cast<int>(plan.enh_pinv[bi].size());
      for (int g = 0; g < groups; ++g) {
        Eigen::VectorXcd stacked(plan.combine * m);
        for (int ii = 0; ii < plan.combine; ++ii)
          stacked.segment(ii * m, m) = aligned.frames[g * plan.combine + ii].col(b);
        ests.push_back(plan.enh_pinv[bi][g] * stacked);
      }
      q_per_bin.push_back(covariance(ests));
    }
  }

  SmoothedCovariance q = freq_smooth(q_per_bin, plan.bins, plan.frames);
  if (plan.whiten && plan.noise_shape.size() > 0)
    q.matrix = whiten_covariance(q.matrix, plan.noise_shape);
  MusicSpectrum spec = music_spectrum(q, est.n_sources, est.grid_deg);
  DoAResult peaks = pick_peaks(spec, est.n_sources);
  if (peaks.estimates.empty()) fail(ErrorKind::degenerate_system, "MUSIC spectrum had no local maxima");
  if (spectrum_out) *spectrum_out = spec;
  return peaks.estimates.front();
}

SourceSpec apply_modulation(const SourceConfig& src, const ModulationPoint& mod, const MicPos& dir) {
  SourceSpec s;
  s.kind = src.kind;
  s.frequency_hz = src.frequency_hz;
  s.amplitude = src.amplitude;
  s.direction = dir;
  s.mod_rate_hz = src.mod_rate_hz;
  s.band_lo_hz = src.band_lo_hz;
  s.band_hi_hz = src.band_hi_hz;
  if (mod.kind == "am") {
    s.kind = SourceKind::am_tone;
    s.am_level_db = mod.depth;
  } else if (mod.kind == "fm") {
    s.kind = SourceKind::fm_tone;
    s.fm_deviation_hz = mod.depth;
  }
  return s;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs_override) {
  ExperimentResult result;
  result.warnings = cfg.validate();
  const int jobs = jobs_override >= 0 ? jobs_override : cfg.jobs;

  const std::vector<int> bins = bins_for(cfg.estimator, cfg.stft);
  const SteeringSet steering = steering_for_bins(cfg, bins);
  const double fs = cfg.stft.fs;
  const int frame_len = cfg.stft.frame_len;
  const int hop = cfg.stft.hop;
  const long n_samples = frame_len + static_cast<long>(cfg.estimator.frames - 1) * hop;
  const double duration = static_cast<double>(n_samples) / fs;
  const double acq_time = duration;

  // direction protocol: explicit direction list, else the configured sources
  std::vector<MicPos> dirs = cfg.directions;
  const bool per_direction = !dirs.empty();
  if (!per_direction) dirs = {cfg.sources.front().direction};

  std::optional<Trajectory> traj;
  if (cfg.motion.mode == MotionMode::trajectory_file) {
    traj = Trajectory::load_csv(cfg.motion.file);
    if (static_cast<int>(traj->poses.size()) < cfg.estimator.frames)
      fail(ErrorKind::validation, "motion.file: fewer poses than frames per estimate");
  }

  struct Combo {
    EstimatorMethod method;
    int combine;
    double omega;
    double snr;
    ModulationPoint mod;
  };
  std::vector<Combo> combos;
  for (EstimatorMethod m : cfg.estimator.methods) {
    std::vector<int> is = (m == EstimatorMethod::enhanced) ? cfg.estimator.combine : std::vector<int>{1};
    for (int i : is)
      for (double omega : cfg.motion.angular_velocity_deg)
        for (double snr : cfg.noise.snr_db)
          for (const ModulationPoint& mod : cfg.modulations)
            combos.push_back({m, i, omega, snr, mod});
  }

  // synthesize once per (omega, modulation, direction); trials only re-draw noise
  struct SynthKey {
    double omega;
    std::string mod_kind;
    double mod_depth;
    int dir;
    bool operator<(const SynthKey& o) const {
      return std::tie(omega, mod_kind, mod_depth, dir) < std::tie(o.omega, o.mod_kind, o.mod_depth, o.dir);
    }
  };
  std::map<SynthKey, Eigen::MatrixXd> synth_cache;
  {
    std::vector<SynthKey> keys;
    for (double omega : cfg.motion.angular_velocity_deg)
      for (const ModulationPoint& mod : cfg.modulations)
        for (size_t d = 0; d < dirs.size(); ++d)
          keys.push_back({omega, mod.kind, mod.depth, static_cast<int>(d)});
    for (const SynthKey& key : keys) synth_cache[key] = Eigen::MatrixXd();
    std::vector<SynthKey> order(keys.begin(), keys.end());
    parallel_for(static_cast<int>(order.size()), jobs, [&](int idx) {
      const SynthKey& key = order[idx];
      MotionSpec ms;
      ms.mode = cfg.motion.mode;
      ms.angular_velocity_deg = key.omega;
      ms.filter_update_s = cfg.motion.filter_update_s;
      ms.trajectory_path = cfg.motion.file;
      ms.pose_spacing_s = hop / fs;
      ms.first_pose_s = 0.5 * frame_len / fs;
      std::vector<SourceSpec> specs;
      for (const SourceConfig& sc : cfg.sources)
        specs.push_back(apply_modulation(sc, ModulationPoint{key.mod_kind, key.mod_depth},
                                         per_direction ? dirs[key.dir] : sc.direction));
      ArrayGeometry geom = build_geometry(cfg.array);
      SynthResult synth = synth_moving_array(geom, ms, specs, duration, fs);
      synth_cache[key] = std::move(synth.signals);
    });
  }

  // estimator plans per (method/I, omega)
  struct PlanKey {
    int method;
    int combine;
    double omega;
    bool operator<(const PlanKey& o) const {
      return std::tie(method, combine, omega) < std::tie(o.method, o.combine, o.omega);
    }
  };
  std::map<PlanKey, Plan> plans;
  for (const Combo& c : combos) {
    PlanKey key{static_cast<int>(c.method), c.combine, c.omega};
    if (plans.count(key)) continue;
    MotionModel motion;
    if (traj) {
      motion.from_trajectory = true;
      motion.traj = &*traj;
    } else {
      motion.omega_rad_s = c.omega * kPi / 180.0;
      if (cfg.motion.mode == MotionMode::static_pose) motion.omega_rad_s = 0.0;
    }
    plans.emplace(key, build_plan(c.method, c.combine, motion, cfg, steering, bins));
  }

  // trial fan-out, results keyed by (combo, direction, trial)
  const int n_combo = static_cast<int>(combos.size());
  const int n_dirs = static_cast<int>(dirs.size());
  const int n_items = n_combo * n_dirs * cfg.trials;
  std::vector<double> errors(n_items, -1.0);
  std::vector<uint8_t> failed(n_items, 0);

  parallel_for(n_items, jobs, [&](int item) {
    const int combo_i = item / (n_dirs * cfg.trials);
    const int dir_i = (item / cfg.trials) % n_dirs;
    const int trial = item % cfg.trials;
    const Combo& c = combos[combo_i];
    try {
      SynthKey skey{c.omega, c.mod.kind, c.mod.depth, dir_i};
      const Eigen::MatrixXd& clean = synth_cache.at(skey);
      NoiseSpec ns;
      ns.snr_db = c.snr;
      ns.narrowband = cfg.noise.narrowband;
      ns.narrowband_hz = cfg.noise.narrowband_hz;
      ns.seed = stream_id(cfg.seed, static_cast<uint64_t>(trial), static_cast<uint64_t>(dir_i));
      Eigen::MatrixXd noisy = add_noise(clean, ns, cfg.stft);
      STFTFrameSet frames = stft(noisy, cfg.stft);
      if (frames.n_frames() < cfg.estimator.frames)
        fail(ErrorKind::insufficient_data, "fewer frames than the estimator needs");
      const Plan& plan = plans.at(PlanKey{static_cast<int>(c.method), c.combine, c.omega});
      MicPos est = run_single_estimate(frames, plan, cfg.estimator, nullptr);
      // truth: apparent source direction at the frame-0 center
      double omega_rad = (cfg.motion.mode == MotionMode::rotate_z) ? c.omega * kPi / 180.0 : 0.0;
      MicPos truth = per_direction ? dirs[dir_i] : cfg.sources.front().direction;
      truth.phi -= omega_rad * (0.5 * frame_len / fs);
      errors[item] = doa_error_angle_deg(est, truth);
    } catch (const Error&) {
      failed[item] = 1;
    }
  });

  // aggregate per combo over directions x trials
  for (int ci = 0; ci < n_combo; ++ci) {
    const Combo& c = combos[ci];
    ExperimentRow row;
    row.method = c.method == EstimatorMethod::none          ? "none"
                 : c.method == EstimatorMethod::compensated ? "compensated"
                                                            : "enhanced";
    row.combine = (c.method == EstimatorMethod::enhanced) ? c.combine : 0;
    row.omega_deg = c.omega;
    row.snr_db = c.snr;
    row.modulation = c.mod;
    row.half_angle_deg = c.omega * acq_time / 2.0;
    for (int d = 0; d < n_dirs; ++d) {
      for (int t = 0; t < cfg.trials; ++t) {
        int item = (ci * n_dirs + d) * cfg.trials + t;
        if (failed[item]) {
          ++row.trial_failures;
        } else {
          row.pooled_errors.push_back(errors[item]);
        }
      }
    }
    if (!row.pooled_errors.empty()) {
      ErrorStats st = error_stats(row.pooled_errors);
      row.mean_deg = st.mean;
      row.std_deg = st.stddev;
      row.n = st.count;
    }
    result.rows.push_back(std::move(row));
  }

  // report
  json report;
  report["schema_version"] = 1;
  report["timestamp"] = iso_timestamp();
  report["seed"] = cfg.seed;
  report["config_toml"] = cfg.to_toml();
  report["warnings"] = result.warnings;
  json rows = json::array();
  for (const ExperimentRow& r : result.rows) {
    json j;
    j["method"] = r.method;
    j["combine"] = r.combine;
    j["omega_deg"] = r.omega_deg;
    j["snr_db"] = std::isinf(r.snr_db) ? json("inf") : json(r.snr_db);
    j["modulation"] = {r.modulation.kind, r.modulation.depth};
    j["mean_deg"] = r.mean_deg;
    j["std_deg"] = r.std_deg;
    j["n"] = r.n;
    j["half_angle_deg"] = r.half_angle_deg;
    j["trial_failures"] = r.trial_failures;
    j["errors_deg"] = r.pooled_errors;
    rows.push_back(j);
  }
  report["results"] = rows;
  result.json_text = report.dump(2) + "\n";
  return result;
}

ErankResult run_erank(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.erank) fail(ErrorKind::validation, "erank: section required for the erank study");
  const ErankConfig& ec = *cfg.erank;
  ArrayGeometry geom = build_geometry(cfg.array);
  ErankResult out;

  auto sig_count = [&](const Eigen::MatrixXcd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    const auto& s = svd.singularValues();
    int c = 0;
    for (int i = 0; i < s.size(); ++i)
      if (s(i) > ec.sv_threshold * s(0)) ++c;
    return c;
  };

  if (ec.study == "rotation") {
    double k = wavenumber(ec.frequency_hz);
    Eigen::MatrixXcd v = rigid_sphere_steering(geom, k, ec.order).matrix;
    for (double a_deg : ec.alpha_deg) {
      Eigen::MatrixXcd r = rotation_matrix(ec.order, EulerAngles::normalized(a_deg * kPi / 180.0, 0, 0)).matrix;
      Eigen::MatrixXcd a(2 * v.rows(), v.cols());
      a << v, v * r;
      out.rows.push_back({"rotation", a_deg, effective_rank(a), sig_count(a)});
    }
  } else if (ec.study == "translation") {
    double k = wavenumber(ec.frequency_hz);
    Eigen::MatrixXcd v = rigid_sphere_steering(geom, k, ec.order).matrix;
    for (double r_m : ec.radius_m) {
      TranslationVec t = TranslationVec::checked(r_m, ec.trans_direction.theta, ec.trans_direction.phi);
      MotionTransform tr = translation_matrix(ec.order, k, t);
      Eigen::MatrixXcd v2 = rigid_sphere_steering(geom, k, tr.output_order).matrix;
      Eigen::MatrixXcd block = v2 * tr.matrix;
      Eigen::MatrixXcd a(v.rows() + block.rows(), v.cols());
      a << v, block;
      out.rows.push_back({"translation", r_m, effective_rank(a), sig_count(a)});
    }
  } else if (ec.study == "frequency") {
    TranslationVec t = TranslationVec::checked(ec.trans_m, ec.trans_direction.theta, ec.trans_direction.phi);
    EulerAngles rot = EulerAngles::normalized(ec.rot_deg * kPi / 180.0, 0, 0);
    for (const char* mode_c : {"rotation", "translation", "combined"}) {
      const std::string mode = mode_c;
      for (double f : ec.frequencies_hz) {
        double k = wavenumber(f);
        Eigen::MatrixXcd v = rigid_sphere_steering(geom, k, ec.order).matrix;
        Eigen::MatrixXcd block;
        if (mode == "rotation") {
          block = v * rotation_matrix(ec.order, rot).matrix;
        } else {
          MotionTransform tr = translation_matrix(ec.order, k, t);
          Eigen::MatrixXcd v2 = rigid_sphere_steering(geom, k, tr.output_order).matrix;
          if (mode == "translation") block = v2 * tr.matrix;
          else block = v2 * (tr.matrix * rotation_matrix(ec.order, rot).matrix);
        }
        Eigen::MatrixXcd a(v.rows() + block.rows(), v.cols());
        a << v, block;
        out.rows.push_back({mode, f, effective_rank(a), sig_count(a)});
      }
    }
  } else if (ec.study == "combine_frames") {
    double f = ec.frequency_hz > 0 ? cfg.stft.bin_freq(cfg.stft.nearest_bin(ec.frequency_hz))
                                   : cfg.stft.bin_freq(0);
    double k = wavenumber(f);
    Eigen::MatrixXcd v = rigid_sphere_steering(geom, k, ec.order).matrix;
    const double omega = cfg.motion.angular_velocity_deg.front() * kPi / 180.0;
    const double frame_dt = cfg.stft.hop / cfg.stft.fs;
    for (int i_comb : ec.combine) {
      Eigen::MatrixXcd a(i_comb * v.rows(), v.cols());
      for (int i = 0; i < i_comb; ++i) {
        Eigen::MatrixXcd r = field_rot_z(ec.order, -omega * i * frame_dt);
        a.middleRows(i * v.rows(), v.rows()) = v * r;
      }
      out.rows.push_back({"combine_frames", static_cast<double>(i_comb), effective_rank(a), sig_count(a)});
    }
  }

  std::ostringstream csv;
  csv << "mode,x,effective_rank,significant_sv\n";
  csv.precision(12);
  for (const ErankRow& r : out.rows)
    csv << r.mode << ',' << r.x << ',' << r.erank << ',' << r.significant_sv << "\n";
  out.csv_text = csv.str();

  json j;
  j["schema_version"] = 1;
  j["timestamp"] = iso_timestamp();
  j["seed"] = cfg.seed;
  j["study"] = ec.study;
  j["config_toml"] = cfg.to_toml();
  json rows = json::array();
  for (const ErankRow& r : out.rows)
    rows.push_back({{"mode", r.mode}, {"x", r.x}, {"effective_rank", r.erank},
                    {"significant_sv", r.significant_sv}});
  j["results"] = rows;
  out.json_text = j.dump(2) + "\n";
  return out;
}

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory: " + dir);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write: " + path);
  out << text;
  if (!out) fail(ErrorKind::io, "short write: " + path);
}

}  // namespace

std::string write_experiment_outputs(const ExperimentResult& res, const ExperimentConfig& cfg,
                                     const std::string& out_dir) {
  ensure_dir(out_dir);
  std::string json_path = out_dir + "/results.json";
  write_text(json_path, res.json_text);
  std::ostringstream csv;
  csv << "method,combine,omega_deg,snr_db,mod_kind,mod_depth,mean_deg,std_deg,n,half_angle_deg,trial_failures\n";
  csv.precision(12);
  for (const ExperimentRow& r : res.rows)
    csv << r.method << ',' << r.combine << ',' << r.omega_deg << ',' << r.snr_db << ','
        << r.modulation.kind << ',' << r.modulation.depth << ',' << r.mean_deg << ','
        << r.std_deg << ',' << r.n << ',' << r.half_angle_deg << ',' << r.trial_failures << "\n";
  write_text(out_dir + "/results.csv", csv.str());
  write_text(out_dir + "/config_resolved.toml", cfg.to_toml());
  return json_path;
}

std::string write_erank_outputs(const ErankResult& res, const ExperimentConfig& cfg,
                                const std::string& out_dir) {
  ensure_dir(out_dir);
  std::string json_path = out_dir + "/erank.json";
  write_text(json_path, res.json_text);
  write_text(out_dir + "/erank.csv", res.csv_text);
  write_text(out_dir + "/config_resolved.toml", cfg.to_toml());
  return json_path;
}

std::string run_synth_to_files(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  const double fs = cfg.stft.fs;
  const long n_samples = cfg.stft.frame_len + static_cast<long>(cfg.estimator.frames - 1) * cfg.stft.hop;
  MotionSpec ms;
  ms.mode = cfg.motion.mode;
  ms.angular_velocity_deg = cfg.motion.angular_velocity_deg.front();
  ms.filter_update_s = cfg.motion.filter_update_s;
  ms.trajectory_path = cfg.motion.file;
  ms.pose_spacing_s = cfg.stft.hop / fs;
  ms.first_pose_s = 0.5 * cfg.stft.frame_len / fs;
  std::vector<SourceSpec> specs;
  for (const SourceConfig& sc : cfg.sources)
    specs.push_back(apply_modulation(sc, cfg.modulations.front(), sc.direction));
  ArrayGeometry geom = build_geometry(cfg.array);
  SynthResult synth = synth_moving_array(geom, ms, specs, n_samples / fs, fs);

  Eigen::MatrixXd signals = synth.signals;
  if (!std::isinf(cfg.noise.snr_db.front())) {
    NoiseSpec ns;
    ns.snr_db = cfg.noise.snr_db.front();
    ns.narrowband = cfg.noise.narrowband;
    ns.narrowband_hz = cfg.noise.narrowband_hz;
    ns.seed = cfg.seed;
    signals = add_noise(signals, ns, cfg.stft);
  }
  // normalize into [-1, 1] for the wav container
  double peak = signals.cwiseAbs().maxCoeff();
  if (peak > 0) signals /= (peak * 1.01);
  std::string wav_path = out_dir + "/synth.wav";
  write_wav_float32(wav_path, signals, fs);

  // array poses at STFT frame centers, relative to the frame-0 center pose
  Trajectory traj;
  traj.convention = TrajectoryConvention::absolute;
  const int n_frames = cfg.stft.frame_count(n_samples);
  for (int i = 0; i < n_frames; ++i) {
    FramePose p;
    double angle = synth.array_angle(std::lround(cfg.stft.frame_center(i)))
                   - synth.array_angle(std::lround(cfg.stft.frame_center(0)));
    p.rotation = EulerAngles::normalized(angle, 0.0, 0.0);
    traj.poses.push_back(p);
  }
  traj.save_csv(out_dir + "/trajectory.csv");
  write_text(out_dir + "/config_resolved.toml", cfg.to_toml());
  return wav_path;
}

EstimateResult run_estimate(const ExperimentConfig& cfg, const std::string& wav_path,
                            const std::string& trajectory_path) {
  cfg.validate();
  WavData wav = read_wav(wav_path);
  if (wav.fs != cfg.stft.fs)
    fail(ErrorKind::validation, "audio sample rate does not match stft.fs");
  const std::vector<int> bins = bins_for(cfg.estimator, cfg.stft);
  const SteeringSet steering = steering_for_bins(cfg, bins);
  if (steering.matrices.front().matrix.rows() != wav.samples.rows())
    fail(ErrorKind::validation, "audio channel count does not match the array microphone count");
  Trajectory traj = Trajectory::load_csv(trajectory_path);

  STFTFrameSet frames = stft(wav.samples, cfg.stft);
  int usable = std::min<int>(frames.n_frames(), static_cast<int>(traj.poses.size()));
  if (usable < cfg.estimator.frames)
    fail(ErrorKind::insufficient_data, "audio/trajectory shorter than the estimator frame count");

  MotionModel motion;
  motion.from_trajectory = true;
  motion.traj = &traj;

  EstimateResult res;
  json report;
  report["schema_version"] = 1;
  report["timestamp"] = iso_timestamp();
  report["config_toml"] = cfg.to_toml();
  json per_method = json::array();
  for (EstimatorMethod m : cfg.estimator.methods) {
    std::vector<int> is = (m == EstimatorMethod::enhanced) ? cfg.estimator.combine : std::vector<int>{1};
    for (int i_comb : is) {
      Plan plan = build_plan(m, i_comb, motion, cfg, steering, bins);
      MicPos est = run_single_estimate(frames, plan, cfg.estimator, nullptr);
      std::string name = m == EstimatorMethod::none          ? "none"
                         : m == EstimatorMethod::compensated ? "compensated"
                                                             : "enhanced";
      res.methods.push_back(name);
      res.estimates.push_back(est);
      per_method.push_back({{"method", name},
                            {"combine", m == EstimatorMethod::enhanced ? i_comb : 0},
                            {"theta_deg", est.theta * 180.0 / kPi},
                            {"phi_deg", est.phi * 180.0 / kPi}});
    }
  }
  report["estimates"] = per_method;
  res.json_text = report.dump(2) + "\n";
  return res;
}

std::string write_estimate_outputs(const EstimateResult& res, const ExperimentConfig& cfg,
                                   const std::string& out_dir) {
  (void)cfg;
  ensure_dir(out_dir);
  std::string json_path = out_dir + "/estimate.json";
  write_text(json_path, res.json_text);
  return json_path;
}

}  // namespace shdoa
