#include "shdoa/shdoa_c.h"

#include <cstring>
#include <string>

#include "shdoa/config.hpp"
#include "shdoa/error.hpp"
#include "shdoa/experiment.hpp"

struct shdoa_config {
  shdoa::ExperimentConfig cfg;
};

namespace {

thread_local std::string t_last_error;

int status_of(const shdoa::Error& e) {
  switch (e.kind()) {
    case shdoa::ErrorKind::validation:
    case shdoa::ErrorKind::format:
      return SHDOA_ERR_VALIDATION;
    default:
      return SHDOA_ERR_RUNTIME;
  }
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return SHDOA_OK;
  } catch (const shdoa::Error& e) {
    t_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return SHDOA_ERR_RUNTIME;
  }
}

}  // namespace

extern "C" {

const char* shdoa_version(void) { return "0.1.0"; }

const char* shdoa_last_error(void) { return t_last_error.c_str(); }

int shdoa_config_load(const char* path, shdoa_config** out) {
  if (!path || !out) {
    t_last_error = "null argument";
    return SHDOA_ERR_VALIDATION;
  }
  *out = nullptr;
  return guarded([&] {
    auto* handle = new shdoa_config{shdoa::ExperimentConfig::from_file(path)};
    *out = handle;
  });
}

void shdoa_config_free(shdoa_config* cfg) { delete cfg; }

int shdoa_config_set(shdoa_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    t_last_error = "null argument";
    return SHDOA_ERR_VALIDATION;
  }
  return guarded([&] {
    std::string k = key;
    std::string v = value;
    if (k == "seed") cfg->cfg.seed = std::stoull(v);
    else if (k == "trials") cfg->cfg.trials = std::stoi(v);
    else if (k == "jobs") cfg->cfg.jobs = std::stoi(v);
    else if (k == "out") cfg->cfg.out_dir = v;
    else shdoa::fail(shdoa::ErrorKind::validation, "unknown override key '" + k + "'");
  });
}

int shdoa_config_validate(const shdoa_config* cfg, char* warnings, size_t cap) {
  if (!cfg) {
    t_last_error = "null config";
    return SHDOA_ERR_VALIDATION;
  }
  return guarded([&] {
    auto warn = cfg->cfg.validate();
    if (warnings && cap > 0) {
      std::string joined;
      for (const auto& w : warn) {
        if (!joined.empty()) joined += "\n";
        joined += w;
      }
      std::strncpy(warnings, joined.c_str(), cap - 1);
      warnings[cap - 1] = '\0';
    }
  });
}

int shdoa_run_experiment(const shdoa_config* cfg, const char* out_dir, int jobs) {
  if (!cfg) {
    t_last_error = "null config";
    return SHDOA_ERR_VALIDATION;
  }
  return guarded([&] {
    shdoa::ExperimentResult res = shdoa::run_experiment(cfg->cfg, jobs);
    shdoa::write_experiment_outputs(res, cfg->cfg, out_dir ? out_dir : cfg->cfg.out_dir);
  });
}

int shdoa_run_erank(const shdoa_config* cfg, const char* out_dir) {
  if (!cfg) {
    t_last_error = "null config";
    return SHDOA_ERR_VALIDATION;
  }
  return guarded([&] {
    shdoa::ErankResult res = shdoa::run_erank(cfg->cfg);
    shdoa::write_erank_outputs(res, cfg->cfg, out_dir ? out_dir : cfg->cfg.out_dir);
  });
}

int shdoa_run_synth(const shdoa_config* cfg, const char* out_dir) {
  if (!cfg) {
    t_last_error = "null config";
    return SHDOA_ERR_VALIDATION;
  }
  return guarded([&] {
    shdoa::run_synth_to_files(cfg->cfg, out_dir ? out_dir : cfg->cfg.out_dir);
  });
}

int shdoa_run_estimate(const shdoa_config* cfg, const char* wav_path,
                       const char* trajectory_csv, const char* out_dir, int jobs) {
  (void)jobs;
  if (!cfg || !wav_path || !trajectory_csv) {
    t_last_error = "null argument";
    return SHDOA_ERR_VALIDATION;
  }
  return guarded([&] {
    shdoa::EstimateResult res = shdoa::run_estimate(cfg->cfg, wav_path, trajectory_csv);
    shdoa::write_estimate_outputs(res, cfg->cfg, out_dir ? out_dir : cfg->cfg.out_dir);
  });
}

}  // extern "C"
