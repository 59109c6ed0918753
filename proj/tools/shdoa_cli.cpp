// Command-line front end. Talks to the library exclusively through the C API.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "shdoa/shdoa_c.h"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int jobs = 0;
};

int report_failure(int status) {
  std::fprintf(stderr, "error: %s\n", shdoa_last_error());
  return status;
}

// exit code contract: 0 ok, 2 validation, 1 runtime
int load_config(const CommonOpts& opts, shdoa_config** cfg) {
  int rc = shdoa_config_load(opts.config_path.c_str(), cfg);
  if (rc != SHDOA_OK) return rc;
  if (opts.seed >= 0) {
    rc = shdoa_config_set(*cfg, "seed", std::to_string(opts.seed).c_str());
    if (rc != SHDOA_OK) return rc;
  }
  if (opts.jobs > 0) {
    rc = shdoa_config_set(*cfg, "jobs", std::to_string(opts.jobs).c_str());
    if (rc != SHDOA_OK) return rc;
  }
  if (!opts.out_dir.empty()) {
    rc = shdoa_config_set(*cfg, "out", opts.out_dir.c_str());
    if (rc != SHDOA_OK) return rc;
  }
  return SHDOA_OK;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("config", opts.config_path, "experiment config file")->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "RNG seed (overrides config)");
  cmd->add_option("--jobs", opts.jobs, "worker threads (0 = hardware)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SH-domain DoA estimation for moving microphone arrays"};
  app.require_subcommand(1);

  CommonOpts run_opts, erank_opts, synth_opts, est_opts, val_opts;
  std::string est_wav, est_traj;

  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment config");
  add_common(run_cmd, run_opts);
  CLI::App* erank_cmd = app.add_subcommand("erank", "effective-rank analysis only");
  add_common(erank_cmd, erank_opts);
  CLI::App* synth_cmd = app.add_subcommand("synth", "synthesize signals to WAVE");
  add_common(synth_cmd, synth_opts);
  CLI::App* est_cmd = app.add_subcommand("estimate", "run the pipeline on provided audio");
  add_common(est_cmd, est_opts);
  est_cmd->add_option("--audio", est_wav, "multichannel WAVE input")->required();
  est_cmd->add_option("--trajectory", est_traj, "trajectory CSV input")->required();
  CLI::App* val_cmd = app.add_subcommand("validate", "config check only");
  add_common(val_cmd, val_opts);

  CLI11_PARSE(app, argc, argv);

  CommonOpts* opts = nullptr;
  if (run_cmd->parsed()) opts = &run_opts;
  else if (erank_cmd->parsed()) opts = &erank_opts;
  else if (synth_cmd->parsed()) opts = &synth_opts;
  else if (est_cmd->parsed()) opts = &est_opts;
  else opts = &val_opts;

  shdoa_config* cfg = nullptr;
  int rc = load_config(*opts, &cfg);
  if (rc != SHDOA_OK) return report_failure(rc);

  if (val_cmd->parsed()) {
    char warnings[4096] = {0};
    rc = shdoa_config_validate(cfg, warnings, sizeof(warnings));
    if (rc == SHDOA_OK) {
      std::printf("ok\n");
      if (warnings[0]) std::printf("warnings:\n%s\n", warnings);
    }
  } else if (run_cmd->parsed()) {
    rc = shdoa_run_experiment(cfg, nullptr, 0);
  } else if (erank_cmd->parsed()) {
    rc = shdoa_run_erank(cfg, nullptr);
  } else if (synth_cmd->parsed()) {
    rc = shdoa_run_synth(cfg, nullptr);
  } else {
    rc = shdoa_run_estimate(cfg, est_wav.c_str(), est_traj.c_str(), nullptr, 0);
  }

  shdoa_config_free(cfg);
  if (rc != SHDOA_OK) return report_failure(rc);
  return 0;
}
