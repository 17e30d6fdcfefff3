#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mlhy/experiments.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string construction_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

mlhy::ExperimentConfig load(const CommonOpts& opts) {
  mlhy::ExperimentConfig cfg = mlhy::load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write output: " + path);
  return out;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_construction) {
  cmd->add_option("--config", opts.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--out", opts.out_path, "output path")->required();
  cmd->add_option("--seed", opts.seed, "override the config seed");
  cmd->add_option("--workers", opts.workers, "worker threads")->check(CLI::PositiveNumber);
  if (needs_construction)
    cmd->add_option("--construction", opts.construction_path, "construction JSON")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multilevel polar-coded modulation with probabilistic shaping"};
  app.require_subcommand(1);

  CommonOpts construct_opts, fer_opts, rl_opts, cap_opts, rcu_opts;

  CLI::App* construct = app.add_subcommand("construct", "estimate bitchannels and select sets");
  add_common(construct, construct_opts, false);

  CLI::App* fer = app.add_subcommand("fer", "frame error rate sweep");
  add_common(fer, fer_opts, true);

  CLI::App* rate_loss = app.add_subcommand("rate-loss", "DM rate-loss sweep vs CCDM");
  add_common(rate_loss, rl_opts, false);

  CLI::App* capacity = app.add_subcommand("capacity", "constellation-constrained capacities");
  add_common(capacity, cap_opts, false);

  CLI::App* rcu = app.add_subcommand("rcu", "random-coding union bound sweep");
  add_common(rcu, rcu_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (construct->parsed()) {
      const auto cfg = load(construct_opts);
      const auto cc = mlhy::build_construction(cfg, construct_opts.workers);
      mlhy::save_construction(cc, construct_opts.out_path);
      std::cerr << "construction: " << cc.data_bits() << " data (" << cc.payload_bits()
                << " payload), " << cc.n_dm << " dm, "
                << cc.m * cc.block_length - cc.data_bits() - cc.n_dm << " frozen\n";
    } else if (fer->parsed()) {
      const auto cfg = load(fer_opts);
      const auto cc = mlhy::load_construction(fer_opts.construction_path);
      const auto records = mlhy::run_fer_sweep(cfg, cc, fer_opts.workers, &std::cerr);
      auto out = open_out(fer_opts.out_path);
      mlhy::write_fer_csv(out, cfg, cc, records);
    } else if (rate_loss->parsed()) {
      const auto cfg = load(rl_opts);
      const auto records = mlhy::run_rate_loss(cfg, rl_opts.workers, &std::cerr);
      auto out = open_out(rl_opts.out_path);
      mlhy::write_rate_loss_csv(out, cfg, records);
    } else if (capacity->parsed()) {
      const auto cfg = load(cap_opts);
      const auto report = mlhy::run_capacity(cfg);
      auto out = open_out(cap_opts.out_path);
      mlhy::write_capacity_csv(out, cfg, report);
      if (report.target_bpcu > 0.0)
        std::cerr << "thresholds at " << report.target_bpcu
                  << " bpcu: shaped " << report.threshold_shaped_db << " dB, uniform "
                  << report.threshold_uniform_db << " dB\n";
    } else if (rcu->parsed()) {
      const auto cfg = load(rcu_opts);
      std::vector<double> pmf;
      std::vector<std::vector<int>> sent_words;
      double rate = cfg.rate_bpcu;
      if (cfg.mode == mlhy::SchemeMode::mlhy) {
        const auto cc = mlhy::build_construction(cfg, rcu_opts.workers);
        sent_words = mlhy::draw_encoder_words(cfg, cc, cfg.rcu_pmf_frames);
        pmf = mlhy::measure_realized_pmf(cfg, cc, cfg.rcu_pmf_frames);
        rate = static_cast<double>(cc.payload_bits()) / cc.block_length;
      } else {
        const auto c = mlhy::constellation_from_name(cfg.constellation);
        pmf = mlhy::maxent_pmf(c, 0.0).pmf;
        if (cfg.crc) rate -= static_cast<double>(cfg.crc->width) / cfg.block_length;
      }
      const auto records = mlhy::run_rcu_sweep(cfg, pmf, rate, rcu_opts.workers, &std::cerr,
                                               sent_words);
      auto out = open_out(rcu_opts.out_path);
      mlhy::write_rcu_csv(out, cfg, pmf, rate, records);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
