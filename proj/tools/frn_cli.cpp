#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frn/analysis.hpp"
#include "frn/config.hpp"
#include "frn/errors.hpp"
#include "frn/runner.hpp"

namespace {

using frn::RunConfig;

std::string checkpoint_meta(const RunConfig& cfg) {
  nlohmann::ordered_json meta;
  meta["config_sha256"] = cfg.sha256();
  meta["config"] = nlohmann::ordered_json::parse(cfg.canonical_json());
  return meta.dump();
}

std::vector<frn::Demo> generate_demos(const RunConfig& cfg, int per_mode,
                                      std::uint64_t seed, double jitter_std,
                                      std::vector<std::uint64_t>* seeds_out) {
  std::vector<frn::Demo> demos;
  const frn::DoorMode modes[] = {frn::DoorMode::kPush, frn::DoorMode::kPull,
                                 frn::DoorMode::kSlide};
  frn::RngStream base(seed);
  for (int mi = 0; mi < 3; ++mi) {
    for (int k = 0; k < per_mode; ++k) {
      const std::uint64_t label =
          static_cast<std::uint64_t>(mi) * 1000u + static_cast<std::uint64_t>(k);
      frn::RngStream demo_rng = base.derive(label);
      frn::Demo demo;
      demo.mode = modes[mi];
      demo.observations =
          frn::script_demo(modes[mi], jitter_std, demo_rng, cfg.env);
      demos.push_back(std::move(demo));
      if (seeds_out) seeds_out->push_back(label);
    }
  }
  return demos;
}

std::string log_config_sha(const std::string& log_path) {
  std::ifstream is(log_path);
  if (!is) throw frn::IoError("trajectory log not found: " + log_path);
  std::string line;
  std::getline(is, line);
  try {
    const auto j = nlohmann::json::parse(line);
    if (j.value("type", "") == "header") {
      return j.value("config_sha256", "unknown");
    }
  } catch (const nlohmann::json::exception&) {
  }
  return "unknown";
}

void write_train_report(const frn::TrainReport& report, const RunConfig& cfg,
                        const std::string& path) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["config_sha256"] = cfg.sha256();
  j["epoch_nll"] = report.epoch_nll;
  j["checkpoint"] = report.checkpoint_path;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw frn::IoError("cannot open report for write: " + path);
  os << j.dump(2) << '\n';
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Foresight-refined predictive RNN controller for the door task"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON run configuration")
      ->required();
  app.add_option("--set", overrides,
                 "Override a config entry, section.key=value (repeatable)");

  // gen-demos
  auto* gen = app.add_subcommand("gen-demos",
                                 "Generate scripted demonstrations");
  std::string gen_out;
  int per_mode = 5;
  std::uint64_t gen_seed = 0;
  double jitter_std = 0.01;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--per-mode", per_mode, "Demos per door mode");
  gen->add_option("--seed", gen_seed, "Master demo seed");
  gen->add_option("--jitter-std", jitter_std, "Command jitter std");

  // train
  auto* tr = app.add_subcommand("train", "Train on a demonstration set");
  std::string demos_dir, ckpt_out;
  tr->add_option("--demos", demos_dir, "Demo directory")->required();
  tr->add_option("--out", ckpt_out, "Checkpoint output path")->required();

  // run
  auto* run = app.add_subcommand("run", "Run closed-loop control episodes");
  std::string run_ckpt, run_mode, run_variant = "foresight", run_log;
  int run_episodes = 1;
  std::uint64_t run_seed = 0;
  run->add_option("--ckpt", run_ckpt, "Checkpoint path")->required();
  run->add_option("--mode", run_mode, "push|pull|slide")->required();
  run->add_option("--variant", run_variant, "foresight|conventional|noised");
  run->add_option("--episodes", run_episodes, "Episode count");
  run->add_option("--seed", run_seed, "Episode master seed");
  run->add_option("--log", run_log, "Trajectory log output (JSONL)")
      ->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Success-rate table over all "
                                        "variants and modes");
  std::string eval_ckpt, eval_report;
  int eval_episodes = 0;
  std::vector<std::uint64_t> eval_seeds;
  ev->add_option("--ckpt", eval_ckpt, "Checkpoint path")->required();
  ev->add_option("--episodes", eval_episodes, "Episodes per mode (overrides "
                                              "config)");
  ev->add_option("--seeds", eval_seeds, "Evaluation seeds (overrides config)")
      ->delimiter(',');
  ev->add_option("--report", eval_report, "Report output path")->required();

  // analyze
  auto* an = app.add_subcommand("analyze", "Analyses over a trajectory log");
  an->require_subcommand(1);
  auto* lyap = an->add_subcommand("lyapunov",
                                  "Per-step local Lyapunov exponents");
  auto* pca = an->add_subcommand("pca", "2-D PCA of hidden states");
  std::string an_log, an_ckpt, an_out;
  bool pca_use_cell = false;
  for (auto* sub : {lyap, pca}) {
    sub->add_option("--log", an_log, "Trajectory log (JSONL)")->required();
    sub->add_option("--out", an_out, "CSV output path")->required();
  }
  lyap->add_option("--ckpt", an_ckpt, "Checkpoint path")->required();
  pca->add_option("--ckpt", an_ckpt, "Checkpoint path (unused, accepted for "
                                     "symmetry)");
  pca->add_flag("--use-cell", pca_use_cell,
                "Include cell memory in the PCA points");

  CLI11_PARSE(app, argc, argv);

  const RunConfig cfg = frn::load_config(config_path, overrides);

  if (gen->parsed()) {
    if (per_mode < 1)
      throw frn::ConfigError("gen-demos: --per-mode must be >= 1");
    std::vector<std::uint64_t> demo_seeds;
    const auto demos =
        generate_demos(cfg, per_mode, gen_seed, jitter_std, &demo_seeds);
    frn::save_demo_set(demos, demo_seeds, jitter_std, cfg.env, gen_out,
                       cfg.sha256());
    std::cout << "wrote " << demos.size() << " demos to " << gen_out << '\n';
  } else if (tr->parsed()) {
    const auto demos = frn::load_demo_set(demos_dir);
    const auto result = frn::train(demos, cfg.training, cfg.model.hidden_dim,
                                   ckpt_out, checkpoint_meta(cfg));
    const auto report_path =
        (std::filesystem::path(ckpt_out).parent_path() / "train_report.json")
            .string();
    write_train_report(result.report, cfg, report_path);
    std::cout << "final NLL " << result.report.epoch_nll.back() << " after "
              << cfg.training.epochs << " epochs ("
              << result.report.wall_seconds << " s), checkpoint " << ckpt_out
              << '\n';
  } else if (run->parsed()) {
    const auto params = frn::load_checkpoint(run_ckpt);
    const auto mode = frn::door_mode_from_string(run_mode);
    const auto variant = frn::variant_from_string(run_variant);
    std::vector<frn::EpisodeLog> episodes;
    frn::RngStream base(run_seed);
    for (int e = 0; e < run_episodes; ++e) {
      episodes.push_back(frn::run_episode(params, mode, variant,
                                          cfg.foresight, cfg.env,
                                          base.derive(e), e));
    }
    frn::save_trajectory_log(episodes, run_log, cfg.sha256());
    int successes = 0;
    for (const auto& ep : episodes) successes += ep.success;
    std::cout << successes << "/" << run_episodes << " episodes succeeded, log "
              << run_log << '\n';
  } else if (ev->parsed()) {
    const auto params = frn::load_checkpoint(eval_ckpt);
    RunConfig eff = cfg;
    if (eval_episodes > 0) eff.eval.episodes_per_mode = eval_episodes;
    if (!eval_seeds.empty()) eff.eval.seeds = eval_seeds;
    const auto report = frn::run_eval(params, eff);
    frn::write_eval_report(report, eff, eval_report);
    for (const auto& cell : report.cells) {
      std::cout << frn::to_string(cell.variant) << ' '
                << frn::to_string(cell.mode) << " seed " << cell.seed << ": "
                << cell.successes << '/' << cell.episodes << '\n';
    }
  } else if (lyap->parsed()) {
    const auto params = frn::load_checkpoint(an_ckpt);
    const auto episodes = frn::load_trajectory_log(an_log);
    frn::write_lyapunov_csv(episodes, params, an_out, log_config_sha(an_log));
    std::cout << "wrote " << an_out << '\n';
  } else if (pca->parsed()) {
    const auto episodes = frn::load_trajectory_log(an_log);
    frn::write_pca_csv(episodes, an_out, log_config_sha(an_log), pca_use_cell);
    std::cout << "wrote " << an_out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const frn::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const frn::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const frn::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const frn::CompatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
