#include "frn/runner.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "frn/errors.hpp"

namespace frn {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kForesight: return "foresight";
    case Variant::kConventional: return "conventional";
    case Variant::kNoised: return "noised";
  }
  throw std::logic_error("unknown Variant");
}

Variant variant_from_string(const std::string& s) {
  if (s == "foresight") return Variant::kForesight;
  if (s == "conventional") return Variant::kConventional;
  if (s == "noised") return Variant::kNoised;
  throw std::invalid_argument("unknown variant: " + s);
}

EpisodeLog run_episode(const ModelParameters& p, DoorMode mode,
                       Variant variant, const ForesightConfig& fcfg,
                       const EnvConfig& env, RngStream rng, int episode_id) {
  if (p.obs_dim != kObsDim)
    throw CompatError("run_episode: checkpoint obs_dim " +
                      std::to_string(p.obs_dim) + " does not match the " +
                      std::to_string(kObsDim) + "-dim environment");

  RngStream model_rng = rng.derive(0);
  RngStream sensor_rng = rng.derive(1);

  EpisodeLog log;
  log.episode_id = episode_id;
  log.variant = to_string(variant);
  log.mode = mode;

  StepResult env_state = reset(mode, env);
  RecurrentState state = RecurrentState::zeros(p.hidden_dim);

  for (int t = 0; t < env.max_steps; ++t) {
    const Vec obs = env_state.observation;
    CellOutput out = cell_forward(p, state, obs);
    state = out.state;
    GaussianPrediction pred = out.pred;

    StepRecord rec;
    rec.t = t;
    rec.observation = obs;

    if (variant == Variant::kForesight && t % fcfg.interval == 0) {
      ForesightOutcome outcome = refine(p, state, pred, fcfg, model_rng);
      state = outcome.refined_state;
      pred = predict_from_hidden(p, state.h);
      rec.foresight = ForesightRecord{outcome.chosen_index,
                                      outcome.candidate_scores,
                                      outcome.noise_std_used};
    } else if (variant == Variant::kNoised) {
      // same f(o^var)-scaled noise as foresight, but no selection
      const Vec noise_std = normalize_variance(pred.var, fcfg);
      const Vec std_vec = Vec::Constant(p.hidden_dim, noise_std.mean());
      state.h = sample_normal(model_rng, state.h, std_vec);
      state.c = sample_normal(model_rng, state.c, std_vec);
      pred = predict_from_hidden(p, state.h);
    }

    const Vec command = pred.mean.head(3);
    env_state = step(env_state.state, command, env,
                     env.sensor_noise_std > 0.0 ? &sensor_rng : nullptr);

    rec.pred_mean = pred.mean;
    rec.pred_var = pred.var;
    rec.h = state.h;
    rec.c = state.c;
    rec.env_d = env_state.state.d;
    log.steps.push_back(std::move(rec));

    if (is_success(env_state.state, env)) break;
  }
  log.success = is_success(env_state.state, env);
  return log;
}

namespace {

constexpr Variant kAllVariants[] = {Variant::kForesight,
                                    Variant::kConventional, Variant::kNoised};
constexpr DoorMode kAllModes[] = {DoorMode::kPush, DoorMode::kPull,
                                  DoorMode::kSlide};

}  // namespace

EvalReport run_eval(const ModelParameters& p, const RunConfig& cfg) {
  EvalReport report;
  for (int vi = 0; vi < 3; ++vi) {
    for (int mi = 0; mi < 3; ++mi) {
      for (const auto seed : cfg.eval.seeds) {
        EvalCell cell;
        cell.variant = kAllVariants[vi];
        cell.mode = kAllModes[mi];
        cell.seed = seed;
        cell.episodes = cfg.eval.episodes_per_mode;
        RngStream base(seed);
        for (int e = 0; e < cfg.eval.episodes_per_mode; ++e) {
          RngStream ep_rng = base.derive(
              static_cast<std::uint64_t>(vi) * 1000000u +
              static_cast<std::uint64_t>(mi) * 10000u +
              static_cast<std::uint64_t>(e));
          const auto log = run_episode(p, cell.mode, cell.variant,
                                       cfg.foresight, cfg.env, ep_rng, e);
          if (log.success) ++cell.successes;
        }
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

int modes_solved(const EvalReport& report, Variant variant,
                 std::uint64_t seed) {
  int solved = 0;
  for (const auto& cell : report.cells) {
    if (cell.variant == variant && cell.seed == seed &&
        cell.success_rate() >= 0.5) {
      ++solved;
    }
  }
  return solved;
}

void write_eval_report(const EvalReport& report, const RunConfig& cfg,
                       const std::string& path) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["config_sha256"] = cfg.sha256();
  j["episodes_per_mode"] = cfg.eval.episodes_per_mode;
  j["results"] = nlohmann::ordered_json::array();
  for (const auto& cell : report.cells) {
    j["results"].push_back({{"variant", to_string(cell.variant)},
                            {"mode", to_string(cell.mode)},
                            {"seed", cell.seed},
                            {"successes", cell.successes},
                            {"episodes", cell.episodes},
                            {"success_rate", cell.success_rate()}});
  }
  j["modes_solved"] = nlohmann::ordered_json::array();
  for (const auto variant : kAllVariants) {
    for (const auto seed : cfg.eval.seeds) {
      j["modes_solved"].push_back({{"variant", to_string(variant)},
                                   {"seed", seed},
                                   {"solved", modes_solved(report, variant,
                                                           seed)}});
    }
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open report for write: " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("report write failed: " + path);
}

}  // namespace frn
