#pragma once

#include <string>
#include <vector>

#include "frn/config.hpp"
#include "frn/trajectory.hpp"

namespace frn {

enum class Variant { kForesight, kConventional, kNoised };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// One closed-loop control episode: the model consumes the current
/// observation, optionally refines its state (variant-dependent), and the
/// joint part of the predicted mean is sent to the environment. Stops on
/// success or after env.max_steps.
EpisodeLog run_episode(const ModelParameters& p, DoorMode mode,
                       Variant variant, const ForesightConfig& fcfg,
                       const EnvConfig& env, RngStream rng, int episode_id);

struct EvalCell {
  Variant variant;
  DoorMode mode;
  std::uint64_t seed;
  int successes = 0;
  int episodes = 0;
  double success_rate() const {
    return episodes > 0 ? static_cast<double>(successes) / episodes : 0.0;
  }
};

struct EvalReport {
  std::vector<EvalCell> cells;  // variant-major, then mode, then seed order
};

/// Success-rate table over 3 variants x 3 modes x eval seeds. Episode RNG
/// streams are derived from each seed by (variant, mode, episode) labels.
EvalReport run_eval(const ModelParameters& p, const RunConfig& cfg);

/// A mode counts as solved for (variant, seed) when its success rate is at
/// least 0.5.
int modes_solved(const EvalReport& report, Variant variant,
                 std::uint64_t seed);

void write_eval_report(const EvalReport& report, const RunConfig& cfg,
                       const std::string& path);

}  // namespace frn
