#pragma once

#include <optional>
#include <string>
#include <vector>

#include "frn/door_env.hpp"
#include "frn/numeric.hpp"

namespace frn {

struct ForesightRecord {
  int chosen_index = 0;
  std::vector<double> candidate_scores;
  Vec noise_std_used;
};

/// One control step: the observation consumed at t, the prediction emitted,
/// and the recurrent state after any refinement.
struct StepRecord {
  int t = 0;
  Vec observation;
  Vec pred_mean;
  Vec pred_var;
  Vec h;
  Vec c;
  std::optional<ForesightRecord> foresight;
  double env_d = 0.0;
};

struct EpisodeLog {
  int episode_id = 0;
  std::string variant;  // foresight | conventional | noised
  DoorMode mode = DoorMode::kPush;
  bool success = false;
  std::vector<StepRecord> steps;
};

/// Newline-delimited JSON: a header record, then one record per step and an
/// end-of-episode record per episode.
void save_trajectory_log(const std::vector<EpisodeLog>& episodes,
                         const std::string& path,
                         const std::string& config_sha256);
std::vector<EpisodeLog> load_trajectory_log(const std::string& path);

struct Demo {
  DoorMode mode = DoorMode::kPush;
  std::vector<Vec> observations;
};

/// One JSONL file per demo ({"t": int, "obs": [...]} records) plus a
/// manifest.json sidecar in the same directory.
void save_demo_set(const std::vector<Demo>& demos,
                   const std::vector<std::uint64_t>& seeds, double jitter_std,
                   const EnvConfig& env, const std::string& dir,
                   const std::string& config_sha256);
std::vector<Demo> load_demo_set(const std::string& dir);

}  // namespace frn
