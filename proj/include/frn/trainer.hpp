#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frn/srnn.hpp"
#include "frn/trajectory.hpp"

namespace frn {

struct TrainConfig {
  int epochs = 600;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 1.0;
  double input_noise_std = 0.01;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // 0 disables intermediate checkpoints
};

struct TrainReport {
  std::vector<double> epoch_nll;  // one entry per epoch, after the update
  double wall_seconds = 0.0;
  std::string checkpoint_path;
};

struct TrainResult {
  ModelParameters params;
  TrainReport report;
};

/// Full-batch teacher-forced NLL minimization over the demo set with Adam,
/// global-norm gradient clipping, and per-epoch input noise. Deterministic
/// given cfg.seed. Intermediate checkpoints (if enabled) are written next to
/// checkpoint_path with an `_epNNN` suffix.
TrainResult train(const std::vector<Demo>& demos, const TrainConfig& cfg,
                  Eigen::Index hidden_dim,
                  const std::string& checkpoint_path = "",
                  const std::string& meta_json = "{}");

/// Mean teacher-forced NLL over the demo set, no updates.
double evaluate_nll(const ModelParameters& p, const std::vector<Demo>& demos);

/// Scales the gradient so its global L2 norm is at most clip_norm.
void clip_global_norm(ModelParameters& grad, double clip_norm);

}  // namespace frn
