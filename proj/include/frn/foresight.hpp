#pragma once

#include <vector>

#include "frn/srnn.hpp"

namespace frn {

struct ForesightConfig {
  int n = 16;           // candidate count
  int horizon = 10;     // closed-loop rollout length T
  double sigma_lo = 0.05;
  double sigma_hi = 0.15;
  int interval = 1;     // refine every k-th control step
  bool include_unperturbed = false;
};

struct ForesightOutcome {
  int chosen_index = 0;
  std::vector<double> candidate_scores;  // expected final variances
  RecurrentState refined_state;
  Vec noise_std_used;
};

/// Affine min-max map of the predicted variance vector onto
/// [sigma_lo, sigma_hi]; degenerate spread maps everything to the midpoint.
Vec normalize_variance(const Vec& var, const ForesightConfig& cfg);

/// n perturbed copies of the state; the same scalar std is applied to every
/// h and c dimension. With include_unperturbed, candidate 0 is the input
/// state and n-1 noised candidates follow.
std::vector<RecurrentState> sample_candidates(const RecurrentState& state,
                                              double std, int n,
                                              bool include_unperturbed,
                                              RngStream& rng);

struct Rollout {
  GaussianPrediction final_pred;
  std::vector<GaussianPrediction> trajectory;  // length T
};

/// Internal simulation: step 1 consumes seed_input, later steps consume the
/// previous step's predicted mean.
Rollout closed_loop_rollout(const ModelParameters& p,
                            const RecurrentState& state, const Vec& seed_input,
                            int horizon);

/// Argmin over scores; ties go to the lowest index.
ForesightOutcome select_hidden(const std::vector<RecurrentState>& candidates,
                               const std::vector<double>& scores);

/// Full refinement pipeline: normalize_variance -> sample_candidates ->
/// n closed-loop rollouts, each scored by the mean of its final predicted
/// variance -> select_hidden. Every rollout is seeded with the current
/// prediction mean.
ForesightOutcome refine(const ModelParameters& p, const RecurrentState& state,
                        const GaussianPrediction& current_pred,
                        const ForesightConfig& cfg, RngStream& rng);

}  // namespace frn
