#include "frn/foresight.hpp"

#include <stdexcept>

namespace frn {

Vec normalize_variance(const Vec& var, const ForesightConfig& cfg) {
  const double lo = var.minCoeff();
  const double hi = var.maxCoeff();
  if (hi - lo < 1e-12) {
    return Vec::Constant(var.size(), 0.5 * (cfg.sigma_lo + cfg.sigma_hi));
  }
  // Interpolate as (1-t)*lo + t*hi so both endpoints are hit exactly.
  const auto t = (var.array() - lo) / (hi - lo);
  return ((1.0 - t) * cfg.sigma_lo + t * cfg.sigma_hi)
      .cwiseMin(cfg.sigma_hi)
      .cwiseMax(cfg.sigma_lo)
      .matrix();
}

std::vector<RecurrentState> sample_candidates(const RecurrentState& state,
                                              double std, int n,
                                              bool include_unperturbed,
                                              RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_candidates: n must be >= 1");
  if (std < 0.0)
    throw std::invalid_argument("sample_candidates: negative std");
  std::vector<RecurrentState> candidates;
  candidates.reserve(n);
  const Vec std_vec = Vec::Constant(state.h.size(), std);
  if (include_unperturbed) candidates.push_back(state);
  while (static_cast<int>(candidates.size()) < n) {
    RecurrentState cand;
    cand.h = sample_normal(rng, state.h, std_vec);
    cand.c = sample_normal(rng, state.c, std_vec);
    candidates.push_back(std::move(cand));
  }
  return candidates;
}

Rollout closed_loop_rollout(const ModelParameters& p,
                            const RecurrentState& state, const Vec& seed_input,
                            int horizon) {
  if (horizon < 1)
    throw std::invalid_argument("closed_loop_rollout: horizon must be >= 1");
  Rollout rollout;
  rollout.trajectory.reserve(horizon);
  RecurrentState s = state;
  Vec input = seed_input;
  for (int t = 0; t < horizon; ++t) {
    CellOutput out = cell_forward(p, s, input);
    s = out.state;
    input = out.pred.mean;
    rollout.trajectory.push_back(std::move(out.pred));
  }
  rollout.final_pred = rollout.trajectory.back();
  return rollout;
}

ForesightOutcome select_hidden(const std::vector<RecurrentState>& candidates,
                               const std::vector<double>& scores) {
  if (candidates.empty() || candidates.size() != scores.size()) {
    throw std::invalid_argument(
        "select_hidden: need a non-empty candidate set with matching scores");
  }
  int best = 0;
  for (int j = 1; j < static_cast<int>(scores.size()); ++j) {
    if (scores[j] < scores[best]) best = j;
  }
  ForesightOutcome outcome;
  outcome.chosen_index = best;
  outcome.candidate_scores = scores;
  outcome.refined_state = candidates[best];
  return outcome;
}

ForesightOutcome refine(const ModelParameters& p, const RecurrentState& state,
                        const GaussianPrediction& current_pred,
                        const ForesightConfig& cfg, RngStream& rng) {
  const Vec noise_std = normalize_variance(current_pred.var, cfg);
  const double state_std = noise_std.mean();
  const auto candidates = sample_candidates(state, state_std, cfg.n,
                                            cfg.include_unperturbed, rng);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& cand : candidates) {
    const Rollout r =
        closed_loop_rollout(p, cand, current_pred.mean, cfg.horizon);
    scores.push_back(r.final_pred.var.mean());
  }
  ForesightOutcome outcome = select_hidden(candidates, scores);
  outcome.noise_std_used = noise_std;
  return outcome;
}

}  // namespace frn
