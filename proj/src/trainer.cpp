#include "frn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "frn/errors.hpp"

namespace frn {

namespace {

std::vector<Vec> demo_inputs(const Demo& demo) {
  return {demo.observations.begin(), demo.observations.end() - 1};
}

std::vector<Vec> demo_targets(const Demo& demo) {
  return {demo.observations.begin() + 1, demo.observations.end()};
}

double demo_nll(const ModelParameters& p, const Demo& demo) {
  const auto res = forward_sequence(p, RecurrentState::zeros(p.hidden_dim),
                                    demo_inputs(demo), demo_targets(demo));
  return res.total_nll;
}

}  // namespace

double evaluate_nll(const ModelParameters& p, const std::vector<Demo>& demos) {
  if (demos.empty())
    throw std::invalid_argument("evaluate_nll: empty demo set");
  double sum = 0.0;
  for (const auto& demo : demos) sum += demo_nll(p, demo);
  return sum / static_cast<double>(demos.size());
}

void clip_global_norm(ModelParameters& grad, double clip_norm) {
  double sq = 0.0;
  grad.visit([&](const char*, const auto& m) { sq += m.squaredNorm(); });
  const double norm = std::sqrt(sq);
  if (norm > clip_norm && norm > 0.0) {
    const double s = clip_norm / norm;
    grad.visit([&](const char*, auto& m) { m *= s; });
  }
}

TrainResult train(const std::vector<Demo>& demos, const TrainConfig& cfg,
                  Eigen::Index hidden_dim, const std::string& checkpoint_path,
                  const std::string& meta_json) {
  if (demos.empty()) throw std::invalid_argument("train: empty demo set");
  if (cfg.epochs < 1)
    throw std::invalid_argument("train: epochs must be >= 1");
  const Eigen::Index obs_dim = demos.front().observations.front().size();
  for (const auto& demo : demos) {
    for (const auto& obs : demo.observations) {
      if (obs.size() != obs_dim)
        throw std::invalid_argument("train: inconsistent observation dims");
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  RngStream init_rng = RngStream(cfg.seed).derive(0);
  RngStream noise_rng = RngStream(cfg.seed).derive(1);

  ModelParameters params = init_params(obs_dim, hidden_dim, init_rng);
  Vec theta = params.flatten();
  Vec m1 = Vec::Zero(theta.size());
  Vec m2 = Vec::Zero(theta.size());

  TrainResult result;
  result.report.epoch_nll.reserve(cfg.epochs);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    ModelParameters grad = ModelParameters::zeros(obs_dim, hidden_dim);
    Vec grad_flat = Vec::Zero(theta.size());
    double epoch_nll = 0.0;
    // fixed ascending demo order keeps accumulation bit-deterministic
    for (std::size_t k = 0; k < demos.size(); ++k) {
      auto inputs = demo_inputs(demos[k]);
      if (cfg.input_noise_std > 0.0) {
        for (auto& x : inputs) {
          for (Eigen::Index d = 0; d < x.size(); ++d)
            x[d] += cfg.input_noise_std * noise_rng.next_normal();
        }
      }
      const auto targets = demo_targets(demos[k]);
      const auto zero = RecurrentState::zeros(hidden_dim);
      const auto fwd = forward_sequence(params, zero, inputs, targets);
      if (!std::isfinite(fwd.total_nll)) {
        throw NumericError("non-finite training loss at epoch " +
                                 std::to_string(epoch) + ", demo " +
                                 std::to_string(k));
      }
      epoch_nll += fwd.total_nll;
      grad_flat +=
          backward_sequence(params, zero, inputs, targets).flatten();
    }
    epoch_nll /= static_cast<double>(demos.size());
    result.report.epoch_nll.push_back(epoch_nll);

    grad_flat /= static_cast<double>(demos.size());
    grad.unflatten(grad_flat);
    clip_global_norm(grad, cfg.clip_norm);
    grad_flat = grad.flatten();

    const double bc1 = 1.0 - std::pow(cfg.beta1, epoch);
    const double bc2 = 1.0 - std::pow(cfg.beta2, epoch);
    m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * grad_flat;
    m2 = (cfg.beta2 * m2.array() +
          (1.0 - cfg.beta2) * grad_flat.array().square())
             .matrix();
    theta.array() -= cfg.learning_rate * (m1.array() / bc1) /
                     ((m2.array() / bc2).sqrt() + cfg.adam_eps);
    params.unflatten(theta);

    if (cfg.checkpoint_every > 0 && !checkpoint_path.empty() &&
        epoch % cfg.checkpoint_every == 0 && epoch != cfg.epochs) {
      const auto dot = checkpoint_path.rfind('.');
      const std::string stem = dot == std::string::npos
                                   ? checkpoint_path
                                   : checkpoint_path.substr(0, dot);
      const std::string ext =
          dot == std::string::npos ? "" : checkpoint_path.substr(dot);
      save_checkpoint(params, stem + "_ep" + std::to_string(epoch) + ext,
                      meta_json);
    }
  }

  if (!checkpoint_path.empty()) {
    save_checkpoint(params, checkpoint_path, meta_json);
    result.report.checkpoint_path = checkpoint_path;
  }
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  result.params = std::move(params);
  return result;
}

}  // namespace frn
