#pragma once

#include <string>
#include <vector>

#include "frn/numeric.hpp"

namespace frn {

/// Variance floor applied by the output head.
inline constexpr double kVarEpsilon = 1e-6;

/// LSTM cell weights plus the Gaussian output head. Also used as the gradient
/// carrier (identical shape structure).
struct ModelParameters {
  Eigen::Index obs_dim = 0;
  Eigen::Index hidden_dim = 0;

  // Gate weights, input-to-hidden (HxD), hidden-to-hidden (HxH), bias (H).
  Mat w_ix, w_ih;
  Vec b_i;
  Mat w_fx, w_fh;
  Vec b_f;
  Mat w_gx, w_gh;
  Vec b_g;
  Mat w_ox, w_oh;
  Vec b_o;

  // Output head: mean branch and pre-variance branch, DxH each.
  Mat w_mean;
  Vec b_mean;
  Mat w_var;
  Vec b_var;

  static ModelParameters zeros(Eigen::Index obs_dim, Eigen::Index hidden_dim);

  Eigen::Index parameter_count() const;
  /// All fields concatenated in canonical order (matrices row-major).
  Vec flatten() const;
  void unflatten(const Vec& flat);

  /// Applies f to every (name, matrix-or-vector) field in canonical order:
  /// w_ix, w_ih, b_i, w_fx, w_fh, b_f, w_gx, w_gh, b_g, w_ox, w_oh, b_o,
  /// w_mean, b_mean, w_var, b_var.
  template <typename F>
  void visit(F&& f) {
    f("w_ix", w_ix); f("w_ih", w_ih); f("b_i", b_i);
    f("w_fx", w_fx); f("w_fh", w_fh); f("b_f", b_f);
    f("w_gx", w_gx); f("w_gh", w_gh); f("b_g", b_g);
    f("w_ox", w_ox); f("w_oh", w_oh); f("b_o", b_o);
    f("w_mean", w_mean); f("b_mean", b_mean);
    f("w_var", w_var); f("b_var", b_var);
  }
  template <typename F>
  void visit(F&& f) const {
    const_cast<ModelParameters*>(this)->visit(
        [&f](const char* name, auto& m) { f(name, m); });
  }
};

struct RecurrentState {
  Vec h;
  Vec c;

  static RecurrentState zeros(Eigen::Index hidden_dim);
};

struct GaussianPrediction {
  Vec mean;
  Vec var;  // every entry >= kVarEpsilon
};

/// Weights uniform in +-1/sqrt(fan_in), forget-gate bias +1, other biases 0.
ModelParameters init_params(Eigen::Index obs_dim, Eigen::Index hidden_dim,
                            RngStream& rng);

struct CellOutput {
  RecurrentState state;
  GaussianPrediction pred;
};

/// One recurrent step: gated update of (h, c) followed by the Gaussian head.
CellOutput cell_forward(const ModelParameters& p, const RecurrentState& state,
                        const Vec& input);

/// Gaussian head alone, evaluated at an arbitrary hidden activation.
GaussianPrediction predict_from_hidden(const ModelParameters& p, const Vec& h);

/// Sum over dims of 0.5*ln(2*pi*var) + (target - mean)^2 / (2*var).
double gaussian_nll(const GaussianPrediction& pred, const Vec& target);

struct SequenceResult {
  double total_nll = 0.0;  // mean over steps
  std::vector<GaussianPrediction> predictions;
  std::vector<RecurrentState> states;
};

/// Teacher-forced unroll; total NLL is the mean over steps.
SequenceResult forward_sequence(const ModelParameters& p,
                                const RecurrentState& initial_state,
                                const std::vector<Vec>& inputs,
                                const std::vector<Vec>& targets);

/// Exact BPTT gradient of forward_sequence's total NLL.
ModelParameters backward_sequence(const ModelParameters& p,
                                  const RecurrentState& initial_state,
                                  const std::vector<Vec>& inputs,
                                  const std::vector<Vec>& targets);

/// Analytic Jacobian of (h', c') with respect to (h, c), laid out as
/// [dh'/dh dh'/dc; dc'/dh dc'/dc], 2H x 2H.
Mat jacobian_state(const ModelParameters& p, const RecurrentState& state,
                   const Vec& input);

/// Checkpoint JSON, format_version 1. Numbers are written with 17 significant
/// digits so the round trip is bit-exact. `meta` is any JSON object text
/// echoed verbatim under the "meta" key ("{}" if empty).
void save_checkpoint(const ModelParameters& p, const std::string& path,
                     const std::string& meta_json = "{}");
ModelParameters load_checkpoint(const std::string& path);

}  // namespace frn
