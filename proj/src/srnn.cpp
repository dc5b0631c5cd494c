#include "frn/srnn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "frn/errors.hpp"

namespace frn {

namespace {

Mat init_weight(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Mat w(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      w(r, c) = bound * (2.0 * rng.next_uniform() - 1.0);
    }
  }
  return w;
}

}  // namespace

ModelParameters ModelParameters::zeros(Eigen::Index obs_dim,
                                       Eigen::Index hidden_dim) {
  ModelParameters p;
  p.obs_dim = obs_dim;
  p.hidden_dim = hidden_dim;
  const auto D = obs_dim, H = hidden_dim;
  p.w_ix = Mat::Zero(H, D); p.w_ih = Mat::Zero(H, H); p.b_i = Vec::Zero(H);
  p.w_fx = Mat::Zero(H, D); p.w_fh = Mat::Zero(H, H); p.b_f = Vec::Zero(H);
  p.w_gx = Mat::Zero(H, D); p.w_gh = Mat::Zero(H, H); p.b_g = Vec::Zero(H);
  p.w_ox = Mat::Zero(H, D); p.w_oh = Mat::Zero(H, H); p.b_o = Vec::Zero(H);
  p.w_mean = Mat::Zero(D, H); p.b_mean = Vec::Zero(D);
  p.w_var = Mat::Zero(D, H); p.b_var = Vec::Zero(D);
  return p;
}

Eigen::Index ModelParameters::parameter_count() const {
  Eigen::Index n = 0;
  visit([&](const char*, const auto& m) { n += m.size(); });
  return n;
}

Vec ModelParameters::flatten() const {
  Vec flat(parameter_count());
  Eigen::Index pos = 0;
  visit([&](const char*, const auto& field) {
    using Field = std::decay_t<decltype(field)>;
    if constexpr (std::is_same_v<Field, Mat>) {
      for (Eigen::Index r = 0; r < field.rows(); ++r)
        for (Eigen::Index c = 0; c < field.cols(); ++c)
          flat[pos++] = field(r, c);
    } else {
      flat.segment(pos, field.size()) = field;
      pos += field.size();
    }
  });
  return flat;
}

void ModelParameters::unflatten(const Vec& flat) {
  if (flat.size() != parameter_count())
    throw std::invalid_argument("unflatten: length mismatch");
  Eigen::Index pos = 0;
  visit([&](const char*, auto& field) {
    using Field = std::decay_t<decltype(field)>;
    if constexpr (std::is_same_v<Field, Mat>) {
      for (Eigen::Index r = 0; r < field.rows(); ++r)
        for (Eigen::Index c = 0; c < field.cols(); ++c)
          field(r, c) = flat[pos++];
    } else {
      field = flat.segment(pos, field.size());
      pos += field.size();
    }
  });
}

RecurrentState RecurrentState::zeros(Eigen::Index hidden_dim) {
  return {Vec::Zero(hidden_dim), Vec::Zero(hidden_dim)};
}

ModelParameters init_params(Eigen::Index obs_dim, Eigen::Index hidden_dim,
                            RngStream& rng) {
  if (obs_dim < 1 || hidden_dim < 1) {
    throw std::invalid_argument("init_params: dimensions must be >= 1");
  }
  ModelParameters p = ModelParameters::zeros(obs_dim, hidden_dim);
  p.w_ix = init_weight(hidden_dim, obs_dim, rng);
  p.w_ih = init_weight(hidden_dim, hidden_dim, rng);
  p.w_fx = init_weight(hidden_dim, obs_dim, rng);
  p.w_fh = init_weight(hidden_dim, hidden_dim, rng);
  p.w_gx = init_weight(hidden_dim, obs_dim, rng);
  p.w_gh = init_weight(hidden_dim, hidden_dim, rng);
  p.w_ox = init_weight(hidden_dim, obs_dim, rng);
  p.w_oh = init_weight(hidden_dim, hidden_dim, rng);
  p.w_mean = init_weight(obs_dim, hidden_dim, rng);
  p.w_var = init_weight(obs_dim, hidden_dim, rng);
  p.b_f = Vec::Ones(hidden_dim);  // open forget gate at init
  return p;
}

namespace {

// Per-step activations kept for BPTT.
struct CellCache {
  Vec i, f, g, o;
  Vec c_prev, h_prev;
  Vec c, tanh_c, h;
  Vec sig_pre_var;  // softplus'(pre_var)
};

CellOutput cell_forward_impl(const ModelParameters& p,
                             const RecurrentState& state, const Vec& input,
                             CellCache* cache) {
  if (input.size() != p.obs_dim || state.h.size() != p.hidden_dim ||
      state.c.size() != p.hidden_dim) {
    throw std::invalid_argument("cell_forward: shape mismatch");
  }
  require_finite(input, "cell_forward input");

  const Vec i = sigmoid_v(p.w_ix * input + p.w_ih * state.h + p.b_i);
  const Vec f = sigmoid_v(p.w_fx * input + p.w_fh * state.h + p.b_f);
  const Vec g = tanh_v(p.w_gx * input + p.w_gh * state.h + p.b_g);
  const Vec o = sigmoid_v(p.w_ox * input + p.w_oh * state.h + p.b_o);

  CellOutput out;
  out.state.c = f.cwiseProduct(state.c) + i.cwiseProduct(g);
  const Vec tanh_c = tanh_v(out.state.c);
  out.state.h = o.cwiseProduct(tanh_c);

  const Vec pre_var = p.w_var * out.state.h + p.b_var;
  out.pred.mean = p.w_mean * out.state.h + p.b_mean;
  out.pred.var = softplus_v(pre_var).array() + kVarEpsilon;

  if (cache) {
    cache->i = i; cache->f = f; cache->g = g; cache->o = o;
    cache->c_prev = state.c; cache->h_prev = state.h;
    cache->c = out.state.c; cache->tanh_c = tanh_c; cache->h = out.state.h;
    cache->sig_pre_var = sigmoid_v(pre_var);
  }
  return out;
}

}  // namespace

CellOutput cell_forward(const ModelParameters& p, const RecurrentState& state,
                        const Vec& input) {
  return cell_forward_impl(p, state, input, nullptr);
}

GaussianPrediction predict_from_hidden(const ModelParameters& p,
                                       const Vec& h) {
  GaussianPrediction pred;
  pred.mean = p.w_mean * h + p.b_mean;
  pred.var = softplus_v(p.w_var * h + p.b_var).array() + kVarEpsilon;
  return pred;
}

double gaussian_nll(const GaussianPrediction& pred, const Vec& target) {
  if (pred.mean.size() != target.size()) {
    throw std::invalid_argument("gaussian_nll: shape mismatch");
  }
  const auto diff = (target - pred.mean).array();
  return (0.5 * (2.0 * std::numbers::pi * pred.var.array()).log() +
          diff.square() / (2.0 * pred.var.array()))
      .sum();
}

SequenceResult forward_sequence(const ModelParameters& p,
                                const RecurrentState& initial_state,
                                const std::vector<Vec>& inputs,
                                const std::vector<Vec>& targets) {
  if (inputs.size() != targets.size() || inputs.empty()) {
    throw std::invalid_argument(
        "forward_sequence: inputs/targets must be equal-length and non-empty");
  }
  SequenceResult res;
  res.predictions.reserve(inputs.size());
  res.states.reserve(inputs.size());
  RecurrentState state = initial_state;
  double sum = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    CellOutput out = cell_forward(p, state, inputs[t]);
    sum += gaussian_nll(out.pred, targets[t]);
    state = out.state;
    res.predictions.push_back(std::move(out.pred));
    res.states.push_back(state);
  }
  res.total_nll = sum / static_cast<double>(inputs.size());
  return res;
}

ModelParameters backward_sequence(const ModelParameters& p,
                                  const RecurrentState& initial_state,
                                  const std::vector<Vec>& inputs,
                                  const std::vector<Vec>& targets) {
  if (inputs.size() != targets.size() || inputs.empty()) {
    throw std::invalid_argument(
        "backward_sequence: inputs/targets must be equal-length and "
        "non-empty");
  }
  const std::size_t S = inputs.size();
  const double scale = 1.0 / static_cast<double>(S);

  std::vector<CellCache> caches(S);
  RecurrentState state = initial_state;
  for (std::size_t t = 0; t < S; ++t) {
    CellOutput out = cell_forward_impl(p, state, inputs[t], &caches[t]);
    state = out.state;
  }

  ModelParameters grad = ModelParameters::zeros(p.obs_dim, p.hidden_dim);
  Vec dh_next = Vec::Zero(p.hidden_dim);
  Vec dc_next = Vec::Zero(p.hidden_dim);

  for (std::size_t ti = S; ti-- > 0;) {
    const CellCache& cc = caches[ti];
    const Vec mean = p.w_mean * cc.h + p.b_mean;
    const Vec var = softplus_v(p.w_var * cc.h + p.b_var).array() + kVarEpsilon;

    const Vec dmean =
        scale * (mean - targets[ti]).cwiseQuotient(var);
    const Vec dvar =
        scale * (0.5 / var.array() -
                 (targets[ti] - mean).array().square() /
                     (2.0 * var.array().square()))
            .matrix();
    const Vec dpre_var = dvar.cwiseProduct(cc.sig_pre_var);

    grad.w_mean += dmean * cc.h.transpose();
    grad.b_mean += dmean;
    grad.w_var += dpre_var * cc.h.transpose();
    grad.b_var += dpre_var;

    const Vec dh = p.w_mean.transpose() * dmean +
                   p.w_var.transpose() * dpre_var + dh_next;

    const Vec do_ = dh.cwiseProduct(cc.tanh_c);
    const Vec dpre_o =
        do_.cwiseProduct(cc.o.cwiseProduct(Vec::Ones(p.hidden_dim) - cc.o));
    Vec dc = dh.cwiseProduct(cc.o).cwiseProduct(
                 (Vec::Ones(p.hidden_dim) -
                  cc.tanh_c.cwiseProduct(cc.tanh_c))) +
             dc_next;

    const Vec di = dc.cwiseProduct(cc.g);
    const Vec df = dc.cwiseProduct(cc.c_prev);
    const Vec dg = dc.cwiseProduct(cc.i);
    const Vec dpre_i =
        di.cwiseProduct(cc.i.cwiseProduct(Vec::Ones(p.hidden_dim) - cc.i));
    const Vec dpre_f =
        df.cwiseProduct(cc.f.cwiseProduct(Vec::Ones(p.hidden_dim) - cc.f));
    const Vec dpre_g = dg.cwiseProduct(
        Vec::Ones(p.hidden_dim) - cc.g.cwiseProduct(cc.g));

    const Vec& x = inputs[ti];
    grad.w_ix += dpre_i * x.transpose();
    grad.w_ih += dpre_i * cc.h_prev.transpose();
    grad.b_i += dpre_i;
    grad.w_fx += dpre_f * x.transpose();
    grad.w_fh += dpre_f * cc.h_prev.transpose();
    grad.b_f += dpre_f;
    grad.w_gx += dpre_g * x.transpose();
    grad.w_gh += dpre_g * cc.h_prev.transpose();
    grad.b_g += dpre_g;
    grad.w_ox += dpre_o * x.transpose();
    grad.w_oh += dpre_o * cc.h_prev.transpose();
    grad.b_o += dpre_o;

    dh_next = p.w_ih.transpose() * dpre_i + p.w_fh.transpose() * dpre_f +
              p.w_gh.transpose() * dpre_g + p.w_oh.transpose() * dpre_o;
    dc_next = dc.cwiseProduct(cc.f);
  }
  return grad;
}

Mat jacobian_state(const ModelParameters& p, const RecurrentState& state,
                   const Vec& input) {
  const auto H = p.hidden_dim;
  CellCache cc;
  cell_forward_impl(p, state, input, &cc);

  const Vec di = cc.i.cwiseProduct(Vec::Ones(H) - cc.i);
  const Vec df = cc.f.cwiseProduct(Vec::Ones(H) - cc.f);
  const Vec dg = Vec::Ones(H) - cc.g.cwiseProduct(cc.g);
  const Vec do_ = cc.o.cwiseProduct(Vec::Ones(H) - cc.o);
  const Vec dtanh_c = Vec::Ones(H) - cc.tanh_c.cwiseProduct(cc.tanh_c);

  // dc'/dh = diag(c_prev.*f') Wfh + diag(g.*i') Wih + diag(i.*g') Wgh
  Mat dc_dh = cc.c_prev.cwiseProduct(df).asDiagonal() * p.w_fh +
              cc.g.cwiseProduct(di).asDiagonal() * p.w_ih +
              cc.i.cwiseProduct(dg).asDiagonal() * p.w_gh;
  Mat dc_dc = Mat(cc.f.asDiagonal());

  Mat dh_dh = cc.tanh_c.cwiseProduct(do_).asDiagonal() * p.w_oh +
              cc.o.cwiseProduct(dtanh_c).asDiagonal() * dc_dh;
  Mat dh_dc = Mat(cc.o.cwiseProduct(dtanh_c).cwiseProduct(cc.f).asDiagonal());

  Mat jac(2 * H, 2 * H);
  jac.topLeftCorner(H, H) = dh_dh;
  jac.topRightCorner(H, H) = dh_dc;
  jac.bottomLeftCorner(H, H) = dc_dh;
  jac.bottomRightCorner(H, H) = dc_dc;
  return jac;
}

namespace {

void format_double(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

void append_vector(std::string& out, const Vec& v) {
  out += '[';
  for (Eigen::Index d = 0; d < v.size(); ++d) {
    if (d) out += ',';
    format_double(out, v[d]);
  }
  out += ']';
}

void append_matrix(std::string& out, const Mat& m) {
  out += '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += ',';
    out += '[';
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      format_double(out, m(r, c));
    }
    out += ']';
  }
  out += ']';
}

}  // namespace

void save_checkpoint(const ModelParameters& p, const std::string& path,
                     const std::string& meta_json) {
  std::string out;
  out.reserve(1 << 20);
  out += "{\"format_version\":1,\"obs_dim\":";
  out += std::to_string(p.obs_dim);
  out += ",\"hidden_dim\":";
  out += std::to_string(p.hidden_dim);
  out += ",\"params\":{";
  bool first = true;
  p.visit([&](const char* name, const auto& field) {
    if (!first) out += ',';
    first = false;
    out += '"';
    out += name;
    out += "\":";
    if constexpr (std::is_same_v<std::decay_t<decltype(field)>, Mat>) {
      append_matrix(out, field);
    } else {
      append_vector(out, field);
    }
  });
  out += "},\"meta\":";
  out += meta_json.empty() ? "{}" : meta_json;
  out += "}\n";

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for write: " + path);
  os << out;
  if (!os) throw IoError("checkpoint write failed: " + path);
}

ModelParameters load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint file not found: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint parse error in " + path + ": " + e.what());
  }
  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    throw CompatError("checkpoint missing format_version: " + path);
  if (j["format_version"].get<int>() != 1)
    throw CompatError("checkpoint format_version mismatch (want 1, got " + j["format_version"].dump() + ")");

  const auto D = j.at("obs_dim").get<Eigen::Index>();
  const auto H = j.at("hidden_dim").get<Eigen::Index>();
  if (D < 1 || H < 1) throw CompatError("checkpoint has invalid dims");

  ModelParameters p = ModelParameters::zeros(D, H);
  const auto& params = j.at("params");
  p.visit([&](const char* name, auto& field) {
    if (!params.contains(name))
      throw CompatError(std::string("checkpoint missing parameter ") + name);
    const auto& arr = params[name];
    using Field = std::decay_t<decltype(field)>;
    if constexpr (std::is_same_v<Field, Mat>) {
      if (!arr.is_array() ||
          static_cast<Eigen::Index>(arr.size()) != field.rows())
        throw CompatError(std::string("checkpoint shape mismatch for ") + name);
      for (Eigen::Index r = 0; r < field.rows(); ++r) {
        const auto& row = arr[r];
        if (!row.is_array() ||
            static_cast<Eigen::Index>(row.size()) != field.cols())
          throw CompatError(std::string("checkpoint shape mismatch for ") + name);
        for (Eigen::Index c = 0; c < field.cols(); ++c)
          field(r, c) = row[c].get<double>();
      }
    } else {
      if (!arr.is_array() ||
          static_cast<Eigen::Index>(arr.size()) != field.size())
        throw CompatError(std::string("checkpoint shape mismatch for ") + name);
      for (Eigen::Index d = 0; d < field.size(); ++d)
        field[d] = arr[d].get<double>();
    }
  });
  return p;
}

}  // namespace frn
