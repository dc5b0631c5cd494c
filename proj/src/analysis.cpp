#include "frn/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "frn/errors.hpp"

namespace frn {

double local_lyapunov(const Mat& jacobian) {
  if (jacobian.rows() != jacobian.cols())
    throw std::invalid_argument("local_lyapunov: matrix must be square");
  const Mat gram = jacobian.transpose() * jacobian;
  const Eigen::Index n = gram.rows();

  Vec v = Vec::Ones(n) / std::sqrt(static_cast<double>(n));
  double eig = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vec w = gram * v;
    const double norm = w.norm();
    if (norm < 1e-300) {
      return -std::numeric_limits<double>::infinity();
    }
    w /= norm;
    const double next = w.dot(gram * w);
    if (std::abs(next - eig) <= 1e-10 * std::max(1.0, std::abs(next))) {
      eig = next;
      break;
    }
    eig = next;
    v = w;
  }
  if (eig < 1e-300) return -std::numeric_limits<double>::infinity();
  return 0.5 * std::log(eig);
}

LyapunovProfile lyapunov_profile(const EpisodeLog& episode,
                                 const ModelParameters& p) {
  LyapunovProfile profile;
  profile.episode_id = episode.episode_id;
  if (episode.steps.size() < 2) return profile;
  const auto H = p.hidden_dim;
  for (std::size_t t = 1; t < episode.steps.size(); ++t) {
    const auto& prev = episode.steps[t - 1];
    const auto& cur = episode.steps[t];
    if (prev.h.size() != H || cur.observation.size() != p.obs_dim)
      throw CompatError(
          "lyapunov_profile: log dimensions do not match the checkpoint");
    RecurrentState state{prev.h, prev.c};
    profile.lambda.push_back(
        local_lyapunov(jacobian_state(p, state, cur.observation)));
  }
  return profile;
}

std::pair<Vec, Mat> jacobi_eigen_symmetric(const Mat& sym, double tol) {
  const Eigen::Index n = sym.rows();
  Mat a = sym;
  Mat v = Mat::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index pq = 0; pq < n; ++pq)
      for (Eigen::Index q = pq + 1; q < n; ++q) off += a(pq, q) * a(pq, q);
    if (std::sqrt(2.0 * off) <= tol) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= tol * 1e-3) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the (p,q)-plane rotation [[c, s], [-s, c]].
        for (Eigen::Index i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  // sort descending
  std::vector<Eigen::Index> idx(n);
  for (Eigen::Index i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  Vec evals(n);
  Mat evecs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    evals[i] = a(idx[i], idx[i]);
    evecs.col(i) = v.col(idx[i]);
  }
  return {evals, evecs};
}

PcaFit pca_fit(const std::vector<Vec>& points, int k) {
  if (static_cast<int>(points.size()) < k + 1)
    throw std::invalid_argument("pca_fit: need at least k+1 points");
  const Eigen::Index dim = points.front().size();
  Vec mean = Vec::Zero(dim);
  for (const auto& x : points) mean += x;
  mean /= static_cast<double>(points.size());

  Mat cov = Mat::Zero(dim, dim);
  for (const auto& x : points) {
    const Vec d = x - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  auto [evals, evecs] = jacobi_eigen_symmetric(cov);
  const double total = std::max(evals.sum(), 0.0);

  PcaFit fit;
  fit.mean = mean;
  fit.components = Mat(dim, k);
  fit.explained_ratio = Vec(k);
  for (int j = 0; j < k; ++j) {
    Vec comp = evecs.col(j);
    Eigen::Index arg = 0;
    comp.cwiseAbs().maxCoeff(&arg);
    if (comp[arg] < 0.0) comp = -comp;
    fit.components.col(j) = comp;
    fit.explained_ratio[j] =
        total > 0.0 ? std::max(evals[j], 0.0) / total : 0.0;
  }
  return fit;
}

std::vector<Vec> pca_project(const std::vector<Vec>& points,
                             const PcaFit& fit) {
  std::vector<Vec> projected;
  projected.reserve(points.size());
  for (const auto& x : points) {
    if (x.size() != fit.mean.size())
      throw std::invalid_argument("pca_project: dimension mismatch");
    projected.push_back(fit.components.transpose() * (x - fit.mean));
  }
  return projected;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::ofstream open_csv(const std::string& path,
                       const std::string& config_sha256) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "# format_version=1 config_sha256=" << config_sha256 << '\n';
  return os;
}

}  // namespace

void write_lyapunov_csv(const std::vector<EpisodeLog>& episodes,
                        const ModelParameters& p, const std::string& path,
                        const std::string& config_sha256) {
  auto os = open_csv(path, config_sha256);
  os << "episode,t,lambda,variant\n";
  for (const auto& ep : episodes) {
    const auto profile = lyapunov_profile(ep, p);
    for (std::size_t i = 0; i < profile.lambda.size(); ++i) {
      os << ep.episode_id << ',' << ep.steps[i + 1].t << ','
         << fmt(profile.lambda[i]) << ',' << ep.variant << '\n';
    }
  }
  if (!os) throw std::runtime_error("csv write failed: " + path);
}

void write_pca_csv(const std::vector<EpisodeLog>& episodes,
                   const std::string& path, const std::string& config_sha256,
                   bool use_cell) {
  std::vector<Vec> points;
  for (const auto& ep : episodes) {
    for (const auto& rec : ep.steps) {
      if (use_cell) {
        Vec hc(rec.h.size() + rec.c.size());
        hc << rec.h, rec.c;
        points.push_back(std::move(hc));
      } else {
        points.push_back(rec.h);
      }
    }
  }
  const PcaFit fit = pca_fit(points, 2);

  auto os = open_csv(path, config_sha256);
  os << "episode,t,pc1,pc2,variant,mode\n";
  std::size_t i = 0;
  for (const auto& ep : episodes) {
    for (const auto& rec : ep.steps) {
      const Vec proj = fit.components.transpose() * (points[i++] - fit.mean);
      os << ep.episode_id << ',' << rec.t << ',' << fmt(proj[0]) << ','
         << fmt(proj[1]) << ',' << ep.variant << ',' << to_string(ep.mode)
         << '\n';
    }
  }
  if (!os) throw std::runtime_error("csv write failed: " + path);
}

}  // namespace frn
