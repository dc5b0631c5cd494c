#pragma once

#include <string>
#include <vector>

#include "frn/srnn.hpp"
#include "frn/trajectory.hpp"

namespace frn {

/// ln of the largest singular value of J, via power iteration on J^T J
/// (tolerance 1e-10, at most 1000 iterations, all-ones start vector).
/// Returns -inf when the largest singular value underflows.
double local_lyapunov(const Mat& jacobian);

struct LyapunovProfile {
  int episode_id = 0;
  std::vector<double> lambda;  // one entry per logged transition
};

/// Recomputes the state Jacobian at every logged transition of the episode
/// and applies local_lyapunov. Profile length is episode length - 1.
LyapunovProfile lyapunov_profile(const EpisodeLog& episode,
                                 const ModelParameters& p);

struct PcaFit {
  Mat components;            // k columns, orthonormal
  Vec explained_ratio;       // length k, descending
  Vec mean;                  // training mean, used for centering
};

/// Top-k principal components of the point set via a cyclic Jacobi
/// eigensolver on the covariance (off-diagonal tolerance 1e-12). Each
/// component's largest-magnitude entry is made positive.
PcaFit pca_fit(const std::vector<Vec>& points, int k = 2);

/// Centered points projected onto the fitted components.
std::vector<Vec> pca_project(const std::vector<Vec>& points,
                             const PcaFit& fit);

/// Full symmetric eigendecomposition by cyclic Jacobi rotations; returns
/// (eigenvalues descending, eigenvectors as columns).
std::pair<Vec, Mat> jacobi_eigen_symmetric(const Mat& sym,
                                           double tol = 1e-12);

/// lyapunov.csv: episode,t,lambda,variant rows for every episode in the log.
void write_lyapunov_csv(const std::vector<EpisodeLog>& episodes,
                        const ModelParameters& p, const std::string& path,
                        const std::string& config_sha256);

/// pca.csv: episode,t,pc1,pc2,variant,mode rows. The projection plane is
/// fitted jointly on the hidden activations of all episodes (h only, or
/// h and c concatenated when use_cell is set).
void write_pca_csv(const std::vector<EpisodeLog>& episodes,
                   const std::string& path, const std::string& config_sha256,
                   bool use_cell = false);

}  // namespace frn
