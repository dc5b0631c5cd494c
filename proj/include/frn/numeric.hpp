#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace frn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Throws std::invalid_argument if any entry of v is NaN or Inf.
void require_finite(const Vec& v, const std::string& what);
void require_finite(const Mat& m, const std::string& what);

/// Matrix-vector product with an explicit shape check.
Vec matvec(const Mat& m, const Vec& v);

double sigmoid(double x);
/// Overflow-safe ln(1 + e^x).
double softplus(double x);

Vec tanh_v(const Vec& v);
Vec sigmoid_v(const Vec& v);
Vec softplus_v(const Vec& v);

/// Counter-based generator: splitmix64 for uniforms, Box-Muller for normals.
/// Identical seed gives an identical draw sequence on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform double in (0, 1].
  double next_uniform();

  /// Standard normal via Box-Muller (two uniforms per draw, cosine branch).
  double next_normal();

  /// Independent stream keyed by (current state, label); does not advance this
  /// stream.
  RngStream derive(std::uint64_t label) const;

 private:
  std::uint64_t state_;
};

/// One draw per dimension: mean[d] + std[d] * z. Zero std returns mean exactly.
Vec sample_normal(RngStream& rng, const Vec& mean, const Vec& std);

}  // namespace frn
