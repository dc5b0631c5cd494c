#include "frn/numeric.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace frn {

void require_finite(const Vec& v, const std::string& what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(what + " contains a non-finite entry");
  }
}

void require_finite(const Mat& m, const std::string& what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(what + " contains a non-finite entry");
  }
}

Vec matvec(const Mat& m, const Vec& v) {
  if (m.cols() != v.size()) {
    throw std::invalid_argument(
        "matvec: shape mismatch, matrix is " + std::to_string(m.rows()) + "x" +
        std::to_string(m.cols()) + " but vector has length " +
        std::to_string(v.size()));
  }
  return m * v;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Vec tanh_v(const Vec& v) { return v.array().tanh(); }

Vec sigmoid_v(const Vec& v) {
  return v.unaryExpr([](double x) { return sigmoid(x); });
}

Vec softplus_v(const Vec& v) {
  return v.unaryExpr([](double x) { return softplus(x); });
}

namespace {

std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngStream::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return splitmix64_finalize(state_);
}

double RngStream::next_uniform() {
  // 53-bit mantissa, shifted into (0, 1] so log() below is always finite.
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::next_normal() {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::derive(std::uint64_t label) const {
  return RngStream(
      splitmix64_finalize(state_ + 0x9e3779b97f4a7c15ULL * (label + 1)));
}

Vec sample_normal(RngStream& rng, const Vec& mean, const Vec& std) {
  if (mean.size() != std.size()) {
    throw std::invalid_argument("sample_normal: mean/std length mismatch");
  }
  if ((std.array() < 0.0).any()) {
    throw std::invalid_argument("sample_normal: negative std entry");
  }
  Vec out(mean.size());
  for (Eigen::Index d = 0; d < mean.size(); ++d) {
    out[d] = mean[d] + std[d] * rng.next_normal();
  }
  return out;
}

}  // namespace frn
