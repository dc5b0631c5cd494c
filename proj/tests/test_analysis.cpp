#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "frn/analysis.hpp"
#include "frn/errors.hpp"
#include "frn/runner.hpp"

using namespace frn;

namespace {

std::vector<Vec> random_points(int n, int dim, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) {
    Vec v(dim);
    for (int d = 0; d < dim; ++d) v[d] = rng.next_normal();
    pts.push_back(v);
  }
  return pts;
}

}  // namespace

TEST_CASE("local_lyapunov on scaled identities") {
  for (double c : {0.5, 1.0, 2.0, 3.0}) {
    const Mat j = c * Mat::Identity(4, 4);
    CHECK(std::abs(local_lyapunov(j) - std::log(c)) < 1e-8);
  }
}

TEST_CASE("local_lyapunov picks the dominant axis") {
  Mat j = Mat::Zero(2, 2);
  j(0, 0) = 3.0;
  j(1, 1) = 0.1;
  CHECK(local_lyapunov(j) == doctest::Approx(std::log(3.0)).epsilon(1e-10));
}

TEST_CASE("local_lyapunov underflow sentinel") {
  CHECK(std::isinf(local_lyapunov(Mat::Zero(3, 3))));
  CHECK(local_lyapunov(Mat::Zero(3, 3)) < 0.0);
}

TEST_CASE("local_lyapunov matches the largest singular value on random "
          "matrices") {
  RngStream rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Mat j(5, 5);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) j(r, c) = rng.next_normal();
    const double expected =
        std::log(j.jacobiSvd().singularValues().maxCoeff());
    CHECK(local_lyapunov(j) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("perturbation growth never exceeds the local exponent") {
  RngStream rng(5);
  int trials = 0;
  while (trials < 100) {
    auto p = init_params(3, 4, rng);
    RecurrentState state{Vec::Zero(4), Vec::Zero(4)};
    for (int k = 0; k < 4; ++k) {
      state.h[k] = 0.3 * rng.next_normal();
      state.c[k] = 0.3 * rng.next_normal();
    }
    Vec input(3);
    for (int d = 0; d < 3; ++d) input[d] = 0.5 * rng.next_normal();

    const double lambda =
        local_lyapunov(jacobian_state(p, state, input));
    Vec delta(8);
    for (int k = 0; k < 8; ++k) delta[k] = rng.next_normal();
    delta *= 1e-6 / delta.norm();

    RecurrentState perturbed{state.h + delta.head(4), state.c + delta.tail(4)};
    auto base = cell_forward(p, state, input);
    auto moved = cell_forward(p, perturbed, input);
    Vec dprime(8);
    dprime << moved.state.h - base.state.h, moved.state.c - base.state.c;
    CHECK(std::log(dprime.norm() / delta.norm()) <= lambda + 1e-3);
    ++trials;
  }
}

TEST_CASE("lyapunov_profile has one exponent per transition") {
  RngStream rng(6);
  auto p = init_params(kObsDim, 6, rng);
  auto log = run_episode(p, DoorMode::kPush, Variant::kConventional,
                         ForesightConfig{}, EnvConfig{}, RngStream(1), 0);
  REQUIRE(log.steps.size() >= 2);
  auto profile = lyapunov_profile(log, p);
  CHECK(profile.lambda.size() == log.steps.size() - 1);
  for (double l : profile.lambda) CHECK(std::isfinite(l));

  auto wrong = init_params(kObsDim, 9, rng);
  CHECK_THROWS_AS(lyapunov_profile(log, wrong), frn::CompatError);
}

TEST_CASE("pca on collinear data is rank one") {
  std::vector<Vec> pts;
  Vec dir(3);
  dir << 1.0, -2.0, 0.5;
  for (int i = 0; i < 8; ++i) pts.push_back(i * dir);
  auto fit = pca_fit(pts, 2);
  CHECK(std::abs(fit.explained_ratio[0] - 1.0) < 1e-10);
  CHECK(std::abs(fit.explained_ratio[1]) < 1e-10);
}

TEST_CASE("pca components are orthonormal with descending ratios") {
  auto pts = random_points(20, 8, 7);
  auto fit = pca_fit(pts, 2);
  const Mat gram = fit.components.transpose() * fit.components;
  CHECK((gram - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fit.explained_ratio[0] >= fit.explained_ratio[1]);
  CHECK(fit.explained_ratio.sum() <= 1.0 + 1e-10);
}

TEST_CASE("jacobi eigenvalues match Eigen's solver") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto pts = random_points(20, 8, 100 + seed);
    Vec mean = Vec::Zero(8);
    for (const auto& x : pts) mean += x;
    mean /= pts.size();
    Mat cov = Mat::Zero(8, 8);
    for (const auto& x : pts) cov += (x - mean) * (x - mean).transpose();
    cov /= pts.size();

    auto [evals, evecs] = jacobi_eigen_symmetric(cov);
    Eigen::SelfAdjointEigenSolver<Mat> oracle(cov);
    Vec expected = oracle.eigenvalues().reverse();
    for (int k = 0; k < 8; ++k) {
      CHECK(std::abs(evals[k] - expected[k]) < 1e-8);
    }
  }
}

TEST_CASE("pca projection geometry") {
  auto pts = random_points(30, 5, 9);
  auto fit = pca_fit(pts, 2);

  // the mean projects to the origin
  const Vec origin = pca_project({fit.mean}, fit)[0];
  CHECK(origin.cwiseAbs().maxCoeff() < 1e-12);

  // points lying in the component plane keep their pairwise distances
  std::vector<Vec> planar;
  RngStream rng(10);
  for (int i = 0; i < 6; ++i) {
    planar.push_back(fit.mean + rng.next_normal() * fit.components.col(0) +
                     rng.next_normal() * fit.components.col(1));
  }
  auto proj = pca_project(planar, fit);
  for (int a = 0; a < 6; ++a) {
    for (int b = a + 1; b < 6; ++b) {
      CHECK(std::abs((planar[a] - planar[b]).norm() -
                     (proj[a] - proj[b]).norm()) < 1e-8);
    }
  }

  CHECK_THROWS_AS(pca_project({Vec::Zero(3)}, fit), std::invalid_argument);
}

TEST_CASE("reconstruction error obeys the top-2 eigenvalue bound") {
  auto pts = random_points(25, 6, 11);
  auto fit = pca_fit(pts, 2);

  Vec mean = Vec::Zero(6);
  for (const auto& x : pts) mean += x;
  mean /= pts.size();
  Mat cov = Mat::Zero(6, 6);
  for (const auto& x : pts) cov += (x - mean) * (x - mean).transpose();
  cov /= pts.size();
  Eigen::SelfAdjointEigenSolver<Mat> oracle(cov);
  const Vec evals = oracle.eigenvalues().reverse();
  const double residual = evals.tail(4).sum();

  double mse = 0.0;
  auto proj = pca_project(pts, fit);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec rec = fit.mean + fit.components * proj[i];
    mse += (pts[i] - rec).squaredNorm();
  }
  mse /= pts.size();
  CHECK(std::abs(mse - residual) < 1e-8);
}
