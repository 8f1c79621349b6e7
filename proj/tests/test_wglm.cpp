#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wglm.hpp"

using namespace mml;

namespace {

WglmProblem intercept_only(int K, const std::vector<double>& counts) {
  WglmProblem pr;
  pr.K = K;
  pr.m = 1;
  for (int v = 1; v <= K; ++v) {
    pr.x.push_back(1.0);
    pr.v.push_back(v);
    pr.w.push_back(counts[v - 1]);
  }
  return pr;
}

WglmProblem random_problem(std::mt19937_64& rng, int K, int m, int rows,
                           bool random_weights) {
  std::normal_distribution<double> norm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  WglmProblem pr;
  pr.K = K;
  pr.m = m;
  for (int r = 0; r < rows; ++r) {
    pr.x.push_back(1.0);
    for (int j = 1; j < m; ++j) pr.x.push_back(norm(rng));
    pr.v.push_back(1 + static_cast<int>(unif(rng) * K) % K);
    pr.w.push_back(random_weights ? unif(rng) : 1.0);
  }
  return pr;
}

}  // namespace

TEST_CASE("solve_wglm: symmetric binary counts give zero coefficient") {
  WglmProblem pr = intercept_only(2, {7.0, 7.0});
  WglmResult res = solve_wglm(pr);
  CHECK(res.converged);
  CHECK(res.beta[0] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("solve_wglm: intercept-only closed form beta_v = ln(w_v/w_1)") {
  WglmProblem pr = intercept_only(3, {4.0, 2.0, 1.0});
  WglmResult res = solve_wglm(pr);
  CHECK(res.converged);
  CHECK(res.beta[0] == doctest::Approx(std::log(2.0 / 4.0)).epsilon(1e-8));
  CHECK(res.beta[1] == doctest::Approx(std::log(1.0 / 4.0)).epsilon(1e-8));
}

TEST_CASE("solve_wglm: matches the derivative-free optimizer oracle") {
  std::mt19937_64 rng(101);
  WglmProblem pr = random_problem(rng, 3, 2, 60, true);
  WglmResult res = solve_wglm(pr);
  CHECK(res.converged);

  auto obj = [&](const std::vector<double>& b) { return wglm_objective(pr, b); };
  std::vector<double> nm =
      oracle::nelder_mead_maximize(obj, std::vector<double>(4, 0.0));
  CHECK(res.objective == doctest::Approx(obj(nm)).epsilon(1e-6));
  CHECK(res.objective >= obj(nm) - 1e-6);
}

TEST_CASE("solve_wglm: weight scaling leaves the argmax unchanged") {
  std::mt19937_64 rng(103);
  WglmProblem pr = random_problem(rng, 3, 3, 80, true);
  WglmResult a = solve_wglm(pr);
  WglmProblem scaled = pr;
  for (double& w : scaled.w) w *= 10.0;
  WglmResult b = solve_wglm(scaled);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  for (std::size_t j = 0; j < a.beta.size(); ++j)
    CHECK(a.beta[j] == doctest::Approx(b.beta[j]).epsilon(1e-8));
}

TEST_CASE("solve_wglm: zero-weight rows are no-ops") {
  std::mt19937_64 rng(107);
  WglmProblem pr = random_problem(rng, 2, 2, 40, true);
  for (int r = 0; r < 40; r += 3) pr.w[r] = 0.0;
  WglmResult with_rows = solve_wglm(pr);

  WglmProblem pruned;
  pruned.K = pr.K;
  pruned.m = pr.m;
  for (std::size_t r = 0; r < pr.rows(); ++r) {
    if (pr.w[r] == 0.0) continue;
    pruned.v.push_back(pr.v[r]);
    pruned.w.push_back(pr.w[r]);
    for (int j = 0; j < pr.m; ++j) pruned.x.push_back(pr.x[r * pr.m + j]);
  }
  WglmResult without_rows = solve_wglm(pruned);
  for (std::size_t j = 0; j < with_rows.beta.size(); ++j)
    CHECK(with_rows.beta[j] ==
          doctest::Approx(without_rows.beta[j]).epsilon(1e-12));
}

TEST_CASE("solve_wglm: finite-difference gradient vanishes at converged points") {
  std::mt19937_64 rng(109);
  for (int rep = 0; rep < 8; ++rep) {
    WglmProblem pr = random_problem(rng, 2 + rep % 2, 2, 50, rep % 2 == 0);
    WglmResult res = solve_wglm(pr);
    REQUIRE(res.converged);
    auto obj = [&](const std::vector<double>& b) {
      return wglm_objective(pr, b);
    };
    std::vector<double> g = oracle::fd_gradient(obj, res.beta);
    for (double gj : g) CHECK(std::abs(gj) < 1e-6);
  }
}

TEST_CASE("solve_wglm: objective never drops below the warm start") {
  std::mt19937_64 rng(113);
  WglmProblem pr = random_problem(rng, 3, 2, 30, true);
  std::vector<double> init{0.4, -0.2, 0.1, 0.9};
  WglmResult res = solve_wglm(pr, &init);
  CHECK(res.objective >= wglm_objective(pr, init) - 1e-12);
}

TEST_CASE("solve_wglm: degenerate problems return init unchanged") {
  WglmProblem pr = intercept_only(2, {3.0, 0.0});  // only baseline has weight
  std::vector<double> init{0.77};
  WglmResult res = solve_wglm(pr, &init);
  CHECK(res.degenerate);
  CHECK_FALSE(res.converged);
  CHECK(res.beta[0] == 0.77);

  WglmProblem all_zero = intercept_only(2, {0.0, 0.0});
  WglmResult res2 = solve_wglm(all_zero);
  CHECK(res2.degenerate);
}

TEST_CASE("solve_wglm: perfectly separated data flags divergence") {
  WglmProblem pr;
  pr.K = 2;
  pr.m = 2;
  // separated classes on a tiny covariate scale, so the maximizer lies far
  // beyond the coefficient-norm threshold
  for (int r = 0; r < 20; ++r) {
    double z = (r < 10 ? -1.0 - 0.1 * r : 1.0 + 0.1 * (r - 10)) * 1e-4;
    pr.x.push_back(1.0);
    pr.x.push_back(z);
    pr.v.push_back(z < 0 ? 1 : 2);
    pr.w.push_back(1.0);
  }
  WglmResult res = solve_wglm(pr);
  CHECK(res.diverged);
  CHECK_FALSE(res.converged);
  CHECK(std::isfinite(res.objective));
}

TEST_CASE("solve_wglm: input validation") {
  WglmProblem pr = intercept_only(2, {1.0, 1.0});
  pr.w[0] = -0.5;
  CHECK_THROWS_AS(solve_wglm(pr), invalid_input);
  pr.w[0] = 1.0;
  pr.v[0] = 3;
  CHECK_THROWS_AS(solve_wglm(pr), invalid_input);
  pr.v[0] = 1;
  std::vector<double> bad_init{1.0, 2.0};
  CHECK_THROWS_AS(solve_wglm(pr, &bad_init), invalid_input);
}
