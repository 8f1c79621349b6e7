#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "simgen.hpp"
#include "varsel.hpp"

using namespace mml;

namespace {

// one true covariate (index 2) plus zero-coefficient noise covariates
GeneratorConfig sparse_config(int n, int T, int p, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.group_sizes = {n};
  cfg.T = T;
  cfg.K = 2;
  cfg.covariates.push_back({CovariateSpec::Kind::kConstant, 0, 0});
  for (int j = 1; j < p; ++j)
    cfg.covariates.push_back({CovariateSpec::Kind::kNormal, 0, 1});
  cfg.theta = ParameterSet::zeros(cfg.model_spec());
  cfg.theta.coeff(1, 2, 1)[0] = 0.3;
  cfg.theta.coeff(1, 2, 1)[1] = 1.2;
  cfg.theta.coeff(2, 2, 1)[0] = -0.4;
  cfg.theta.coeff(2, 2, 1)[1] = -0.9;
  cfg.seed = seed;
  return cfg;
}

EmOptions quick_opts(std::uint64_t seed) {
  EmOptions opts;
  opts.n_restarts = 1;
  opts.seed = seed;
  opts.threads = 2;
  return opts;
}

}  // namespace

TEST_CASE("holdout_log_likelihood: boundary window scores one transition each") {
  std::mt19937_64 rng(3);
  auto inst = oracle::random_instance(rng, 4, 6, 2, 2, 2);
  int T1 = 4;  // T - 2: held-out transitions are t = 6 only
  double hold = holdout_log_likelihood(inst.data, inst.theta, inst.spec, T1);
  double expect = observed_log_likelihood(inst.data, inst.theta, inst.spec, {5, 6});
  CHECK(hold == expect);

  // purity
  CHECK(holdout_log_likelihood(inst.data, inst.theta, inst.spec, T1) == hold);

  // enumeration oracle on the held-out window
  double ref = oracle::enumeration_mixture_loglik(inst.data, inst.theta,
                                                  inst.spec, {5, 6});
  CHECK(hold == doctest::Approx(ref).epsilon(1e-10));

  CHECK_THROWS_AS(holdout_log_likelihood(inst.data, inst.theta, inst.spec, 5),
                  invalid_input);
}

TEST_CASE("forward_select: input validation") {
  std::mt19937_64 rng(5);
  auto inst = oracle::random_instance(rng, 5, 6, 2, 1, 2);
  EmOptions opts = quick_opts(1);
  CHECK_THROWS_AS(forward_select(inst.data, inst.spec, 1, opts), invalid_input);
  CHECK_THROWS_AS(forward_select(inst.data, inst.spec, 5, opts), invalid_input);
  CHECK_THROWS_AS(forward_select(inst.data, inst.spec, 6, opts), invalid_input);

  ModelSpec partial = inst.spec;
  partial.active = {1};
  CHECK_THROWS_AS(forward_select(inst.data, partial, 3, opts), invalid_input);
}

TEST_CASE("forward_select: intercept-only model has no candidates") {
  std::mt19937_64 rng(7);
  auto inst = oracle::random_instance(rng, 6, 8, 2, 1, 1);
  SelectionTrace trace = forward_select(inst.data, inst.spec, 4, quick_opts(1));
  CHECK(trace.final_set == std::vector<int>{1});
  CHECK(trace.stop_reason == StopReason::kExhaustedCandidates);
  CHECK(trace.steps.empty());
}

TEST_CASE("forward_select: picks the truly active variable") {
  int hits = 0;
  for (int rep = 0; rep < 5; ++rep) {
    GeneratorConfig cfg = sparse_config(100, 60, 3, 1000 + rep);
    SimulatedPanel sim = generate(cfg);
    SelectionTrace trace =
        forward_select(sim.data, cfg.model_spec(), 40, quick_opts(rep));
    REQUIRE(!trace.final_set.empty());
    CHECK(trace.final_set.front() == 1);
    for (int j : trace.final_set) {
      CHECK(j >= 1);
      CHECK(j <= 3);
    }
    if (trace.final_set == std::vector<int>{1, 2}) ++hits;
  }
  CHECK(hits >= 3);  // majority of replicates
}

TEST_CASE("forward_select: trace is deterministic and internally consistent") {
  GeneratorConfig cfg = sparse_config(40, 30, 3, 77);
  SimulatedPanel sim = generate(cfg);
  EmOptions opts = quick_opts(5);
  SelectionTrace a = forward_select(sim.data, cfg.model_spec(), 20, opts);
  SelectionTrace b = forward_select(sim.data, cfg.model_spec(), 20, opts);

  CHECK(a.final_set == b.final_set);
  CHECK(a.base_train_ll == b.base_train_ll);
  CHECK(a.base_holdout_ll == b.base_holdout_ll);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t s = 0; s < a.steps.size(); ++s) {
    CHECK(a.steps[s].chosen == b.steps[s].chosen);
    CHECK(a.steps[s].train_ll == b.steps[s].train_ll);
    CHECK(a.steps[s].holdout_ll == b.steps[s].holdout_ll);
  }

  for (const SelectionStep& step : a.steps) {
    // chosen candidate attains the max score, smallest index on ties
    double best = *std::max_element(step.train_ll.begin(), step.train_ll.end());
    std::size_t c = 0;
    while (step.train_ll[c] != best) ++c;
    CHECK(step.chosen == step.candidates[c]);
  }
  // only the final step may be a rejection
  for (std::size_t s = 0; s + 1 < a.steps.size(); ++s)
    CHECK(a.steps[s].accepted);
  if (a.stop_reason == StopReason::kHeldOutDecrease)
    CHECK_FALSE(a.steps.back().accepted);
}

TEST_CASE("forward_select: training score non-decreasing over accepted steps") {
  GeneratorConfig cfg = sparse_config(60, 40, 4, 123);
  SimulatedPanel sim = generate(cfg);
  EmOptions opts = quick_opts(9);
  SelectionTrace trace = forward_select(sim.data, cfg.model_spec(), 25, opts);

  double prev = trace.base_train_ll;
  for (const SelectionStep& step : trace.steps) {
    if (!step.accepted) break;
    double chosen_score = -1e300;
    for (std::size_t c = 0; c < step.candidates.size(); ++c)
      if (step.candidates[c] == step.chosen) chosen_score = step.train_ll[c];
    CHECK(chosen_score >= prev - 1e-6);
    prev = chosen_score;
  }
}

TEST_CASE("forward_select: exhausting every candidate returns the full set") {
  // strong signal on both extra covariates so nothing gets rejected
  GeneratorConfig cfg;
  cfg.group_sizes = {80};
  cfg.T = 40;
  cfg.K = 2;
  cfg.covariates = {{CovariateSpec::Kind::kConstant, 0, 0},
                    {CovariateSpec::Kind::kNormal, 0, 1},
                    {CovariateSpec::Kind::kNormal, 0, 1}};
  cfg.theta = ParameterSet::zeros(cfg.model_spec());
  for (int u = 1; u <= 2; ++u) {
    cfg.theta.coeff(u, 2, 1)[1] = 1.0;
    cfg.theta.coeff(u, 2, 1)[2] = -1.0;
  }
  cfg.seed = 3;
  SimulatedPanel sim = generate(cfg);
  SelectionTrace trace =
      forward_select(sim.data, cfg.model_spec(), 25, quick_opts(2));
  CHECK(trace.final_set == std::vector<int>{1, 2, 3});
  CHECK(trace.stop_reason == StopReason::kExhaustedCandidates);
}

TEST_CASE("forward_select: optional refit on the full window") {
  GeneratorConfig cfg = sparse_config(30, 20, 2, 9);
  SimulatedPanel sim = generate(cfg);
  EmOptions opts = quick_opts(4);
  SelectionTrace no_refit = forward_select(sim.data, cfg.model_spec(), 12, opts);
  CHECK_FALSE(no_refit.refit.has_value());

  SelectionTrace with_refit =
      forward_select(sim.data, cfg.model_spec(), 12, opts, true);
  REQUIRE(with_refit.refit.has_value());
  CHECK(with_refit.refit->trace.size() ==
        static_cast<std::size_t>(with_refit.refit->iterations));
}
