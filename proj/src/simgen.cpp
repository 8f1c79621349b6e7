#include "simgen.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "util.hpp"

namespace mml {

void GeneratorConfig::validate() const {
  if (group_sizes.empty())
    throw invalid_input("GeneratorConfig: need at least one group");
  for (int g : group_sizes)
    if (g < 1) throw invalid_input("GeneratorConfig: group sizes must be >= 1");
  if (T < 2) throw invalid_input("GeneratorConfig: T must be >= 2");
  if (K < 2) throw invalid_input("GeneratorConfig: K must be >= 2");
  if (covariates.empty() ||
      covariates.front().kind != CovariateSpec::Kind::kConstant)
    throw invalid_input("GeneratorConfig: covariate 1 must be the constant");
  const int L = static_cast<int>(group_sizes.size());
  const int p = static_cast<int>(covariates.size());
  if (theta.K != K || theta.L != L || theta.p != p)
    throw invalid_input("GeneratorConfig: alpha tensor dimensions mismatch");
  if (!initial_state.empty()) {
    if (static_cast<int>(initial_state.size()) != K)
      throw invalid_input("GeneratorConfig: initial state distribution length");
    double s = std::accumulate(initial_state.begin(), initial_state.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-9)
      throw invalid_input("GeneratorConfig: initial state probs must sum to 1");
  }
}

ModelSpec GeneratorConfig::model_spec() const {
  ModelSpec spec;
  spec.K = K;
  spec.L = static_cast<int>(group_sizes.size());
  spec.p = static_cast<int>(covariates.size());
  spec.active.resize(spec.p);
  std::iota(spec.active.begin(), spec.active.end(), 1);
  return spec;
}

SimulatedPanel generate(const GeneratorConfig& config) {
  config.validate();
  const ModelSpec spec = config.model_spec();
  const int p = spec.p;

  SimulatedPanel out;
  out.theta = config.theta;
  out.theta.pi.assign(spec.L, 0.0);
  int n = 0;
  for (int g : config.group_sizes) n += g;
  for (int l = 0; l < spec.L; ++l)
    out.theta.pi[l] = static_cast<double>(config.group_sizes[l]) / n;

  out.data.n = n;
  out.data.T = config.T;
  out.data.p = p;
  out.data.y.resize(static_cast<std::size_t>(n) * config.T);
  out.data.x.resize(static_cast<std::size_t>(n) * config.T * p);
  out.truth.resize(n);

  int i = 0;
  for (int l = 1; l <= spec.L; ++l)
    for (int c = 0; c < config.group_sizes[l - 1]; ++c) out.truth[i++] = l;

  std::vector<double> init_probs = config.initial_state;
  if (init_probs.empty())
    init_probs.assign(config.K, 1.0 / config.K);

  for (i = 0; i < n; ++i) {
    std::mt19937_64 rng(mix_seed(config.seed, i));
    std::normal_distribution<double> stdnorm(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int group = out.truth[i];

    for (int t = 1; t <= config.T; ++t) {
      double* xt = &out.data.x[(static_cast<std::size_t>(i) * config.T + t - 1) * p];
      xt[0] = 1.0;
      for (int j = 1; j < p; ++j) {
        const CovariateSpec& cs = config.covariates[j];
        xt[j] = cs.kind == CovariateSpec::Kind::kConstant
                    ? 1.0
                    : cs.mean + cs.sd * stdnorm(rng);
      }
    }

    auto draw = [&](const std::vector<double>& probs) {
      double u = unif(rng);
      double acc = 0.0;
      for (int s = 0; s < config.K; ++s) {
        acc += probs[s];
        if (u < acc) return s + 1;
      }
      return config.K;
    };

    out.data.y[static_cast<std::size_t>(i) * config.T] = draw(init_probs);
    for (int t = 2; t <= config.T; ++t) {
      int u_state = out.data.y[static_cast<std::size_t>(i) * config.T + t - 2];
      std::vector<double> probs = transition_probs(
          out.data.covariates(i, t), u_state, group, out.theta, spec);
      out.data.y[static_cast<std::size_t>(i) * config.T + t - 1] = draw(probs);
    }
  }
  return out;
}

GeneratorConfig table1_preset() {
  GeneratorConfig cfg;
  cfg.group_sizes = {50, 50};
  cfg.T = 120;
  cfg.K = 3;
  cfg.covariates = {
      {CovariateSpec::Kind::kConstant, 0.0, 0.0},
      {CovariateSpec::Kind::kNormal, 0.0, 1.0},
      {CovariateSpec::Kind::kNormal, 1.0, 2.0},
      {CovariateSpec::Kind::kNormal, 0.0, 1.0},
      {CovariateSpec::Kind::kNormal, 0.0, 1.0},
  };

  ModelSpec spec = cfg.model_spec();
  cfg.theta = ParameterSet::zeros(spec);

  auto set = [&](int u, int v, int l, std::initializer_list<double> vals) {
    double* a = cfg.theta.coeff(u, v, l);
    int j = 0;
    for (double val : vals) a[j++] = val;
  };
  set(1, 2, 1, {0.2, 0.2, 1.0, 0.0, 0.0});
  set(1, 3, 1, {0.4, 0.4, 0.8, 0.0, 0.0});
  set(2, 2, 1, {0.1, -0.2, 1.3, 0.0, 0.0});
  set(2, 3, 1, {0.2, 0.5, 0.5, 0.0, 0.0});
  set(3, 2, 1, {0.2, 0.9, -0.3, 0.0, 0.0});
  set(3, 3, 1, {0.5, -0.1, 0.3, 0.0, 0.0});
  set(1, 2, 2, {0.2, 0.2, 1.3, 0.0, 0.0});
  set(1, 3, 2, {0.4, 0.3, 0.8, 0.0, 0.0});
  set(2, 2, 2, {0.3, 0.2, 1.3, 0.0, 0.0});
  set(2, 3, 2, {0.2, -0.5, 0.8, 0.0, 0.0});
  set(3, 2, 2, {0.1, -0.5, -0.3, 0.0, 0.0});
  set(3, 3, 2, {0.5, 0.1, 0.2, 0.0, 0.0});
  return cfg;
}

}  // namespace mml
