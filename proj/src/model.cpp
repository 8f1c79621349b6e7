#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mml {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const double* v, int len) {
  double m = kNegInf;
  for (int i = 0; i < len; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < len; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}
}  // namespace

void ModelSpec::validate() const {
  if (K < 2) throw invalid_input("ModelSpec: K must be >= 2");
  if (L < 1) throw invalid_input("ModelSpec: L must be >= 1");
  if (p < 1) throw invalid_input("ModelSpec: p must be >= 1");
  if (active.empty() || active.front() != 1)
    throw invalid_input("ModelSpec: active set must contain index 1");
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (active[k] < 1 || active[k] > p)
      throw invalid_input("ModelSpec: active index out of range");
    if (k > 0 && active[k] <= active[k - 1])
      throw invalid_input("ModelSpec: active set must be sorted, no duplicates");
  }
}

void PanelDataset::validate(int K) const {
  if (n < 1 || T < 2 || p < 1)
    throw invalid_input("PanelDataset: need n >= 1, T >= 2, p >= 1");
  if (y.size() != static_cast<std::size_t>(n) * T ||
      x.size() != static_cast<std::size_t>(n) * T * p)
    throw invalid_input("PanelDataset: array sizes inconsistent with n, T, p");
  for (int v : y)
    if (v < 1 || v > K)
      throw invalid_input("PanelDataset: state outside 1.." + std::to_string(K));
  for (int i = 0; i < n; ++i)
    for (int t = 1; t <= T; ++t)
      if (covariates(i, t)[0] != 1.0)
        throw invalid_input("PanelDataset: intercept column must be identically 1");
}

ParameterSet ParameterSet::zeros(const ModelSpec& spec) {
  ParameterSet theta;
  theta.K = spec.K;
  theta.L = spec.L;
  theta.p = spec.p;
  theta.pi.assign(spec.L, 1.0 / spec.L);
  theta.alpha.assign(static_cast<std::size_t>(spec.L) * spec.K *
                         (spec.K - 1) * spec.p,
                     0.0);
  return theta;
}

void ParameterSet::validate(const ModelSpec& spec) const {
  if (K != spec.K || L != spec.L || p != spec.p)
    throw invalid_input("ParameterSet: dimensions do not match spec");
  if (pi.size() != static_cast<std::size_t>(L))
    throw invalid_input("ParameterSet: pi length mismatch");
  double s = 0.0;
  for (double w : pi) {
    if (w < 0.0) throw invalid_input("ParameterSet: negative mixing weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw invalid_input("ParameterSet: mixing weights must sum to 1");
  if (alpha.size() != static_cast<std::size_t>(L) * K * (K - 1) * p)
    throw invalid_input("ParameterSet: alpha size mismatch");
}

void check_window(TimeWindow window, int T) {
  if (window.a < 1 || window.b > T || window.transitions() < 1)
    throw invalid_input("time window must satisfy 1 <= a < b <= T");
}

std::vector<double> log_transition_probs(std::span<const double> x, int u,
                                         int l, const ParameterSet& theta,
                                         const ModelSpec& spec) {
  if (static_cast<int>(x.size()) != spec.p)
    throw invalid_input("covariate vector length does not match spec.p");
  if (u < 1 || u > spec.K) throw invalid_input("source state out of range");
  if (l < 1 || l > spec.L) throw invalid_input("group index out of range");

  std::vector<double> z(spec.K);
  z[0] = 0.0;  // baseline state v = 1
  for (int v = 2; v <= spec.K; ++v) {
    const double* a = theta.coeff(u, v, l);
    double dot = 0.0;
    for (int j = 0; j < spec.p; ++j) dot += a[j] * x[j];
    z[v - 1] = dot;
  }
  double lse = log_sum_exp(z.data(), spec.K);
  for (double& zi : z) zi -= lse;
  return z;
}

std::vector<double> transition_probs(std::span<const double> x, int u, int l,
                                     const ParameterSet& theta,
                                     const ModelSpec& spec) {
  std::vector<double> lp = log_transition_probs(x, u, l, theta, spec);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

double path_log_likelihood(int i, int l, const PanelDataset& data,
                           const ParameterSet& theta, const ModelSpec& spec,
                           TimeWindow window) {
  check_window(window, data.T);
  // Stack buffer for the linear predictors; K is small in practice.
  constexpr int kStackStates = 16;
  double zbuf[kStackStates];
  std::vector<double> zheap;
  double* z = zbuf;
  if (spec.K > kStackStates) {
    zheap.resize(spec.K);
    z = zheap.data();
  }

  double total = 0.0;
  for (int t = window.a + 1; t <= window.b; ++t) {
    int u = data.state(i, t - 1);
    int v = data.state(i, t);
    std::span<const double> x = data.covariates(i, t);
    z[0] = 0.0;
    for (int s = 2; s <= spec.K; ++s) {
      const double* a = theta.coeff(u, s, l);
      double dot = 0.0;
      for (int j = 0; j < spec.p; ++j) dot += a[j] * x[j];
      z[s - 1] = dot;
    }
    total += z[v - 1] - log_sum_exp(z, spec.K);
  }
  return total;
}

std::vector<double> log_weighted_paths(const PanelDataset& data,
                                       const ParameterSet& theta,
                                       const ModelSpec& spec,
                                       TimeWindow window) {
  check_window(window, data.T);
  std::vector<double> log_pi(spec.L);
  for (int l = 1; l <= spec.L; ++l)
    log_pi[l - 1] = theta.pi[l - 1] > 0.0 ? std::log(theta.pi[l - 1]) : kNegInf;

  std::vector<double> out(static_cast<std::size_t>(data.n) * spec.L);
  for (int i = 0; i < data.n; ++i)
    for (int l = 1; l <= spec.L; ++l) {
      double lw = log_pi[l - 1];
      out[static_cast<std::size_t>(i) * spec.L + l - 1] =
          std::isfinite(lw)
              ? lw + path_log_likelihood(i, l, data, theta, spec, window)
              : kNegInf;
    }
  return out;
}

double observed_log_likelihood(const PanelDataset& data,
                               const ParameterSet& theta,
                               const ModelSpec& spec, TimeWindow window) {
  std::vector<double> lw = log_weighted_paths(data, theta, spec, window);
  double total = 0.0;
  for (int i = 0; i < data.n; ++i) {
    double lse = log_sum_exp(&lw[static_cast<std::size_t>(i) * spec.L], spec.L);
    if (!std::isfinite(lse))
      throw invalid_model("all groups have zero likelihood for individual " +
                          std::to_string(i + 1));
    total += lse;
  }
  return total;
}

}  // namespace mml
