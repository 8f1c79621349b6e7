#include "em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "util.hpp"
#include "wglm.hpp"

namespace mml {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double row_log_sum_exp(const double* v, int len) {
  double m = kNegInf;
  for (int i = 0; i < len; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < len; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

Responsibilities normalize_rows(const std::vector<double>& lw, int n, int L) {
  Responsibilities eta;
  eta.n = n;
  eta.L = L;
  eta.eta.resize(lw.size());
  for (int i = 0; i < n; ++i) {
    const double* row = &lw[static_cast<std::size_t>(i) * L];
    double lse = row_log_sum_exp(row, L);
    if (!std::isfinite(lse))
      throw invalid_model("all groups have zero likelihood for individual " +
                          std::to_string(i + 1));
    for (int l = 0; l < L; ++l)
      eta.eta[static_cast<std::size_t>(i) * L + l] = std::exp(row[l] - lse);
  }
  return eta;
}

double total_log_likelihood(const std::vector<double>& lw, int n, int L) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double lse = row_log_sum_exp(&lw[static_cast<std::size_t>(i) * L], L);
    if (!std::isfinite(lse))
      throw invalid_model("all groups have zero likelihood for individual " +
                          std::to_string(i + 1));
    total += lse;
  }
  return total;
}

// Transitions with a fixed source state, covariates restricted to the
// active columns. Shared across groups; only the weights differ.
struct SourceBlock {
  std::vector<int> indiv;  // individual of each row
  WglmProblem problem;     // weights filled per group
};

std::vector<SourceBlock> collect_blocks(const PanelDataset& data,
                                        const ModelSpec& spec,
                                        TimeWindow window) {
  std::vector<SourceBlock> blocks(spec.K);
  const int m = static_cast<int>(spec.active.size());
  for (auto& b : blocks) {
    b.problem.K = spec.K;
    b.problem.m = m;
  }
  for (int i = 0; i < data.n; ++i)
    for (int t = window.a + 1; t <= window.b; ++t) {
      int u = data.state(i, t - 1);
      SourceBlock& b = blocks[u - 1];
      b.indiv.push_back(i);
      b.problem.v.push_back(data.state(i, t));
      std::span<const double> x = data.covariates(i, t);
      for (int j : spec.active) b.problem.x.push_back(x[j - 1]);
    }
  for (auto& b : blocks) b.problem.w.resize(b.problem.v.size());
  return blocks;
}

}  // namespace

void Responsibilities::validate() const {
  if (eta.size() != static_cast<std::size_t>(n) * L)
    throw invalid_input("Responsibilities: size mismatch");
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int l = 1; l <= L; ++l) {
      double v = at(i, l);
      if (v < 0.0) throw invalid_input("Responsibilities: negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw invalid_input("Responsibilities: row does not sum to 1");
  }
}

void EmOptions::validate() const {
  if (max_iter < 1) throw invalid_input("EmOptions: max_iter must be >= 1");
  if (!(rel_tol > 0.0)) throw invalid_input("EmOptions: rel_tol must be > 0");
  if (n_restarts < 1)
    throw invalid_input("EmOptions: n_restarts must be >= 1");
}

Responsibilities e_step(const PanelDataset& data, const ParameterSet& theta,
                        const ModelSpec& spec, TimeWindow window) {
  std::vector<double> lw = log_weighted_paths(data, theta, spec, window);
  return normalize_rows(lw, data.n, spec.L);
}

std::vector<double> update_pi(const Responsibilities& eta) {
  std::vector<double> pi(eta.L, 0.0);
  double total = 0.0;
  for (int i = 0; i < eta.n; ++i)
    for (int l = 1; l <= eta.L; ++l) {
      pi[l - 1] += eta.at(i, l);
      total += eta.at(i, l);
    }
  for (double& v : pi) v /= total;
  return pi;
}

ParameterSet m_step(const PanelDataset& data, const Responsibilities& eta,
                    const ParameterSet& theta_prev, const ModelSpec& spec,
                    TimeWindow window, int threads, int* degenerate_count) {
  std::vector<SourceBlock> blocks = collect_blocks(data, spec, window);
  const int m = static_cast<int>(spec.active.size());
  const int C = spec.K - 1;

  ParameterSet theta = ParameterSet::zeros(spec);
  theta.pi = update_pi(eta);

  std::vector<int> degenerate(spec.L * spec.K, 0);
  auto solve_block = [&](int idx) {
    int l = idx / spec.K + 1;
    int u = idx % spec.K + 1;
    const SourceBlock& src = blocks[u - 1];

    // carry over when the state was never visited
    if (src.problem.rows() == 0) {
      degenerate[idx] = 1;
      for (int v = 2; v <= spec.K; ++v)
        std::copy_n(theta_prev.coeff(u, v, l), spec.p, theta.coeff(u, v, l));
      return;
    }

    WglmProblem pr = src.problem;
    for (std::size_t r = 0; r < pr.rows(); ++r)
      pr.w[r] = eta.at(src.indiv[r], l);

    std::vector<double> init(static_cast<std::size_t>(C) * m);
    for (int v = 2; v <= spec.K; ++v) {
      const double* a = theta_prev.coeff(u, v, l);
      for (int j = 0; j < m; ++j)
        init[static_cast<std::size_t>(v - 2) * m + j] = a[spec.active[j] - 1];
    }

    WglmResult res = solve_wglm(pr, &init);
    if (res.degenerate) {
      degenerate[idx] = 1;
      for (int v = 2; v <= spec.K; ++v)
        std::copy_n(theta_prev.coeff(u, v, l), spec.p, theta.coeff(u, v, l));
      return;
    }
    for (int v = 2; v <= spec.K; ++v) {
      double* a = theta.coeff(u, v, l);
      for (int j = 0; j < m; ++j)
        a[spec.active[j] - 1] = res.beta[static_cast<std::size_t>(v - 2) * m + j];
    }
  };
  parallel_for(spec.L * spec.K, threads, solve_block);

  if (degenerate_count) {
    *degenerate_count = 0;
    for (int d : degenerate) *degenerate_count += d;
  }
  return theta;
}

ParameterSet initialize(const PanelDataset& data, const ModelSpec& spec,
                        TimeWindow window, std::uint64_t seed, int threads) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  Responsibilities eta;
  eta.n = data.n;
  eta.L = spec.L;
  eta.eta.resize(static_cast<std::size_t>(data.n) * spec.L);
  for (int i = 0; i < data.n; ++i) {
    double s = 0.0;
    for (int l = 1; l <= spec.L; ++l) {
      double g = expo(rng);
      eta.at(i, l) = g;
      s += g;
    }
    for (int l = 1; l <= spec.L; ++l) eta.at(i, l) /= s;
  }
  ParameterSet zero = ParameterSet::zeros(spec);
  return m_step(data, eta, zero, spec, window, threads);
}

namespace {

struct EmRun {
  FitResult result;
  bool failed = false;
};

EmRun run_em(const PanelDataset& data, const ModelSpec& spec,
             const EmOptions& opts, TimeWindow window, ParameterSet theta,
             int threads) {
  EmRun run;
  FitResult& fr = run.result;
  std::vector<double> lw = log_weighted_paths(data, theta, spec, window);
  double ll_prev = total_log_likelihood(lw, data.n, spec.L);

  for (int it = 1; it <= opts.max_iter; ++it) {
    Responsibilities eta = normalize_rows(lw, data.n, spec.L);
    int degen = 0;
    theta = m_step(data, eta, theta, spec, window, threads, &degen);
    fr.degenerate_blocks += degen;
    if (it == 1 && degen == spec.L * spec.K) {
      run.failed = true;  // nothing was estimated at all
      break;
    }
    lw = log_weighted_paths(data, theta, spec, window);
    double ll = total_log_likelihood(lw, data.n, spec.L);
    fr.trace.push_back(ll);
    fr.iterations = it;
    if (std::abs(ll - ll_prev) / (std::abs(ll) + 1.0) < opts.rel_tol) {
      fr.converged = true;
      ll_prev = ll;
      break;
    }
    ll_prev = ll;
  }
  fr.theta = std::move(theta);
  fr.loglik = ll_prev;
  return run;
}

}  // namespace

FitResult fit(const PanelDataset& data, const ModelSpec& spec,
              const EmOptions& opts, TimeWindow window,
              const ParameterSet* warm_start) {
  spec.validate();
  opts.validate();
  data.validate(spec.K);
  check_window(window, data.T);
  if (warm_start) warm_start->validate(spec);

  const int n_runs = opts.n_restarts + (warm_start ? 1 : 0);
  const int total_threads = resolve_threads(opts.threads);
  const int outer = std::min(total_threads, n_runs);
  const int inner = std::max(1, total_threads / outer);

  std::vector<EmRun> runs(n_runs);
  parallel_for(n_runs, outer, [&](int r) {
    try {
      ParameterSet theta0 =
          (warm_start && r == n_runs - 1)
              ? *warm_start
              : initialize(data, spec, window, mix_seed(opts.seed, r), inner);
      runs[r] = run_em(data, spec, opts, window, std::move(theta0), inner);
    } catch (const std::exception&) {
      runs[r].failed = true;
    }
  });

  int best = -1;
  for (int r = 0; r < n_runs; ++r) {
    if (runs[r].failed) continue;
    if (best < 0 || runs[r].result.loglik > runs[best].result.loglik) best = r;
  }
  if (best < 0)
    throw fit_failure("EM failed: every restart had only degenerate blocks");

  FitResult fr = std::move(runs[best].result);
  fr.restarts_used = n_runs;
  return fr;
}

}  // namespace mml
