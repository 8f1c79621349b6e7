#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "model.hpp"

namespace mml {

// n x L row-stochastic posterior group probabilities eta_{i,l}.
struct Responsibilities {
  int n = 0;
  int L = 0;
  std::vector<double> eta;

  double& at(int i, int l) {
    return eta[static_cast<std::size_t>(i) * L + l - 1];
  }
  double at(int i, int l) const {
    return eta[static_cast<std::size_t>(i) * L + l - 1];
  }
  void validate() const;
};

struct EmOptions {
  int max_iter = 500;
  double rel_tol = 1e-8;  // on |delta ll| / (|ll| + 1)
  int n_restarts = 10;
  std::uint64_t seed = 0;
  int threads = 0;  // <= 0: resolve from env / hardware

  void validate() const;
};

struct FitResult {
  ParameterSet theta;
  double loglik = 0.0;
  std::vector<double> trace;  // observed log-likelihood after each iteration
  int iterations = 0;
  bool converged = false;
  int restarts_used = 0;
  int degenerate_blocks = 0;  // (l,u) blocks whose coefficients were carried over
};

Responsibilities e_step(const PanelDataset& data, const ParameterSet& theta,
                        const ModelSpec& spec, TimeWindow window);

std::vector<double> update_pi(const Responsibilities& eta);

// One M-step: pi from eta, coefficient blocks from weighted multinomial fits
// per (group, source state). Blocks with zero effective weight keep the
// previous coefficients; degenerate_count, when given, receives how many.
ParameterSet m_step(const PanelDataset& data, const Responsibilities& eta,
                    const ParameterSet& theta_prev, const ModelSpec& spec,
                    TimeWindow window, int threads = 1,
                    int* degenerate_count = nullptr);

// Random-responsibility initialization: Dirichlet(1) rows followed by one
// M-step from zero coefficients. Deterministic given seed.
ParameterSet initialize(const PanelDataset& data, const ModelSpec& spec,
                        TimeWindow window, std::uint64_t seed,
                        int threads = 1);

// Full EM with multi-start; returns the restart with the best final observed
// log-likelihood. warm_start, when given, runs as an extra restart.
FitResult fit(const PanelDataset& data, const ModelSpec& spec,
              const EmOptions& opts, TimeWindow window,
              const ParameterSet* warm_start = nullptr);

}  // namespace mml
