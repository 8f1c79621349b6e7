#pragma once

#include <optional>
#include <vector>

#include "em.hpp"
#include "model.hpp"

namespace mml {

enum class StopReason { kHeldOutDecrease, kExhaustedCandidates };

struct SelectionStep {
  std::vector<int> candidates;     // Phi, ascending
  std::vector<double> train_ll;    // training score per candidate (-inf on failure)
  int chosen = 0;                  // j*
  double holdout_ll = 0.0;         // held-out score of Lambda_{s-1} + {j*}
  bool accepted = false;           // false only on the stopping step
};

struct SelectionTrace {
  std::vector<int> final_set;
  StopReason stop_reason = StopReason::kExhaustedCandidates;
  double base_train_ll = 0.0;    // intercept-only model on the training window
  double base_holdout_ll = 0.0;
  std::vector<SelectionStep> steps;
  std::optional<FitResult> refit;  // post-selection refit on the full window
};

// Observed log-likelihood of the held-out window (T1+1)..T; the transitions
// scored are t = T1+2 .. T, disjoint from the training transitions.
double holdout_log_likelihood(const PanelDataset& data,
                              const ParameterSet& theta,
                              const ModelSpec& spec, int T1);

// Greedy forward selection: start from {1}, add the candidate with the best
// training log-likelihood, stop when the held-out score drops.
SelectionTrace forward_select(const PanelDataset& data, const ModelSpec& full,
                              int T1, const EmOptions& opts,
                              bool refit_full = false);

}  // namespace mml
