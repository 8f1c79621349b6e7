#include "varsel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mml {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double holdout_log_likelihood(const PanelDataset& data,
                              const ParameterSet& theta,
                              const ModelSpec& spec, int T1) {
  if (T1 < 1 || T1 + 2 > data.T)
    throw invalid_input("holdout window needs at least 2 time points");
  return observed_log_likelihood(data, theta, spec, {T1 + 1, data.T});
}

SelectionTrace forward_select(const PanelDataset& data, const ModelSpec& full,
                              int T1, const EmOptions& opts,
                              bool refit_full) {
  full.validate();
  data.validate(full.K);
  if (static_cast<int>(full.active.size()) != full.p)
    throw invalid_input("forward_select: spec must start with all p variables");
  if (T1 < 2 || T1 > data.T - 2)
    throw invalid_input("forward_select: need 2 <= T1 <= T-2");

  const TimeWindow train{1, T1};
  SelectionTrace trace;

  std::vector<int> lambda{1};
  ModelSpec spec = full;
  spec.active = lambda;
  FitResult incumbent = fit(data, spec, opts, train);
  trace.base_train_ll = incumbent.loglik;
  trace.base_holdout_ll =
      holdout_log_likelihood(data, incumbent.theta, spec, T1);
  double holdout_prev = trace.base_holdout_ll;

  while (static_cast<int>(lambda.size()) < full.p) {
    SelectionStep step;
    for (int j = 1; j <= full.p; ++j)
      if (!std::binary_search(lambda.begin(), lambda.end(), j))
        step.candidates.push_back(j);

    std::vector<FitResult> fits(step.candidates.size());
    step.train_ll.assign(step.candidates.size(), kNegInf);
    for (std::size_t c = 0; c < step.candidates.size(); ++c) {
      ModelSpec cand_spec = full;
      cand_spec.active = lambda;
      cand_spec.active.push_back(step.candidates[c]);
      std::sort(cand_spec.active.begin(), cand_spec.active.end());
      try {
        // same restart seeds for every candidate, plus a warm start from
        // the incumbent model (its inactive coefficients are zero, so it is
        // a valid point of the larger model)
        fits[c] = fit(data, cand_spec, opts, train, &incumbent.theta);
        step.train_ll[c] = fits[c].loglik;
      } catch (const fit_failure&) {
        // candidate scored -inf and recorded
      }
    }

    int best = -1;
    for (std::size_t c = 0; c < step.candidates.size(); ++c)
      if (std::isfinite(step.train_ll[c]) &&
          (best < 0 || step.train_ll[c] > step.train_ll[best]))
        best = static_cast<int>(c);
    if (best < 0) {
      // every candidate fit failed; keep the current set
      trace.steps.push_back(std::move(step));
      trace.stop_reason = StopReason::kExhaustedCandidates;
      break;
    }
    step.chosen = step.candidates[best];

    ModelSpec chosen_spec = full;
    chosen_spec.active = lambda;
    chosen_spec.active.push_back(step.chosen);
    std::sort(chosen_spec.active.begin(), chosen_spec.active.end());
    step.holdout_ll =
        holdout_log_likelihood(data, fits[best].theta, chosen_spec, T1);

    if (step.holdout_ll < holdout_prev) {
      step.accepted = false;
      trace.steps.push_back(std::move(step));
      trace.stop_reason = StopReason::kHeldOutDecrease;
      break;
    }

    step.accepted = true;
    trace.steps.push_back(step);
    lambda = chosen_spec.active;
    incumbent = std::move(fits[best]);
    holdout_prev = step.holdout_ll;
    trace.stop_reason = StopReason::kExhaustedCandidates;
  }

  trace.final_set = lambda;
  if (refit_full) {
    ModelSpec final_spec = full;
    final_spec.active = lambda;
    trace.refit =
        fit(data, final_spec, opts, {1, data.T}, &incumbent.theta);
  }
  return trace;
}

}  // namespace mml
