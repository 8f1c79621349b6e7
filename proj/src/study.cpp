#include "study.hpp"

#include <algorithm>

#include "util.hpp"

namespace mml {

std::vector<int> true_support(const GeneratorConfig& config) {
  std::vector<int> support{1};
  for (int j = 2; j <= config.theta.p; ++j) {
    bool nonzero = false;
    for (int l = 1; l <= config.theta.L && !nonzero; ++l)
      for (int u = 1; u <= config.theta.K && !nonzero; ++u)
        for (int v = 2; v <= config.theta.K && !nonzero; ++v)
          if (config.theta.coeff(u, v, l)[j - 1] != 0.0) nonzero = true;
    if (nonzero) support.push_back(j);
  }
  return support;
}

StudyResult run_selection_study(const StudyOptions& opts) {
  GeneratorConfig base = opts.use_table1 ? table1_preset() : opts.generator;
  const std::vector<int> truth = true_support(base);

  StudyResult result;
  result.replicates = opts.replicates;
  result.selected.resize(opts.replicates);

  const int total_threads = resolve_threads(opts.threads);
  const int outer = std::min(total_threads, std::max(1, opts.replicates));
  const int inner = std::max(1, total_threads / std::max(1, outer));

  parallel_for(opts.replicates, outer, [&](int r) {
    GeneratorConfig cfg = base;
    cfg.seed = mix_seed(opts.seed, r);
    SimulatedPanel sim = generate(cfg);

    EmOptions em = opts.em;
    em.seed = mix_seed(opts.seed, 1000 + r);
    em.threads = inner;

    ModelSpec full = cfg.model_spec();
    SelectionTrace trace = forward_select(sim.data, full, opts.T1, em);
    result.selected[r] = trace.final_set;
  });

  for (const std::vector<int>& sel : result.selected) {
    bool covers = std::includes(sel.begin(), sel.end(), truth.begin(),
                                truth.end());
    if (!covers) {
      ++result.missed;
      continue;
    }
    const int extra = static_cast<int>(sel.size() - truth.size());
    if (extra == 0)
      ++result.exact;
    else if (extra == 1)
      ++result.one_extra;
    else if (extra == 2)
      ++result.two_extra;
    else
      ++result.more_extra;
  }
  return result;
}

}  // namespace mml
