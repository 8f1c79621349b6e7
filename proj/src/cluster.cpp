#include "cluster.hpp"

#include <algorithm>
#include <numeric>

namespace mml {

Responsibilities posterior_membership(const PanelDataset& data,
                                      const ParameterSet& theta,
                                      const ModelSpec& spec,
                                      TimeWindow window) {
  return e_step(data, theta, spec, window);
}

std::vector<int> assign(const Responsibilities& posterior) {
  std::vector<int> labels(posterior.n);
  for (int i = 0; i < posterior.n; ++i) {
    int best = 1;
    for (int l = 2; l <= posterior.L; ++l)
      if (posterior.at(i, l) > posterior.at(i, best)) best = l;
    labels[i] = best;
  }
  return labels;
}

ClusterResult cluster(const PanelDataset& data, const ParameterSet& theta,
                      const ModelSpec& spec, TimeWindow window) {
  ClusterResult res;
  res.posterior = posterior_membership(data, theta, spec, window);
  res.assignment = assign(res.posterior);
  return res;
}

std::pair<std::vector<int>, double> align_labels(
    const std::vector<int>& assignment, const std::vector<int>& truth,
    int L) {
  if (assignment.size() != truth.size())
    throw invalid_input("align_labels: label vectors differ in length");
  if (L < 1 || L > 8)
    throw invalid_input("align_labels: L must be in 1..8");

  std::vector<int> perm(L);
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<int> best_perm = perm;
  std::size_t best_hits = 0;
  bool first = true;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (perm[assignment[i] - 1] == truth[i]) ++hits;
    if (first || hits > best_hits) {
      best_hits = hits;
      best_perm = perm;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  double acc = assignment.empty()
                   ? 1.0
                   : static_cast<double>(best_hits) / assignment.size();
  return {best_perm, acc};
}

}  // namespace mml
