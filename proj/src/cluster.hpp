#pragma once

#include <utility>
#include <vector>

#include "em.hpp"
#include "model.hpp"

namespace mml {

struct ClusterResult {
  Responsibilities posterior;
  std::vector<int> assignment;  // 1..L per individual
};

// Posterior group membership at fitted parameters; same formula as the
// E-step.
Responsibilities posterior_membership(const PanelDataset& data,
                                      const ParameterSet& theta,
                                      const ModelSpec& spec,
                                      TimeWindow window);

// Row-wise MAP label, smallest index on ties.
std::vector<int> assign(const Responsibilities& posterior);

ClusterResult cluster(const PanelDataset& data, const ParameterSet& theta,
                      const ModelSpec& spec, TimeWindow window);

// Best label permutation against a reference labeling (exhaustive over L!;
// L > 8 rejected). Returns perm with perm[l-1] = relabeled value of l, and
// the achieved accuracy.
std::pair<std::vector<int>, double> align_labels(
    const std::vector<int>& assignment, const std::vector<int>& truth, int L);

}  // namespace mml
