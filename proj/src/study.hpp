#pragma once

#include <cstdint>
#include <vector>

#include "em.hpp"
#include "simgen.hpp"
#include "varsel.hpp"

namespace mml {

struct StudyOptions {
  int replicates = 30;
  int T1 = 80;
  std::uint64_t seed = 1;
  GeneratorConfig generator;  // default-constructed means table1 preset
  bool use_table1 = true;
  EmOptions em;
  int threads = 0;  // replicate-level parallelism
};

struct StudyResult {
  int replicates = 0;
  int exact = 0;      // selected set equals the truly active set
  int one_extra = 0;  // superset with one spurious variable
  int two_extra = 0;
  int more_extra = 0;
  int missed = 0;     // at least one true variable absent
  std::vector<std::vector<int>> selected;  // per replicate
};

// Repeats generate -> forward_select and tallies outcomes against the
// generator's truly nonzero coefficient columns.
StudyResult run_selection_study(const StudyOptions& opts);

// Covariate indices with any nonzero generating coefficient (always
// includes the intercept).
std::vector<int> true_support(const GeneratorConfig& config);

}  // namespace mml
