#pragma once

#include <cstdint>
#include <vector>

#include "model.hpp"

namespace mml {

struct CovariateSpec {
  enum class Kind { kConstant, kNormal };
  Kind kind = Kind::kConstant;
  double mean = 0.0;  // normal parameters; constant uses value 1
  double sd = 1.0;
};

struct GeneratorConfig {
  std::vector<int> group_sizes;  // individuals per group; L implied
  int T = 2;
  int K = 2;
  std::vector<CovariateSpec> covariates;  // p implied; entry 0 is the constant
  ParameterSet theta;                     // pi ignored; groups have fixed sizes
  std::vector<double> initial_state;      // length K; empty = uniform
  std::uint64_t seed = 0;

  void validate() const;
  ModelSpec model_spec() const;
};

struct SimulatedPanel {
  PanelDataset data;
  std::vector<int> truth;  // group label per individual
  ParameterSet theta;
};

// Draws covariates independently per cell, the first state from the initial
// distribution, and each subsequent state from the group's transition model.
// Deterministic given config.seed (per-individual derived seed streams).
SimulatedPanel generate(const GeneratorConfig& config);

// Two groups of 50 individuals, 120 time points, 3 states, 5 covariates
// (constant, N(0,1), N(1,2), N(0,1), N(0,1)); only the first three
// coefficients are nonzero.
GeneratorConfig table1_preset();

}  // namespace mml
