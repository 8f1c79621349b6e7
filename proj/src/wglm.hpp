#pragma once

#include <span>
#include <vector>

#include "model.hpp"

namespace mml {

// Weighted multinomial logit problem: rows (x, v, w) with x of length m,
// outcome v in 1..K (state 1 is the baseline), weight w >= 0.
struct WglmProblem {
  int K = 2;
  int m = 1;
  std::vector<double> x;  // rows * m, row-major
  std::vector<int> v;
  std::vector<double> w;

  std::size_t rows() const { return v.size(); }
  void validate() const;
};

struct WglmOptions {
  int max_iter = 200;
  double grad_tol = 1e-10;    // gradient inf-norm
  double obj_tol = 1e-12;     // absolute objective change
  double ridge = 1e-8;        // added to the Newton system before factorizing
  int max_halvings = 30;
  double beta_limit = 1e4;    // inf-norm beyond which we flag quasi-separation
};

struct WglmResult {
  std::vector<double> beta;  // (K-1)*m; beta[(v-2)*m + j]
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;    // quasi-separation: coefficients ran away
  bool degenerate = false;  // no effective sample; init returned unchanged
};

// Weighted log-likelihood sum_rows w * log P_v(x; beta), the objective
// solve_wglm maximizes.
double wglm_objective(const WglmProblem& problem, std::span<const double> beta);

// Damped Newton ascent with ridge regularization and step halving.
// init, when given, must have length (K-1)*m; otherwise starts at zero.
WglmResult solve_wglm(const WglmProblem& problem,
                      const std::vector<double>* init = nullptr,
                      const WglmOptions& opts = {});

}  // namespace mml
