#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mml {

struct invalid_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct invalid_model : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct fit_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inclusive time range [a, b]; the likelihood uses transitions t = a+1 .. b.
struct TimeWindow {
  int a = 1;
  int b = 2;
  int transitions() const { return b - a; }
};

// Model dimensions plus the active variable set Lambda (1-based, always
// containing the intercept index 1).
struct ModelSpec {
  int K = 2;  // response states
  int L = 1;  // latent groups
  int p = 1;  // explanatory variables, intercept included
  std::vector<int> active{1};

  void validate() const;
};

// Rectangular panel: states y[i][t] in 1..K and covariates x[i][t][j].
// i is 0-based, t is 1-based, covariate index j is 0-based internally
// (column 0 is the intercept).
struct PanelDataset {
  int n = 0;
  int T = 0;
  int p = 0;
  std::vector<int> y;          // n*T
  std::vector<double> x;       // n*T*p
  std::vector<std::string> ids;  // size n when loaded from file; else empty

  int state(int i, int t) const {
    return y[static_cast<std::size_t>(i) * T + t - 1];
  }
  std::span<const double> covariates(int i, int t) const {
    return {&x[(static_cast<std::size_t>(i) * T + t - 1) * p],
            static_cast<std::size_t>(p)};
  }
  void validate(int K) const;
};

// Mixing weights pi plus the coefficient tensor alpha_{u,v,l}, one length-p
// vector per (u in 1..K, v in 2..K, l in 1..L). Target state v = 1 is the
// logit baseline and has no stored vector. Entries outside the active set
// are structural zeros.
struct ParameterSet {
  int K = 2;
  int L = 1;
  int p = 1;
  std::vector<double> pi;     // L
  std::vector<double> alpha;  // L*K*(K-1)*p

  static ParameterSet zeros(const ModelSpec& spec);

  std::size_t block(int u, int v, int l) const {
    return ((static_cast<std::size_t>(l - 1) * K + (u - 1)) * (K - 1) +
            (v - 2)) * p;
  }
  double* coeff(int u, int v, int l) { return &alpha[block(u, v, l)]; }
  const double* coeff(int u, int v, int l) const {
    return &alpha[block(u, v, l)];
  }
  void validate(const ModelSpec& spec) const;
};

// log P_v for v = 1..K at covariates x, source state u, group l. Always
// finite for finite coefficients (log-sum-exp with max shift).
std::vector<double> log_transition_probs(std::span<const double> x, int u,
                                         int l, const ParameterSet& theta,
                                         const ModelSpec& spec);

std::vector<double> transition_probs(std::span<const double> x, int u, int l,
                                     const ParameterSet& theta,
                                     const ModelSpec& spec);

// log A_{i,l}: sum of log transition probabilities of the observed path of
// individual i under group l over the window's transitions.
double path_log_likelihood(int i, int l, const PanelDataset& data,
                           const ParameterSet& theta, const ModelSpec& spec,
                           TimeWindow window);

// n x L matrix of log pi_l + log A_{i,l}; the common input of the E-step and
// the observed-data log-likelihood. pi_l = 0 maps to -inf.
std::vector<double> log_weighted_paths(const PanelDataset& data,
                                       const ParameterSet& theta,
                                       const ModelSpec& spec,
                                       TimeWindow window);

// sum_i log sum_l pi_l A_{i,l}, via log-sum-exp over groups.
double observed_log_likelihood(const PanelDataset& data,
                               const ParameterSet& theta,
                               const ModelSpec& spec, TimeWindow window);

void check_window(TimeWindow window, int T);

}  // namespace mml
