#include "wglm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace mml {

namespace {

struct Evaluation {
  double objective;
  Eigen::VectorXd grad;
  Eigen::MatrixXd neg_hess;  // positive semidefinite
};

double objective_only(const WglmProblem& pr, const Eigen::VectorXd& beta) {
  const int C = pr.K - 1;
  const int m = pr.m;
  double obj = 0.0;
  std::vector<double> z(pr.K);
  for (std::size_t r = 0; r < pr.rows(); ++r) {
    double w = pr.w[r];
    if (w == 0.0) continue;
    const double* xr = &pr.x[r * m];
    z[0] = 0.0;
    double zmax = 0.0;
    for (int s = 0; s < C; ++s) {
      double dot = 0.0;
      for (int j = 0; j < m; ++j) dot += beta[s * m + j] * xr[j];
      z[s + 1] = dot;
      zmax = std::max(zmax, dot);
    }
    double denom = 0.0;
    for (int s = 0; s < pr.K; ++s) denom += std::exp(z[s] - zmax);
    obj += w * (z[pr.v[r] - 1] - zmax - std::log(denom));
  }
  return obj;
}

Evaluation evaluate(const WglmProblem& pr, const Eigen::VectorXd& beta) {
  const int C = pr.K - 1;
  const int m = pr.m;
  const int d = C * m;
  Evaluation ev{0.0, Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  std::vector<double> z(pr.K), prob(pr.K);
  for (std::size_t r = 0; r < pr.rows(); ++r) {
    double w = pr.w[r];
    if (w == 0.0) continue;
    const double* xr = &pr.x[r * m];
    z[0] = 0.0;
    double zmax = 0.0;
    for (int s = 0; s < C; ++s) {
      double dot = 0.0;
      for (int j = 0; j < m; ++j) dot += beta[s * m + j] * xr[j];
      z[s + 1] = dot;
      zmax = std::max(zmax, dot);
    }
    double denom = 0.0;
    for (int s = 0; s < pr.K; ++s) {
      prob[s] = std::exp(z[s] - zmax);
      denom += prob[s];
    }
    for (int s = 0; s < pr.K; ++s) prob[s] /= denom;
    ev.objective += w * (z[pr.v[r] - 1] - zmax - std::log(denom));

    for (int s = 0; s < C; ++s) {
      double resid = (pr.v[r] == s + 2 ? 1.0 : 0.0) - prob[s + 1];
      for (int j = 0; j < m; ++j) ev.grad[s * m + j] += w * resid * xr[j];
    }
    // neg_hess block (s,t) = w * P_s (delta_st - P_t) * x x^T
    for (int s = 0; s < C; ++s)
      for (int t = s; t < C; ++t) {
        double c = w * prob[s + 1] * ((s == t ? 1.0 : 0.0) - prob[t + 1]);
        if (c == 0.0) continue;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) {
            double val = c * xr[a] * xr[b];
            ev.neg_hess(s * m + a, t * m + b) += val;
            if (t != s) ev.neg_hess(t * m + b, s * m + a) += val;
          }
      }
  }
  return ev;
}

}  // namespace

void WglmProblem::validate() const {
  if (K < 2) throw invalid_input("WglmProblem: K must be >= 2");
  if (m < 1) throw invalid_input("WglmProblem: m must be >= 1");
  if (w.size() != rows() || x.size() != rows() * static_cast<std::size_t>(m))
    throw invalid_input("WglmProblem: array sizes inconsistent");
  for (std::size_t r = 0; r < rows(); ++r) {
    if (v[r] < 1 || v[r] > K)
      throw invalid_input("WglmProblem: outcome state out of range");
    if (!(w[r] >= 0.0) || !std::isfinite(w[r]))
      throw invalid_input("WglmProblem: weights must be finite and >= 0");
  }
}

double wglm_objective(const WglmProblem& problem,
                      std::span<const double> beta) {
  Eigen::VectorXd b =
      Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
  return objective_only(problem, b);
}

WglmResult solve_wglm(const WglmProblem& pr, const std::vector<double>* init,
                      const WglmOptions& opts) {
  pr.validate();
  const int d = (pr.K - 1) * pr.m;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  if (init) {
    if (static_cast<int>(init->size()) != d)
      throw invalid_input("solve_wglm: init has wrong length");
    beta = Eigen::Map<const Eigen::VectorXd>(init->data(), d);
  }

  WglmResult res;
  res.beta.assign(beta.data(), beta.data() + d);

  double total_w = 0.0, nonbase_w = 0.0;
  for (std::size_t r = 0; r < pr.rows(); ++r) {
    total_w += pr.w[r];
    if (pr.v[r] != 1) nonbase_w += pr.w[r];
  }
  if (total_w == 0.0 || nonbase_w == 0.0) {
    res.degenerate = true;
    res.objective = objective_only(pr, beta);
    return res;
  }

  double obj = objective_only(pr, beta);
  Eigen::VectorXd best_beta = beta;
  double best_obj = obj;

  int flat_steps = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    Evaluation ev = evaluate(pr, beta);
    obj = ev.objective;
    if (obj > best_obj) {
      best_obj = obj;
      best_beta = beta;
    }
    res.iterations = it + 1;

    const double grad_inf = ev.grad.lpNorm<Eigen::Infinity>();
    if (grad_inf < opts.grad_tol) {
      res.converged = true;
      break;
    }

    Eigen::MatrixXd M = ev.neg_hess;
    M.diagonal().array() += opts.ridge;
    Eigen::VectorXd dir = M.ldlt().solve(ev.grad);

    double step = 1.0;
    bool accepted = false;
    double new_obj = obj;
    Eigen::VectorXd cand;
    // Inside the quadratic-convergence basin the per-step objective gain is
    // below double-precision rounding noise, so the ascent test is
    // meaningless; take the pure Newton step and let the gradient check
    // terminate the loop.
    const bool near_optimum = grad_inf < 1e-6;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      cand = beta + step * dir;
      new_obj = objective_only(pr, cand);
      if (std::isfinite(new_obj) && (near_optimum || new_obj >= obj)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no ascent direction left at this scale

    beta = cand;
    if (new_obj > best_obj) {
      best_obj = new_obj;
      best_beta = beta;
    }
    if (beta.lpNorm<Eigen::Infinity>() > opts.beta_limit) {
      res.diverged = true;
      break;
    }
    if (std::abs(new_obj - obj) < opts.obj_tol) {
      // The objective is flat but the gradient may still be above tolerance
      // (Newton shrinks the objective gap quadratically faster than the
      // gradient).  Take a few more steps before giving up.
      if (++flat_steps >= 5) {
        Evaluation last = evaluate(pr, beta);
        if (last.grad.lpNorm<Eigen::Infinity>() < opts.grad_tol)
          res.converged = true;
        break;
      }
    } else {
      flat_steps = 0;
    }
    obj = new_obj;
  }

  if (!res.converged && !res.diverged) {
    // ran out of iterations or stalled: report the best point seen
    Evaluation last = evaluate(pr, best_beta);
    if (last.grad.lpNorm<Eigen::Infinity>() < opts.grad_tol)
      res.converged = true;
  }

  res.beta.assign(best_beta.data(), best_beta.data() + d);
  res.objective = best_obj;
  return res;
}

}  // namespace mml
