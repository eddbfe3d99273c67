#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

// Unconstrained minimization: limited-memory BFGS with a strong-Wolfe line
// search (two-stage bracket/zoom), plus a plain steepest-descent mode using
// the same line search. The line search only ever accepts points with
// sufficient decrease, so accepted iterates are monotone in f.

namespace aqsim {

using ObjectiveFn =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

enum class MinimizeStatus {
  TargetReached,
  GradientConverged,
  Stalled,
  MaxIterations,
  LineSearchFailed,
};

struct MinimizeOptions {
  int max_iters = 5000;
  int memory = 10;
  double grad_tol = 1e-10;
  double target_f = -std::numeric_limits<double>::infinity();
  int stall_window = 50;
  double stall_rel_improvement = 1e-10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int line_search_max_evals = 40;
  bool steepest_descent = false;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  long function_evals = 0;
  MinimizeStatus status = MinimizeStatus::MaxIterations;
};

namespace detail {

struct LineSearchEval {
  double alpha;
  double f;
  double slope;  // directional derivative at alpha
};

// cubic interpolation minimizer for the zoom stage; falls back to bisection
inline double interpolate_step(const LineSearchEval& lo,
                               const LineSearchEval& hi) {
  const double d1 =
      lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
  const double disc = d1 * d1 - lo.slope * hi.slope;
  if (disc >= 0.0) {
    const double d2 = std::sqrt(disc) * (hi.alpha > lo.alpha ? 1.0 : -1.0);
    const double denom = hi.slope - lo.slope + 2.0 * d2;
    if (denom != 0.0) {
      double a = hi.alpha -
                 (hi.alpha - lo.alpha) * (hi.slope + d2 - d1) / denom;
      const double left = std::min(lo.alpha, hi.alpha);
      const double right = std::max(lo.alpha, hi.alpha);
      const double margin = 0.1 * (right - left);
      if (a > left + margin && a < right - margin) return a;
    }
  }
  return 0.5 * (lo.alpha + hi.alpha);
}

}  // namespace detail

inline MinimizeResult minimize(const ObjectiveFn& fn, Eigen::VectorXd x0,
                               const MinimizeOptions& opts = {}) {
  const Eigen::Index n = x0.size();
  if (n == 0) throw std::invalid_argument("minimize: empty variable vector");

  MinimizeResult res;
  res.x = std::move(x0);
  res.grad.resize(n);
  res.f = fn(res.x, res.grad);
  res.function_evals = 1;

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::deque<double> f_hist{res.f};

  Eigen::VectorXd x_trial(n), g_trial(n), direction(n);
  double prev_alpha = 0.0;

  for (res.iterations = 0; res.iterations < opts.max_iters; ++res.iterations) {
    if (res.f <= opts.target_f) {
      res.status = MinimizeStatus::TargetReached;
      return res;
    }
    if (res.grad.cwiseAbs().maxCoeff() <= opts.grad_tol) {
      res.status = MinimizeStatus::GradientConverged;
      return res;
    }
    if (static_cast<int>(f_hist.size()) > opts.stall_window) {
      const double f_then = f_hist.front();
      f_hist.pop_front();
      if (f_then - res.f <=
          opts.stall_rel_improvement * (std::abs(f_then) + 1.0)) {
        res.status = MinimizeStatus::Stalled;
        return res;
      }
    }

    // search direction
    if (opts.steepest_descent || s_hist.empty()) {
      direction = -res.grad;
    } else {
      // two-loop recursion
      direction = -res.grad;
      const int m = static_cast<int>(s_hist.size());
      std::vector<double> alpha_coef(static_cast<std::size_t>(m));
      for (int i = m - 1; i >= 0; --i) {
        alpha_coef[i] = rho_hist[i] * s_hist[i].dot(direction);
        direction -= alpha_coef[i] * y_hist[i];
      }
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      direction *= gamma;
      for (int i = 0; i < m; ++i) {
        const double beta = rho_hist[i] * y_hist[i].dot(direction);
        direction += (alpha_coef[i] - beta) * s_hist[i];
      }
    }

    double slope0 = res.grad.dot(direction);
    if (slope0 >= 0.0) {  // not a descent direction; reset to steepest
      direction = -res.grad;
      slope0 = res.grad.dot(direction);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // strong Wolfe line search
    const double f0 = res.f;
    double last_eval_alpha = std::numeric_limits<double>::quiet_NaN();
    double last_eval_f = 0.0;
    auto eval = [&](double alpha) -> detail::LineSearchEval {
      x_trial = res.x + alpha * direction;
      const double f = fn(x_trial, g_trial);
      ++res.function_evals;
      last_eval_alpha = alpha;
      last_eval_f = f;
      return {alpha, f, g_trial.dot(direction)};
    };

    double alpha_init = 1.0;
    if (opts.steepest_descent)
      alpha_init = prev_alpha > 0.0
                       ? 2.0 * prev_alpha
                       : 1.0 / std::max(1.0, res.grad.norm());

    detail::LineSearchEval best{0.0, f0, slope0};
    detail::LineSearchEval prev{0.0, f0, slope0};
    detail::LineSearchEval accepted{-1.0, f0, 0.0};
    int evals = 0;
    bool have_accepted = false;

    auto zoom = [&](detail::LineSearchEval lo, detail::LineSearchEval hi) {
      while (evals < opts.line_search_max_evals) {
        if (std::abs(hi.alpha - lo.alpha) <
            1e-14 * std::max(1.0, std::abs(lo.alpha)))
          break;
        detail::LineSearchEval mid = eval(detail::interpolate_step(lo, hi));
        ++evals;
        if (mid.f < best.f) best = mid;
        if (mid.f > f0 + opts.wolfe_c1 * mid.alpha * slope0 || mid.f >= lo.f) {
          hi = mid;
        } else {
          if (std::abs(mid.slope) <= -opts.wolfe_c2 * slope0) {
            accepted = mid;
            have_accepted = true;
            return;
          }
          if (mid.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
          lo = mid;
        }
      }
      // no strong-Wolfe point found in budget; fall back to best decrease
      if (best.alpha > 0.0 && best.f < f0) {
        accepted = best;
        have_accepted = true;
      }
    };

    double alpha = alpha_init;
    const double alpha_max = 1e6;
    while (evals < opts.line_search_max_evals) {
      detail::LineSearchEval cur = eval(alpha);
      ++evals;
      if (cur.f < best.f) best = cur;
      if (cur.f > f0 + opts.wolfe_c1 * alpha * slope0 ||
          (evals > 1 && cur.f >= prev.f)) {
        zoom(prev, cur);
        break;
      }
      if (std::abs(cur.slope) <= -opts.wolfe_c2 * slope0) {
        accepted = cur;
        have_accepted = true;
        break;
      }
      if (cur.slope >= 0.0) {
        zoom(cur, prev);
        break;
      }
      prev = cur;
      if (alpha >= alpha_max) break;
      alpha = std::min(2.0 * alpha, alpha_max);
    }
    if (!have_accepted && best.alpha > 0.0 && best.f < f0) {
      accepted = best;
      have_accepted = true;
    }
    if (!have_accepted) {
      res.status = MinimizeStatus::LineSearchFailed;
      return res;
    }

    // accept the step; x_trial/g_trial already hold the accepted point when
    // it was the most recent trial, otherwise evaluate once more
    double f_new;
    if (accepted.alpha == last_eval_alpha) {
      f_new = last_eval_f;
    } else {
      x_trial = res.x + accepted.alpha * direction;
      f_new = fn(x_trial, g_trial);
      ++res.function_evals;
    }

    if (!opts.steepest_descent) {
      Eigen::VectorXd s = x_trial - res.x;
      Eigen::VectorXd y = g_trial - res.grad;
      const double sy = s.dot(y);
      if (sy > 1e-10 * s.norm() * y.norm()) {
        s_hist.push_back(std::move(s));
        y_hist.push_back(std::move(y));
        rho_hist.push_back(1.0 / sy);
        if (static_cast<int>(s_hist.size()) > opts.memory) {
          s_hist.pop_front();
          y_hist.pop_front();
          rho_hist.pop_front();
        }
      }
    }

    res.x.swap(x_trial);
    res.grad.swap(g_trial);
    res.f = f_new;
    prev_alpha = accepted.alpha;
    f_hist.push_back(res.f);
  }
  res.status = MinimizeStatus::MaxIterations;
  return res;
}

}  // namespace aqsim
