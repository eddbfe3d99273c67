#pragma once

#include <atomic>
#include <chrono>
#include <cstring>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "aqsim/cesium.hpp"
#include "aqsim/lbfgs.hpp"
#include "aqsim/linalg.hpp"
#include "aqsim/models.hpp"
#include "aqsim/rng.hpp"

// Control search. Two objectives over waveforms for a target unitary W:
//
//   conventional   F = |Tr(W^dag U)|^2 / d^2
//   eigenvalue-only  F = |Tr(W^dag V U V^dag)|^2 / d^2,  V = exp(i sum v_j L_j)
//
// the latter co-optimized over the 255 basis-map coefficients v. Both come
// in a robust variant averaging the objective over a two-point bias-field
// offset +-dw. Searches run quasi-Newton ascent by default; plain gradient
// ascent is available as an option.

namespace aqsim {

inline const GellmannBasis& gellmann16() {
  static const GellmannBasis basis(kCesiumDim);
  return basis;
}

inline std::uint64_t target_hash(const CMatrix& w) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      mix(w(i, j).real());
      mix(w(i, j).imag());
    }
  return h;
}

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

inline double objective_conventional(const ControlWaveform& w, const CMatrix& W,
                                     const CesiumParams& params) {
  require_same_dim(W, CMatrix::Zero(kCesiumDim, kCesiumDim),
                   "objective_conventional");
  return unitary_fidelity(W, waveform_propagator(w, params));
}

// gradient with respect to all phases, step-major (rfx, rfy, uw)
inline double objective_conventional_gradient(const ControlWaveform& w,
                                              const CMatrix& W,
                                              const CesiumParams& params,
                                              Eigen::VectorXd& grad) {
  require_same_dim(W, CMatrix::Zero(kCesiumDim, kCesiumDim),
                   "objective_conventional_gradient");
  const WaveformTrace t = waveform_trace_gradient(w, params, W.adjoint());
  const double d2 = static_cast<double>(kCesiumDim) * kCesiumDim;
  grad.resize(static_cast<Eigen::Index>(t.dvalue.size()));
  for (Eigen::Index k = 0; k < grad.size(); ++k)
    grad[k] = 2.0 / d2 *
              (std::conj(t.value) * t.dvalue[static_cast<std::size_t>(k)]).real();
  return std::norm(t.value) / d2;
}

inline CMatrix evo_map_from_coefficients(const Eigen::VectorXd& v) {
  return expm_from_eig(eig_hermitian(gellmann16().assemble(v), "evo_map"), -1.0);
}

inline double objective_evo(const ControlWaveform& w, const Eigen::VectorXd& v,
                            const CMatrix& W, const CesiumParams& params) {
  const CMatrix vmap = evo_map_from_coefficients(v);
  const CMatrix u = waveform_propagator(w, params);
  return unitary_fidelity(W, vmap * u * vmap.adjoint());
}

// gradient in both the phases and the basis-map coefficients
inline double objective_evo_gradient(const ControlWaveform& w,
                                     const Eigen::VectorXd& v, const CMatrix& W,
                                     const CesiumParams& params,
                                     Eigen::VectorXd& grad_phases,
                                     Eigen::VectorXd& grad_v) {
  const GellmannBasis& basis = gellmann16();
  if (v.size() != basis.size())
    throw std::invalid_argument("objective_evo: expected 255 coefficients");
  const HermitianEig ea = eig_hermitian(basis.assemble(v), "objective_evo");
  const CMatrix vmap = expm_from_eig(ea, -1.0);  // exp(+iA)
  const CMatrix vdag = vmap.adjoint();

  // phase gradient: the conjugated problem is conventional control against
  // W_eff = V^dag W V, i.e. trace matrix A = V^dag W^dag V
  const WaveformTrace t =
      waveform_trace_gradient(w, params, vdag * W.adjoint() * vmap);
  const Complex g = t.value;
  const double d2 = static_cast<double>(kCesiumDim) * kCesiumDim;
  grad_phases.resize(static_cast<Eigen::Index>(t.dvalue.size()));
  for (Eigen::Index k = 0; k < grad_phases.size(); ++k)
    grad_phases[k] =
        2.0 / d2 * (std::conj(g) * t.dvalue[static_cast<std::size_t>(k)]).real();

  // v gradient via the spectral derivative of V = exp(iA):
  //   dG/dv_j = Tr(M1 dV_j) + conj(Tr(M2 dV_j))
  const CMatrix& u = t.propagator;
  const CMatrix m1 = u * vdag * W.adjoint();
  const CMatrix m2 = u.adjoint() * vdag * W;
  CMatrix phi(kCesiumDim, kCesiumDim);
  CVector f(kCesiumDim);
  for (int k = 0; k < kCesiumDim; ++k)
    f[k] = std::exp(Complex(0.0, ea.values[k]));
  for (int a = 0; a < kCesiumDim; ++a)
    for (int b = 0; b < kCesiumDim; ++b) {
      const double gap = ea.values[a] - ea.values[b];
      phi(a, b) = std::abs(gap) < 1e-12 ? kI * f[a] : (f[a] - f[b]) / gap;
    }
  const CMatrix c1 = ea.vectors.adjoint() * m1 * ea.vectors;
  const CMatrix c2 = ea.vectors.adjoint() * m2 * ea.vectors;
  const CMatrix z1 =
      ea.vectors * phi.cwiseProduct(c1) * ea.vectors.adjoint();
  const CMatrix z2 =
      ea.vectors * phi.cwiseProduct(c2) * ea.vectors.adjoint();
  const CVector t1 = basis.trace_products(z1);
  const CVector t2 = basis.trace_products(z2);
  grad_v.resize(basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    const Complex dg = t1[j] + std::conj(t2[j]);
    grad_v[j] = 2.0 / d2 * (std::conj(g) * dg).real();
  }
  return std::norm(g) / d2;
}

// Two-point robust average: the base objective evaluated with the bias
// offset pinned to +dw and -dw around nominal.
template <class BaseObjective>
double objective_robust(BaseObjective&& base, double delta_omega,
                        const CesiumParams& params) {
  if (delta_omega < 0.0)
    throw std::invalid_argument("objective_robust: delta_omega must be >= 0");
  if (delta_omega == 0.0) return base(params);
  CesiumParams plus = params, minus = params;
  plus.delta_omega = delta_omega;
  minus.delta_omega = -delta_omega;
  return 0.5 * (base(plus) + base(minus));
}

// state-transfer objective |<chi| U |psi0>|^2 with psi0 = |3,3>
inline double objective_state_map_gradient(const ControlWaveform& w,
                                           const CVector& target,
                                           const CesiumParams& params,
                                           Eigen::VectorXd& grad) {
  require_normalized(target, "objective_state_map");
  // Tr(|psi0><chi| U) = <chi| U |psi0>
  CMatrix a = CMatrix::Zero(kCesiumDim, kCesiumDim);
  const int psi0 = basis_index(3, 3);
  for (int i = 0; i < kCesiumDim; ++i) a(psi0, i) = std::conj(target[i]);
  const WaveformTrace t = waveform_trace_gradient(w, params, a);
  grad.resize(static_cast<Eigen::Index>(t.dvalue.size()));
  for (Eigen::Index k = 0; k < grad.size(); ++k)
    grad[k] =
        2.0 * (std::conj(t.value) * t.dvalue[static_cast<std::size_t>(k)]).real();
  return std::norm(t.value);
}

inline double objective_state_map(const ControlWaveform& w,
                                  const CVector& target,
                                  const CesiumParams& params) {
  Eigen::VectorXd unused;
  return objective_state_map_gradient(w, target, params, unused);
}

// ---------------------------------------------------------------------------
// Searches
// ---------------------------------------------------------------------------

struct OptimizeOptions {
  int max_iters = 5000;
  double threshold = 0.99999;
  std::uint64_t seed = 0;
  bool steepest_descent = false;  // plain gradient ascent instead of L-BFGS
  bool robust = false;
  double robust_delta_omega = 2.0 * M_PI * 4e-4;
  double v_sigma = 0.1;  // spread of the initial basis-map coefficients
  int stall_window = 50;
  double stall_rel_improvement = 1e-10;
  std::string target_id;
};

struct ControlSolution {
  ControlWaveform waveform;
  double achieved_fidelity = 0.0;
  std::string target_id;
  bool robust = false;
  double robust_delta_omega = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  bool converged = false;
  CesiumParams params;
  std::uint64_t target_hash = 0;
};

struct EvoSolution {
  ControlWaveform waveform;
  Eigen::VectorXd v;
  double achieved_fidelity = 0.0;
  std::string target_id;
  bool robust = false;
  double robust_delta_omega = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  bool converged = false;
  CesiumParams params;
  std::uint64_t target_hash = 0;

  CMatrix evo_map() const { return evo_map_from_coefficients(v); }
};

namespace detail {

inline ControlWaveform waveform_from_vector(const Eigen::VectorXd& x, int n_phi,
                                            double step_duration) {
  ControlWaveform w;
  w.step_duration = step_duration;
  w.phases.resize(static_cast<std::size_t>(n_phi));
  for (int i = 0; i < n_phi; ++i)
    w.phases[static_cast<std::size_t>(i)] = {x[3 * i], x[3 * i + 1],
                                             x[3 * i + 2]};
  return w;
}

inline MinimizeOptions minimize_options(const OptimizeOptions& o) {
  MinimizeOptions m;
  m.max_iters = o.max_iters;
  m.target_f = -o.threshold;
  m.steepest_descent = o.steepest_descent;
  m.stall_window = o.stall_window;
  m.stall_rel_improvement = o.stall_rel_improvement;
  return m;
}

// evaluate the (possibly robust) fidelity objective and gradient
template <class EvalFn>
double robust_value_grad(const OptimizeOptions& opts, const CesiumParams& params,
                         EvalFn&& eval, Eigen::VectorXd& grad) {
  if (!opts.robust) return eval(params, grad);
  CesiumParams plus = params, minus = params;
  plus.delta_omega = opts.robust_delta_omega;
  minus.delta_omega = -opts.robust_delta_omega;
  Eigen::VectorXd g2;
  const double f1 = eval(plus, grad);
  const double f2 = eval(minus, g2);
  grad = 0.5 * (grad + g2);
  return 0.5 * (f1 + f2);
}

}  // namespace detail

inline double solution_objective(const ControlSolution& sol, const CMatrix& W) {
  auto base = [&](const CesiumParams& p) {
    return objective_conventional(sol.waveform, W, p);
  };
  return sol.robust ? objective_robust(base, sol.robust_delta_omega, sol.params)
                    : base(sol.params);
}

inline double solution_objective(const EvoSolution& sol, const CMatrix& W) {
  auto base = [&](const CesiumParams& p) {
    return objective_evo(sol.waveform, sol.v, W, p);
  };
  return sol.robust ? objective_robust(base, sol.robust_delta_omega, sol.params)
                    : base(sol.params);
}

// Quasi-Newton ascent from a uniform-random phase seed.
inline ControlSolution optimize_conventional(const CMatrix& W, int n_phi,
                                             const CesiumParams& params,
                                             const OptimizeOptions& opts) {
  require_unitary(W, "optimize_conventional");
  if (n_phi < 1)
    throw std::invalid_argument("optimize_conventional: n_phi must be >= 1");
  params.validate();
  Rng rng(opts.seed);
  Eigen::VectorXd x0(3 * n_phi);
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    x0[i] = rng.uniform(-M_PI, M_PI);

  auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const ControlWaveform w =
        detail::waveform_from_vector(x, n_phi, params.step_duration);
    const double f = detail::robust_value_grad(
        opts, params,
        [&](const CesiumParams& p, Eigen::VectorXd& g) {
          return objective_conventional_gradient(w, W, p, g);
        },
        grad);
    grad = -grad;
    return -f;
  };

  const MinimizeResult r = minimize(fn, x0, detail::minimize_options(opts));

  ControlSolution sol;
  sol.waveform =
      detail::waveform_from_vector(r.x, n_phi, params.step_duration).wrapped();
  sol.params = params;
  sol.target_id = opts.target_id;
  sol.robust = opts.robust;
  sol.robust_delta_omega = opts.robust ? opts.robust_delta_omega : 0.0;
  sol.seed = opts.seed;
  sol.iterations = r.iterations;
  sol.target_hash = target_hash(W);
  sol.achieved_fidelity = solution_objective(sol, W);
  sol.converged = sol.achieved_fidelity >= opts.threshold;
  return sol;
}

// Joint ascent over the phases and the 255 basis-map coefficients. The
// coefficients seed near zero with a small Gaussian spread (exactly zero is
// a symmetry point of the map).
inline EvoSolution optimize_evo(const CMatrix& W, int n_phi,
                                const CesiumParams& params,
                                const OptimizeOptions& opts) {
  require_unitary(W, "optimize_evo");
  if (n_phi < 1) throw std::invalid_argument("optimize_evo: n_phi must be >= 1");
  params.validate();
  const int nv = gellmann16().size();
  Rng rng(opts.seed);
  Eigen::VectorXd x0(3 * n_phi + nv);
  for (int i = 0; i < 3 * n_phi; ++i) x0[i] = rng.uniform(-M_PI, M_PI);
  for (int j = 0; j < nv; ++j) x0[3 * n_phi + j] = opts.v_sigma * rng.normal();

  auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const ControlWaveform w =
        detail::waveform_from_vector(x, n_phi, params.step_duration);
    const Eigen::VectorXd v = x.tail(nv);
    grad.resize(x.size());
    const double f = detail::robust_value_grad(
        opts, params,
        [&](const CesiumParams& p, Eigen::VectorXd& g) {
          Eigen::VectorXd gp, gvv;
          const double val = objective_evo_gradient(w, v, W, p, gp, gvv);
          g.resize(x.size());
          g.head(3 * n_phi) = gp;
          g.tail(nv) = gvv;
          return val;
        },
        grad);
    grad = -grad;
    return -f;
  };

  const MinimizeResult r = minimize(fn, x0, detail::minimize_options(opts));

  EvoSolution sol;
  sol.waveform =
      detail::waveform_from_vector(r.x, n_phi, params.step_duration).wrapped();
  sol.v = r.x.tail(nv);
  sol.params = params;
  sol.target_id = opts.target_id;
  sol.robust = opts.robust;
  sol.robust_delta_omega = opts.robust ? opts.robust_delta_omega : 0.0;
  sol.seed = opts.seed;
  sol.iterations = r.iterations;
  sol.target_hash = target_hash(W);
  sol.achieved_fidelity = solution_objective(sol, W);
  sol.converged = sol.achieved_fidelity >= opts.threshold;
  return sol;
}

// State-preparation search |3,3> -> |target>. The achieved fidelity is the
// state overlap |<target|U|3,3>|^2.
inline ControlSolution optimize_state_map(const CVector& target, int n_phi,
                                          const CesiumParams& params,
                                          const OptimizeOptions& opts) {
  require_normalized(target, "optimize_state_map");
  if (n_phi < 1)
    throw std::invalid_argument("optimize_state_map: n_phi must be >= 1");
  params.validate();
  Rng rng(opts.seed);
  Eigen::VectorXd x0(3 * n_phi);
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    x0[i] = rng.uniform(-M_PI, M_PI);

  auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const ControlWaveform w =
        detail::waveform_from_vector(x, n_phi, params.step_duration);
    const double f = detail::robust_value_grad(
        opts, params,
        [&](const CesiumParams& p, Eigen::VectorXd& g) {
          return objective_state_map_gradient(w, target, p, g);
        },
        grad);
    grad = -grad;
    return -f;
  };

  const MinimizeResult r = minimize(fn, x0, detail::minimize_options(opts));

  ControlSolution sol;
  sol.waveform =
      detail::waveform_from_vector(r.x, n_phi, params.step_duration).wrapped();
  sol.params = params;
  sol.target_id = opts.target_id.empty() ? "state-map" : opts.target_id;
  sol.robust = opts.robust;
  sol.robust_delta_omega = opts.robust ? opts.robust_delta_omega : 0.0;
  sol.seed = opts.seed;
  sol.iterations = r.iterations;
  auto base = [&](const CesiumParams& p) {
    return objective_state_map(sol.waveform, target, p);
  };
  sol.achieved_fidelity =
      sol.robust ? objective_robust(base, sol.robust_delta_omega, params)
                 : base(params);
  sol.converged = sol.achieved_fidelity >= opts.threshold;
  // hash the rank-1 target projector so simulation runs can cross-check
  sol.target_hash = target_hash(target * target.adjoint());
  return sol;
}

// ---------------------------------------------------------------------------
// Multi-seed orchestration
// ---------------------------------------------------------------------------

struct SearchReport {
  std::vector<double> final_fidelities;  // indexed by seed
  int best_index = -1;
  double best_fidelity = 0.0;
  double threshold = 0.0;
  int success_count = 0;
  double wall_time_seconds = 0.0;
};

// Runs `task(seed_index)` for every index in [0, n_seeds). Seeds are
// independent work units; the report is assembled in index order after all
// workers finish, so the outcome does not depend on the parallelism degree.
// Ties in the best fidelity go to the lowest seed index.
template <class Task>
auto multi_seed_search(Task&& task, int n_seeds, double threshold,
                       int parallelism = 1)
    -> std::pair<std::vector<decltype(task(0))>, SearchReport> {
  using Solution = decltype(task(0));
  if (n_seeds < 1)
    throw std::invalid_argument("multi_seed_search: n_seeds must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<Solution> solutions(static_cast<std::size_t>(n_seeds));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_seeds) break;
      solutions[static_cast<std::size_t>(i)] = task(i);
    }
  };
  if (parallelism <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n_workers = std::min(parallelism, n_seeds);
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  SearchReport report;
  report.threshold = threshold;
  report.final_fidelities.reserve(static_cast<std::size_t>(n_seeds));
  for (int i = 0; i < n_seeds; ++i) {
    const double f = solutions[static_cast<std::size_t>(i)].achieved_fidelity;
    report.final_fidelities.push_back(f);
    if (f >= threshold) ++report.success_count;
    if (report.best_index < 0 || f > report.best_fidelity) {
      report.best_index = i;
      report.best_fidelity = f;
    }
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return {std::move(solutions), std::move(report)};
}

}  // namespace aqsim
