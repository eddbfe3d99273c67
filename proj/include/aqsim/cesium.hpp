#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "aqsim/linalg.hpp"

// The 16-level Cs 6S_1/2 ground-state control system: two hyperfine spin
// manifolds F=4 (9 sublevels) and F=3 (7 sublevels), driven by a pair of
// phase-modulated rf fields and a phase-modulated microwave field coupling
// the stretched states |4,4> and |3,3>.
//
// Basis ordering (pinned; all 16x16 matrices in this project use it):
//   index 0..8  : |4,4>, |4,3>, ..., |4,-4>
//   index 9..15 : |3,3>, |3,2>, ..., |3,-3>
//
// Rotating-frame Hamiltonian at phase setting (px, py, pu):
//   H = (Ox/2)(cos px Fx4 + sin px Fy4) + (Oy/2)(cos py Fy4 - sin py Fx4)
//       + Drf Fz4
//     - (Ox/2)(cos px Fx3 - sin px Fy3) - (Oy/2)(cos py Fy3 + sin py Fx3)
//       - Drf Fz3
//     + (Ou/2)(cos pu Sx + sin pu Sy) + (Du/2) Sz
//     + dw [Fz4 - Fz3 + (7/2)(P44 - P33)]
// with S the pseudospin on {|4,4>, |3,3>} and dw the bias-field offset.
// The sign flips between the manifolds encode the opposite g-factors.
// Units: angular frequencies in rad/us, times in us.

namespace aqsim {

inline constexpr int kCesiumDim = 16;

struct CesiumParams {
  double omega_0 = 2.0 * M_PI * 1.0;       // bias Larmor frequency, rad/us
  double omega_x = 2.0 * M_PI * 0.025;     // rf Larmor frequency, x coil
  double omega_y = 2.0 * M_PI * 0.025;     // rf Larmor frequency, y coil
  double omega_uw = 2.0 * M_PI * 0.0275;   // microwave Rabi frequency
  double delta_rf = 0.0;                   // rf detuning
  double delta_uw = 0.0;                   // microwave detuning
  double step_duration = 4.0;              // phase step length, us
  double delta_omega = 0.0;                // bias Larmor offset from nominal

  void validate() const {
    const double vals[] = {omega_0, omega_x, omega_y,   omega_uw,
                           delta_rf, delta_uw, step_duration, delta_omega};
    for (double v : vals)
      if (!std::isfinite(v))
        throw std::invalid_argument("CesiumParams: non-finite parameter");
    if (step_duration <= 0.0)
      throw std::invalid_argument("CesiumParams: step_duration must be > 0");
  }
};

struct PhaseTriple {
  double rfx = 0.0;
  double rfy = 0.0;
  double uw = 0.0;
};

// wrap to (-pi, pi]
inline double wrap_angle(double x) {
  double w = std::remainder(x, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

struct ControlWaveform {
  std::vector<PhaseTriple> phases;
  double step_duration = 4.0;

  int size() const { return static_cast<int>(phases.size()); }

  void validate() const {
    if (phases.empty())
      throw std::invalid_argument("ControlWaveform: needs at least one step");
    if (!(step_duration > 0.0) || !std::isfinite(step_duration))
      throw std::invalid_argument("ControlWaveform: bad step duration");
    for (const PhaseTriple& p : phases)
      if (!std::isfinite(p.rfx) || !std::isfinite(p.rfy) || !std::isfinite(p.uw))
        throw std::invalid_argument("ControlWaveform: non-finite phase");
  }

  ControlWaveform wrapped() const {
    ControlWaveform w = *this;
    for (PhaseTriple& p : w.phases) {
      p.rfx = wrap_angle(p.rfx);
      p.rfy = wrap_angle(p.rfy);
      p.uw = wrap_angle(p.uw);
    }
    return w;
  }
};

struct BasisLabel {
  int f;
  int m;
};

inline std::array<BasisLabel, kCesiumDim> build_basis() {
  std::array<BasisLabel, kCesiumDim> basis{};
  int i = 0;
  for (int m = 4; m >= -4; --m) basis[i++] = {4, m};
  for (int m = 3; m >= -3; --m) basis[i++] = {3, m};
  return basis;
}

inline int basis_index(int f, int m) {
  if (f == 4 && m <= 4 && m >= -4) return 4 - m;
  if (f == 3 && m <= 3 && m >= -3) return 9 + 3 - m;
  throw std::invalid_argument("basis_index: no such level");
}

namespace detail {

struct CesiumOperators {
  CMatrix fx4, fy4, fz4;   // spin-4 operators embedded in the F=4 block
  CMatrix fx3, fy3, fz3;   // spin-3 operators embedded in the F=3 block
  CMatrix sx, sy, sz;      // pseudospin on {|4,4>, |3,3>}
  CMatrix bias_sensitivity;  // Fz4 - Fz3 + (7/2)(P44 - P33)
};

inline const CesiumOperators& cesium_operators() {
  static const CesiumOperators ops = [] {
    CesiumOperators o;
    const AngularMomentum f4 = angular_momentum_ops(4.0);
    const AngularMomentum f3 = angular_momentum_ops(3.0);
    auto embed = [](const CMatrix& m, int offset) {
      CMatrix out = CMatrix::Zero(kCesiumDim, kCesiumDim);
      out.block(offset, offset, m.rows(), m.cols()) = m;
      return out;
    };
    o.fx4 = embed(f4.jx, 0);
    o.fy4 = embed(f4.jy, 0);
    o.fz4 = embed(f4.jz, 0);
    o.fx3 = embed(f3.jx, 9);
    o.fy3 = embed(f3.jy, 9);
    o.fz3 = embed(f3.jz, 9);
    const int up = basis_index(4, 4), dn = basis_index(3, 3);
    o.sx = CMatrix::Zero(kCesiumDim, kCesiumDim);
    o.sx(up, dn) = 1.0;
    o.sx(dn, up) = 1.0;
    o.sy = CMatrix::Zero(kCesiumDim, kCesiumDim);
    o.sy(up, dn) = -kI;
    o.sy(dn, up) = kI;
    o.sz = CMatrix::Zero(kCesiumDim, kCesiumDim);
    o.sz(up, up) = 1.0;
    o.sz(dn, dn) = -1.0;
    o.bias_sensitivity = o.fz4 - o.fz3 + 3.5 * o.sz;
    return o;
  }();
  return ops;
}

}  // namespace detail

inline CMatrix control_hamiltonian(const PhaseTriple& phi,
                                   const CesiumParams& params) {
  params.validate();
  const auto& op = detail::cesium_operators();
  const double cx = std::cos(phi.rfx), sx = std::sin(phi.rfx);
  const double cy = std::cos(phi.rfy), sy = std::sin(phi.rfy);
  const double cu = std::cos(phi.uw), su = std::sin(phi.uw);
  CMatrix h =
      0.5 * params.omega_x * (cx * op.fx4 + sx * op.fy4) +
      0.5 * params.omega_y * (cy * op.fy4 - sy * op.fx4) +
      params.delta_rf * op.fz4 -
      0.5 * params.omega_x * (cx * op.fx3 - sx * op.fy3) -
      0.5 * params.omega_y * (cy * op.fy3 + sy * op.fx3) -
      params.delta_rf * op.fz3 +
      0.5 * params.omega_uw * (cu * op.sx + su * op.sy) +
      0.5 * params.delta_uw * op.sz;
  if (params.delta_omega != 0.0)
    h += params.delta_omega * op.bias_sensitivity;
  return h;
}

// dH/d(rfx), dH/d(rfy), dH/d(uw); the phases enter only through sin/cos
inline std::array<CMatrix, 3> control_hamiltonian_phase_derivatives(
    const PhaseTriple& phi, const CesiumParams& params) {
  const auto& op = detail::cesium_operators();
  const double cx = std::cos(phi.rfx), sx = std::sin(phi.rfx);
  const double cy = std::cos(phi.rfy), sy = std::sin(phi.rfy);
  const double cu = std::cos(phi.uw), su = std::sin(phi.uw);
  std::array<CMatrix, 3> d;
  d[0] = 0.5 * params.omega_x *
         ((-sx) * op.fx4 + cx * op.fy4 + sx * op.fx3 + cx * op.fy3);
  d[1] = 0.5 * params.omega_y *
         ((-sy) * op.fy4 - cy * op.fx4 + sy * op.fy3 - cy * op.fx3);
  d[2] = 0.5 * params.omega_uw * ((-su) * op.sx + cu * op.sy);
  return d;
}

// U = U_N ... U_1 with U_i = exp(-i H(phi_i) tau)
inline CMatrix waveform_propagator(const ControlWaveform& w,
                                   const CesiumParams& params) {
  w.validate();
  CMatrix u = CMatrix::Identity(kCesiumDim, kCesiumDim);
  for (const PhaseTriple& phi : w.phases)
    u = expm_hermitian(control_hamiltonian(phi, params), w.step_duration) * u;
  return u;
}

struct WaveformGradient {
  CMatrix propagator;
  // d(U)/d(phase), step-major: [step0 rfx, step0 rfy, step0 uw, step1 rfx, ...]
  std::vector<CMatrix> dU;
};

// Exact derivatives of the full product with respect to every phase,
// assembled by the product rule from the per-step spectral derivatives.
inline WaveformGradient waveform_propagator_gradient(
    const ControlWaveform& w, const CesiumParams& params) {
  w.validate();
  const int n = w.size();
  const double tau = w.step_duration;

  std::vector<HermitianEig> eigs(static_cast<std::size_t>(n));
  std::vector<CMatrix> steps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    eigs[i] = eig_hermitian(control_hamiltonian(w.phases[i], params),
                            "waveform_propagator_gradient");
    steps[i] = expm_from_eig(eigs[i], tau);
  }

  // prefix[i] = U_i ... U_1 (prefix[0] = I); suffix[i] = U_N ... U_{i+1}
  std::vector<CMatrix> prefix(static_cast<std::size_t>(n) + 1);
  prefix[0] = CMatrix::Identity(kCesiumDim, kCesiumDim);
  for (int i = 0; i < n; ++i) prefix[i + 1] = steps[i] * prefix[i];
  std::vector<CMatrix> suffix(static_cast<std::size_t>(n) + 1);
  suffix[n] = CMatrix::Identity(kCesiumDim, kCesiumDim);
  for (int i = n - 1; i >= 0; --i) suffix[i] = suffix[i + 1] * steps[i];

  WaveformGradient out;
  out.propagator = prefix[n];
  out.dU.resize(static_cast<std::size_t>(3 * n));
  for (int i = 0; i < n; ++i) {
    const auto dh = control_hamiltonian_phase_derivatives(w.phases[i], params);
    for (int c = 0; c < 3; ++c) {
      const CMatrix du_step = expm_dd_from_eig(eigs[i], dh[c], tau);
      out.dU[static_cast<std::size_t>(3 * i + c)] =
          suffix[i + 1] * du_step * prefix[i];
    }
  }
  return out;
}

// Tr(A U(w)) and its gradient with respect to every phase, for a fixed
// matrix A. This one routine backs all control objectives:
//   unitary fidelity  |Tr(W^dag U)|^2/d^2      -> A = W^dag
//   state transfer    <chi| U |psi0>           -> A = |psi0><chi|
// The per-phase derivative traces are evaluated in each step's eigenbasis,
// which avoids forming any d(U)/d(phase) matrix.
struct WaveformTrace {
  CMatrix propagator;
  Complex value;
  std::vector<Complex> dvalue;  // step-major, like WaveformGradient::dU
};

inline WaveformTrace waveform_trace_gradient(const ControlWaveform& w,
                                             const CesiumParams& params,
                                             const CMatrix& a) {
  w.validate();
  const int n = w.size();
  const double tau = w.step_duration;

  std::vector<HermitianEig> eigs(static_cast<std::size_t>(n));
  std::vector<CMatrix> steps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    eigs[i] = eig_hermitian(control_hamiltonian(w.phases[i], params),
                            "waveform_trace_gradient");
    steps[i] = expm_from_eig(eigs[i], tau);
  }

  std::vector<CMatrix> prefix(static_cast<std::size_t>(n) + 1);
  prefix[0] = CMatrix::Identity(kCesiumDim, kCesiumDim);
  for (int i = 0; i < n; ++i) prefix[i + 1] = steps[i] * prefix[i];

  WaveformTrace out;
  out.propagator = prefix[n];
  out.value = (a * prefix[n]).trace();
  out.dvalue.resize(static_cast<std::size_t>(3 * n));

  // t_i = A U_N ... U_{i+1}, accumulated right to left
  CMatrix t = a;
  for (int i = n - 1; i >= 0; --i) {
    const CMatrix k = prefix[i] * t;             // K_i = P_{i-1} A S_i
    const CMatrix c = eigs[i].vectors.adjoint() * k * eigs[i].vectors;
    // divided-difference kernel for f(l) = exp(-i l tau)
    const auto& lam = eigs[i].values;
    CVector f(kCesiumDim);
    for (int q = 0; q < kCesiumDim; ++q)
      f[q] = std::exp(Complex(0.0, -lam[q] * tau));
    CMatrix phi_kernel(kCesiumDim, kCesiumDim);
    for (int p = 0; p < kCesiumDim; ++p)
      for (int q = 0; q < kCesiumDim; ++q) {
        const double gap = lam[p] - lam[q];
        phi_kernel(p, q) = std::abs(gap) < 1e-12 ? Complex(0.0, -tau) * f[p]
                                                 : (f[p] - f[q]) / gap;
      }
    const auto dh = control_hamiltonian_phase_derivatives(w.phases[i], params);
    for (int ch = 0; ch < 3; ++ch) {
      const CMatrix g = eigs[i].vectors.adjoint() * dh[ch] * eigs[i].vectors;
      // Tr(K dU) = sum_pq c_pq phi_qp g_qp
      Complex acc(0.0, 0.0);
      for (int p = 0; p < kCesiumDim; ++p)
        for (int q = 0; q < kCesiumDim; ++q)
          acc += c(p, q) * phi_kernel(q, p) * g(q, p);
      out.dvalue[static_cast<std::size_t>(3 * i + ch)] = acc;
    }
    t = t * steps[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Controllability
// ---------------------------------------------------------------------------

// Hamiltonians at a spanning set of phase settings, plus the identity.
// The identity is always included: the control Hamiltonian carries an
// arbitrary additive constant (global phase), so the meaningful closure is
// a subalgebra of u(16) that contains the trace direction.
inline std::vector<CMatrix> controllability_generators(
    const CesiumParams& params) {
  std::vector<CMatrix> gens;
  const double settings[] = {0.0, M_PI / 2.0, M_PI};
  for (double v : settings) {
    gens.push_back(control_hamiltonian({v, 0.0, 0.0}, params));
    gens.push_back(control_hamiltonian({0.0, v, 0.0}, params));
    gens.push_back(control_hamiltonian({0.0, 0.0, v}, params));
  }
  gens.push_back(CMatrix::Identity(kCesiumDim, kCesiumDim));
  return gens;
}

// Dimension of the dynamical Lie algebra (rank over vectorized matrices,
// relative tolerance 1e-9). 256 = u(16) means full controllability.
inline int controllability_dimension(const CesiumParams& params) {
  return lie_closure_dimension(controllability_generators(params), 1e-9);
}

// 9-level comparison model: a single F=4 manifold driven by the rf fields
// only. Used to demonstrate that one manifold alone yields an su(2) image
// (plus the trace direction), not full controllability.
inline std::vector<CMatrix> single_manifold_generators(
    const CesiumParams& params) {
  const AngularMomentum f4 = angular_momentum_ops(4.0);
  auto h = [&](double px, double py) {
    CMatrix m = 0.5 * params.omega_x *
                    (std::cos(px) * f4.jx + std::sin(px) * f4.jy) +
                0.5 * params.omega_y *
                    (std::cos(py) * f4.jy - std::sin(py) * f4.jx) +
                params.delta_rf * f4.jz;
    return m;
  };
  std::vector<CMatrix> gens;
  for (double v : {0.0, M_PI / 2.0, M_PI}) {
    gens.push_back(h(v, 0.0));
    gens.push_back(h(0.0, v));
  }
  gens.push_back(CMatrix::Identity(9, 9));
  return gens;
}

}  // namespace aqsim
