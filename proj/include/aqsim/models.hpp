#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "aqsim/cesium.hpp"
#include "aqsim/linalg.hpp"
#include "aqsim/rng.hpp"

// Target systems simulated on the 16-dimensional device:
//
//   TI   4-site open transverse Ising chain,
//        H = -sum_i h sz_i - sum_i s sx_i sx_{i+1},   W = exp(-i H dt)
//   LMG  collective spin J = 15/2,
//        H = -(1-s) Jz - s Jx^2,                      W = exp(-i H dt)
//   QKT  kicked top, one Floquet period: z kick by p, then Jx^2 torsion,
//        W = exp(+i (kappa/2J) Jx^2) exp(+i p Jz)
//
// plus the classical limit of the kicked top on the unit sphere.

namespace aqsim {

enum class ModelFamily { TI, LMG, QKT };

inline const char* family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::TI: return "ti";
    case ModelFamily::LMG: return "lmg";
    case ModelFamily::QKT: return "qkt";
  }
  return "?";
}

inline constexpr double kCollectiveSpin = 7.5;  // J = 15/2, dimension 16

inline CMatrix ti_hamiltonian(double h, double s) {
  const int n_sites = 4;
  CMatrix ham = CMatrix::Zero(kCesiumDim, kCesiumDim);
  for (int i = 1; i <= n_sites; ++i)
    ham -= h * pauli_chain_op(n_sites, i, Axis::Z);
  for (int i = 1; i < n_sites; ++i)
    ham -= s * (pauli_chain_op(n_sites, i, Axis::X) *
                pauli_chain_op(n_sites, i + 1, Axis::X));
  return ham;
}

inline CMatrix ti_propagator(double h, double s, double dt) {
  if (!std::isfinite(dt))
    throw std::invalid_argument("ti_propagator: dt must be finite");
  return expm_hermitian(ti_hamiltonian(h, s), dt);
}

inline CMatrix lmg_hamiltonian(double s) {
  const AngularMomentum j = angular_momentum_ops(kCollectiveSpin);
  return -(1.0 - s) * j.jz - s * (j.jx * j.jx);
}

inline CMatrix lmg_propagator(double s, double dt) {
  if (!std::isfinite(dt))
    throw std::invalid_argument("lmg_propagator: dt must be finite");
  return expm_hermitian(lmg_hamiltonian(s), dt);
}

// One kicked-top period. Default ordering is kick first, then torsion; the
// reversed ordering is unitarily equivalent and kept behind the flag.
inline CMatrix qkt_floquet(double p, double kappa, bool torsion_first = false) {
  if (!std::isfinite(p) || !std::isfinite(kappa))
    throw std::invalid_argument("qkt_floquet: parameters must be finite");
  const AngularMomentum j = angular_momentum_ops(kCollectiveSpin);
  const CMatrix kick = expm_hermitian(j.jz, -p);  // exp(+i p Jz)
  const CMatrix torsion =
      expm_hermitian(j.jx * j.jx, -kappa / (2.0 * kCollectiveSpin));
  return torsion_first ? kick * torsion : torsion * kick;
}

struct ModelSpec {
  ModelFamily family = ModelFamily::TI;
  double h = 0.0, s = 0.0, dt = 0.0;  // TI / LMG
  double p = 0.0, kappa = 0.0;        // QKT
  bool qkt_torsion_first = false;

  static ModelSpec ti(double h, double s, double dt) {
    ModelSpec m;
    m.family = ModelFamily::TI;
    m.h = h;
    m.s = s;
    m.dt = dt;
    return m;
  }
  static ModelSpec lmg(double s, double dt) {
    ModelSpec m;
    m.family = ModelFamily::LMG;
    m.s = s;
    m.dt = dt;
    return m;
  }
  static ModelSpec qkt(double p, double kappa) {
    ModelSpec m;
    m.family = ModelFamily::QKT;
    m.p = p;
    m.kappa = kappa;
    return m;
  }

  void validate() const {
    switch (family) {
      case ModelFamily::TI:
      case ModelFamily::LMG:
        if (!(dt > 0.0)) throw std::invalid_argument("ModelSpec: dt must be > 0");
        break;
      case ModelFamily::QKT:
        if (!std::isfinite(p) || !std::isfinite(kappa))
          throw std::invalid_argument("ModelSpec: bad kicked-top parameters");
        break;
    }
  }

  CMatrix propagator() const {
    validate();
    switch (family) {
      case ModelFamily::TI: return ti_propagator(h, s, dt);
      case ModelFamily::LMG: return lmg_propagator(s, dt);
      case ModelFamily::QKT: return qkt_floquet(p, kappa, qkt_torsion_first);
    }
    throw std::logic_error("ModelSpec: unknown family");
  }

  std::string id() const {
    std::ostringstream os;
    os.precision(17);
    switch (family) {
      case ModelFamily::TI: os << "ti h=" << h << " s=" << s << " dt=" << dt; break;
      case ModelFamily::LMG: os << "lmg s=" << s << " dt=" << dt; break;
      case ModelFamily::QKT:
        os << "qkt p=" << p << " kappa=" << kappa;
        if (qkt_torsion_first) os << " torsion_first";
        break;
    }
    return os.str();
  }
};

// Correspondence between a model's canonical basis (4-qubit lexicographic
// for TI, |J,m> with m descending for LMG/QKT) and the cesium basis. With
// the pinned orderings this is the identity permutation; it is kept
// explicit so code that needs the mapping states so.
struct BasisMap {
  std::array<int, kCesiumDim> system_to_simulator{};
  std::array<int, kCesiumDim> simulator_to_system{};
};

inline BasisMap system_to_simulator_map(int dim = kCesiumDim) {
  if (dim != kCesiumDim)
    throw std::invalid_argument("system_to_simulator_map: dimension must be 16");
  BasisMap map;
  for (int i = 0; i < kCesiumDim; ++i) {
    map.system_to_simulator[i] = i;
    map.simulator_to_system[i] = i;
  }
  return map;
}

// ---------------------------------------------------------------------------
// Classical kicked top
// ---------------------------------------------------------------------------

struct ClassicalSpinPoint {
  double x = 0.0, y = 0.0, z = 1.0;

  double norm2() const { return x * x + y * y + z * z; }
  void require_normalized(const char* who) const {
    if (std::abs(norm2() - 1.0) > 1e-12)
      throw std::invalid_argument(std::string(who) +
                                  ": point not on the unit sphere");
  }
};

// Rotation by p about z, then torsion by angle kappa*X about x (matching the
// quantum ordering: kick first, then torsion). Both stages are isometries;
// the output is renormalized so rounding never accumulates in the radius.
inline ClassicalSpinPoint classical_qkt_step(const ClassicalSpinPoint& pt,
                                             double p, double kappa) {
  pt.require_normalized("classical_qkt_step");
  const double cp = std::cos(p), sp = std::sin(p);
  const double rx = pt.x * cp - pt.y * sp;
  const double ry = pt.x * sp + pt.y * cp;
  const double rz = pt.z;
  const double a = kappa * rx;
  const double ca = std::cos(a), sa = std::sin(a);
  ClassicalSpinPoint out{rx, ry * ca - rz * sa, ry * sa + rz * ca};
  const double scale = 1.0 / std::sqrt(out.norm2());
  out.x *= scale;
  out.y *= scale;
  out.z *= scale;
  return out;
}

namespace detail {

// step together with its tangent map
inline ClassicalSpinPoint classical_qkt_step_tangent(
    const ClassicalSpinPoint& pt, double p, double kappa,
    Eigen::Vector3d& tangent) {
  const double cp = std::cos(p), sp = std::sin(p);
  const double rx = pt.x * cp - pt.y * sp;
  const double ry = pt.x * sp + pt.y * cp;
  const double rz = pt.z;
  const Eigen::Vector3d tr(tangent[0] * cp - tangent[1] * sp,
                           tangent[0] * sp + tangent[1] * cp, tangent[2]);
  const double a = kappa * rx;
  const double ca = std::cos(a), sa = std::sin(a);
  const ClassicalSpinPoint next{rx, ry * ca - rz * sa, ry * sa + rz * ca};
  tangent[0] = tr[0];
  tangent[1] = -kappa * next.z * tr[0] + ca * tr[1] - sa * tr[2];
  tangent[2] = kappa * next.y * tr[0] + sa * tr[1] + ca * tr[2];
  return next;
}

inline Eigen::Vector3d as_vec(const ClassicalSpinPoint& pt) {
  return {pt.x, pt.y, pt.z};
}

// deterministic unit tangent at pt
inline Eigen::Vector3d initial_tangent(const ClassicalSpinPoint& pt) {
  const Eigen::Vector3d n = as_vec(pt);
  const Eigen::Vector3d seed =
      std::abs(n[2]) < 0.9 ? Eigen::Vector3d(0, 0, 1) : Eigen::Vector3d(1, 0, 0);
  return n.cross(seed).normalized();
}

}  // namespace detail

inline ClassicalSpinPoint random_sphere_point(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

// Largest Lyapunov exponent per kick period by tangent-vector
// renormalization, averaged over the given trajectories.
inline double lyapunov_estimate(double p, double kappa, int n_transient,
                                int n_steps,
                                const std::vector<ClassicalSpinPoint>& starts) {
  if (n_steps < 1)
    throw std::invalid_argument("lyapunov_estimate: n_steps must be >= 1");
  if (n_transient < 0)
    throw std::invalid_argument("lyapunov_estimate: n_transient must be >= 0");
  if (starts.empty())
    throw std::invalid_argument("lyapunov_estimate: need trajectories");
  double sum = 0.0;
  for (const ClassicalSpinPoint& start : starts) {
    start.require_normalized("lyapunov_estimate");
    ClassicalSpinPoint pt = start;
    for (int k = 0; k < n_transient; ++k) pt = classical_qkt_step(pt, p, kappa);
    Eigen::Vector3d v = detail::initial_tangent(pt);
    double log_sum = 0.0;
    for (int k = 0; k < n_steps; ++k) {
      pt = detail::classical_qkt_step_tangent(pt, p, kappa, v);
      // keep the tangent in the tangent plane against numerical drift
      const Eigen::Vector3d n = detail::as_vec(pt);
      v -= v.dot(n) * n;
      const double g = v.norm();
      log_sum += std::log(g);
      v /= g;
    }
    sum += log_sum / n_steps;
  }
  return sum / static_cast<double>(starts.size());
}

inline double lyapunov_estimate(double p, double kappa, int n_transient,
                                int n_steps, int n_trajectories,
                                std::uint64_t seed) {
  if (n_trajectories < 1)
    throw std::invalid_argument("lyapunov_estimate: need trajectories");
  Rng rng(seed);
  std::vector<ClassicalSpinPoint> starts;
  starts.reserve(static_cast<std::size_t>(n_trajectories));
  for (int i = 0; i < n_trajectories; ++i)
    starts.push_back(random_sphere_point(rng));
  return lyapunov_estimate(p, kappa, n_transient, n_steps, starts);
}

// Stroboscopic trajectories; each output trajectory holds n_steps+1 points
// starting with the initial one.
inline std::vector<std::vector<ClassicalSpinPoint>> phase_portrait(
    double p, double kappa, const std::vector<ClassicalSpinPoint>& initial,
    int n_steps) {
  if (n_steps < 0)
    throw std::invalid_argument("phase_portrait: n_steps must be >= 0");
  std::vector<std::vector<ClassicalSpinPoint>> out;
  out.reserve(initial.size());
  for (const ClassicalSpinPoint& start : initial) {
    start.require_normalized("phase_portrait");
    std::vector<ClassicalSpinPoint> traj;
    traj.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.push_back(start);
    for (int k = 0; k < n_steps; ++k)
      traj.push_back(classical_qkt_step(traj.back(), p, kappa));
    out.push_back(std::move(traj));
  }
  return out;
}

}  // namespace aqsim
