#pragma once

#include <Eigen/Dense>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aqsim/rng.hpp"

// Dense complex linear algebra and quantum primitives shared by all modules.
//
// Conventions pinned here and relied on everywhere else:
//  - propagators are exp(-i H t) for Hermitian H
//  - generalized Gell-Mann basis normalized to Tr(L_a L_b) = 2 delta_ab,
//    ordered: symmetric pairs, antisymmetric pairs, diagonal, lexicographic
//  - angular momentum matrices in the |j,m> basis with m descending (j..-j)

namespace aqsim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr Complex kI{0.0, 1.0};

namespace detail {
inline std::string with_value(const char* msg, double v) {
  std::ostringstream os;
  os << msg << " (" << v << ")";
  return os.str();
}
}  // namespace detail

inline void require_square(const CMatrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
}

inline void require_same_dim(const CMatrix& a, const CMatrix& b,
                             const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

inline double hermiticity_deviation(const CMatrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const CMatrix& a, double tol = kHermitianTol) {
  return a.rows() == a.cols() && hermiticity_deviation(a) <= tol;
}

inline void require_hermitian(const CMatrix& a, const char* who,
                              double tol = kHermitianTol) {
  require_square(a, who);
  const double dev = hermiticity_deviation(a);
  if (dev > tol)
    throw std::invalid_argument(detail::with_value(
        (std::string(who) + ": input not Hermitian; max |A - A^dag|").c_str(),
        dev));
}

// Hilbert-Schmidt deviation from unitarity, ||U^dag U - I||_HS
inline double unitarity_deviation(const CMatrix& u) {
  const auto n = u.rows();
  return (u.adjoint() * u - CMatrix::Identity(n, n)).norm();
}

inline bool is_unitary(const CMatrix& u, double tol = kUnitaryTol) {
  return u.rows() == u.cols() && unitarity_deviation(u) <= tol;
}

inline void require_unitary(const CMatrix& u, const char* who,
                            double tol = kUnitaryTol) {
  require_square(u, who);
  const double dev = unitarity_deviation(u);
  if (dev > tol)
    throw std::invalid_argument(detail::with_value(
        (std::string(who) + ": input not unitary; ||U^dag U - I||").c_str(),
        dev));
}

inline bool is_normalized(const CVector& v, double tol = 1e-12) {
  return std::abs(v.squaredNorm() - 1.0) <= tol;
}

inline void require_normalized(const CVector& v, const char* who,
                               double tol = 1e-12) {
  if (!is_normalized(v, tol))
    throw std::invalid_argument(std::string(who) + ": state not normalized");
}

// density matrix: Hermitian, unit trace, positive semidefinite
inline bool is_density_matrix(const CMatrix& rho, double tol = 1e-12,
                              double eig_tol = 1e-10) {
  if (!is_hermitian(rho, tol)) return false;
  if (std::abs(rho.trace().real() - 1.0) > tol ||
      std::abs(rho.trace().imag()) > tol)
    return false;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -eig_tol;
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition and matrix exponentials
// ---------------------------------------------------------------------------

struct HermitianEig {
  Eigen::VectorXd values;
  CMatrix vectors;  // columns are eigenvectors
};

inline HermitianEig eig_hermitian(const CMatrix& h, const char* who) {
  require_hermitian(h, who);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error(std::string(who) + ": eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline HermitianEig eig_hermitian(const CMatrix& h) {
  return eig_hermitian(h, "eig_hermitian");
}

// exp(-i H t) from a precomputed eigendecomposition of H
inline CMatrix expm_from_eig(const HermitianEig& eig, double t) {
  const auto n = eig.values.size();
  CVector phases(n);
  for (Eigen::Index k = 0; k < n; ++k)
    phases[k] = std::exp(Complex(0.0, -eig.values[k] * t));
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

// exp(-i H t) for Hermitian H, exact to machine precision via the spectral
// decomposition. Non-Hermitian input beyond tolerance is rejected.
inline CMatrix expm_hermitian(const CMatrix& h, double t) {
  return expm_from_eig(eig_hermitian(h, "expm_hermitian"), t);
}

// d/de exp(-i (H + e dH) t) at e = 0, via the divided-difference (Loewner)
// kernel in the eigenbasis of H. Coincident eigenvalues use the analytic
// limit -i t exp(-i lambda t).
inline CMatrix expm_dd_from_eig(const HermitianEig& eig, const CMatrix& dh,
                                double t, double degeneracy_tol = 1e-12) {
  const auto n = eig.values.size();
  const CMatrix g = eig.vectors.adjoint() * dh * eig.vectors;
  CMatrix phi(n, n);
  CVector f(n);
  for (Eigen::Index k = 0; k < n; ++k)
    f[k] = std::exp(Complex(0.0, -eig.values[k] * t));
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double gap = eig.values[a] - eig.values[b];
      phi(a, b) = std::abs(gap) < degeneracy_tol
                      ? Complex(0.0, -t) * f[a]
                      : (f[a] - f[b]) / gap;
    }
  }
  return eig.vectors * phi.cwiseProduct(g) * eig.vectors.adjoint();
}

inline CMatrix expm_directional_derivative(const CMatrix& h, const CMatrix& dh,
                                           double t) {
  require_same_dim(h, dh, "expm_directional_derivative");
  require_hermitian(dh, "expm_directional_derivative (direction)");
  return expm_dd_from_eig(eig_hermitian(h, "expm_directional_derivative"), dh,
                          t);
}

// ---------------------------------------------------------------------------
// Generalized Gell-Mann basis
// ---------------------------------------------------------------------------

// Basis of the d^2-1 traceless Hermitian d x d matrices with
// Tr(L_a L_b) = 2 delta_ab. Order: symmetric pairs (p<q, lexicographic),
// antisymmetric pairs (same order), then the d-1 diagonal matrices.
// Descriptors are kept alongside the dense matrices so that expansions
// sum v_j L_j and traces Tr(K L_j) can use the sparsity of each L_j.
class GellmannBasis {
 public:
  enum class Kind { Sym, Antisym, Diag };
  struct Entry {
    Kind kind;
    int p, q;  // pair indices; for Diag, q is the level index l (1-based)
  };

  explicit GellmannBasis(int d) : dim_(d) {
    if (d < 2)
      throw std::invalid_argument("gellmann_basis: dimension must be >= 2");
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) entries_.push_back({Kind::Sym, p, q});
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q)
        entries_.push_back({Kind::Antisym, p, q});
    for (int l = 1; l < d; ++l) entries_.push_back({Kind::Diag, 0, l});
  }

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<Entry>& entries() const { return entries_; }

  CMatrix matrix(int j) const {
    CMatrix m = CMatrix::Zero(dim_, dim_);
    const Entry& e = entries_.at(static_cast<std::size_t>(j));
    switch (e.kind) {
      case Kind::Sym:
        m(e.p, e.q) = 1.0;
        m(e.q, e.p) = 1.0;
        break;
      case Kind::Antisym:
        m(e.p, e.q) = -kI;
        m(e.q, e.p) = kI;
        break;
      case Kind::Diag: {
        const int l = e.q;
        const double c = std::sqrt(2.0 / (l * (l + 1.0)));
        for (int r = 0; r < l; ++r) m(r, r) = c;
        m(l, l) = -c * l;
        break;
      }
    }
    return m;
  }

  // sum_j v_j L_j
  CMatrix assemble(const Eigen::VectorXd& v) const {
    if (v.size() != size())
      throw std::invalid_argument("GellmannBasis::assemble: bad coefficient count");
    CMatrix a = CMatrix::Zero(dim_, dim_);
    int j = 0;
    for (const Entry& e : entries_) {
      const double vj = v[j++];
      switch (e.kind) {
        case Kind::Sym:
          a(e.p, e.q) += vj;
          a(e.q, e.p) += vj;
          break;
        case Kind::Antisym:
          a(e.p, e.q) += -kI * vj;
          a(e.q, e.p) += kI * vj;
          break;
        case Kind::Diag: {
          const int l = e.q;
          const double c = std::sqrt(2.0 / (l * (l + 1.0)));
          for (int r = 0; r < l; ++r) a(r, r) += c * vj;
          a(l, l) -= c * l * vj;
          break;
        }
      }
    }
    return a;
  }

  // t_j = Tr(K L_j) for all j, using the sparsity of each L_j
  CVector trace_products(const CMatrix& k) const {
    if (k.rows() != dim_ || k.cols() != dim_)
      throw std::invalid_argument("GellmannBasis::trace_products: bad dim");
    CVector out(size());
    // prefix sums of the diagonal for the diagonal generators
    CVector diag_prefix(dim_ + 1);
    diag_prefix[0] = 0.0;
    for (int r = 0; r < dim_; ++r) diag_prefix[r + 1] = diag_prefix[r] + k(r, r);
    int j = 0;
    for (const Entry& e : entries_) {
      switch (e.kind) {
        case Kind::Sym:
          out[j] = k(e.q, e.p) + k(e.p, e.q);
          break;
        case Kind::Antisym:
          out[j] = -kI * (k(e.q, e.p) - k(e.p, e.q));
          break;
        case Kind::Diag: {
          const int l = e.q;
          const double c = std::sqrt(2.0 / (l * (l + 1.0)));
          out[j] = c * (diag_prefix[l] - static_cast<double>(l) * k(l, l));
          break;
        }
      }
      ++j;
    }
    return out;
  }

  // expansion coefficients of a traceless Hermitian matrix: v_j = Tr(L_j X)/2
  Eigen::VectorXd project(const CMatrix& x) const {
    return trace_products(x).real() / 2.0;
  }

 private:
  int dim_;
  std::vector<Entry> entries_;
};

inline std::vector<CMatrix> gellmann_basis(int d) {
  GellmannBasis basis(d);
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(basis.size()));
  for (int j = 0; j < basis.size(); ++j) out.push_back(basis.matrix(j));
  return out;
}

// ---------------------------------------------------------------------------
// Fidelities and distances
// ---------------------------------------------------------------------------

// Tr(W^dag U) without forming the product
inline Complex overlap_trace(const CMatrix& w, const CMatrix& u) {
  return w.conjugate().cwiseProduct(u).sum();
}

// |Tr(W^dag U)|^2 / d^2, in [0,1] for unitary arguments
inline double unitary_fidelity(const CMatrix& w, const CMatrix& u) {
  require_same_dim(w, u, "unitary_fidelity");
  const double d = static_cast<double>(w.rows());
  return std::norm(overlap_trace(w, u)) / (d * d);
}

// Hilbert-Schmidt distance sqrt(Tr[(A-B)^dag (A-B)])
inline double hs_distance(const CMatrix& a, const CMatrix& b) {
  require_same_dim(a, b, "hs_distance");
  return (a - b).norm();
}

// ---------------------------------------------------------------------------
// Spin operators and states
// ---------------------------------------------------------------------------

struct AngularMomentum {
  CMatrix jx, jy, jz;
};

// Standard spin-j matrices in the |j,m> basis, m = j..-j (index 0 is m=j).
inline AngularMomentum angular_momentum_ops(double j) {
  const double two_j = 2.0 * j;
  if (j < 0 || std::abs(two_j - std::round(two_j)) > 1e-9)
    throw std::invalid_argument(
        detail::with_value("angular_momentum_ops: j must be half-integer", j));
  const int n = static_cast<int>(std::round(two_j)) + 1;
  CMatrix jp = CMatrix::Zero(n, n);  // raising operator
  for (int k = 1; k < n; ++k) {
    const double m = j - k;  // J+ |j,m> -> row k-1
    jp(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  AngularMomentum ops;
  ops.jx = 0.5 * (jp + jp.adjoint());
  ops.jy = -0.5 * kI * (jp - CMatrix(jp.adjoint()));
  ops.jz = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) ops.jz(k, k) = j - k;
  return ops;
}

enum class Axis { X, Y, Z };

// I (x) ... (x) sigma_axis (x) ... (x) I on 2^n_sites dimensions.
// Site 1 occupies the most significant tensor factor.
inline CMatrix pauli_chain_op(int n_sites, int site, Axis axis) {
  if (n_sites < 1)
    throw std::invalid_argument("pauli_chain_op: need at least one site");
  if (site < 1 || site > n_sites)
    throw std::invalid_argument("pauli_chain_op: site out of range");
  CMatrix sigma(2, 2);
  switch (axis) {
    case Axis::X: sigma << 0, 1, 1, 0; break;
    case Axis::Y: sigma << 0, -kI, kI, 0; break;
    case Axis::Z: sigma << 1, 0, 0, -1; break;
  }
  const long dim = 1L << n_sites;
  const long before = 1L << (site - 1);   // identity block above the site
  const long after = 1L << (n_sites - site);
  CMatrix op = CMatrix::Zero(dim, dim);
  for (long b = 0; b < before; ++b)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        if (sigma(r, c) == Complex(0.0, 0.0)) continue;
        for (long a = 0; a < after; ++a)
          op((b * 2 + r) * after + a, (b * 2 + c) * after + a) = sigma(r, c);
      }
  return op;
}

// SU(2) coherent state: |j,j> rotated by theta about (-sin phi, cos phi, 0).
// Its Bloch vector is (sin t cos p, sin t sin p, cos t).
inline CVector coherent_spin_state(double j, double theta, double phi) {
  const AngularMomentum ops = angular_momentum_ops(j);
  const CMatrix axis_op = -std::sin(phi) * ops.jx + std::cos(phi) * ops.jy;
  const CMatrix r = expm_hermitian(axis_op, theta);
  return r.col(0);
}

// ---------------------------------------------------------------------------
// Haar-random unitaries and states
// ---------------------------------------------------------------------------

// QR of a Ginibre matrix with the R diagonal phases absorbed into Q.
inline CMatrix haar_random_unitary(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("haar_random_unitary: dim >= 1");
  CMatrix z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) z(i, k) = Complex(rng.normal(), rng.normal());
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < dim; ++k) {
    const Complex rkk = r(k, k);
    q.col(k) *= rkk / std::abs(rkk);
  }
  return q;
}

inline CMatrix haar_random_unitary(int dim, std::uint64_t seed) {
  Rng rng(seed);
  return haar_random_unitary(dim, rng);
}

inline CVector haar_random_state(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("haar_random_state: dim >= 1");
  CVector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex(rng.normal(), rng.normal());
  return v / v.norm();
}

inline CVector haar_random_state(int dim, std::uint64_t seed) {
  Rng rng(seed);
  return haar_random_state(dim, rng);
}

// ---------------------------------------------------------------------------
// Lie closure
// ---------------------------------------------------------------------------

// Dimension of the real Lie algebra generated by a set of Hermitian matrices
// under the bracket (A,B) -> i[A,B], computed by rank-revealing
// orthogonalization in the Hilbert-Schmidt inner product. Candidates are
// normalized before projection, so `tol` is a relative threshold.
inline int lie_closure_dimension(const std::vector<CMatrix>& generators,
                                 double tol = 1e-9) {
  if (generators.empty()) return 0;
  const auto n = generators.front().rows();
  const int max_dim = static_cast<int>(n * n);
  std::vector<CMatrix> basis;

  auto try_add = [&](CMatrix m) -> bool {
    const double scale = m.norm();
    if (!(scale > 0.0)) return false;
    m /= scale;
    for (int pass = 0; pass < 2; ++pass)
      for (const CMatrix& b : basis)
        m -= b.conjugate().cwiseProduct(m).sum().real() * b;
    const double residual = m.norm();
    if (residual <= tol) return false;
    basis.push_back(m / residual);
    return true;
  };

  for (const CMatrix& g : generators) {
    require_hermitian(g, "lie_closure_dimension", 1e-10);
    if (g.rows() != n) throw std::invalid_argument("lie_closure_dimension: dims");
    try_add(g);
  }

  std::size_t frontier = 0;
  while (frontier < basis.size() && static_cast<int>(basis.size()) < max_dim) {
    const std::size_t end = basis.size();
    for (std::size_t inew = frontier; inew < end; ++inew) {
      for (std::size_t iold = 0; iold < inew; ++iold) {
        const CMatrix comm =
            kI * (basis[inew] * basis[iold] - basis[iold] * basis[inew]);
        try_add(comm);
        if (static_cast<int>(basis.size()) >= max_dim) break;
      }
      if (static_cast<int>(basis.size()) >= max_dim) break;
    }
    frontier = end;
  }
  return static_cast<int>(basis.size());
}

}  // namespace aqsim
