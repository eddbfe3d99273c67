#include <catch2/catch_amalgamated.hpp>

#include "aqsim/linalg.hpp"
#include "oracles.hpp"

using namespace aqsim;

namespace {

CMatrix random_hermitian(int dim, Rng& rng, double scale = 1.0) {
  CMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  return scale * 0.5 * (a + CMatrix(a.adjoint()));
}

// Hermitian matrix with deliberately repeated eigenvalues
CMatrix degenerate_hermitian(int dim, Rng& rng) {
  const CMatrix q = haar_random_unitary(dim, rng);
  Eigen::VectorXd vals(dim);
  for (int i = 0; i < dim; ++i) vals[i] = static_cast<double>(i / 3);
  return q * vals.asDiagonal() * q.adjoint();
}

}  // namespace

TEST_CASE("expm_hermitian basics") {
  Rng rng(11);
  const CMatrix h = random_hermitian(16, rng);

  SECTION("t = 0 gives the identity") {
    REQUIRE((expm_hermitian(h, 0.0) - CMatrix::Identity(16, 16)).norm() ==
            Catch::Approx(0.0).margin(1e-14));
  }

  SECTION("Pauli-x rotation by pi/2") {
    CMatrix sx(2, 2);
    sx << 0, 1, 1, 0;
    const CMatrix u = expm_hermitian(sx, M_PI / 2.0);
    const CMatrix expected = -kI * sx;  // exp(-i sx pi/2) = -i sx
    REQUIRE((u - expected).norm() < 1e-14);
  }

  SECTION("matches the series oracle on a random 16x16 Hermitian") {
    const CMatrix u = expm_hermitian(h, 0.3);
    const CMatrix ref = oracle::expm_minus_iht(h, 0.3);
    REQUIRE((u - ref).norm() < 1e-9);
  }

  SECTION("result is unitary") {
    REQUIRE(unitarity_deviation(expm_hermitian(h, 1.7)) < 1e-10);
  }

  SECTION("group property exp(-iHt) exp(-iHs) = exp(-iH(t+s))") {
    const CMatrix a = expm_hermitian(h, 0.4) * expm_hermitian(h, 1.1);
    REQUIRE((a - expm_hermitian(h, 1.5)).norm() < 1e-9);
  }

  SECTION("non-Hermitian input is rejected with a diagnostic") {
    CMatrix bad = h;
    bad(0, 1) += Complex(0.0, 1e-6);
    REQUIRE_THROWS_AS(expm_hermitian(bad, 1.0), std::invalid_argument);
  }
}

TEST_CASE("expm_directional_derivative") {
  Rng rng(22);

  SECTION("zero direction gives the zero matrix") {
    const CMatrix h = random_hermitian(8, rng);
    const CMatrix d =
        expm_directional_derivative(h, CMatrix::Zero(8, 8), 0.7);
    REQUIRE(d.norm() < 1e-14);
  }

  SECTION("H = 0 gives -i t dH") {
    const CMatrix dh = random_hermitian(8, rng);
    const CMatrix d =
        expm_directional_derivative(CMatrix::Zero(8, 8), dh, 0.9);
    REQUIRE((d - Complex(0.0, -0.9) * dh).norm() < 1e-13);
  }

  SECTION("matches central finite differences on random inputs") {
    for (int trial = 0; trial < 20; ++trial) {
      const CMatrix h = random_hermitian(8, rng);
      const CMatrix dh = random_hermitian(8, rng);
      const double t = rng.uniform(0.1, 2.0);
      const CMatrix d = expm_directional_derivative(h, dh, t);
      const CMatrix fd = oracle::expm_directional_fd(h, dh, t);
      REQUIRE((d - fd).norm() / fd.norm() < 1e-6);
    }
  }

  SECTION("handles a degenerate spectrum") {
    for (int trial = 0; trial < 5; ++trial) {
      const CMatrix h = degenerate_hermitian(9, rng);
      const CMatrix dh = random_hermitian(9, rng);
      const CMatrix d = expm_directional_derivative(h, dh, 1.3);
      const CMatrix fd = oracle::expm_directional_fd(h, dh, 1.3);
      REQUIRE((d - fd).norm() / fd.norm() < 1e-6);
    }
  }

  SECTION("dimension mismatch is rejected") {
    REQUIRE_THROWS_AS(expm_directional_derivative(CMatrix::Identity(4, 4),
                                                  CMatrix::Identity(5, 5), 1.0),
                      std::invalid_argument);
  }
}

TEST_CASE("gellmann_basis") {
  SECTION("d = 2 gives the Pauli matrices") {
    const auto basis = gellmann_basis(2);
    REQUIRE(basis.size() == 3);
    CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, -kI, kI, 0;
    sz << 1, 0, 0, -1;
    REQUIRE((basis[0] - sx).norm() < 1e-15);
    REQUIRE((basis[1] - sy).norm() < 1e-15);
    REQUIRE((basis[2] - sz).norm() < 1e-15);
  }

  SECTION("d = 3 matches the tabulated su(3) set") {
    const auto basis = gellmann_basis(3);
    const auto ref = oracle::su3_gellmann_tabulated();
    REQUIRE(basis.size() == 8);
    for (std::size_t j = 0; j < 8; ++j)
      REQUIRE((basis[j] - ref[j]).norm() < 1e-15);
  }

  SECTION("d = 16: count, tracelessness, orthonormality") {
    const auto basis = gellmann_basis(16);
    REQUIRE(basis.size() == 255);
    for (std::size_t a = 0; a < basis.size(); ++a) {
      REQUIRE(std::abs(basis[a].trace()) < 1e-12);
      for (std::size_t b = a; b < basis.size(); ++b) {
        const Complex tr = (basis[a] * basis[b]).trace();
        const double expected = a == b ? 2.0 : 0.0;
        REQUIRE(std::abs(tr - expected) < 1e-12);
      }
    }
  }

  SECTION("reconstructs traceless Hermitian matrices from coefficients") {
    Rng rng(33);
    const GellmannBasis basis(16);
    CMatrix x = random_hermitian(16, rng);
    x -= (x.trace() / 16.0) * CMatrix::Identity(16, 16);
    const Eigen::VectorXd coeff = basis.project(x);
    REQUIRE((basis.assemble(coeff) - x).norm() < 1e-10);
  }

  SECTION("assemble and matrix agree") {
    const GellmannBasis basis(5);
    Rng rng(44);
    Eigen::VectorXd v(basis.size());
    for (int j = 0; j < v.size(); ++j) v[j] = rng.normal();
    CMatrix direct = CMatrix::Zero(5, 5);
    for (int j = 0; j < basis.size(); ++j) direct += v[j] * basis.matrix(j);
    REQUIRE((basis.assemble(v) - direct).norm() < 1e-13);
  }

  SECTION("d < 2 is rejected") {
    REQUIRE_THROWS_AS(gellmann_basis(1), std::invalid_argument);
  }
}

TEST_CASE("unitary_fidelity") {
  Rng rng(55);
  const CMatrix w = haar_random_unitary(16, rng);

  SECTION("self fidelity is one") {
    REQUIRE(unitary_fidelity(w, w) == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("global phase invariance") {
    const Complex phase = std::exp(Complex(0.0, 1.234));
    REQUIRE(unitary_fidelity(w, phase * w) ==
            Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("symmetry and left invariance") {
    const CMatrix u = haar_random_unitary(16, rng);
    const CMatrix a = haar_random_unitary(16, rng);
    const double f = unitary_fidelity(w, u);
    REQUIRE(unitary_fidelity(u, w) == Catch::Approx(f).margin(1e-12));
    REQUIRE(unitary_fidelity(a * w, a * u) == Catch::Approx(f).margin(1e-10));
  }

  SECTION("Haar mean is 1/d^2") {
    const int n_draws = 10000;
    std::vector<double> fids;
    fids.reserve(n_draws);
    Rng sampler(2024);
    for (int k = 0; k < n_draws; ++k)
      fids.push_back(unitary_fidelity(w, haar_random_unitary(16, sampler)));
    const double m = oracle::mean(fids);
    const double se = oracle::standard_error(fids);
    REQUIRE(std::abs(m - 1.0 / 256.0) < 3.0 * se);
  }
}

TEST_CASE("hs_distance") {
  Rng rng(66);
  const CMatrix a = haar_random_unitary(8, rng);
  const CMatrix b = haar_random_unitary(8, rng);

  REQUIRE(hs_distance(a, a) == 0.0);
  REQUIRE(hs_distance(CMatrix::Identity(2, 2), -CMatrix::Identity(2, 2)) ==
          Catch::Approx(std::sqrt(8.0)));

  // element-wise summation oracle
  double acc = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) acc += std::norm(a(i, j) - b(i, j));
  REQUIRE(hs_distance(a, b) == Catch::Approx(std::sqrt(acc)).margin(1e-12));

  REQUIRE_THROWS_AS(hs_distance(a, CMatrix::Identity(4, 4)),
                    std::invalid_argument);
}

TEST_CASE("angular_momentum_ops") {
  SECTION("j = 1/2 gives the Pauli matrices over two") {
    const AngularMomentum op = angular_momentum_ops(0.5);
    CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, -kI, kI, 0;
    sz << 1, 0, 0, -1;
    REQUIRE((op.jx - 0.5 * sx).norm() < 1e-15);
    REQUIRE((op.jy - 0.5 * sy).norm() < 1e-15);
    REQUIRE((op.jz - 0.5 * sz).norm() < 1e-15);
  }

  SECTION("j = 15/2 spectrum and Casimir") {
    const AngularMomentum op = angular_momentum_ops(7.5);
    REQUIRE(op.jz.rows() == 16);
    REQUIRE(std::abs(op.jz.trace()) < 1e-12);
    REQUIRE(op.jz(0, 0).real() == Catch::Approx(7.5));
    REQUIRE(op.jz(15, 15).real() == Catch::Approx(-7.5));
    const CMatrix casimir = op.jx * op.jx + op.jy * op.jy + op.jz * op.jz;
    REQUIRE((casimir - 63.75 * CMatrix::Identity(16, 16)).norm() < 1e-10);
  }

  SECTION("commutator [Jx, Jy] = i Jz") {
    const AngularMomentum op = angular_momentum_ops(7.5);
    const CMatrix comm = op.jx * op.jy - op.jy * op.jx;
    REQUIRE((comm - kI * op.jz).norm() < 1e-12);
  }

  SECTION("invalid j is rejected") {
    REQUIRE_THROWS_AS(angular_momentum_ops(0.7), std::invalid_argument);
    REQUIRE_THROWS_AS(angular_momentum_ops(-1.0), std::invalid_argument);
  }
}

TEST_CASE("pauli_chain_op") {
  SECTION("single site") {
    CMatrix sz(2, 2);
    sz << 1, 0, 0, -1;
    REQUIRE((pauli_chain_op(1, 1, Axis::Z) - sz).norm() == 0.0);
  }

  SECTION("N = 4, site 2, z: diagonal with balanced spectrum") {
    const CMatrix op = pauli_chain_op(4, 2, Axis::Z);
    REQUIRE(op.rows() == 16);
    int plus = 0, minus = 0;
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j)
        if (i != j) REQUIRE(op(i, j) == Complex(0.0, 0.0));
      if (op(i, i).real() > 0)
        ++plus;
      else
        --minus;
    }
    REQUIRE(plus == 8);
    REQUIRE(minus == -8);
  }

  SECTION("operators on disjoint sites commute") {
    const CMatrix a =
        pauli_chain_op(4, 1, Axis::X) * pauli_chain_op(4, 2, Axis::X);
    const CMatrix b =
        pauli_chain_op(4, 3, Axis::X) * pauli_chain_op(4, 4, Axis::X);
    REQUIRE((a * b - b * a).norm() == 0.0);
  }

  SECTION("site out of range is rejected") {
    REQUIRE_THROWS_AS(pauli_chain_op(4, 0, Axis::X), std::invalid_argument);
    REQUIRE_THROWS_AS(pauli_chain_op(4, 5, Axis::X), std::invalid_argument);
  }
}

TEST_CASE("coherent_spin_state") {
  const AngularMomentum op = angular_momentum_ops(7.5);

  SECTION("theta = 0 is the stretched state") {
    const CVector s = coherent_spin_state(7.5, 0.0, 0.0);
    REQUIRE(std::abs(s[0] - Complex(1.0, 0.0)) < 1e-12);
  }

  SECTION("theta = pi lands on |j,-j> up to phase") {
    const CVector s = coherent_spin_state(7.5, M_PI, 0.4);
    REQUIRE(std::abs(std::abs(s[15]) - 1.0) < 1e-10);
  }

  SECTION("equatorial state points along +x") {
    const CVector s = coherent_spin_state(7.5, M_PI / 2.0, 0.0);
    const double jx = (s.adjoint() * op.jx * s)(0, 0).real();
    REQUIRE(std::abs(jx - 7.5) < 1e-10);
  }

  SECTION("Bloch vector follows the spherical angles") {
    const double theta = 1.1, phi = 2.3;
    const CVector s = coherent_spin_state(7.5, theta, phi);
    const double jx = (s.adjoint() * op.jx * s)(0, 0).real();
    const double jy = (s.adjoint() * op.jy * s)(0, 0).real();
    const double jz = (s.adjoint() * op.jz * s)(0, 0).real();
    REQUIRE(jx == Catch::Approx(7.5 * std::sin(theta) * std::cos(phi)).margin(1e-10));
    REQUIRE(jy == Catch::Approx(7.5 * std::sin(theta) * std::sin(phi)).margin(1e-10));
    REQUIRE(jz == Catch::Approx(7.5 * std::cos(theta)).margin(1e-10));
  }
}

TEST_CASE("haar_random") {
  SECTION("deterministic for a fixed seed") {
    const CMatrix a = haar_random_unitary(16, 99u);
    const CMatrix b = haar_random_unitary(16, 99u);
    REQUIRE((a - b).norm() == 0.0);
    REQUIRE((a - haar_random_unitary(16, 100u)).norm() > 1e-3);
  }

  SECTION("output is unitary") {
    Rng rng(7);
    for (int k = 0; k < 10; ++k)
      REQUIRE(unitarity_deviation(haar_random_unitary(16, rng)) < 1e-10);
  }

  SECTION("random states are normalized and deterministic") {
    const CVector v = haar_random_state(16, 5u);
    REQUIRE(is_normalized(v));
    REQUIRE((v - haar_random_state(16, 5u)).norm() == 0.0);
  }

  SECTION("eigenvalue angles are uniform on the circle") {
    Rng rng(31337);
    std::vector<double> angles;
    angles.reserve(16000);
    for (int draw = 0; draw < 1000; ++draw) {
      const CMatrix u = haar_random_unitary(16, rng);
      Eigen::ComplexEigenSolver<CMatrix> es(u, false);
      for (int k = 0; k < 16; ++k)
        angles.push_back(std::arg(es.eigenvalues()[k]));
    }
    const double chi2 = oracle::chi2_uniform(angles, -M_PI, M_PI, 16);
    // 99% critical value of chi-squared with 15 degrees of freedom
    REQUIRE(chi2 < 30.578);
  }
}

TEST_CASE("lie_closure_dimension") {
  CMatrix sx(2, 2), sy(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;

  REQUIRE(lie_closure_dimension({sx}) == 1);
  REQUIRE(lie_closure_dimension({sx, sy}) == 3);
  REQUIRE(lie_closure_dimension({sx, sy, CMatrix::Identity(2, 2)}) == 4);
}

TEST_CASE("validators") {
  Rng rng(8);
  const CMatrix u = haar_random_unitary(4, rng);
  REQUIRE(is_unitary(u));
  REQUIRE(!is_unitary(2.0 * u));
  REQUIRE(is_hermitian(random_hermitian(4, rng)));

  const CVector v = haar_random_state(4, rng);
  CMatrix rho = v * v.adjoint();
  REQUIRE(is_density_matrix(rho));
  rho(0, 0) += 0.1;
  REQUIRE(!is_density_matrix(rho));
}
