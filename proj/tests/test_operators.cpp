#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "scarscope/operators.hpp"

using namespace scarscope;

namespace {

bool bit(std::uint32_t s, int site) { return (s >> (site - 1)) & 1u; }

// Term-by-term Eq.-style oracle in the full 2^L space, then restricted to
// the legal configurations.
Eigen::MatrixXd brute_force_pxp(const ConstrainedBasis& basis) {
  const int L = basis.sites();
  const Eigen::Index dim = Eigen::Index{1} << L;
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(dim, dim);
  auto down = [&](std::uint32_t s, int site) {
    if (site < 1) site += L;
    if (site > L) site -= L;
    return !bit(s, site);
  };
  for (Eigen::Index col = 0; col < dim; ++col) {
    const auto s = static_cast<std::uint32_t>(col);
    for (int m = 1; m <= L; ++m) {
      bool ok = true;
      if (basis.boundary() == Boundary::open) {
        if (m > 1 && !down(s, m - 1)) ok = false;
        if (m < L && !down(s, m + 1)) ok = false;
      } else {
        if (!down(s, m - 1) || !down(s, m + 1)) ok = false;
      }
      if (ok) full(col ^ (1u << (m - 1)), col) += 1.0;
    }
  }
  Eigen::MatrixXd restricted(basis.dim(), basis.dim());
  for (std::size_t a = 0; a < basis.dim(); ++a)
    for (std::size_t b = 0; b < basis.dim(); ++b)
      restricted(a, b) = full(basis.state(a), basis.state(b));
  return restricted;
}

}  // namespace

TEST_CASE("PXP at L=2 open couples 00 to 01 and 10") {
  ConstrainedBasis basis(2, Boundary::open);
  SparseOperator H = build_pxp(basis);
  REQUIRE(H.dim() == 3);
  Eigen::MatrixXcd D = H.mat.toDense();
  REQUIRE(D(0, 1).real() == 1.0);
  REQUIRE(D(0, 2).real() == 1.0);
  REQUIRE(D(1, 0).real() == 1.0);
  REQUIRE(D(2, 0).real() == 1.0);
  REQUIRE(D(1, 2) == cplx(0));
  REQUIRE(D.diagonal().norm() == 0.0);
}

TEST_CASE("PXP matches the term-by-term full-space oracle") {
  for (int L = 2; L <= 8; ++L) {
    for (auto bc : {Boundary::open, Boundary::periodic}) {
      ConstrainedBasis basis(L, bc);
      SparseOperator H = build_pxp(basis);
      Eigen::MatrixXd oracle = brute_force_pxp(basis);
      REQUIRE((H.mat.toDense().real() - oracle).cwiseAbs().maxCoeff() == 0.0);
      REQUIRE(H.mat.toDense().imag().cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("particle-hole conjugation flips the sign of PXP exactly") {
  for (int L : {2, 5, 9, 12}) {
    for (auto bc : {Boundary::open, Boundary::periodic}) {
      ConstrainedBasis basis(L, bc);
      SparseOperator H = build_pxp(basis);
      Eigen::VectorXd signs = parity_signs(L, &basis);
      SpMat conj = SpMat((signs.cast<cplx>().asDiagonal() * H.mat) *
                         signs.cast<cplx>().asDiagonal());
      SpMat sum = SpMat(conj + H.mat);
      double maxabs = 0;
      for (int k = 0; k < sum.outerSize(); ++k)
        for (SpMat::InnerIterator it(sum, k); it; ++it)
          maxabs = std::max(maxabs, std::abs(it.value()));
      REQUIRE(maxabs == 0.0);
    }
  }
}

TEST_CASE("Rydberg Hamiltonian term values") {
  SparseOperator H = build_rydberg(2, 2.0, 0.0, 12.0, 0.0);
  Eigen::MatrixXcd D = H.mat.toDense();
  REQUIRE(D(3, 3).real() == 12.0);  // |11>
  REQUIRE(D(0, 1).real() == 1.0);   // Rabi Omega/2
  REQUIRE(D(0, 0) == cplx(0));

  SparseOperator H2 = build_rydberg(3, 0.0, 1.0, 0.0, 5.0);
  REQUIRE(H2.mat.coeff(0b101, 0b101).real() == Catch::Approx(3.0));  // -2 + 5
}

TEST_CASE("H- equals the particle-hole conjugate of H+ exactly") {
  const int L = 6;
  SparseOperator Hp = build_rydberg(L, 2.0, 0.38, 12.0, 0.19, +1);
  SparseOperator Hm = build_rydberg(L, 2.0, 0.38, 12.0, 0.19, -1);
  Eigen::VectorXd signs = parity_signs(L);
  SpMat conj = SpMat((signs.cast<cplx>().asDiagonal() * Hp.mat) *
                     signs.cast<cplx>().asDiagonal());
  SpMat diff = SpMat(conj - Hm.mat);
  double maxabs = 0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it)
      maxabs = std::max(maxabs, std::abs(it.value()));
  REQUIRE(maxabs == 0.0);
}

TEST_CASE("phenomenological couplings sampling") {
  PhenomCouplings a = sample_couplings(8, 1.0, 7);
  PhenomCouplings b = sample_couplings(8, 1.0, 7);
  REQUIRE(a.table == b.table);
  REQUIRE(a.table.size() == 5);
  int entries = 0;
  double mean_abs = 0;
  for (const auto& row : a.table)
    for (double v : row) {
      REQUIRE(std::abs(v) <= std::sqrt(3.0));
      mean_abs += std::abs(v);
      ++entries;
    }
  REQUIRE(entries == 45);
  mean_abs /= entries;
  // statistical check: E|J| = sqrt(3)/2 for this draw
  REQUIRE(std::abs(mean_abs - 1.0) < 0.2);

  PhenomCouplings c = sample_couplings(8, 1.0, 8);
  REQUIRE(a.table != c.table);
}

TEST_CASE("phenomenological model with J=0 is a free x-field") {
  PhenomCouplings zero = sample_couplings(4, 1.0, 1);
  for (auto& row : zero.table) row.fill(0.0);
  const double omega = 1.7;
  SparseOperator H = build_phenom(4, omega, zero);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.mat.toDense());
  Eigen::VectorXd expected(16);
  expected << -2, -1, -1, -1, -1, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2;
  for (int k = 0; k < 16; ++k)
    REQUIRE(es.eigenvalues()[k] == Catch::Approx(omega * expected[k]).margin(1e-10));
}

TEST_CASE("singlet projector inside the phenomenological coupling") {
  // L=4 with only J^{zz}_{1,4} = 1: H' - Rabi = sigma^z_1 sigma^z_4 P_{2,3}.
  PhenomCouplings c = sample_couplings(4, 1.0, 1);
  for (auto& row : c.table) row.fill(0.0);
  c.table[0][2 * 3 + 2] = 1.0;  // zz
  SparseOperator H = build_phenom(4, 0.0, c);
  Eigen::MatrixXcd D = H.mat.toDense();

  Eigen::VectorXcd singlet = Eigen::VectorXcd::Zero(16);
  // pair (2,3) singlet embedded with sites 1,4 down
  singlet[0b0010] = 1.0 / std::sqrt(2.0);
  singlet[0b0100] = -1.0 / std::sqrt(2.0);
  // sigma^z_1 sigma^z_4 on down-down gives (+1); P|singlet> = |singlet>
  REQUIRE((D * singlet - singlet).norm() == Catch::Approx(0.0).margin(1e-14));

  Eigen::VectorXcd triplet = Eigen::VectorXcd::Zero(16);
  triplet[0b0010] = 1.0 / std::sqrt(2.0);
  triplet[0b0100] = 1.0 / std::sqrt(2.0);
  REQUIRE((D * triplet).norm() == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("builders are Hermitian") {
  ConstrainedBasis basis(7, Boundary::open);
  REQUIRE(build_pxp(basis).hermiticity_defect() == 0.0);
  REQUIRE(build_rydberg(5, 2.0, 0.4, 12.0, 0.2).hermiticity_defect() == 0.0);
  PhenomCouplings c = sample_couplings(6, 1.0, 3);
  REQUIRE(build_phenom(6, 1.0, c).hermiticity_defect() < 1e-14);
}

TEST_CASE("local operators") {
  SparseOperator z1 = local_operator_full(1, 1, Axis::z);
  Eigen::MatrixXcd D = z1.mat.toDense();
  REQUIRE(D(0, 0).real() == -1.0);
  REQUIRE(D(1, 1).real() == 1.0);

  ConstrainedBasis basis(3, Boundary::open);
  SparseOperator x2 = local_operator(basis, 2, Axis::x);
  Eigen::MatrixXcd X = x2.mat.toDense();
  // couples 000 <-> 010 only; 101 -> 111 amplitude dropped
  auto i000 = static_cast<Eigen::Index>(basis.index_of(0b000).value());
  auto i010 = static_cast<Eigen::Index>(basis.index_of(0b010).value());
  REQUIRE(X(i010, i000).real() == 1.0);
  REQUIRE(X(i000, i010).real() == 1.0);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(5, 5);
  expected(i010, i000) = expected(i000, i010) = 1.0;
  REQUIRE((X - expected).cwiseAbs().maxCoeff() == 0.0);

  SparseOperator z2 = local_operator(basis, 2, Axis::z);
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    double expect = bit(basis.state(k), 2) ? 1.0 : -1.0;
    REQUIRE(z2.mat.coeff(k, k).real() == expect);
  }

  REQUIRE_THROWS_AS(local_operator(basis, 2, Axis::x, false), usage_error);
  REQUIRE_THROWS_AS(local_operator(basis, 4, Axis::x), usage_error);

  // projected sigma^y keeps the same legality pattern as sigma^x
  SparseOperator y2 = local_operator(basis, 2, Axis::y);
  REQUIRE(y2.mat.coeff(i010, i000) == cplx(0, -1));
  REQUIRE(y2.mat.coeff(i000, i010) == cplx(0, 1));
}
