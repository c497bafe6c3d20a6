#include <catch2/catch_amalgamated.hpp>

#include "scarscope/scramble.hpp"

using namespace scarscope;

namespace {

std::vector<double> linspace(double t0, double t1, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = t0 + (t1 - t0) * k / (n - 1);
  return out;
}

Eigen::MatrixXcd dense_heisenberg(const SparseOperator& H, const SparseOperator& V, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.mat.toDense());
  Eigen::MatrixXcd U = es.eigenvectors();
  Eigen::VectorXcd ph = (cplx(0, 1) * t * es.eigenvalues().cast<cplx>().array()).exp();
  Eigen::MatrixXcd expP = U * ph.asDiagonal() * U.adjoint();
  return expP * V.mat.toDense() * expP.adjoint();
}

}  // namespace

TEST_CASE("ZZ-OTOC is 1 at t=0 for distinct sites") {
  ConstrainedBasis basis(8, Boundary::open);
  SparseOperator H = build_pxp(basis);
  auto ctx = BasisContext::of(basis);
  StateVector z2 = neel_state(basis);
  ScramblingField f = otoc_series(H, ctx, z2, 4, {1, 2, 6, 8}, Axis::z, Axis::z, {0.0});
  for (Eigen::Index j = 0; j < f.site_count(); ++j) {
    REQUIRE(f.values(j, 0).real() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(f.flags(j, 0) == point_ok);
  }
}

TEST_CASE("same-site XZ-OTOC is -1 at t=0 on the full space") {
  SparseOperator H = build_rydberg(4, 2.0, 0.3, 12.0, 0.19);
  auto ctx = BasisContext::full(4);
  StateVector psi = basis_state_full(4, 0b0101);
  ScramblingField f = otoc_series(H, ctx, psi, 2, {2}, Axis::x, Axis::z, {0.0});
  REQUIRE(f.values(0, 0).real() == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("squared commutator matches the brute-force commutator norm") {
  const int L = 6;
  SparseOperator H = build_rydberg(L, 1.7, 0.4, 5.0, 0.8);
  auto ctx = BasisContext::full(L);
  std::srand(42);
  StateVector psi{Eigen::VectorXcd::Random(1 << L), ctx.tag()};
  psi.normalize();
  const int i = 2;
  std::vector<int> sites{1, 3, 5, 6};
  std::vector<double> times{0.4, 1.1, 2.9};
  ScramblingField f = otoc_series(H, ctx, psi, i, sites, Axis::z, Axis::z, times);
  Eigen::MatrixXd C = squared_commutator(f);

  SparseOperator W = ctx.pauli(i, Axis::z);
  for (std::size_t j = 0; j < sites.size(); ++j) {
    SparseOperator V = ctx.pauli(sites[j], Axis::z);
    for (std::size_t it = 0; it < times.size(); ++it) {
      Eigen::MatrixXcd Vt = dense_heisenberg(H, V, times[it]);
      Eigen::MatrixXcd comm = W.mat.toDense() * Vt - Vt * W.mat.toDense();
      double direct = (comm * psi.amplitudes).squaredNorm();
      REQUIRE(C(j, it) == Catch::Approx(direct).margin(1e-9));
    }
  }
}

TEST_CASE("Krylov and spectral OTOC paths agree") {
  ConstrainedBasis basis(10, Boundary::open);
  SparseOperator H = build_pxp(basis);
  auto ctx = BasisContext::of(basis);
  StateVector z2 = neel_state(basis);
  std::vector<int> sites{3, 5, 7};
  std::vector<double> times{1.0, 3.0, 6.0};

  ScrambleOptions ed;
  ed.backend = ExactBackend::spectral;
  ScramblingField fs = otoc_series(H, ctx, z2, 5, sites, Axis::z, Axis::z, times, ed);

  ScrambleOptions kr;
  kr.backend = ExactBackend::krylov;
  kr.krylov_tol = 1e-11;
  ScramblingField fk = otoc_series(H, ctx, z2, 5, sites, Axis::z, Axis::z, times, kr);

  REQUIRE((fs.values - fk.values).cwiseAbs().maxCoeff() < 1e-7);

  // general (non-eigenstate) path against the same oracle
  StateVector mix{(z2.amplitudes + zero_state(basis).amplitudes) / std::sqrt(2.0), basis.tag()};
  mix.normalize();
  ScramblingField gs = otoc_series(H, ctx, mix, 5, sites, Axis::z, Axis::z, times, ed);
  ScramblingField gk = otoc_series(H, ctx, mix, 5, sites, Axis::z, Axis::z, times, kr);
  REQUIRE((gs.values - gk.values).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("XZ-OTOC flags points where W annihilates the state") {
  ConstrainedBasis basis(8, Boundary::open);
  SparseOperator H = build_pxp(basis);
  auto ctx = BasisContext::of(basis);
  StateVector z2 = neel_state(basis);
  // site 4 is down in |Z2> with both neighbours up: projected sigma^x kills it
  ScramblingField f = otoc_series(H, ctx, z2, 4, {2, 6}, Axis::x, Axis::z, {0.0, 1.0});
  REQUIRE((f.flags.array() == point_undefined).all());
  // site 5 is up: legal, well-defined everywhere
  ScramblingField g = otoc_series(H, ctx, z2, 5, {2, 6}, Axis::x, Axis::z, {0.0, 1.0});
  REQUIRE((g.flags.array() == point_ok).all());
}

TEST_CASE("reduced density matrices") {
  ConstrainedBasis basis(8, Boundary::open);
  auto ctx = BasisContext::of(basis);
  StateVector z2 = neel_state(basis);
  Eigen::Matrix2cd rho = reduced_density(z2, ctx, 3);
  REQUIRE(rho(1, 1).real() == Catch::Approx(1.0));
  REQUIRE(std::abs(rho(0, 0)) < 1e-14);

  // Bell pair on the full two-site space
  StateVector bell{Eigen::VectorXcd::Zero(4), full_space_tag(2)};
  bell.amplitudes[0b01] = 1 / std::sqrt(2.0);
  bell.amplitudes[0b10] = 1 / std::sqrt(2.0);
  for (int site : {1, 2}) {
    Eigen::Matrix2cd r = reduced_density(bell, BasisContext::full(2), site);
    REQUIRE(r(0, 0).real() == Catch::Approx(0.5));
    REQUIRE(r(1, 1).real() == Catch::Approx(0.5));
    REQUIRE(std::abs(r(0, 1)) < 1e-14);
  }

  // dense full-density-matrix partial trace oracle at L=8
  std::srand(7);
  SparseOperator H = build_pxp(basis);
  EigenDecomposition d = diagonalize(H);
  StateVector psi{Eigen::VectorXcd::Random(static_cast<Eigen::Index>(basis.dim())), basis.tag()};
  psi.normalize();
  psi = propagate_spectral(d, psi, 1.3);
  Eigen::VectorXcd full = ctx.embed(psi.amplitudes);
  for (int site = 1; site <= 8; ++site) {
    Eigen::Matrix2cd mine = reduced_density(psi, ctx, site);
    Eigen::Matrix2cd oracle = Eigen::Matrix2cd::Zero();
    const int mask = 1 << (site - 1);
    for (int s = 0; s < 256; ++s)
      for (int b = 0; b < 2; ++b) {
        int t = (s & ~mask) | (b ? mask : 0);
        int sb = (s & mask) ? 1 : 0;
        oracle(sb, b) += full[s] * std::conj(full[t]);
      }
    REQUIRE((mine - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("von Neumann entropy values") {
  Eigen::Matrix2cd pure = Eigen::Matrix2cd::Zero();
  pure(1, 1) = 1.0;
  REQUIRE(von_neumann_entropy(pure) == 0.0);

  Eigen::Matrix2cd mixed = 0.5 * Eigen::Matrix2cd::Identity();
  REQUIRE(von_neumann_entropy(mixed) == Catch::Approx(1.0).margin(1e-12));

  Eigen::Matrix2cd skew = Eigen::Matrix2cd::Zero();
  skew(0, 0) = 0.25;
  skew(1, 1) = 0.75;
  REQUIRE(von_neumann_entropy(skew) == Catch::Approx(0.811278).margin(1e-6));

  Eigen::Matrix2cd bad = 0.7 * Eigen::Matrix2cd::Identity();
  REQUIRE_THROWS_AS(von_neumann_entropy(bad), usage_error);

  Eigen::Matrix2cd neg = Eigen::Matrix2cd::Zero();
  neg(0, 0) = 1.1;
  neg(1, 1) = -0.1;
  REQUIRE_THROWS_AS(von_neumann_entropy(neg), usage_error);
}

TEST_CASE("Holevo information basics") {
  ConstrainedBasis basis(8, Boundary::open);
  SparseOperator H = build_pxp(basis);
  auto ctx = BasisContext::of(basis);
  StateVector z2 = neel_state(basis);
  std::vector<int> probes{1, 2, 3, 4, 5, 6, 7, 8};
  ScramblingField f = holevo_series(H, ctx, z2, 5, probes, {0.0, 2.0, 5.0});

  REQUIRE(f.values(4, 0).real() == Catch::Approx(1.0).margin(1e-9));  // encode site
  for (int j : {0, 1, 2, 3, 5, 6, 7})
    REQUIRE(std::abs(f.values(j, 0)) < 1e-9);
  for (Eigen::Index j = 0; j < f.site_count(); ++j)
    for (Eigen::Index it = 0; it < f.time_count(); ++it) {
      REQUIRE(f.values(j, it).real() >= -1e-9);
      REQUIRE(f.values(j, it).real() <= 1.0 + 1e-9);
    }

  // swapping the two branches leaves chi invariant
  StateVector flipped{ctx.pauli(5, Axis::x).mat * z2.amplitudes, basis.tag()};
  ScramblingField g = holevo_series(H, ctx, flipped, 5, probes, {0.0, 2.0, 5.0});
  REQUIRE((f.values - g.values).cwiseAbs().maxCoeff() < 1e-10);

  // illegal encoding flip: site 4 of |Z2> is blockaded
  REQUIRE_THROWS_AS(holevo_series(H, ctx, z2, 4, probes, {0.0}), usage_error);
}

TEST_CASE("Holevo Krylov path matches the spectral path") {
  ConstrainedBasis basis(8, Boundary::open);
  SparseOperator H = build_pxp(basis);
  auto ctx = BasisContext::of(basis);
  StateVector z2 = neel_state(basis);
  std::vector<int> probes{2, 5, 7};
  std::vector<double> times{0.5, 1.5, 4.0};
  ScrambleOptions ed;
  ed.backend = ExactBackend::spectral;
  ScrambleOptions kr;
  kr.backend = ExactBackend::krylov;
  kr.krylov_tol = 1e-11;
  ScramblingField fe = holevo_series(H, ctx, z2, 5, probes, times, ed);
  ScramblingField fk = holevo_series(H, ctx, z2, 5, probes, times, kr);
  REQUIRE((fe.values - fk.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("Rydberg protocol equals the independent four-operator route") {
  const int L = 8;
  RydbergParams p{2.0, 0.38, 12.0, 0.19};
  std::vector<int> sites{1, 3, 5, 8};
  std::vector<double> times{0.0, 0.7, 1.9, 3.3};
  const int i = 4;
  ScramblingField proto = rydberg_zz_protocol(L, p, neel_config(L), i, sites, times);
  ScramblingField direct = rydberg_zz_direct(L, p, neel_config(L), i, sites, times);
  REQUIRE((proto.values - direct.values).cwiseAbs().maxCoeff() < 1e-10);

  for (Eigen::Index j = 0; j < proto.site_count(); ++j)
    if (sites[j] != i)
      REQUIRE(proto.values(j, 0).real() == Catch::Approx(1.0).margin(1e-12));
}
