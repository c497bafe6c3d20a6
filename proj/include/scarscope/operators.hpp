#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scarscope/hilbert.hpp"
#include "scarscope/linalg.hpp"
#include "scarscope/state.hpp"

namespace scarscope {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<cplx>;

struct SparseOperator {
  SpMat mat;
  bool hermitian = true;
  std::string basis_tag;

  Eigen::Index dim() const { return mat.rows(); }

  // Largest |A - A^dagger| entry; zero for exactly Hermitian operators.
  double hermiticity_defect() const {
    SpMat d = SpMat(mat.adjoint()) - mat;
    double defect = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
      for (SpMat::InnerIterator it(d, k); it; ++it)
        defect = std::max(defect, std::abs(it.value()));
    return defect;
  }
};

enum class Axis { x, y, z };

inline char to_char(Axis a) { return a == Axis::x ? 'x' : (a == Axis::y ? 'y' : 'z'); }

inline Axis axis_from_char(char c) {
  switch (c) {
    case 'x': return Axis::x;
    case 'y': return Axis::y;
    case 'z': return Axis::z;
  }
  throw usage_error("axis must be one of x, y, z");
}

// Pauli matrices in the (down=0, up=1) ordering: sigma_z = diag(-1, +1).
inline Eigen::Matrix2cd pauli(Axis a) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  const cplx I(0, 1);
  switch (a) {
    case Axis::x: m(0, 1) = 1; m(1, 0) = 1; break;
    case Axis::y: m(0, 1) = I; m(1, 0) = -I; break;
    case Axis::z: m(0, 0) = -1; m(1, 1) = 1; break;
  }
  return m;
}

namespace detail {

inline bool bit(std::uint32_t s, int site) { return (s >> (site - 1)) & 1u; }
inline std::uint32_t flip(std::uint32_t s, int site) { return s ^ (std::uint32_t{1} << (site - 1)); }

// Phase of sigma^a |b> -> |b'> on a single site; b' = b for z, flipped otherwise.
inline cplx pauli_phase(Axis a, bool b) {
  switch (a) {
    case Axis::x: return 1.0;
    case Axis::y: return b ? cplx(0, 1) : cplx(0, -1);
    case Axis::z: return b ? 1.0 : -1.0;
  }
  return 0.0;
}

// Distinct chain neighbours of a site under the given boundary.
inline std::vector<int> neighbours(int site, int L, Boundary bc) {
  std::vector<int> out;
  if (bc == Boundary::open) {
    if (site > 1) out.push_back(site - 1);
    if (site < L) out.push_back(site + 1);
  } else {
    int left = site == 1 ? L : site - 1;
    int right = site == L ? 1 : site + 1;
    out.push_back(left);
    if (right != left) out.push_back(right);
  }
  return out;
}

}  // namespace detail

// H = sum_j P_j sigma^x_{j+1} P_{j+2} on the constrained space. The
// projectors are implicit in the basis: a flip at site m is allowed
// when all existing neighbours of m are down. Open boundaries keep the
// two boundary terms sigma^x_1 P_2 and P_{L-1} sigma^x_L.
inline SparseOperator build_pxp(const ConstrainedBasis& basis) {
  const int L = basis.sites();
  std::vector<Triplet> trip;
  trip.reserve(basis.dim() * L / 2);
  for (std::size_t a = 0; a < basis.dim(); ++a) {
    const std::uint32_t s = basis.state(a);
    for (int m = 1; m <= L; ++m) {
      bool blocked = false;
      for (int nb : detail::neighbours(m, L, basis.boundary()))
        if (detail::bit(s, nb)) { blocked = true; break; }
      if (blocked) continue;
      auto b = basis.index_of(detail::flip(s, m));
      if (!b) continue;  // only reachable in degenerate periodic rings
      trip.emplace_back(static_cast<int>(a), static_cast<int>(*b), 1.0);
    }
  }
  SparseOperator H;
  H.mat.resize(static_cast<Eigen::Index>(basis.dim()), static_cast<Eigen::Index>(basis.dim()));
  H.mat.setFromTriplets(trip.begin(), trip.end());
  H.basis_tag = basis.tag();
  return H;
}

// H_pm = +-(Omega/2) sum sigma^x_i - Delta sum n_i
//        + U1 sum n_i n_{i+1} + U2 sum n_i n_{i+2}
// on the full 2^L space of an open chain; sign multiplies the Rabi term only.
inline SparseOperator build_rydberg(int L, double omega, double delta, double u1, double u2,
                                    int sign = +1) {
  if (L < 1 || L > 24) throw usage_error("build_rydberg: L must be in [1, 24]");
  if (sign != 1 && sign != -1) throw usage_error("build_rydberg: sign must be +1 or -1");
  const Eigen::Index dim = Eigen::Index{1} << L;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(dim) * (L + 1));
  for (Eigen::Index s = 0; s < dim; ++s) {
    const auto u = static_cast<std::uint32_t>(s);
    double diag = -delta * __builtin_popcount(u);
    for (int i = 1; i + 1 <= L; ++i)
      if (detail::bit(u, i) && detail::bit(u, i + 1)) diag += u1;
    for (int i = 1; i + 2 <= L; ++i)
      if (detail::bit(u, i) && detail::bit(u, i + 2)) diag += u2;
    if (diag != 0.0) trip.emplace_back(s, s, diag);
    for (int i = 1; i <= L; ++i)
      trip.emplace_back(s, static_cast<Eigen::Index>(detail::flip(u, i)), sign * omega / 2.0);
  }
  SparseOperator H;
  H.mat.resize(dim, dim);
  H.mat.setFromTriplets(trip.begin(), trip.end());
  H.basis_tag = full_space_tag(L);
  return H;
}

// Random couplings J^{mu nu}_{i,i+3} for the phenomenological model,
// i.i.d. uniform on [-sqrt(3) J, sqrt(3) J] (unit variance at J = 1).
// The draw uses raw mt19937_64 output so tables are reproducible across
// platforms.
struct PhenomCouplings {
  int L = 0;
  double J = 1.0;
  std::uint64_t seed = 0;
  // row i-1 holds J^{mu nu}_{i,i+3}, mu nu in row-major {x,y,z} x {x,y,z}
  std::vector<std::array<double, 9>> table;

  double coupling(int i, int mu, int nu) const { return table[i - 1][mu * 3 + nu]; }
};

inline PhenomCouplings sample_couplings(int L, double J, std::uint64_t seed) {
  if (L < 4) throw usage_error("sample_couplings: L must be >= 4");
  PhenomCouplings c{L, J, seed, {}};
  c.table.resize(L - 3);
  std::mt19937_64 rng(seed);
  const double w = std::sqrt(3.0) * J;
  for (auto& row : c.table)
    for (double& v : row) {
      double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
      v = w * (2.0 * u01 - 1.0);
    }
  return c;
}

// H' = (Omega/2) sum sigma^x_i + sum_i R_{i,i+3} P_{i+1,i+2} with
// P the two-site singlet projector and R_{ij} = sum J^{mu nu} s^mu_i s^nu_j.
inline SparseOperator build_phenom(int L, double omega, const PhenomCouplings& couplings) {
  if (L < 4 || L > 14) throw usage_error("build_phenom: L must be in [4, 14]");
  if (couplings.L != L) throw usage_error("build_phenom: couplings built for a different L");
  const Eigen::Index dim = Eigen::Index{1} << L;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(dim) * (L + 4 * (L - 3)));
  const std::array<Axis, 3> axes{Axis::x, Axis::y, Axis::z};
  for (Eigen::Index s = 0; s < dim; ++s) {
    const auto u = static_cast<std::uint32_t>(s);
    for (int i = 1; i <= L; ++i)
      trip.emplace_back(s, static_cast<Eigen::Index>(detail::flip(u, i)), omega / 2.0);
    for (int i = 1; i + 3 <= L; ++i) {
      const bool b1 = detail::bit(u, i + 1), b2 = detail::bit(u, i + 2);
      if (b1 == b2) continue;  // triplet content only, singlet projector kills it
      // P_{i+1,i+2} |s> = (|s> - |s with the pair swapped>) / 2, with the
      // swapped ket fixed by which of |01>, |10> the pair holds.
      const std::uint32_t swapped = detail::flip(detail::flip(u, i + 1), i + 2);
      const std::array<std::uint32_t, 2> kets{u, swapped};
      const std::array<double, 2> coeff{0.5, -0.5};
      for (int kk = 0; kk < 2; ++kk) {
        const std::uint32_t k = kets[kk];
        for (int mu = 0; mu < 3; ++mu)
          for (int nu = 0; nu < 3; ++nu) {
            const double J = couplings.coupling(i, mu, nu);
            if (J == 0.0) continue;
            std::uint32_t t = k;
            cplx phase = coeff[kk] * J;
            // sigma^mu on site i
            phase *= detail::pauli_phase(axes[mu], detail::bit(t, i));
            if (axes[mu] != Axis::z) t = detail::flip(t, i);
            // sigma^nu on site i+3
            phase *= detail::pauli_phase(axes[nu], detail::bit(t, i + 3));
            if (axes[nu] != Axis::z) t = detail::flip(t, i + 3);
            trip.emplace_back(static_cast<Eigen::Index>(t), s, phase);
          }
      }
    }
  }
  SparseOperator H;
  H.mat.resize(dim, dim);
  H.mat.setFromTriplets(trip.begin(), trip.end());
  H.basis_tag = full_space_tag(L);
  return H;
}

// Exact Pauli matrix at one site of the full 2^L space.
inline SparseOperator local_operator_full(int L, int site, Axis axis) {
  if (site < 1 || site > L) throw usage_error("local_operator_full: site out of range");
  const Eigen::Index dim = Eigen::Index{1} << L;
  std::vector<Triplet> trip;
  trip.reserve(dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    const auto u = static_cast<std::uint32_t>(s);
    const bool b = detail::bit(u, site);
    const std::uint32_t t = axis == Axis::z ? u : detail::flip(u, site);
    trip.emplace_back(static_cast<Eigen::Index>(t), s, detail::pauli_phase(axis, b));
  }
  SparseOperator op;
  op.mat.resize(dim, dim);
  op.mat.setFromTriplets(trip.begin(), trip.end());
  op.basis_tag = full_space_tag(L);
  return op;
}

// Blockade-projected Pauli P sigma^alpha P on a constrained basis:
// amplitude towards blockade-violating targets is dropped.
inline SparseOperator local_operator(const ConstrainedBasis& basis, int site, Axis axis,
                                     bool projected = true) {
  if (!projected)
    throw usage_error("local_operator: only projected Paulis exist on a constrained basis");
  if (site < 1 || site > basis.sites()) throw usage_error("local_operator: site out of range");
  std::vector<Triplet> trip;
  trip.reserve(basis.dim());
  for (std::size_t a = 0; a < basis.dim(); ++a) {
    const std::uint32_t s = basis.state(a);
    const bool b = detail::bit(s, site);
    if (axis == Axis::z) {
      trip.emplace_back(static_cast<int>(a), static_cast<int>(a), b ? 1.0 : -1.0);
      continue;
    }
    auto t = basis.index_of(detail::flip(s, site));
    if (!t) continue;
    trip.emplace_back(static_cast<int>(*t), static_cast<int>(a), detail::pauli_phase(axis, b));
  }
  SparseOperator op;
  op.mat.resize(static_cast<Eigen::Index>(basis.dim()), static_cast<Eigen::Index>(basis.dim()));
  op.mat.setFromTriplets(trip.begin(), trip.end());
  op.basis_tag = basis.tag();
  return op;
}

// Diagonal of the particle-hole conjugation prod_j sigma^z_j: (-1)^(L - popcount).
inline Eigen::VectorXd parity_signs(int L, const ConstrainedBasis* basis = nullptr) {
  if (basis) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(basis->dim()));
    for (std::size_t k = 0; k < basis->dim(); ++k)
      d[static_cast<Eigen::Index>(k)] =
          ((L - __builtin_popcount(basis->state(k))) % 2 == 0) ? 1.0 : -1.0;
    return d;
  }
  Eigen::VectorXd d(Eigen::Index{1} << L);
  for (Eigen::Index s = 0; s < d.size(); ++s)
    d[s] = ((L - __builtin_popcount(static_cast<unsigned>(s))) % 2 == 0) ? 1.0 : -1.0;
  return d;
}

}  // namespace scarscope
