#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "scarscope/hilbert.hpp"
#include "scarscope/linalg.hpp"

namespace scarscope {

inline std::string full_space_tag(int L) { return "full:L=" + std::to_string(L); }

struct StateVector {
  Eigen::VectorXcd amplitudes;
  std::string basis_tag;

  Eigen::Index dim() const { return amplitudes.size(); }
  double norm() const { return amplitudes.norm(); }
  void normalize() { amplitudes /= amplitudes.norm(); }
};

inline StateVector basis_state(const ConstrainedBasis& basis, std::uint32_t config) {
  auto idx = basis.index_of(config);
  if (!idx) throw usage_error("basis_state: configuration violates the blockade");
  StateVector psi{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dim())), basis.tag()};
  psi.amplitudes[static_cast<Eigen::Index>(*idx)] = 1.0;
  return psi;
}

inline StateVector basis_state_full(int L, std::uint32_t config) {
  if (L < 1 || L > 24) throw usage_error("basis_state_full: L must be in [1, 24]");
  StateVector psi{Eigen::VectorXcd::Zero(Eigen::Index{1} << L), full_space_tag(L)};
  psi.amplitudes[config] = 1.0;
  return psi;
}

inline StateVector neel_state(const ConstrainedBasis& basis) {
  return basis_state(basis, neel_config(basis.sites()));
}

inline StateVector zero_state(const ConstrainedBasis& basis) {
  return basis_state(basis, 0u);
}

// Scatter a constrained-space vector into the full 2^L tensor space.
inline Eigen::VectorXcd embed_full(const ConstrainedBasis& basis, const Eigen::VectorXcd& amp) {
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(Eigen::Index{1} << basis.sites());
  for (std::size_t k = 0; k < basis.dim(); ++k)
    full[basis.state(k)] = amp[static_cast<Eigen::Index>(k)];
  return full;
}

}  // namespace scarscope
