#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scarscope/errors.hpp"

namespace scarscope {

enum class Boundary { open, periodic };

inline const char* to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

// Blockade-legal configurations of an L-site spin-1/2 chain.
//
// Wire conventions: site 1 is the least significant bit, bit 1 means
// up / Rydberg-excited. States are ordered by ascending integer value,
// so indices are independent of the construction algorithm.
class ConstrainedBasis {
 public:
  ConstrainedBasis(int L, Boundary bc) : L_(L), bc_(bc) {
    if (L < 1 || L > 31) throw usage_error("ConstrainedBasis: L must be in [1, 31]");
    states_ = enumerate(L, bc);
  }

  int sites() const { return L_; }
  Boundary boundary() const { return bc_; }
  std::size_t dim() const { return states_.size(); }
  std::uint32_t state(std::size_t k) const { return states_[k]; }
  const std::vector<std::uint32_t>& states() const { return states_; }

  std::string tag() const {
    return "blockade:L=" + std::to_string(L_) + ":" + to_string(bc_);
  }

  bool is_legal(std::uint32_t config) const { return legal(config, L_, bc_); }

  // Ordinal of a legal configuration, nullopt for blockade-violating ones.
  std::optional<std::size_t> index_of(std::uint32_t config) const {
    if (L_ < 32 && config >= (std::uint32_t{1} << L_))
      throw usage_error("index_of: configuration wider than L bits");
    if (!is_legal(config)) return std::nullopt;
    auto it = std::lower_bound(states_.begin(), states_.end(), config);
    return static_cast<std::size_t>(it - states_.begin());
  }

  static bool legal(std::uint32_t config, int L, Boundary bc) {
    if (config & (config >> 1)) return false;
    if (bc == Boundary::periodic) {
      if (L == 1) return config == 0;  // the wrap pair is the site itself
      if ((config & 1u) && (config >> (L - 1)) & 1u) return false;
    }
    return true;
  }

 private:
  static std::vector<std::uint32_t> enumerate(int L, Boundary bc) {
    // Fibonacci recursion keeps ascending order: states of L sites are the
    // states of L-1 sites plus (1 << (L-1)) | states of L-2 sites.
    std::vector<std::vector<std::uint32_t>> open(L + 1);
    open[0] = {0u};
    if (L >= 1) open[1] = {0u, 1u};
    for (int l = 2; l <= L; ++l) {
      open[l] = open[l - 1];
      const std::uint32_t top = std::uint32_t{1} << (l - 1);
      for (std::uint32_t s : open[l - 2]) open[l].push_back(top | s);
    }
    if (bc == Boundary::open) return open[L];
    std::vector<std::uint32_t> pbc;
    pbc.reserve(open[L].size());
    for (std::uint32_t s : open[L])
      if (legal(s, L, Boundary::periodic)) pbc.push_back(s);
    return pbc;
  }

  int L_;
  Boundary bc_;
  std::vector<std::uint32_t> states_;
};

inline ConstrainedBasis build_basis(int L, Boundary bc) { return ConstrainedBasis(L, bc); }

// |Z2> = up on odd sites (1-indexed); for odd L the last site is up.
inline std::uint32_t neel_config(int L) {
  std::uint32_t c = 0;
  for (int s = 1; s <= L; s += 2) c |= std::uint32_t{1} << (s - 1);
  return c;
}

inline std::uint32_t zero_config(int) { return 0u; }

}  // namespace scarscope
