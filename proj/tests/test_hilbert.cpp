#include <catch2/catch_amalgamated.hpp>

#include "scarscope/hilbert.hpp"
#include "scarscope/state.hpp"

using namespace scarscope;

namespace {

// Independent oracle: filter all 2^L bitstrings by the adjacency rule.
std::vector<std::uint32_t> brute_force_states(int L, Boundary bc) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s < (std::uint32_t{1} << L); ++s) {
    bool ok = true;
    for (int j = 1; j < L && ok; ++j)
      if (((s >> (j - 1)) & 1u) && ((s >> j) & 1u)) ok = false;
    if (bc == Boundary::periodic && L >= 2)
      if ((s & 1u) && ((s >> (L - 1)) & 1u)) ok = false;
    if (bc == Boundary::periodic && L == 1 && s == 1u) ok = false;
    if (ok) out.push_back(s);
  }
  return out;
}

std::uint64_t fibonacci(int n) {
  std::uint64_t a = 1, b = 1;  // F(1), F(2)
  for (int i = 3; i <= n; ++i) { std::uint64_t c = a + b; a = b; b = c; }
  return n <= 2 ? 1 : b;
}

std::uint64_t lucas(int n) {
  std::uint64_t a = 1, b = 3;  // L(1), L(2)
  if (n == 1) return 1;
  for (int i = 3; i <= n; ++i) { std::uint64_t c = a + b; a = b; b = c; }
  return b;
}

}  // namespace

TEST_CASE("dimension laws and exact state sets against brute force") {
  for (int L = 1; L <= 16; ++L) {
    for (auto bc : {Boundary::open, Boundary::periodic}) {
      ConstrainedBasis basis(L, bc);
      auto oracle = brute_force_states(L, bc);
      REQUIRE(basis.dim() == oracle.size());
      REQUIRE(std::equal(oracle.begin(), oracle.end(), basis.states().begin()));
      if (bc == Boundary::open) REQUIRE(basis.dim() == fibonacci(L + 2));
      else REQUIRE(basis.dim() == lucas(L));
    }
  }
}

TEST_CASE("hand-enumerated small bases") {
  ConstrainedBasis open3(3, Boundary::open);
  REQUIRE(open3.states() == std::vector<std::uint32_t>{0, 1, 2, 4, 5});
  ConstrainedBasis pbc3(3, Boundary::periodic);
  REQUIRE(pbc3.states() == std::vector<std::uint32_t>{0, 1, 2, 4});
  REQUIRE(ConstrainedBasis(20, Boundary::open).dim() == 17711);
}

TEST_CASE("dimension recurrence for open boundary") {
  for (int L = 3; L <= 14; ++L) {
    REQUIRE(ConstrainedBasis(L, Boundary::open).dim() ==
            ConstrainedBasis(L - 1, Boundary::open).dim() +
                ConstrainedBasis(L - 2, Boundary::open).dim());
  }
}

TEST_CASE("state_index") {
  ConstrainedBasis basis(3, Boundary::open);
  REQUIRE(basis.index_of(0b101).value() == 4);
  REQUIRE_FALSE(basis.index_of(0b011).has_value());  // adjacent excitation
  REQUIRE(ConstrainedBasis(2, Boundary::open).index_of(0b01).value() == 1);
  REQUIRE_THROWS_AS(basis.index_of(0b1000), usage_error);  // wrong bit width

  for (auto bc : {Boundary::open, Boundary::periodic}) {
    ConstrainedBasis b(9, bc);
    for (std::size_t k = 0; k < b.dim(); ++k)
      REQUIRE(b.index_of(b.state(k)).value() == k);
  }
}

TEST_CASE("basis range errors") {
  REQUIRE_THROWS_AS(ConstrainedBasis(0, Boundary::open), usage_error);
  REQUIRE_THROWS_AS(ConstrainedBasis(32, Boundary::open), usage_error);
}

TEST_CASE("Neel and zero states") {
  REQUIRE(neel_config(4) == 0b0101);  // sites 1 and 3 up
  REQUIRE(neel_config(5) == 0b10101);  // site ceil(L/2)=3 up
  REQUIRE((neel_config(5) >> 2) & 1u);

  ConstrainedBasis b4(4, Boundary::open);
  StateVector z2 = neel_state(b4);
  REQUIRE(z2.norm() == Catch::Approx(1.0));
  REQUIRE(std::abs(z2.amplitudes[b4.index_of(0b0101).value()]) == Catch::Approx(1.0));

  ConstrainedBasis b3(3, Boundary::open);
  StateVector zero = zero_state(b3);
  REQUIRE(std::abs(zero.amplitudes[0]) == Catch::Approx(1.0));
  REQUIRE(zero.amplitudes.norm() == Catch::Approx(1.0));
}

TEST_CASE("full-space embedding is an isometry onto legal configurations") {
  ConstrainedBasis b(6, Boundary::open);
  Eigen::VectorXcd amp = Eigen::VectorXcd::Random(static_cast<Eigen::Index>(b.dim()));
  amp.normalize();
  Eigen::VectorXcd full = embed_full(b, amp);
  REQUIRE(full.norm() == Catch::Approx(1.0));
  for (std::size_t k = 0; k < b.dim(); ++k)
    REQUIRE(full[b.state(k)] == amp[static_cast<Eigen::Index>(k)]);
}
