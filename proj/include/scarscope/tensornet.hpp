#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "scarscope/scramble.hpp"
#include "scarscope/tensor_train.hpp"

namespace scarscope {

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  Eigen::MatrixXcd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index c = 0; c < A.cols(); ++c)
      out.block(r * B.rows(), c * B.cols(), B.rows(), B.cols()) = A(r, c) * B;
  return out;
}

struct MatrixProductState {
  TensorTrain<2> train;
  int chi_max = 100;
  double cutoff = 1e-10;

  int size() const { return train.size(); }
};

inline MatrixProductState mps_from_product(int L, std::uint32_t bits, int chi_max = 100,
                                           double cutoff = 1e-10) {
  if (L < 1 || L > 64) throw usage_error("mps_from_product: bad L");
  MatrixProductState psi;
  psi.train = TensorTrain<2>(L);
  psi.chi_max = chi_max;
  psi.cutoff = cutoff;
  for (int k = 0; k < L; ++k) {
    const int b = (bits >> k) & 1u;
    for (int p = 0; p < 2; ++p)
      psi.train.tensors(k)[p] = Eigen::MatrixXcd::Constant(1, 1, p == b ? 1.0 : 0.0);
  }
  psi.train.set_center(0);
  return psi;
}

// Exact dense amplitudes (site 1 = least significant bit). Test- and
// cross-validation-sized systems only.
inline Eigen::VectorXcd mps_to_statevector(const MatrixProductState& psi) {
  const int L = psi.size();
  if (L > 20) throw usage_error("mps_to_statevector: L too large to densify");
  Eigen::MatrixXcd carry = Eigen::MatrixXcd::Ones(1, 1);
  for (int k = 0; k < L; ++k) {
    const Eigen::Index rows = carry.rows(), dr = psi.train.right_dim(k);
    Eigen::MatrixXcd next(rows * 2, dr);
    for (int p = 0; p < 2; ++p)
      next.block(p * rows, 0, rows, dr) = carry * psi.train.tensors(k)[p];
    carry = std::move(next);
  }
  return carry.col(0);
}

// ---------------------------------------------------------------------------
// Gate sets

struct HamTerm {
  int first = 1;  // 1-based leftmost site
  int width = 3;
  int family = 0;  // terms within a family act on disjoint sites
  Eigen::MatrixXcd h;
};

struct GateSet {
  int L = 0;
  bool blockaded = false;  // PXP: monitor blockade violations
  std::vector<HamTerm> terms;
};

namespace detail {

inline Eigen::MatrixXcd pauli_x2() { return pauli(Axis::x); }
inline Eigen::MatrixXcd proj_down2() {
  Eigen::Matrix2cd P = Eigen::Matrix2cd::Zero();
  P(0, 0) = 1.0;
  return P;
}
inline Eigen::MatrixXcd number2() {
  Eigen::Matrix2cd n = Eigen::Matrix2cd::Zero();
  n(1, 1) = 1.0;
  return n;
}

}  // namespace detail

// H = sum_m P_{m-1} sigma^x_m P_{m+1} with open-boundary terms
// sigma^x_1 P_2 and P_{L-1} sigma^x_L, one gate per flip site m.
inline GateSet pxp_gates(int L) {
  if (L < 3) throw usage_error("pxp_gates: L must be >= 3");
  GateSet set;
  set.L = L;
  set.blockaded = true;
  const Eigen::MatrixXcd X = detail::pauli_x2(), P = detail::proj_down2();
  for (int m = 1; m <= L; ++m) {
    HamTerm t;
    t.family = m % 3;
    if (m == 1) {
      t.first = 1;
      t.width = 2;
      t.h = kron(X, P);
    } else if (m == L) {
      t.first = L - 1;
      t.width = 2;
      t.h = kron(P, X);
    } else {
      t.first = m - 1;
      t.width = 3;
      t.h = kron(P, kron(X, P));
    }
    set.terms.push_back(std::move(t));
  }
  return set;
}

// H_pm split into three-site blocks (k, k+1, k+2); one- and two-site
// pieces are divided by the number of blocks containing them.
inline GateSet rydberg_gates(int L, const RydbergParams& p, int sign = +1) {
  if (L < 3) throw usage_error("rydberg_gates: L must be >= 3");
  GateSet set;
  set.L = L;
  set.blockaded = false;
  const Eigen::MatrixXcd X = detail::pauli_x2(), N = detail::number2(),
                         I = Eigen::Matrix2cd::Identity();
  auto site_count = [&](int m) { return std::min(L - 2, m) - std::max(1, m - 2) + 1; };
  auto pair_count = [&](int m) { return std::min(L - 2, m) - std::max(1, m - 1) + 1; };
  for (int k = 1; k + 2 <= L; ++k) {
    HamTerm t;
    t.first = k;
    t.width = 3;
    t.family = k % 3;
    Eigen::MatrixXcd h = p.u2 * kron(N, kron(I, N));
    const std::array<Eigen::MatrixXcd, 3> sx{kron(X, kron(I, I)), kron(I, kron(X, I)),
                                             kron(I, kron(I, X))};
    const std::array<Eigen::MatrixXcd, 3> nn{kron(N, kron(I, I)), kron(I, kron(N, I)),
                                             kron(I, kron(I, N))};
    for (int s = 0; s < 3; ++s) {
      const int m = k + s;
      h += (sign * p.omega / 2.0 * sx[s] - p.delta * nn[s]) / site_count(m);
    }
    h += p.u1 / pair_count(k) * kron(N, kron(N, I));
    h += p.u1 / pair_count(k + 1) * kron(I, kron(N, N));
    set.terms.push_back(std::move(t));
    set.terms.back().h = std::move(h);
  }
  return set;
}

// ---------------------------------------------------------------------------
// TEBD

struct TebdReport {
  int steps = 0;
  double discarded_total = 0;
  double max_step_discard = 0;
  Eigen::Index max_bond = 1;
  double max_blockade_weight = 0;
  bool convergence_warning = false;
};

namespace detail {

struct Gate {
  int first;  // 0-based
  int width;
  Eigen::MatrixXcd u;
};

inline Eigen::MatrixXcd hermitian_exp(const Eigen::MatrixXcd& h, double scale) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd ph = (cplx(0, scale) * es.eigenvalues().cast<cplx>().array()).exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// One symmetrized Trotter step: families f0(dt/2) f1(dt/2) f2(dt)
// f1(dt/2) f0(dt/2), each layer a product of disjoint gates.
inline std::vector<std::vector<Gate>> trotter_layers(const GateSet& set, double dt) {
  std::vector<std::vector<Gate>> layers(5);
  auto fill = [&](int layer, int family, double scale) {
    for (const auto& t : set.terms)
      if (t.family == family)
        layers[layer].push_back({t.first - 1, t.width, hermitian_exp(t.h, -scale)});
    std::sort(layers[layer].begin(), layers[layer].end(),
              [](const Gate& a, const Gate& b) { return a.first < b.first; });
  };
  fill(0, 0, dt / 2);
  fill(1, 1, dt / 2);
  fill(2, 2, dt);
  fill(3, 1, dt / 2);
  fill(4, 0, dt / 2);
  return layers;
}

// sum_k <n_k n_{k+1}> of the current state.
inline double blockade_weight(TensorTrain<2>& train) {
  double w = 0;
  for (int k = 0; k + 1 < train.size(); ++k) {
    train.move_center_to(k);
    Eigen::MatrixXcd theta = train.tensors(k)[1] * train.tensors(k + 1)[1];
    w += theta.squaredNorm();
  }
  return w;
}

inline double apply_layer(TensorTrain<2>& train, const std::vector<Gate>& layer,
                          Eigen::Index chi_max, double cutoff) {
  double discarded = 0;
  for (const auto& g : layer) {
    train.move_center_to(g.first);
    discarded += train.apply_kernel(g.first, g.width, g.u, chi_max, cutoff);
  }
  return discarded;
}

}  // namespace detail

// Second-order Trotter evolution for time t in steps of dt. Three-site
// gates are applied by merging the window and re-splitting with two
// truncated SVDs; the discarded weight is accumulated and reported.
inline TebdReport tebd_evolve(MatrixProductState& psi, const GateSet& set, double t, double dt) {
  if (dt <= 0 || dt > 0.1) throw usage_error("tebd_evolve: dt must be in (0, 0.1]");
  if (set.L != psi.size()) throw usage_error("tebd_evolve: gate set and state sizes differ");
  const int nsteps = static_cast<int>(std::round(t / dt));
  if (std::abs(nsteps * dt - t) > 1e-9)
    throw usage_error("tebd_evolve: t must be an integer multiple of dt");
  auto layers = detail::trotter_layers(set, dt);
  TebdReport rep;
  for (int step = 0; step < nsteps; ++step) {
    double step_discard = 0;
    for (const auto& layer : layers)
      step_discard += detail::apply_layer(psi.train, layer, psi.chi_max, psi.cutoff);
    psi.train.normalize();
    rep.discarded_total += step_discard;
    rep.max_step_discard = std::max(rep.max_step_discard, step_discard);
    rep.max_bond = std::max(rep.max_bond, psi.train.max_bond());
    if (set.blockaded)
      rep.max_blockade_weight =
          std::max(rep.max_blockade_weight, detail::blockade_weight(psi.train));
    ++rep.steps;
  }
  rep.convergence_warning = rep.max_step_discard > 1e-4;
  return rep;
}

// Exact single-site reduced density matrix from the orthogonality center.
inline Eigen::Matrix2cd mps_single_site_rdm(MatrixProductState& psi, int site) {
  if (site < 1 || site > psi.size()) throw usage_error("mps_single_site_rdm: site out of range");
  psi.train.move_center_to(site - 1);
  Eigen::Matrix2cd rho;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      rho(p, q) =
          (psi.train.tensors(site - 1)[p].array() * psi.train.tensors(site - 1)[q].array().conjugate())
              .sum();
  return rho;
}

inline cplx mps_expect1(MatrixProductState& psi, int site, const Eigen::Matrix2cd& op) {
  Eigen::Matrix2cd rho = mps_single_site_rdm(psi, site);
  return (op * rho).trace();
}

// ---------------------------------------------------------------------------
// Matrix product operators (physical index p = out*2 + in)

struct MatrixProductOperator {
  TensorTrain<4> train;
  int chi_max = 300;
  double cutoff = 1e-10;

  int size() const { return train.size(); }
};

inline MatrixProductOperator mpo_from_site_ops(int L,
                                               const std::map<int, Eigen::Matrix2cd>& ops,
                                               int chi_max = 300, double cutoff = 1e-10) {
  MatrixProductOperator W;
  W.train = TensorTrain<4>(L);
  W.chi_max = chi_max;
  W.cutoff = cutoff;
  for (int k = 0; k < L; ++k) {
    Eigen::Matrix2cd op = Eigen::Matrix2cd::Identity();
    auto it = ops.find(k + 1);
    if (it != ops.end()) op = it->second;
    for (int o = 0; o < 2; ++o)
      for (int i = 0; i < 2; ++i)
        W.train.tensors(k)[o * 2 + i] = Eigen::MatrixXcd::Constant(1, 1, op(o, i));
  }
  W.train.set_center(0);
  return W;
}

// Local probe operator in MPO form. On the blockaded model, x and y
// probes carry the neighbouring projectors (P sigma P); z probes are
// diagonal and need none.
inline MatrixProductOperator probe_mpo(const GateSet& set, int site, Axis axis, int chi_max,
                                       double cutoff = 1e-10) {
  std::map<int, Eigen::Matrix2cd> ops;
  ops[site] = pauli(axis);
  if (set.blockaded && axis != Axis::z) {
    if (site > 1) ops[site - 1] = detail::proj_down2();
    if (site < set.L) ops[site + 1] = detail::proj_down2();
  }
  return mpo_from_site_ops(set.L, ops, chi_max, cutoff);
}

namespace detail {

// Sandwich kernels: forward means O <- U^dag O U (Heisenberg evolution
// with +ds), backward means O <- U O U^dag (evolution with -ds).
inline Eigen::MatrixXcd sandwich_kernel(const Eigen::MatrixXcd& u, int width, bool forward) {
  const int nb = 1 << width;       // basis states of the window
  const int nq = 1 << (2 * width);  // composite (out, in) index
  auto pack = [&](int a, int b) {
    int q = 0;
    for (int s = width - 1; s >= 0; --s) {
      const int o = (a >> s) & 1, i = (b >> s) & 1;
      q = q * 4 + (o * 2 + i);
    }
    return q;
  };
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(nq, nq);
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b)
      for (int ap = 0; ap < nb; ++ap)
        for (int bp = 0; bp < nb; ++bp) {
          const cplx val = forward ? std::conj(u(ap, a)) * u(bp, b)
                                   : u(a, ap) * std::conj(u(b, bp));
          if (val != cplx(0)) C(pack(a, b), pack(ap, bp)) = val;
        }
  return C;
}

}  // namespace detail

// Advances O(s) -> O(s + ds) (forward=true) or O(-s) -> O(-s-ds)
// (forward=false) through one Trotterized conjugation step. The
// symmetrized layer sequence is palindromic, so the same ordering serves
// both directions.
inline double mpo_heisenberg_step(MatrixProductOperator& op, const GateSet& set, double ds,
                                  bool forward) {
  auto layers = detail::trotter_layers(set, ds);
  double discarded = 0;
  for (const auto& layer : layers)
    for (const auto& g : layer) {
      Eigen::MatrixXcd C = detail::sandwich_kernel(g.u, g.width, forward);
      op.train.move_center_to(g.first);
      discarded += op.train.apply_kernel(g.first, g.width, C, op.chi_max, op.cutoff);
    }
  return discarded;
}

// Zip-up MPO application |out> = O |psi>, truncated to chi_max/cutoff
// with a final right-to-left compression sweep. Norm is NOT restored:
// probe operators are not unitary on the truncated manifold.
inline MatrixProductState apply_mpo(const MatrixProductOperator& op,
                                    const MatrixProductState& psi, int chi_max, double cutoff) {
  const int L = psi.size();
  if (op.size() != L) throw usage_error("apply_mpo: size mismatch");
  MatrixProductState out;
  out.train = TensorTrain<2>(L);
  out.chi_max = chi_max;
  out.cutoff = cutoff;

  Eigen::MatrixXcd carry = Eigen::MatrixXcd::Ones(1, 1);  // chi_c x (DlW * DlA)
  for (int k = 0; k < L; ++k) {
    const Eigen::Index dlw = op.train.left_dim(k), drw = op.train.right_dim(k);
    const Eigen::Index dla = psi.train.left_dim(k), dra = psi.train.right_dim(k);
    const Eigen::Index chi_c = carry.rows();
    std::array<Eigen::MatrixXcd, 2> T;
    for (int sp = 0; sp < 2; ++sp) T[sp] = Eigen::MatrixXcd::Zero(chi_c, drw * dra);
    for (int s = 0; s < 2; ++s) {
      // Z_w = carry-block(w) * A[s], reused for both output indices
      std::vector<Eigen::MatrixXcd> Z(dlw);
      for (Eigen::Index w = 0; w < dlw; ++w)
        Z[w] = carry.block(0, w * dla, chi_c, dla) * psi.train.tensors(k)[s];
      for (int sp = 0; sp < 2; ++sp) {
        const Eigen::MatrixXcd& W = op.train.tensors(k)[sp * 2 + s];
        for (Eigen::Index w = 0; w < dlw; ++w)
          for (Eigen::Index v = 0; v < drw; ++v) {
            const cplx c = W(w, v);
            if (c != cplx(0)) T[sp].block(0, v * dra, chi_c, dra) += c * Z[w];
          }
      }
    }
    Eigen::MatrixXcd M(2 * chi_c, drw * dra);
    M.topRows(chi_c) = T[0];
    M.bottomRows(chi_c) = T[1];
    SvdResult svd = svd_econ(M);
    Eigen::Index r = detail::truncation_rank(svd.S, chi_max, cutoff);
    if (k == L - 1) r = 1;  // boundary bond
    for (int p = 0; p < 2; ++p) out.train.tensors(k)[p] = svd.U.block(p * chi_c, 0, chi_c, r);
    carry = svd.S.head(r).asDiagonal() * svd.Vh.topRows(r);
  }
  // absorb the final 1x1 carry (overall scale)
  for (int p = 0; p < 2; ++p) out.train.tensors(L - 1)[p] *= carry(0, 0);
  out.train.set_center(L - 1);
  out.train.compress_sweep(chi_max, cutoff);
  return out;
}

// ---------------------------------------------------------------------------
// Time-splitting MPO OTOC:
//   F_ij(t) = <psi(t/2)| W(-t/2) V(t/2) W(-t/2) V(t/2) |psi(t/2)>
// with Heisenberg-evolved probe MPOs and the state evolved to t/2, so
// every factor carries half the evolution.

struct MpoOtocOptions {
  int chi_state = 100;
  int chi_op = 300;
  double cutoff = 1e-10;
  double trotter_dt = 0.0125;
  double flag_discard = 1e-3;  // per-point warning threshold at saturation
};

inline ScramblingField otoc_mpo_timesplit(const GateSet& set, std::uint32_t psi_bits, int i_site,
                                          const std::vector<int>& sites, Axis w_axis, Axis v_axis,
                                          const std::vector<double>& times,
                                          const MpoOtocOptions& opts = {}) {
  const int L = set.L;
  const double ds = opts.trotter_dt;
  ScramblingField field;
  field.kind = FieldKind::otoc;
  field.sites = sites;
  field.times = times;
  field.values.setZero(sites.size(), times.size());
  field.flags.setZero(sites.size(), times.size());
  field.meta["kind"] = "otoc";
  field.meta["backend"] = "mpo";
  field.meta["i_site"] = std::to_string(i_site);
  field.meta["w_axis"] = std::string(1, to_char(w_axis));
  field.meta["v_axis"] = std::string(1, to_char(v_axis));
  field.meta["chi_state"] = std::to_string(opts.chi_state);
  field.meta["chi_op"] = std::to_string(opts.chi_op);
  field.meta["trotter_dt"] = std::to_string(ds);
  field.meta["trotter_order"] = "2";
  field.meta["svd_cutoff"] = std::to_string(opts.cutoff);

  MatrixProductState phi = mps_from_product(L, psi_bits, opts.chi_state, opts.cutoff);
  MatrixProductOperator W = probe_mpo(set, i_site, w_axis, opts.chi_op, opts.cutoff);
  std::vector<MatrixProductOperator> V;
  for (int j : sites) V.push_back(probe_mpo(set, j, v_axis, opts.chi_op, opts.cutoff));

  double elapsed_half = 0;
  for (std::size_t it = 0; it < times.size(); ++it) {
    const double target_half = times[it] / 2.0;
    const double advance = target_half - elapsed_half;
    const int nsub = static_cast<int>(std::round(advance / ds));
    if (std::abs(nsub * ds - advance) > 1e-9)
      throw usage_error("otoc_mpo_timesplit: times must align with the Trotter step");
    double op_discard = 0;
    for (int n = 0; n < nsub; ++n) {
      tebd_evolve(phi, set, ds, ds);
      op_discard += mpo_heisenberg_step(W, set, ds, /*forward=*/false);
      for (auto& Vj : V) op_discard += mpo_heisenberg_step(Vj, set, ds, /*forward=*/true);
    }
    elapsed_half = target_half;

    MatrixProductState wphi = apply_mpo(W, phi, opts.chi_state, opts.cutoff);
    for (std::size_t j = 0; j < sites.size(); ++j) {
      MatrixProductState u = apply_mpo(V[j], phi, opts.chi_state, opts.cutoff);
      if (u.train.norm() < 1e-12) {
        field.flags(j, it) = point_undefined;
        continue;
      }
      u = apply_mpo(W, u, opts.chi_state, opts.cutoff);
      if (u.train.norm() < 1e-12) {
        field.flags(j, it) = point_undefined;
        continue;
      }
      MatrixProductState v = apply_mpo(V[j], wphi, opts.chi_state, opts.cutoff);
      field.values(j, it) = v.train.overlap(u.train);
      if (op_discard > opts.flag_discard) field.flags(j, it) = point_warning;
    }
  }
  return field;
}

// Holevo field from two independent TEBD branches.
inline ScramblingField holevo_tebd(const GateSet& set, std::uint32_t psi_bits, int encode_site,
                                   const std::vector<int>& probe_sites,
                                   const std::vector<double>& times, int chi_max = 100,
                                   double cutoff = 1e-10, double dt = 0.05) {
  const int L = set.L;
  if (encode_site < 1 || encode_site > L) throw usage_error("holevo_tebd: bad encode site");
  ScramblingField field;
  field.kind = FieldKind::holevo;
  field.sites = probe_sites;
  field.times = times;
  field.values.setZero(probe_sites.size(), times.size());
  field.flags.setZero(probe_sites.size(), times.size());
  field.meta["kind"] = "holevo";
  field.meta["backend"] = "tebd";
  field.meta["encode_site"] = std::to_string(encode_site);
  field.meta["chi_max"] = std::to_string(chi_max);
  field.meta["trotter_dt"] = std::to_string(dt);
  field.meta["trotter_order"] = "2";
  field.meta["svd_cutoff"] = std::to_string(cutoff);

  MatrixProductState a = mps_from_product(L, psi_bits, chi_max, cutoff);
  MatrixProductState b =
      mps_from_product(L, psi_bits ^ (std::uint32_t{1} << (encode_site - 1)), chi_max, cutoff);
  double elapsed = 0;
  bool warned = false;
  for (std::size_t it = 0; it < times.size(); ++it) {
    const double advance = times[it] - elapsed;
    if (advance > 1e-12) {
      TebdReport ra = tebd_evolve(a, set, advance, dt);
      TebdReport rb = tebd_evolve(b, set, advance, dt);
      warned = warned || ra.convergence_warning || rb.convergence_warning;
      elapsed = times[it];
    }
    for (std::size_t j = 0; j < probe_sites.size(); ++j) {
      Eigen::Matrix2cd ra = mps_single_site_rdm(a, probe_sites[j]);
      Eigen::Matrix2cd rb = mps_single_site_rdm(b, probe_sites[j]);
      double chi = von_neumann_entropy(0.5 * (ra + rb)) -
                   0.5 * (von_neumann_entropy(ra) + von_neumann_entropy(rb));
      field.values(j, it) = std::max(0.0, chi);
      if (warned) field.flags(j, it) = point_warning;
    }
  }
  return field;
}

}  // namespace scarscope
