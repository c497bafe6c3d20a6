#pragma once

#include <Eigen/Dense>
#include <vector>

#include "scarscope/scramble.hpp"

namespace scarscope {

// The L+1 x-direction Dicke states |s=L/2, S^x=m_x>, columns ordered from
// m_x = +L/2 downwards.
struct DickeTower {
  int L = 0;
  Eigen::MatrixXcd states;  // 2^L x (L+1)
  Eigen::VectorXd mx;
};

inline DickeTower dicke_tower(int L) {
  if (L < 1 || L > 14) throw usage_error("dicke_tower: L must be in [1, 14]");
  const Eigen::Index dim = Eigen::Index{1} << L;
  DickeTower tower;
  tower.L = L;
  tower.states.resize(dim, L + 1);
  tower.mx.resize(L + 1);

  // x-direction lowering operator sum_i (sigma^z_i + i sigma^y_i)/2
  SpMat lower(dim, dim);
  {
    std::vector<Triplet> trip;
    for (int i = 1; i <= L; ++i) {
      SparseOperator z = local_operator_full(L, i, Axis::z);
      SparseOperator y = local_operator_full(L, i, Axis::y);
      for (int k = 0; k < z.mat.outerSize(); ++k)
        for (SpMat::InnerIterator it(z.mat, k); it; ++it)
          trip.emplace_back(it.row(), it.col(), 0.5 * it.value());
      for (int k = 0; k < y.mat.outerSize(); ++k)
        for (SpMat::InnerIterator it(y.mat, k); it; ++it)
          trip.emplace_back(it.row(), it.col(), cplx(0, 0.5) * it.value());
    }
    lower.setFromTriplets(trip.begin(), trip.end());
  }

  Eigen::VectorXcd v = Eigen::VectorXcd::Constant(dim, std::pow(2.0, -L / 2.0));  // |+>^L
  for (int k = 0; k <= L; ++k) {
    tower.mx[k] = L / 2.0 - k;
    // modified Gram-Schmidt against earlier states guards round-off drift
    for (int m = 0; m < k; ++m)
      v -= tower.states.col(m) * (tower.states.col(m).adjoint() * v).value();
    v.normalize();
    tower.states.col(k) = v;
    if (k < L) v = lower * v;
  }
  return tower;
}

// Residuals ||H' v - m_x Omega v|| per tower state.
inline Eigen::VectorXd verify_scar_tower(const SparseOperator& Hphenom, const DickeTower& tower,
                                         double omega) {
  if (Hphenom.dim() != tower.states.rows())
    throw usage_error("verify_scar_tower: dimension mismatch");
  Eigen::VectorXd res(tower.mx.size());
  for (Eigen::Index k = 0; k < tower.mx.size(); ++k)
    res[k] =
        (Hphenom.mat * tower.states.col(k) - tower.mx[k] * omega * tower.states.col(k)).norm();
  return res;
}

// |<psi| e^{-iH't} |psi>|^2 from the all-up state.
inline std::vector<double> revival_fidelity(const SparseOperator& Hphenom,
                                            const std::vector<double>& times) {
  const int L = static_cast<int>(std::round(std::log2(static_cast<double>(Hphenom.dim()))));
  if (L > 12) throw usage_error("revival_fidelity: L must be <= 12");
  EigenDecomposition d = diagonalize(Hphenom);
  StateVector psi = basis_state_full(L, (std::uint32_t{1} << L) - 1);
  Eigen::VectorXcd hat = d.to_eigenbasis(psi.amplitudes);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    Eigen::VectorXcd ph = (cplx(0, -t) * d.energies.cast<cplx>().array()).exp();
    out.push_back(std::norm((hat.conjugate().array() * ph.array() * hat.array()).sum()));
  }
  return out;
}

struct EarlyGrowthFit {
  double a = 0;           // from the fixed-exponent fit 1-F = (a J t / r)^r
  double slope = 0;       // free log-log slope of 1-F versus t
  double rms_residual = 0;  // of the free fit, in log10 units
  int points = 0;
  std::vector<double> window_times;
  std::vector<double> deviations;  // 1 - Re F on the input grid
};

struct EarlyGrowthWindow {
  double lo = 1e-8;  // below: round-off dominates the log-log fit
  double hi = 1e-2;  // above: higher-order terms contaminate the power
};

// XZ-OTOC early-growth bound check: W = sigma^x_1, V = sigma^z_r from the
// all-up state. Fits 1 - Re F against (a J t / r)^r inside the window and
// reports the free slope alongside.
inline EarlyGrowthFit early_growth_check(const SparseOperator& Hphenom, int r,
                                         const std::vector<double>& times, double J,
                                         const EarlyGrowthWindow& window = {}) {
  const int L = static_cast<int>(std::round(std::log2(static_cast<double>(Hphenom.dim()))));
  if (r < 4 || r > L) throw usage_error("early_growth_check: need 4 <= r <= L");
  BasisContext ctx = BasisContext::full(L);
  StateVector psi = basis_state_full(L, (std::uint32_t{1} << L) - 1);
  ScramblingField f = otoc_series(Hphenom, ctx, psi, 1, {r}, Axis::x, Axis::z, times);

  EarlyGrowthFit fit;
  fit.deviations.resize(times.size());
  std::vector<double> lt, ld;
  bool crossed = false;  // the window ends at the first crossing above hi;
                         // later dips back below are post-front oscillations
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double dev = 1.0 - f.values(0, static_cast<Eigen::Index>(k)).real();
    fit.deviations[k] = dev;
    if (dev > 0.5)
      throw usage_error("early_growth_check: times extend past the wavefront (1-F > 0.5)");
    if (dev > window.hi) crossed = true;
    if (!crossed && dev >= window.lo && dev <= window.hi) {
      lt.push_back(std::log10(times[k]));
      ld.push_back(std::log10(dev));
      fit.window_times.push_back(times[k]);
    }
  }
  fit.points = static_cast<int>(lt.size());
  if (fit.points < 4)
    throw usage_error("early_growth_check: fewer than 4 grid points inside the fit window");

  double tm = 0, dm = 0;
  for (int k = 0; k < fit.points; ++k) { tm += lt[k]; dm += ld[k]; }
  tm /= fit.points; dm /= fit.points;
  double stt = 0, std_ = 0;
  for (int k = 0; k < fit.points; ++k) {
    stt += (lt[k] - tm) * (lt[k] - tm);
    std_ += (lt[k] - tm) * (ld[k] - dm);
  }
  fit.slope = std_ / stt;
  double ss = 0;
  for (int k = 0; k < fit.points; ++k) {
    const double pred = dm + fit.slope * (lt[k] - tm);
    ss += (ld[k] - pred) * (ld[k] - pred);
  }
  fit.rms_residual = std::sqrt(ss / fit.points);

  // fixed exponent r: log10 dev = r log10 t + r log10(a J / r)
  double intercept = 0;
  for (int k = 0; k < fit.points; ++k) intercept += ld[k] - r * lt[k];
  intercept /= fit.points;
  fit.a = r / J * std::pow(10.0, intercept / r);
  return fit;
}

}  // namespace scarscope
