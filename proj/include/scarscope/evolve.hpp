#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "scarscope/operators.hpp"

namespace scarscope {

// Full spectrum of a Hermitian operator. PXP and Rydberg Hamiltonians are
// real symmetric, so the eigenvector matrix is kept real when possible;
// that halves memory at dim ~7000 and keeps GEMMs in double.
struct EigenDecomposition {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors_real;
  Eigen::MatrixXcd vectors_cplx;
  bool real = true;
  std::string basis_tag;

  Eigen::Index dim() const { return energies.size(); }

  Eigen::MatrixXcd to_eigenbasis(const Eigen::MatrixXcd& x) const {
    if (!real) return vectors_cplx.adjoint() * x;
    Eigen::MatrixXd re = vectors_real.transpose() * x.real().eval();
    Eigen::MatrixXd im = vectors_real.transpose() * x.imag().eval();
    return re.cast<cplx>() + cplx(0, 1) * im.cast<cplx>();
  }

  Eigen::MatrixXcd from_eigenbasis(const Eigen::MatrixXcd& x) const {
    if (!real) return vectors_cplx * x;
    Eigen::MatrixXd re = vectors_real * x.real().eval();
    Eigen::MatrixXd im = vectors_real * x.imag().eval();
    return re.cast<cplx>() + cplx(0, 1) * im.cast<cplx>();
  }

  Eigen::VectorXcd eigenvector(Eigen::Index n) const {
    if (real) return vectors_real.col(n).cast<cplx>();
    return vectors_cplx.col(n);
  }

  // e^{-iHt} applied to a block of column vectors.
  Eigen::MatrixXcd evolve_columns(const Eigen::MatrixXcd& cols, double t) const {
    Eigen::MatrixXcd hat = to_eigenbasis(cols);
    Eigen::VectorXcd phase = (cplx(0, -t) * energies.cast<cplx>().array()).exp();
    hat.array().colwise() *= phase.array();
    return from_eigenbasis(hat);
  }
};

inline EigenDecomposition diagonalize(const SparseOperator& H) {
  const Eigen::Index n = H.dim();
  if (n > 20000) throw usage_error("diagonalize: dimension too large for a dense eigensolve");
  double scale = 0.0, maxim = 0.0;
  for (int k = 0; k < H.mat.outerSize(); ++k)
    for (SpMat::InnerIterator it(H.mat, k); it; ++it) {
      scale = std::max(scale, std::abs(it.value()));
      maxim = std::max(maxim, std::abs(it.value().imag()));
    }
  if (!H.hermitian || H.hermiticity_defect() > 1e-12 * std::max(1.0, scale))
    throw usage_error("diagonalize: operator is not Hermitian");

  EigenDecomposition d;
  d.basis_tag = H.basis_tag;
  if (maxim == 0.0) {
    d.real = true;
    d.vectors_real = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < H.mat.outerSize(); ++k)
      for (SpMat::InnerIterator it(H.mat, k); it; ++it)
        d.vectors_real(it.row(), it.col()) = it.value().real();
    eigh_inplace(d.vectors_real, d.energies);
  } else {
    d.real = false;
    d.vectors_cplx = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < H.mat.outerSize(); ++k)
      for (SpMat::InnerIterator it(H.mat, k); it; ++it)
        d.vectors_cplx(it.row(), it.col()) = it.value();
    eigh_inplace(d.vectors_cplx, d.energies);
  }
  return d;
}

inline StateVector propagate_spectral(const EigenDecomposition& decomp, const StateVector& psi,
                                      double t) {
  if (decomp.basis_tag != psi.basis_tag)
    throw usage_error("propagate_spectral: state and decomposition live on different bases");
  StateVector out{decomp.evolve_columns(psi.amplitudes, t), psi.basis_tag};
  out.normalize();
  return out;
}

namespace detail {

// One Lanczos exponential e^{-iH dt} v. Returns the a-posteriori local
// error estimate; `v` is replaced by the (unnormalized) result.
inline double lanczos_exp_step(const SpMat& H, Eigen::VectorXcd& v, double dt, int m) {
  const Eigen::Index n = v.size();
  const double vnorm = v.norm();
  if (vnorm == 0.0) return 0.0;
  m = std::min<Eigen::Index>(m, n);
  Eigen::MatrixXcd V(n, m);
  Eigen::VectorXd alpha(m), beta(m);
  V.col(0) = v / vnorm;
  int k = m;
  double beta_last = 0.0;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXcd w = H * V.col(j);
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    alpha[j] = (V.col(j).adjoint() * w).value().real();
    w -= alpha[j] * V.col(j);
    // one full re-orthogonalization pass keeps the basis clean
    w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w).eval();
    beta[j] = w.norm();
    if (j + 1 == m || beta[j] < 1e-13 * std::max(1.0, std::abs(alpha[j]))) {
      k = j + 1;
      beta_last = beta[j];
      break;
    }
    V.col(j + 1) = w / beta[j];
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < k) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  Eigen::VectorXcd phases =
      (cplx(0, -dt) * es.eigenvalues().cast<cplx>().array()).exp();
  Eigen::VectorXcd u = es.eigenvectors().cast<cplx>() *
                       (phases.array() * es.eigenvectors().row(0).transpose().cast<cplx>().array())
                           .matrix();
  v = vnorm * (V.leftCols(k) * u);
  return k == m ? beta_last * std::abs(u[k - 1]) : 0.0;
}

}  // namespace detail

// Approximates e^{-iHt} psi by repeated Lanczos exponential steps of at
// most `dt`, renormalizing each step. Steps whose local error estimate
// exceeds `tol` are subdivided.
inline StateVector propagate_krylov(const SparseOperator& H, const StateVector& psi, double t,
                                    double dt = 0.05, int m = 30, double tol = 1e-9) {
  if (dt <= 0) throw usage_error("propagate_krylov: dt must be positive");
  if (m < 2) throw usage_error("propagate_krylov: Krylov dimension must be >= 2");
  if (H.basis_tag != psi.basis_tag)
    throw usage_error("propagate_krylov: state and operator live on different bases");
  StateVector out = psi;
  double remaining = std::abs(t);
  const double dir = t >= 0 ? 1.0 : -1.0;
  while (remaining > 1e-15) {
    double step = std::min(dt, remaining);
    int tries = 0;
    for (;;) {
      Eigen::VectorXcd trial = out.amplitudes;
      double err = detail::lanczos_exp_step(H.mat, trial, dir * step, m);
      if (err <= tol || step <= 1e-8) {
        if (err > tol)
          throw numerical_error("propagate_krylov: step error " + std::to_string(err) +
                                " above tol after subdivision floor at t_remaining=" +
                                std::to_string(remaining));
        out.amplitudes = trial;
        break;
      }
      step /= 2;
      if (++tries > 40)
        throw numerical_error("propagate_krylov: no convergence after 40 subdivisions");
    }
    out.normalize();
    remaining -= step;
  }
  return out;
}

inline double energy_expectation(const SparseOperator& H, const StateVector& psi) {
  return (psi.amplitudes.adjoint() * (H.mat * psi.amplitudes)).value().real();
}

}  // namespace scarscope
