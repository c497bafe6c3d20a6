#pragma once

#include <complex>

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "scarscope/errors.hpp"

namespace scarscope {

using cplx = std::complex<double>;

// In-place symmetric eigensolve: A is overwritten with the eigenvectors
// (columns), ascending eigenvalues returned in w.
inline void eigh_inplace(Eigen::MatrixXd& A, Eigen::VectorXd& w) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  w.resize(n);
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, A.data(), n, w.data());
  if (info != 0) throw numerical_error("dsyevd failed, info=" + std::to_string(info));
}

inline void eigh_inplace(Eigen::MatrixXcd& A, Eigen::VectorXd& w) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  w.resize(n);
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, A.data(), n, w.data());
  if (info != 0) throw numerical_error("zheevd failed, info=" + std::to_string(info));
}

struct SvdResult {
  Eigen::MatrixXcd U;    // m x r
  Eigen::VectorXd S;     // r, descending
  Eigen::MatrixXcd Vh;   // r x n
};

// Thin complex SVD. Divide-and-conquer LAPACK for anything non-trivial,
// Jacobi fallback for tiny blocks or if zgesdd fails to converge.
inline SvdResult svd_econ(const Eigen::MatrixXcd& M) {
  const lapack_int m = static_cast<lapack_int>(M.rows());
  const lapack_int n = static_cast<lapack_int>(M.cols());
  const lapack_int r = std::min(m, n);
  SvdResult out;
  if (r == 0) throw usage_error("svd_econ: empty matrix");
  if (static_cast<long>(m) * n <= 64 * 64) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = svd.matrixU();
    out.S = svd.singularValues();
    out.Vh = svd.matrixV().adjoint();
    return out;
  }
  Eigen::MatrixXcd A = M;
  out.U.resize(m, r);
  out.S.resize(r);
  out.Vh.resize(r, n);
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, A.data(), m,
                                   out.S.data(), out.U.data(), m, out.Vh.data(), r);
  if (info != 0) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = svd.matrixU();
    out.S = svd.singularValues();
    out.Vh = svd.matrixV().adjoint();
  }
  return out;
}

}  // namespace scarscope
