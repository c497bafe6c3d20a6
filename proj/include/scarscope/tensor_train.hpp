#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "scarscope/linalg.hpp"

namespace scarscope {

// Truncation bookkeeping for one SVD split.
struct SplitReport {
  double discarded = 0;  // relative discarded weight sum(cut sigma^2)/sum(sigma^2)
  Eigen::Index kept = 0;
};

namespace detail {

inline Eigen::Index truncation_rank(const Eigen::VectorXd& s, Eigen::Index chi_max,
                                    double cutoff) {
  const double smax = s.size() ? s[0] : 0.0;
  Eigen::Index r = 0;
  while (r < s.size() && r < chi_max && s[r] > cutoff * smax) ++r;
  return std::max<Eigen::Index>(r, 1);
}

}  // namespace detail

// Chain of rank-3 tensors with physical dimension D, stored per site as
// D matrices (left bond x right bond). Tensors strictly left (right) of
// the orthogonality center are left- (right-) isometric.
template <int D>
class TensorTrain {
 public:
  TensorTrain() = default;
  explicit TensorTrain(int L) : site_(L) {}

  int size() const { return static_cast<int>(site_.size()); }
  int center() const { return center_; }
  std::array<Eigen::MatrixXcd, D>& tensors(int k) { return site_[k]; }
  const std::array<Eigen::MatrixXcd, D>& tensors(int k) const { return site_[k]; }

  Eigen::Index left_dim(int k) const { return site_[k][0].rows(); }
  Eigen::Index right_dim(int k) const { return site_[k][0].cols(); }

  std::vector<Eigen::Index> bond_dims() const {
    std::vector<Eigen::Index> out;
    for (int k = 0; k + 1 < size(); ++k) out.push_back(right_dim(k));
    return out;
  }
  Eigen::Index max_bond() const {
    Eigen::Index m = 1;
    for (auto b : bond_dims()) m = std::max(m, b);
    return m;
  }

  void set_center(int k) { center_ = k; }

  void move_center_to(int k) {
    while (center_ < k) shift_right();
    while (center_ > k) shift_left();
  }

  cplx overlap(const TensorTrain& other) const {
    Eigen::MatrixXcd E = Eigen::MatrixXcd::Ones(1, 1);
    for (int k = 0; k < size(); ++k) {
      Eigen::MatrixXcd next =
          Eigen::MatrixXcd::Zero(site_[k][0].cols(), other.site_[k][0].cols());
      for (int p = 0; p < D; ++p) next += site_[k][p].adjoint() * E * other.site_[k][p];
      E = std::move(next);
    }
    return E(0, 0);
  }

  double norm() const { return std::sqrt(std::abs(overlap(*this))); }

  void scale(cplx factor) { for (auto& m : site_[center_]) m *= factor; }

  void normalize() {
    double n = norm();
    if (n > 0) scale(1.0 / n);
  }

  // Largest isometry defect of the off-center tensors.
  double isometry_defect() const {
    double defect = 0;
    for (int k = 0; k < size(); ++k) {
      if (k == center_) continue;
      if (k < center_) {
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(right_dim(k), right_dim(k));
        for (int p = 0; p < D; ++p) g += site_[k][p].adjoint() * site_[k][p];
        defect = std::max(defect,
                          (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
      } else {
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(left_dim(k), left_dim(k));
        for (int p = 0; p < D; ++p) g += site_[k][p] * site_[k][p].adjoint();
        defect = std::max(defect,
                          (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
      }
    }
    return defect;
  }

  // Applies the D^w x D^w kernel C to sites [k, k+w-1]; composite index
  // q = p_k * D^(w-1) + ... + p_{k+w-1}. The center must lie inside the
  // window and ends at the window's right edge. Returns the summed
  // relative discarded weight of the splitting SVDs.
  double apply_kernel(int k, int w, const Eigen::MatrixXcd& C, Eigen::Index chi_max,
                      double cutoff) {
    if (w != 2 && w != 3) throw usage_error("apply_kernel: width must be 2 or 3");
    if (center_ < k || center_ > k + w - 1) throw usage_error("apply_kernel: center outside window");
    const int nq = C.rows() == 0 ? 0 : static_cast<int>(C.rows());
    int expect = 1;
    for (int i = 0; i < w; ++i) expect *= D;
    if (nq != expect || C.cols() != expect) throw usage_error("apply_kernel: kernel size mismatch");

    const Eigen::Index dl = left_dim(k);
    const Eigen::Index dr = right_dim(k + w - 1);

    // merge
    std::vector<Eigen::MatrixXcd> theta(expect);
    if (w == 2) {
      for (int p1 = 0; p1 < D; ++p1)
        for (int p2 = 0; p2 < D; ++p2)
          theta[p1 * D + p2] = site_[k][p1] * site_[k + 1][p2];
    } else {
      std::array<Eigen::MatrixXcd, D * D> partial;
      for (int p1 = 0; p1 < D; ++p1)
        for (int p2 = 0; p2 < D; ++p2)
          partial[p1 * D + p2] = site_[k][p1] * site_[k + 1][p2];
      for (int q12 = 0; q12 < D * D; ++q12)
        for (int p3 = 0; p3 < D; ++p3)
          theta[q12 * D + p3] = partial[q12] * site_[k + 2][p3];
    }

    // transform as one GEMM over the flattened window
    Eigen::MatrixXcd theta_flat(dl * dr, expect);
    for (int q = 0; q < expect; ++q)
      theta_flat.col(q) = Eigen::Map<const Eigen::VectorXcd>(theta[q].data(), dl * dr);
    Eigen::MatrixXcd out_flat = theta_flat * C.transpose();
    std::vector<Eigen::MatrixXcd> out(expect);
    for (int q = 0; q < expect; ++q)
      out[q] = Eigen::Map<const Eigen::MatrixXcd>(out_flat.col(q).data(), dl, dr);

    double discarded = 0;
    if (w == 2) {
      Eigen::MatrixXcd M(dl * D, dr * D);
      for (int p1 = 0; p1 < D; ++p1)
        for (int p2 = 0; p2 < D; ++p2)
          M.block(p1 * dl, p2 * dr, dl, dr) = out[p1 * D + p2];
      discarded += split_into(k, M, dl, dr, chi_max, cutoff);
    } else {
      Eigen::MatrixXcd M(dl * D, dr * D * D);
      for (int p1 = 0; p1 < D; ++p1)
        for (int p2 = 0; p2 < D; ++p2)
          for (int p3 = 0; p3 < D; ++p3)
            M.block(p1 * dl, (p2 * D + p3) * dr, dl, dr) = out[(p1 * D + p2) * D + p3];
      SvdResult svd = svd_econ(M);
      const double total = svd.S.squaredNorm();
      Eigen::Index r1 = detail::truncation_rank(svd.S, chi_max, cutoff);
      discarded += total > 0 ? (total - svd.S.head(r1).squaredNorm()) / total : 0.0;
      for (int p1 = 0; p1 < D; ++p1) site_[k][p1] = svd.U.block(p1 * dl, 0, dl, r1);
      Eigen::MatrixXcd W2 =
          svd.S.head(r1).asDiagonal() * svd.Vh.topRows(r1);  // r1 x (D*D*dr)
      Eigen::MatrixXcd M2(r1 * D, dr * D);
      for (int p2 = 0; p2 < D; ++p2)
        for (int p3 = 0; p3 < D; ++p3)
          M2.block(p2 * r1, p3 * dr, r1, dr) = W2.block(0, (p2 * D + p3) * dr, r1, dr);
      discarded += split_into(k + 1, M2, r1, dr, chi_max, cutoff);
    }
    center_ = k + w - 1;
    return discarded;
  }

  // One right-to-left truncating sweep (used after zip-up application).
  double compress_sweep(Eigen::Index chi_max, double cutoff) {
    move_center_to(size() - 1);
    double discarded = 0;
    for (int k = size() - 1; k > 0; --k) {
      const Eigen::Index dl = left_dim(k), dr = right_dim(k);
      Eigen::MatrixXcd M(dl, D * dr);
      for (int p = 0; p < D; ++p) M.block(0, p * dr, dl, dr) = site_[k][p];
      SvdResult svd = svd_econ(M);
      const double total = svd.S.squaredNorm();
      Eigen::Index r = detail::truncation_rank(svd.S, chi_max, cutoff);
      discarded += total > 0 ? (total - svd.S.head(r).squaredNorm()) / total : 0.0;
      for (int p = 0; p < D; ++p) site_[k][p] = svd.Vh.block(0, p * dr, r, dr);
      Eigen::MatrixXcd carry = svd.U.leftCols(r) * svd.S.head(r).asDiagonal();
      for (int p = 0; p < D; ++p) site_[k - 1][p] = site_[k - 1][p] * carry;
    }
    center_ = 0;
    return discarded;
  }

 private:
  // SVD split of a two-site block rooted at site k; center lands on k+1.
  double split_into(int k, const Eigen::MatrixXcd& M, Eigen::Index dl, Eigen::Index dr,
                    Eigen::Index chi_max, double cutoff) {
    SvdResult svd = svd_econ(M);
    const double total = svd.S.squaredNorm();
    Eigen::Index r = detail::truncation_rank(svd.S, chi_max, cutoff);
    double discarded = total > 0 ? (total - svd.S.head(r).squaredNorm()) / total : 0.0;
    for (int p = 0; p < D; ++p) site_[k][p] = svd.U.block(p * dl, 0, dl, r);
    Eigen::MatrixXcd right = svd.S.head(r).asDiagonal() * svd.Vh.topRows(r);
    for (int p = 0; p < D; ++p) site_[k + 1][p] = right.block(0, p * dr, r, dr);
    return discarded;
  }

  void shift_right() {
    const int k = center_;
    const Eigen::Index dl = left_dim(k), dr = right_dim(k);
    Eigen::MatrixXcd M(D * dl, dr);
    for (int p = 0; p < D; ++p) M.block(p * dl, 0, dl, dr) = site_[k][p];
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
    const Eigen::Index r = std::min(M.rows(), M.cols());
    Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(M.rows(), r);
    Eigen::MatrixXcd R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    for (int p = 0; p < D; ++p) site_[k][p] = Q.block(p * dl, 0, dl, r);
    for (int p = 0; p < D; ++p) site_[k + 1][p] = R * site_[k + 1][p];
    ++center_;
  }

  void shift_left() {
    const int k = center_;
    const Eigen::Index dl = left_dim(k), dr = right_dim(k);
    Eigen::MatrixXcd M(dl, D * dr);
    for (int p = 0; p < D; ++p) M.block(0, p * dr, dl, dr) = site_[k][p];
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M.adjoint());
    const Eigen::Index r = std::min(M.rows(), M.cols());
    Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(D * dr, r);
    Eigen::MatrixXcd R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    Eigen::MatrixXcd Qh = Q.adjoint();  // r x (D*dr), right-isometric rows
    for (int p = 0; p < D; ++p) site_[k][p] = Qh.block(0, p * dr, r, dr);
    Eigen::MatrixXcd L = R.adjoint();  // dl x r
    for (int p = 0; p < D; ++p) site_[k - 1][p] = site_[k - 1][p] * L;
    --center_;
  }

  std::vector<std::array<Eigen::MatrixXcd, D>> site_;
  int center_ = 0;
};

}  // namespace scarscope
