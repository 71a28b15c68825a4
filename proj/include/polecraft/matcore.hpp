#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "polecraft/errors.hpp"

namespace polecraft {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

namespace detail {

// Unit scalar that makes the first significant entry of v real and positive.
template <class Derived>
typename Derived::Scalar column_phase(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) return Scalar(1);
  const double big = v.cwiseAbs().maxCoeff();
  if (!(big > 0.0)) return Scalar(1);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > 1e-12 * big) return Eigen::numext::conj(v(i)) / Scalar(a);
  }
  return Scalar(1);
}

template <class Matrix>
void fix_column_phases(Matrix& m) {
  for (Eigen::Index i = 0; i < m.cols(); ++i) m.col(i) *= column_phase(m.col(i));
}

}  // namespace detail

struct QrFactors {
  RealMatrix q1;  // n x m, orthonormal columns
  RealMatrix q2;  // n x (n-m), orthonormal complement
  RealMatrix r;   // m x m upper triangular, positive diagonal
};

// Thin QR of a full-column-rank matrix, complement included.
inline QrFactors qr_thin(const RealMatrix& b, double rank_tol = 0.0) {
  const Eigen::Index n = b.rows(), m = b.cols();
  if (m > n) throw RankDeficientInput("qr_thin: more columns than rows");
  Eigen::JacobiSVD<RealMatrix> check(b);
  const double smax = check.singularValues().size() ? check.singularValues()(0) : 0.0;
  const double floor =
      (rank_tol > 0.0 ? rank_tol : static_cast<double>(std::max(n, m)) *
                                       std::numeric_limits<double>::epsilon()) *
      smax;
  const double smin = check.singularValues().size() ? check.singularValues().minCoeff() : 0.0;
  if (m > 0 && smin <= floor)
    throw RankDeficientInput("qr_thin: input is numerically rank deficient");

  Eigen::HouseholderQR<RealMatrix> qr(b);
  RealMatrix q = qr.householderQ() * RealMatrix::Identity(n, n);
  RealMatrix r = qr.matrixQR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (r(i, i) < 0.0) {
      r.row(i) = -r.row(i);
      q.col(i) = -q.col(i);
    }
  }
  QrFactors out;
  out.q1 = q.leftCols(m);
  out.q2 = q.rightCols(n - m);
  out.r = r;
  return out;
}

template <class Matrix>
struct SvdResult {
  Matrix left;                 // p x min(p,q)
  RealVector singular_values;  // min(p,q), nonincreasing
  Matrix right;                // q x q (full)
};

// SVD with a deterministic phase convention: the first significant entry of
// each right singular vector is made real positive, and the matching left
// vector gets the same rotation so left*diag(s)*right^H is unchanged.
template <class Matrix>
SvdResult<Matrix> svd(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeFullV);
  SvdResult<Matrix> out;
  out.left = dec.matrixU();
  out.singular_values = dec.singularValues();
  out.right = dec.matrixV();
  for (Eigen::Index i = 0; i < out.right.cols(); ++i) {
    const auto phase = detail::column_phase(out.right.col(i));
    out.right.col(i) *= phase;
    if (i < out.left.cols()) out.left.col(i) *= phase;
  }
  return out;
}

// Orthonormal basis of the null space; rel_tol scales the largest singular
// value, with max(p,q)*eps as the default rank cutoff.
template <class Matrix>
Matrix null_basis(const Matrix& m, double rel_tol = 0.0) {
  const Eigen::Index p = m.rows(), q = m.cols();
  if (q == 0) throw EmptyNullSpace("null_basis: input has no columns");
  if (p == 0) return Matrix::Identity(q, q);
  Eigen::JacobiSVD<Matrix> dec(m, Eigen::ComputeFullV);
  const RealVector& sv = dec.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double cutoff =
      (rel_tol > 0.0 ? rel_tol : static_cast<double>(std::max(p, q)) *
                                     std::numeric_limits<double>::epsilon()) *
      smax;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  const Eigen::Index r = q - rank;
  if (r == 0) throw EmptyNullSpace("null_basis: input has full column rank");
  Matrix s = dec.matrixV().rightCols(r);
  detail::fix_column_phases(s);
  return s;
}

struct SymEig {
  RealVector eigenvalues;   // nonincreasing
  RealMatrix eigenvectors;  // orthonormal columns, sign convention applied
};

// Symmetric eigendecomposition; the input is symmetrized internally.
inline SymEig sym_eig(const RealMatrix& h) {
  RealMatrix hs = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(hs);
  SymEig out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors = es.eigenvectors().rowwise().reverse();
  detail::fix_column_phases(out.eigenvectors);
  return out;
}

}  // namespace polecraft
