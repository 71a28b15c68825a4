#pragma once

#include <cmath>
#include <string>

#include "polecraft/matcore.hpp"
#include "polecraft/model.hpp"
#include "polecraft/tolerances.hpp"

namespace polecraft {

namespace detail {

// Row balancing of the constraint block: scaling rows never changes the null
// space, but it keeps the SVD well behaved when the pole dwarfs the
// orthonormal rows below.
template <class Matrix>
void balance_top_rows(Matrix& m, Eigen::Index top_rows) {
  if (top_rows <= 0 || m.cols() == 0) return;
  const double scale = m.topRows(top_rows).cwiseAbs().maxCoeff();
  if (scale > 1.0) m.topRows(top_rows) /= scale;
}

}  // namespace detail

// Orthonormal basis of the admissible first-column space for a real pole.
// With m = n the constraint is vacuous and the basis is the full space.
inline RealMatrix real_init_basis(const SystemPair& sys, double lambda, double rank_tol = 0.0) {
  RealMatrix c = sys.q2.transpose() * sys.a - lambda * sys.q2.transpose();
  detail::balance_top_rows(c, c.rows());
  return null_basis(c, rank_tol);
}

inline RealVector init_real_with(const RealMatrix& basis, const RealVector& coeffs) {
  RealVector x = basis * coeffs;
  const double nrm = x.norm();
  if (nrm <= tol::degeneracy_floor)
    throw DegenerateDirection("init_real: combination has numerically zero norm");
  return x / nrm;
}

inline RealVector init_real(const SystemPair& sys, double lambda, double rank_tol = 0.0) {
  RealMatrix s = real_init_basis(sys, lambda, rank_tol);
  return init_real_with(s, RealVector::Ones(s.cols()));
}

// M_{j+1} = [[Q2^T (A - lambda I), -Q2^T X_j], [X_j^T, 0]].
inline RealMatrix build_m_real(const SystemPair& sys, const PartialSchur& partial, double lambda) {
  const Eigen::Index n = sys.n(), m = sys.m(), j = partial.j;
  RealMatrix mm(n - m + j, n + j);
  mm.topLeftCorner(n - m, n) = sys.q2.transpose() * sys.a - lambda * sys.q2.transpose();
  mm.topRightCorner(n - m, j) = -(sys.q2.transpose() * partial.x);
  mm.bottomLeftCorner(j, n) = partial.x.transpose();
  mm.bottomRightCorner(j, j).setZero();
  return mm;
}

struct RealStepResult {
  RealVector x_next;  // unit n-vector
  RealVector v_next;  // j-vector
  double objective = 0.0;
  Eigen::Index subspace_dim = 0;
};

// Minimizes ||v||^2 over unit x in the null space of M_{j+1}: y is the top
// eigenvector of S1^T S1 rescaled so the x part has unit norm.
inline RealStepResult solve_real_step(const SystemPair& sys, const PartialSchur& partial,
                                      double lambda, double rank_tol = 0.0) {
  const Eigen::Index n = sys.n(), m = sys.m(), j = partial.j;
  RealMatrix mm = build_m_real(sys, partial, lambda);
  detail::balance_top_rows(mm, n - m);
  RealMatrix s = null_basis(mm, rank_tol);
  RealMatrix s1 = s.topRows(n);
  RealMatrix s2 = s.bottomRows(j);
  SymEig eig = sym_eig(s1.transpose() * s1);
  const double kappa = eig.eigenvalues(0);
  if (kappa <= tol::degeneracy_floor)
    throw DegenerateDirection("solve_real_step: leading direction collapses at column " +
                              std::to_string(j));
  RealVector y = eig.eigenvectors.col(0) / std::sqrt(kappa);
  RealStepResult out;
  out.x_next = s1 * y;
  out.v_next = s2 * y;
  out.objective = std::max(0.0, y.squaredNorm() - 1.0);
  out.subspace_dim = s.cols();
  const double nx = out.x_next.norm();
  out.x_next /= nx;
  out.v_next /= nx;
  return out;
}

// X_{j+1} = [X_j x], T_{j+1} = [[T_j, v], [0, lambda]].
inline PartialSchur update_real(const PartialSchur& partial, const RealStepResult& result,
                                double lambda) {
  const Eigen::Index n = result.x_next.size(), j = partial.j;
  PartialSchur next;
  next.j = j + 1;
  next.x.resize(n, j + 1);
  next.x.leftCols(j) = partial.x;
  next.x.col(j) = result.x_next;
  next.t = RealMatrix::Zero(j + 1, j + 1);
  next.t.topLeftCorner(j, j) = partial.t;
  next.t.block(0, j, j, 1) = result.v_next;
  next.t(j, j) = lambda;
  next.dep_sq_accum = partial.dep_sq_accum + result.objective;
  next.orthonormal = partial.orthonormal;
  if (next.orthonormal) {
    const double loss =
        (next.x.transpose() * next.x - RealMatrix::Identity(j + 1, j + 1)).norm();
    if (loss > tol::ortho_loss_factor * static_cast<double>(j + 1))
      throw OrthogonalityLoss("update_real: orthogonality residual " + std::to_string(loss) +
                              " at column " + std::to_string(j));
  }
  return next;
}

}  // namespace polecraft
