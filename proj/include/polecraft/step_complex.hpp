#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "polecraft/matcore.hpp"
#include "polecraft/model.hpp"
#include "polecraft/step_real.hpp"
#include "polecraft/tolerances.hpp"

namespace polecraft {

namespace detail {

// sigma_min/sigma_max of [x y], computed from the 2x2 Gram matrix.
inline double parts_dependence_ratio(const RealVector& x, const RealVector& y) {
  const double r1 = x.squaredNorm(), r2 = y.squaredNorm(), g = x.dot(y);
  const double disc = std::sqrt(std::max(0.0, (r1 - r2) * (r1 - r2) + 4.0 * g * g));
  const double w1 = 0.5 * (r1 + r2 + disc);
  if (w1 <= 0.0) return 0.0;
  const double w2 = std::max(0.0, r1 * r2 - g * g) / w1;
  return std::sqrt(w2 / w1);
}

}  // namespace detail

// Orthonormal basis of the admissible leading-pair space: null space of
// Q2^T (A - (alpha + i beta) I).
inline ComplexMatrix complex_init_basis(const SystemPair& sys, double alpha, double beta,
                                        double rank_tol = 0.0) {
  ComplexMatrix c(sys.q2.cols(), sys.n());
  c.real() = sys.q2.transpose() * sys.a - alpha * sys.q2.transpose();
  c.imag() = -beta * sys.q2.transpose();
  detail::balance_top_rows(c, c.rows());
  return null_basis(c, rank_tol);
}

// Rotation of the real/imaginary parts of (z, w) that makes the two x
// columns orthogonal while staying inside the null-vector family.
struct JacobiPair {
  RealVector x_a, x_b;
  RealVector v_a, v_b;
  double c = 1.0, s = 0.0;
};

inline JacobiPair jacobi_orthogonalize(const ComplexVector& z, const ComplexVector& w) {
  RealVector x = z.real(), y = z.imag();
  if (detail::parts_dependence_ratio(x, y) <= tol::dependence_ratio)
    throw LinearlyDependentParts("jacobi_orthogonalize: parts are numerically dependent");
  const double rho1 = x.squaredNorm(), rho2 = y.squaredNorm();
  const double gamma = x.dot(y);
  double c = 1.0, s = 0.0;
  if (gamma != 0.0) {
    const double tau = (rho2 - rho1) / (2.0 * gamma);
    const double t = tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
    c = 1.0 / std::sqrt(1.0 + t * t);
    s = t * c;
  }
  JacobiPair out;
  out.x_a = c * x - s * y;
  out.x_b = s * x + c * y;
  out.v_a = c * w.real() - s * w.imag();
  out.v_b = s * w.real() + c * w.imag();
  out.c = c;
  out.s = s;
  return out;
}

// Two orthonormal leading columns for a conjugate pair plus their 2x2 block.
struct InitPair {
  RealVector x1, x2;
  double t12 = 0.0, t21 = 0.0;     // off-diagonal entries of the leading block
  double dep_contribution = 0.0;   // beta^2 (delta - 1/delta)^2, zero on the main path
  Eigen::Index subspace_dim = 0;
  bool fallback = false;
};

// Single-direction construction: orthogonalize the parts of z and absorb the
// unequal column norms into a skewed block. Used when the null space is
// one-dimensional and for randomized restarts.
inline InitPair init_pair_from_direction(const ComplexVector& z, double beta,
                                         Eigen::Index subspace_dim) {
  if (detail::parts_dependence_ratio(z.real(), z.imag()) <= tol::dependence_ratio)
    throw InfeasibleBalancing(
        "init_complex: real and imaginary parts of the null direction are dependent");
  JacobiPair jp = jacobi_orthogonalize(z, ComplexVector(0));
  const double na = jp.x_a.norm(), nb = jp.x_b.norm();
  InitPair out;
  out.x1 = jp.x_a / na;
  out.x2 = jp.x_b / nb;
  const double delta = na / nb;
  out.t12 = delta * beta;
  out.t21 = -beta / delta;
  const double skew = delta - 1.0 / delta;
  out.dep_contribution = beta * beta * skew * skew;
  out.subspace_dim = subspace_dim;
  out.fallback = true;
  return out;
}

// Balanced two-direction construction: combine the top two eigendirections of
// the symmetric pairing matrix so the two columns are orthonormal and the
// block keeps delta = 1.
inline InitPair init_complex_from_basis(const ComplexMatrix& s, double beta) {
  const Eigen::Index r = s.cols();
  if (r == 0) throw EmptyNullSpace("init_complex: empty admissible space");
  if (r == 1) return init_pair_from_direction(s.col(0), beta, 1);
  RealMatrix sr = s.real(), si = s.imag();
  RealMatrix sym = sr.transpose() * si + si.transpose() * sr;
  RealMatrix dif = sr.transpose() * sr - si.transpose() * si;
  RealMatrix ha(2 * r, 2 * r);
  ha.topLeftCorner(r, r) = sym;
  ha.topRightCorner(r, r) = dif;
  ha.bottomLeftCorner(r, r) = dif;
  ha.bottomRightCorner(r, r) = -sym;
  SymEig eig = sym_eig(ha);
  const double theta1 = std::max(0.0, eig.eigenvalues(0));
  const double theta2 = std::max(0.0, eig.eigenvalues(1));
  const double ratio = theta1 > tol::degeneracy_floor ? std::sqrt(theta2 / theta1) : 0.0;
  auto jmap = [r](const RealVector& v) {
    RealVector out(2 * r);
    out.head(r) = -v.tail(r);
    out.tail(r) = v.head(r);
    return out;
  };
  const RealVector u1 = eig.eigenvectors.col(0);
  const RealVector u2 = eig.eigenvectors.col(1);
  RealVector g = ratio * u1 + u2 - ratio * jmap(u1) + jmap(u2);
  RealVector xa = sr * g.head(r) - si * g.tail(r);
  RealVector xb = si * g.head(r) + sr * g.tail(r);
  const double nrm = xa.norm();
  InitPair out;
  out.x1 = xa / nrm;
  out.x2 = xb / nrm;
  out.t12 = beta;
  out.t21 = -beta;
  out.dep_contribution = 0.0;
  out.subspace_dim = r;
  return out;
}

inline InitPair init_complex(const SystemPair& sys, double alpha, double beta,
                             double rank_tol = 0.0) {
  return init_complex_from_basis(complex_init_basis(sys, alpha, beta, rank_tol), beta);
}

// Restart variant: a caller-chosen combination of the basis directions,
// orthogonalized by the single-direction construction.
inline InitPair init_complex_with(const ComplexMatrix& basis, const ComplexVector& coeffs,
                                  double beta) {
  ComplexVector z = basis * coeffs;
  return init_pair_from_direction(z, beta, basis.cols());
}

// M_{j+1} = [[Q2^T (A - (alpha + i beta) I), -Q2^T X_j], [X_j^T, 0]].
inline ComplexMatrix build_m_complex(const SystemPair& sys, const PartialSchur& partial,
                                     double alpha, double beta) {
  const Eigen::Index n = sys.n(), m = sys.m(), j = partial.j;
  ComplexMatrix top(n - m, n);
  top.real() = sys.q2.transpose() * sys.a - alpha * sys.q2.transpose();
  top.imag() = -beta * sys.q2.transpose();
  ComplexMatrix mm = ComplexMatrix::Zero(n - m + j, n + j);
  mm.topLeftCorner(n - m, n) = top;
  mm.topRightCorner(n - m, j) = -(sys.q2.transpose() * partial.x).cast<Complex>();
  mm.bottomLeftCorner(j, n) = partial.x.transpose().cast<Complex>();
  return mm;
}

// One candidate pair of columns with its scalings and objective value.
struct PairStepCandidate {
  RealVector x_a, x_b;  // orthogonal columns before scaling
  RealVector v_a, v_b;  // matching top-column entries before scaling
  double delta1 = 1.0;  // 1/||x_a||
  double delta2 = 1.0;  // 1/||x_b||
  double delta = 1.0;   // delta2/delta1
  double objective = 0.0;
  double bound = 0.0;   // certified upper bound on the objective
};

// Strategy 1: rotate the parts of the dominant null direction.
inline std::optional<PairStepCandidate> strategy_jacobi(const ComplexMatrix& s1,
                                                        const ComplexMatrix& s2,
                                                        const SvdResult<ComplexMatrix>& dec,
                                                        double beta) {
  if (dec.singular_values.size() < 1) return std::nullopt;
  const double sigma1 = dec.singular_values(0);
  if (sigma1 <= tol::sigma_floor) return std::nullopt;
  const ComplexVector dir = dec.right.col(0);
  const ComplexVector z = (s1 * dir) / sigma1;
  const ComplexVector w = (s2 * dir) / sigma1;
  if (detail::parts_dependence_ratio(z.real(), z.imag()) <= tol::dependence_ratio)
    return std::nullopt;
  JacobiPair jp = jacobi_orthogonalize(z, w);
  const double na = jp.x_a.norm(), nb = jp.x_b.norm();
  if (std::min(na, nb) < tol::small_column_ratio * z.norm()) return std::nullopt;
  PairStepCandidate cand;
  cand.x_a = jp.x_a;
  cand.x_b = jp.x_b;
  cand.v_a = jp.v_a;
  cand.v_b = jp.v_b;
  cand.delta1 = 1.0 / na;
  cand.delta2 = 1.0 / nb;
  cand.delta = na / nb;
  const double skew = cand.delta - 1.0 / cand.delta;
  cand.objective = cand.delta1 * cand.delta1 * jp.v_a.squaredNorm() +
                   cand.delta2 * cand.delta2 * jp.v_b.squaredNorm() +
                   beta * beta * skew * skew;
  const double wterm = std::max(0.0, 1.0 - sigma1 * sigma1) / (sigma1 * sigma1);
  cand.bound = (wterm + beta * beta) / std::min(na * na, nb * nb);
  return cand;
}

// Spectral frame of the 4-column part matrix [Im u1, Im u2, Re u1, Re u2].
struct HamiltonianFrame {
  RealMatrix omega;  // columns c1, c2, J c1, J c2
  double phi1 = 0.0, phi2 = 0.0;
  double xi1 = 0.0, xi2 = 0.0;
  double eta1 = 0.0, eta2 = 0.0;
  double zeta12 = 0.0, zeta21 = 0.0;
};

namespace detail {

inline Eigen::Vector4d jmap4(const Eigen::Vector4d& v) {
  return Eigen::Vector4d(-v(2), -v(3), v(0), v(1));
}

// Unit column orthogonal to c1 and J c1, preferring the given right singular
// vector and falling back deterministically when singular values cluster.
inline Eigen::Vector4d complete_frame_column(const Eigen::Vector4d& c1, const RealMatrix& v,
                                             Eigen::Index preferred) {
  const Eigen::Vector4d j1 = jmap4(c1);
  auto project = [&](const Eigen::Vector4d& cand) -> Eigen::Vector4d {
    return cand - c1.dot(cand) * c1 - j1.dot(cand) * j1;
  };
  Eigen::Vector4d best = project(v.col(preferred));
  if (best.norm() >= 0.5) return best.normalized();
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    if (i == preferred) continue;
    Eigen::Vector4d cand = project(v.col(i));
    if (cand.norm() >= 0.5) return cand.normalized();
  }
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d cand = project(Eigen::Vector4d::Unit(i));
    if (cand.norm() >= 0.5) return cand.normalized();
  }
  throw Error("hamiltonian_frame: no usable completion column");
}

}  // namespace detail

inline HamiltonianFrame hamiltonian_frame(const ComplexVector& u1, const ComplexVector& u2,
                                          double sigma1, double sigma2) {
  if (u2.size() != u1.size()) throw Error("hamiltonian_frame: direction length mismatch");
  if (u1.size() == 0) throw SubspaceTooSmall("hamiltonian_frame: empty directions");
  if (sigma1 <= tol::sigma_floor || sigma2 <= tol::sigma_floor)
    throw SubspaceTooSmall("hamiltonian_frame: vanishing singular value");
  RealMatrix wmat(u1.size(), 4);
  wmat.col(0) = u1.imag();
  wmat.col(1) = u2.imag();
  wmat.col(2) = u1.real();
  wmat.col(3) = u2.real();
  SvdResult<RealMatrix> dec = svd(wmat);
  RealVector sv = RealVector::Zero(4);
  sv.head(dec.singular_values.size()) = dec.singular_values;
  HamiltonianFrame frame;
  frame.phi1 = std::max(0.0, 1.0 - 2.0 * sv(3) * sv(3));
  frame.phi2 = std::max(0.0, 1.0 - 2.0 * sv(2) * sv(2));
  const Eigen::Vector4d c1 = dec.right.col(3);
  const Eigen::Vector4d c2 = detail::complete_frame_column(c1, dec.right, 2);
  frame.omega.resize(4, 4);
  frame.omega.col(0) = c1;
  frame.omega.col(1) = c2;
  frame.omega.col(2) = detail::jmap4(c1);
  frame.omega.col(3) = detail::jmap4(c2);
  const Eigen::Vector2d p1 = c1.head<2>(), q1 = c1.tail<2>();
  const Eigen::Vector2d p2 = c2.head<2>(), q2 = c2.tail<2>();
  const double xw1 = std::max(0.0, 1.0 - sigma1 * sigma1) / (sigma1 * sigma1);
  const double xw2 = std::max(0.0, 1.0 - sigma2 * sigma2) / (sigma2 * sigma2);
  auto quad = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return xw1 * a(0) * b(0) + xw2 * a(1) * b(1);
  };
  frame.xi1 = quad(p1, p1);
  frame.xi2 = quad(p2, p2);
  frame.eta1 = quad(q1, q1);
  frame.eta2 = quad(q2, q2);
  frame.zeta12 = quad(q1, p2);
  frame.zeta21 = quad(q2, p1);
  return frame;
}

struct MuNu {
  double mu1 = 0.0, mu2 = 0.0, nu1 = 0.0, nu2 = 0.0;
};

// Solves the three coupling equations of the balanced strategy.  nu2 is a
// free parameter inside [0, sqrt(phi1/(phi1+phi2))]; the default sits at the
// midpoint of the admissible interval.  The objective is invariant in nu2
// for a fixed sign pattern, and the sign of mu1*nu2 follows the zeta rule.
inline MuNu solve_munu(const HamiltonianFrame& frame, std::optional<double> nu2_in = std::nullopt) {
  MuNu out;
  if (frame.phi1 <= tol::degeneracy_floor) {
    out.mu2 = out.nu2 = std::numbers::sqrt2 / 2.0;
    return out;
  }
  const double cap_sq = frame.phi1 / (frame.phi1 + frame.phi2);
  const double nu2 = nu2_in ? *nu2_in : std::sqrt(0.5 * cap_sq);
  if (nu2 < 0.0) throw Error("solve_munu: nu2 must be nonnegative");
  if (nu2 * nu2 > cap_sq * (1.0 + 1e-12))
    throw Error("solve_munu: nu2 outside the admissible interval");
  const double mu2 = std::sqrt(std::max(0.0, cap_sq - nu2 * nu2));
  const double rho = std::sqrt(frame.phi2 / frame.phi1);
  out.mu2 = mu2;
  out.nu2 = nu2;
  if (frame.zeta21 <= frame.zeta12) {
    out.mu1 = -rho * nu2;
    out.nu1 = rho * mu2;
  } else {
    out.mu1 = rho * nu2;
    out.nu1 = -rho * mu2;
  }
  return out;
}

// Strategy 2: orthonormal columns with equal norms (delta = 1) from a
// combination of the two dominant null directions.
inline PairStepCandidate strategy_balanced(const ComplexMatrix& s2,
                                           const SvdResult<ComplexMatrix>& dec,
                                           const HamiltonianFrame& frame,
                                           std::optional<double> nu2 = std::nullopt) {
  if (dec.right.cols() < 2 || dec.singular_values.size() < 2 || dec.left.cols() < 2)
    throw SubspaceTooSmall("strategy_balanced: need at least two directions");
  const double sigma1 = dec.singular_values(0), sigma2 = dec.singular_values(1);
  if (sigma2 <= tol::sigma_floor)
    throw SubspaceTooSmall("strategy_balanced: second direction numerically vanishes");
  const MuNu mn = solve_munu(frame, nu2);
  const Eigen::Vector4d munu(mn.mu1, mn.mu2, mn.nu1, mn.nu2);
  const Eigen::Vector4d gz = frame.omega * munu;
  const Complex comb1(gz(0), gz(2)), comb2(gz(1), gz(3));
  const ComplexVector z = dec.left.col(0) * comb1 + dec.left.col(1) * comb2;
  const ComplexVector w1 = (s2 * dec.right.col(0)) / sigma1;
  const ComplexVector w2 = (s2 * dec.right.col(1)) / sigma2;
  const ComplexVector w = w1 * comb1 + w2 * comb2;
  PairStepCandidate cand;
  cand.x_a = z.real();
  cand.x_b = z.imag();
  cand.v_a = w.real();
  cand.v_b = w.imag();
  cand.delta1 = std::numbers::sqrt2;
  cand.delta2 = std::numbers::sqrt2;
  cand.delta = 1.0;
  cand.objective = 2.0 * w.squaredNorm();
  cand.bound = 2.0 * std::max(0.0, 1.0 - sigma2 * sigma2) / (sigma2 * sigma2);
  return cand;
}

// Appends the scaled candidate columns and the skewed 2x2 block.
inline PartialSchur append_pair(const PartialSchur& partial, const PairStepCandidate& cand,
                                double alpha, double beta) {
  const Eigen::Index n = cand.x_a.size(), j = partial.j;
  PartialSchur next;
  next.j = j + 2;
  next.x.resize(n, j + 2);
  next.x.leftCols(j) = partial.x;
  next.x.col(j) = cand.delta1 * cand.x_a;
  next.x.col(j + 1) = cand.delta2 * cand.x_b;
  next.t = RealMatrix::Zero(j + 2, j + 2);
  next.t.topLeftCorner(j, j) = partial.t;
  next.t.block(0, j, j, 1) = cand.delta1 * cand.v_a;
  next.t.block(0, j + 1, j, 1) = cand.delta2 * cand.v_b;
  next.t(j, j) = alpha;
  next.t(j, j + 1) = cand.delta * beta;
  next.t(j + 1, j) = -beta / cand.delta;
  next.t(j + 1, j + 1) = alpha;
  next.dep_sq_accum = partial.dep_sq_accum + cand.objective;
  next.orthonormal = partial.orthonormal;
  if (next.orthonormal) {
    const double loss =
        (next.x.transpose() * next.x - RealMatrix::Identity(j + 2, j + 2)).norm();
    if (loss > tol::ortho_loss_factor * static_cast<double>(j + 2))
      throw OrthogonalityLoss("append_pair: orthogonality residual " + std::to_string(loss) +
                              " at column " + std::to_string(j));
  }
  return next;
}

// Algorithm comparison rule: smaller objective wins, ties go to the balanced
// candidate because it keeps delta = 1 exactly.
inline PartialSchur choose_and_update(const PartialSchur& partial,
                                      const std::optional<PairStepCandidate>& cand1,
                                      const std::optional<PairStepCandidate>& cand2,
                                      double alpha, double beta) {
  if (!cand1 && !cand2)
    throw NoViableCandidate("pair step at column " + std::to_string(partial.j) +
                            ": both strategies rejected");
  const double inf = std::numeric_limits<double>::infinity();
  const double dep1 = cand1 ? cand1->objective : inf;
  const double dep2 = cand2 ? cand2->objective : inf;
  const PairStepCandidate& pick = dep1 < dep2 ? *cand1 : *cand2;
  return append_pair(partial, pick, alpha, beta);
}

// Prior-method pair step used as the benchmark baseline: delta = 1 block and
// the raw parts of the dominant null direction, mutual orthogonality of the
// two new columns dropped.
inline PartialSchur baseline_complex_step(const SystemPair& sys, const PartialSchur& partial,
                                          double alpha, double beta, double rank_tol = 0.0,
                                          Eigen::Index* subspace_dim_out = nullptr) {
  const Eigen::Index n = sys.n(), m = sys.m(), j = partial.j;
  ComplexMatrix mm = build_m_complex(sys, partial, alpha, beta);
  detail::balance_top_rows(mm, n - m);
  ComplexMatrix s = null_basis(mm, rank_tol);
  if (subspace_dim_out) *subspace_dim_out = s.cols();
  ComplexMatrix s1 = s.topRows(n);
  ComplexMatrix s2 = s.bottomRows(j);
  SvdResult<ComplexMatrix> dec = svd(s1);
  const double sigma1 = dec.singular_values.size() ? dec.singular_values(0) : 0.0;
  if (sigma1 <= tol::sigma_floor)
    throw DegenerateDirection("baseline step: null directions have no x component");
  const ComplexVector z = (s1 * dec.right.col(0)) / sigma1;
  const ComplexVector w = (s2 * dec.right.col(0)) / sigma1;
  PartialSchur next;
  next.j = j + 2;
  next.x.resize(n, j + 2);
  next.x.leftCols(j) = partial.x;
  next.x.col(j) = z.real();
  next.x.col(j + 1) = z.imag();
  next.t = RealMatrix::Zero(j + 2, j + 2);
  next.t.topLeftCorner(j, j) = partial.t;
  next.t.block(0, j, j, 1) = w.real();
  next.t.block(0, j + 1, j, 1) = w.imag();
  next.t(j, j) = alpha;
  next.t(j, j + 1) = beta;
  next.t(j + 1, j) = -beta;
  next.t(j + 1, j + 1) = alpha;
  next.dep_sq_accum = partial.dep_sq_accum + w.squaredNorm();
  next.orthonormal = false;
  return next;
}

}  // namespace polecraft
