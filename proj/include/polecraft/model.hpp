#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "polecraft/errors.hpp"
#include "polecraft/matcore.hpp"
#include "polecraft/tolerances.hpp"

namespace polecraft {

struct RealPole {
  double value;
};

// Stands for the conjugate pair alpha +- i*beta, beta > 0.
struct PairPole {
  double alpha;
  double beta;
};

using PoleItem = std::variant<RealPole, PairPole>;

struct PoleSpec {
  std::vector<PoleItem> items;

  Eigen::Index scalar_count() const {
    Eigen::Index n = 0;
    for (const auto& it : items) n += std::holds_alternative<PairPole>(it) ? 2 : 1;
    return n;
  }

  std::vector<Complex> expand() const {
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(scalar_count()));
    for (const auto& it : items) {
      if (const auto* rp = std::get_if<RealPole>(&it)) {
        out.emplace_back(rp->value, 0.0);
      } else {
        const auto& pp = std::get<PairPole>(it);
        out.emplace_back(pp.alpha, pp.beta);
        out.emplace_back(pp.alpha, -pp.beta);
      }
    }
    return out;
  }
};

namespace detail {

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

inline std::string pole_text(const Complex& z) {
  return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")";
}

}  // namespace detail

// Groups a raw scalar list into real poles and conjugate pairs, preserving
// the relative order of first occurrences.
inline PoleSpec canonicalize_poles(const std::vector<Complex>& raw) {
  const std::size_t n = raw.size();
  PoleSpec spec;
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    const Complex z = raw[i];
    if (std::abs(z.imag()) <= tol::conjugate_match * std::abs(z)) {
      spec.items.push_back(RealPole{z.real()});
      used[i] = true;
      continue;
    }
    bool matched = false;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (used[j]) continue;
      const Complex w = raw[j];
      if (detail::close_rel(z.real(), w.real(), tol::conjugate_match) &&
          detail::close_rel(z.imag(), -w.imag(), tol::conjugate_match)) {
        spec.items.push_back(PairPole{z.real(), std::abs(z.imag())});
        used[i] = used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched)
      throw UnmatchedConjugate("canonicalize_poles: no conjugate partner for pole " +
                               detail::pole_text(z));
  }
  return spec;
}

struct SystemPair {
  RealMatrix a;
  RealMatrix b;
  RealMatrix q1;
  RealMatrix q2;
  RealMatrix r_factor;
  Eigen::Index controllability_rank = 0;

  Eigen::Index n() const { return a.rows(); }
  Eigen::Index m() const { return b.cols(); }
};

// QR of B plus a controllability check on [B, AB, ..., A^{n-1}B].
// Each power block is normalized before the rank decision so large ||A||
// does not drown the early blocks.
inline SystemPair make_system(const RealMatrix& a, const RealMatrix& b, double rank_tol = 0.0) {
  const Eigen::Index n = a.rows(), m = b.cols();
  if (a.cols() != n) throw Error("make_system: A must be square");
  if (b.rows() != n) throw Error("make_system: B row count must match A");
  if (m < 1 || m > n) throw Error("make_system: need 1 <= m <= n");

  QrFactors qr;
  try {
    qr = qr_thin(b, rank_tol);
  } catch (const RankDeficientInput&) {
    throw RankDeficientB("make_system: B is not full column rank");
  }

  RealMatrix ctrl(n, n * m);
  RealMatrix block = b;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double scale = block.norm();
    ctrl.middleCols(k * m, m) = scale > 0.0 ? RealMatrix(block / scale) : block;
    if (k + 1 < n) block = a * block;
  }
  Eigen::JacobiSVD<RealMatrix> dec(ctrl);
  const double smax = dec.singularValues()(0);
  const double cutoff =
      (rank_tol > 0.0 ? rank_tol : static_cast<double>(std::max(n, n * m)) *
                                       std::numeric_limits<double>::epsilon()) *
      smax;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < dec.singularValues().size(); ++i)
    if (dec.singularValues()(i) > cutoff) ++rank;

  SystemPair sys;
  sys.a = a;
  sys.b = b;
  sys.q1 = qr.q1;
  sys.q2 = qr.q2;
  sys.r_factor = qr.r;
  sys.controllability_rank = rank;
  if (rank < n)
    throw NotControllable("make_system: controllability matrix has rank " +
                          std::to_string(rank) + " < " + std::to_string(n));
  return sys;
}

// In-progress Schur pair (X_j, T_j) plus the running departure bookkeeping.
struct PartialSchur {
  Eigen::Index j = 0;
  RealMatrix x;  // n x j
  RealMatrix t;  // j x j, upper quasi-triangular
  double dep_sq_accum = 0.0;
  bool orthonormal = true;
};

inline PartialSchur empty_partial(Eigen::Index n) {
  PartialSchur p;
  p.x = RealMatrix::Zero(n, 0);
  p.t = RealMatrix::Zero(0, 0);
  return p;
}

struct StepRecord {
  Eigen::Index index = 0;     // first column this step assigns
  std::string kind;           // "real" or "pair"
  std::string strategy;       // "init", "real", "jacobi", "balanced", "baseline"
  Eigen::Index subspace_dim = 0;
  double dep1 = 0.0;          // rotation-strategy objective, +inf when rejected
  double dep2 = 0.0;          // balanced-strategy objective, +inf when unavailable
  double bound1 = 0.0;        // certified objective bound for the rotation strategy
  double bound2 = 0.0;        // certified objective bound for the balanced strategy
  double objective = 0.0;     // accepted contribution to dep_sq_accum
};

struct FeedbackSolution {
  RealMatrix f;  // m x n
  RealMatrix x;  // n x n
  RealMatrix t;  // n x n
  std::vector<StepRecord> step_log;
  double dep_sq_accum = 0.0;
  bool orthonormal = true;
};

struct RobustnessReport {
  double dep = 0.0;
  double cond_x = 0.0;  // infinity when the eigenvector matrix is singular
  int precs = 0;
  double schur_residual = 0.0;       // ||A + BF - XTX^T||_F / (1 + ||A||_F)
  double orth_residual = 0.0;        // ||X^T X - I||_F
  double constraint_residual = 0.0;  // ||Q2^T (AX - XT)||_F / (1 + ||A||_F)
  double dep_identity_delta = 0.0;   // relative gap between the two dep formulas
};

}  // namespace polecraft
