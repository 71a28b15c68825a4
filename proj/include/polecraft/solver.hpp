#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "polecraft/matcore.hpp"
#include "polecraft/model.hpp"
#include "polecraft/rng.hpp"
#include "polecraft/step_complex.hpp"
#include "polecraft/step_real.hpp"
#include "polecraft/tolerances.hpp"

namespace polecraft {

struct SolveConfig {
  double rank_tol = 0.0;            // 0 selects the dimension-scaled default
  double step_residual_tol = 1e-6;  // runtime guard, relative to 1 + ||A||_F
  int multistart_count = 1;
  std::uint64_t rng_seed = 0;
  bool baseline_mode = false;
};

// Caller-supplied combination of the admissible leading directions, used by
// the randomized restarts.
struct InitOverride {
  std::optional<RealVector> real_coeffs;
  std::optional<ComplexVector> pair_coeffs;
};

namespace detail {

inline bool step_log_enabled() {
  const char* v = std::getenv("POLECRAFT_LOG");
  return v != nullptr && std::string_view(v) == "debug";
}

inline void print_step(const StepRecord& rec) {
  std::fprintf(stderr,
               "[polecraft] col=%lld %s/%s dim=%lld dep1=%.6e bound1=%.6e dep2=%.6e "
               "bound2=%.6e obj=%.6e\n",
               static_cast<long long>(rec.index), rec.kind.c_str(), rec.strategy.c_str(),
               static_cast<long long>(rec.subspace_dim), rec.dep1, rec.bound1, rec.dep2,
               rec.bound2, rec.objective);
}

inline std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace detail

inline double constraint_residual(const SystemPair& sys, const PartialSchur& partial) {
  if (partial.j == 0) return 0.0;
  return (sys.q2.transpose() * (sys.a * partial.x - partial.x * partial.t)).norm();
}

// F = R^{-1} Q1^T (X T X^T - A) for orthogonal X.
inline RealMatrix recover_f(const SystemPair& sys, const RealMatrix& x, const RealMatrix& t) {
  RealMatrix target = x * t * x.transpose() - sys.a;
  return sys.r_factor.triangularView<Eigen::Upper>().solve(sys.q1.transpose() * target);
}

// Variant for a merely invertible X, as produced by the baseline pair steps.
inline RealMatrix recover_f_general(const SystemPair& sys, const RealMatrix& x,
                                    const RealMatrix& t) {
  Eigen::FullPivLU<RealMatrix> lu(x);
  if (!lu.isInvertible())
    throw Error("feedback recovery: X is numerically singular");
  RealMatrix target = x * t * lu.inverse() - sys.a;
  return sys.r_factor.triangularView<Eigen::Upper>().solve(sys.q1.transpose() * target);
}

inline FeedbackSolution assign_with(const SystemPair& sys, const PoleSpec& poles,
                                    const SolveConfig& cfg, const InitOverride& ov) {
  const Eigen::Index n = sys.n(), m = sys.m();
  if (poles.scalar_count() != n)
    throw Error("assign: " + std::to_string(poles.scalar_count()) + " poles for state dimension " +
                std::to_string(n));
  if (poles.items.empty()) throw Error("assign: empty pole list");
  const double a_norm = sys.a.norm();
  const bool logging = detail::step_log_enabled();
  PartialSchur partial = empty_partial(n);
  std::vector<StepRecord> log;
  log.reserve(poles.items.size());
  const double inf = std::numeric_limits<double>::infinity();

  for (std::size_t idx = 0; idx < poles.items.size(); ++idx) {
    const Eigen::Index col = partial.j;
    StepRecord rec;
    rec.index = col;
    rec.dep1 = rec.dep2 = rec.bound1 = rec.bound2 = inf;

    if (const RealPole* rp = std::get_if<RealPole>(&poles.items[idx])) {
      rec.kind = "real";
      if (col == 0) {
        RealMatrix basis = real_init_basis(sys, rp->value, cfg.rank_tol);
        if (ov.real_coeffs && ov.real_coeffs->size() != basis.cols())
          throw Error("assign: init coefficient length " +
                      std::to_string(ov.real_coeffs->size()) + " does not match basis width " +
                      std::to_string(basis.cols()));
        RealVector x1 = ov.real_coeffs ? init_real_with(basis, *ov.real_coeffs)
                                       : init_real_with(basis, RealVector::Ones(basis.cols()));
        partial.j = 1;
        partial.x = x1;
        partial.t = RealMatrix::Constant(1, 1, rp->value);
        rec.strategy = "init";
        rec.subspace_dim = basis.cols();
        rec.objective = 0.0;
      } else {
        RealStepResult st = solve_real_step(sys, partial, rp->value, cfg.rank_tol);
        partial = update_real(partial, st, rp->value);
        rec.strategy = "real";
        rec.subspace_dim = st.subspace_dim;
        rec.objective = st.objective;
      }
    } else {
      const PairPole pp = std::get<PairPole>(poles.items[idx]);
      rec.kind = "pair";
      if (col == 0) {
        ComplexMatrix basis = complex_init_basis(sys, pp.alpha, pp.beta, cfg.rank_tol);
        if (ov.pair_coeffs && ov.pair_coeffs->size() != basis.cols())
          throw Error("assign: init coefficient length " +
                      std::to_string(ov.pair_coeffs->size()) + " does not match basis width " +
                      std::to_string(basis.cols()));
        InitPair ip = ov.pair_coeffs ? init_complex_with(basis, *ov.pair_coeffs, pp.beta)
                                     : init_complex_from_basis(basis, pp.beta);
        partial.j = 2;
        partial.x.resize(n, 2);
        partial.x.col(0) = ip.x1;
        partial.x.col(1) = ip.x2;
        partial.t.resize(2, 2);
        partial.t << pp.alpha, ip.t12, ip.t21, pp.alpha;
        partial.dep_sq_accum = ip.dep_contribution;
        rec.strategy = "init";
        rec.subspace_dim = ip.subspace_dim;
        rec.objective = ip.dep_contribution;
      } else if (cfg.baseline_mode) {
        Eigen::Index dim = 0;
        const double before = partial.dep_sq_accum;
        partial = baseline_complex_step(sys, partial, pp.alpha, pp.beta, cfg.rank_tol, &dim);
        rec.strategy = "baseline";
        rec.subspace_dim = dim;
        rec.objective = partial.dep_sq_accum - before;
      } else {
        ComplexMatrix mm = build_m_complex(sys, partial, pp.alpha, pp.beta);
        detail::balance_top_rows(mm, n - m);
        ComplexMatrix s = null_basis(mm, cfg.rank_tol);
        ComplexMatrix s1 = s.topRows(n);
        ComplexMatrix s2 = s.bottomRows(col);
        SvdResult<ComplexMatrix> dec = svd(s1);
        std::optional<PairStepCandidate> cand1 = strategy_jacobi(s1, s2, dec, pp.beta);
        std::optional<PairStepCandidate> cand2;
        if (dec.singular_values.size() >= 2 &&
            dec.singular_values(1) > tol::sigma_floor) {
          try {
            HamiltonianFrame frame =
                hamiltonian_frame(dec.left.col(0), dec.left.col(1), dec.singular_values(0),
                                  dec.singular_values(1));
            cand2 = strategy_balanced(s2, dec, frame);
          } catch (const SubspaceTooSmall&) {
          }
        }
        if (cand1) {
          rec.dep1 = cand1->objective;
          rec.bound1 = cand1->bound;
        }
        if (cand2) {
          rec.dep2 = cand2->objective;
          rec.bound2 = cand2->bound;
        }
        partial = choose_and_update(partial, cand1, cand2, pp.alpha, pp.beta);
        rec.strategy = rec.dep1 < rec.dep2 ? "jacobi" : "balanced";
        rec.subspace_dim = s.cols();
        rec.objective = std::min(rec.dep1, rec.dep2);
      }
    }

    const double resid = constraint_residual(sys, partial);
    if (resid > cfg.step_residual_tol * (1.0 + a_norm))
      throw Error("assign: constraint residual " + detail::short_double(resid) +
                  " exceeds the step guard after column " + std::to_string(partial.j - 1));
    if (logging) detail::print_step(rec);
    log.push_back(std::move(rec));
  }

  FeedbackSolution sol;
  sol.x = partial.x;
  sol.t = partial.t;
  sol.f = partial.orthonormal ? recover_f(sys, partial.x, partial.t)
                              : recover_f_general(sys, partial.x, partial.t);
  sol.step_log = std::move(log);
  sol.dep_sq_accum = partial.dep_sq_accum;
  sol.orthonormal = partial.orthonormal;
  return sol;
}

inline FeedbackSolution assign(const SystemPair& sys, const PoleSpec& poles,
                               const SolveConfig& cfg = {}) {
  return assign_with(sys, poles, cfg, InitOverride{});
}

// Frobenius departure from normality of the closed loop relative to the
// intended spectrum, clamped at zero against roundoff.
inline double departure(const RealMatrix& a_c, const PoleSpec& poles) {
  double lam_sq = 0.0;
  for (const Complex& z : poles.expand()) lam_sq += std::norm(z);
  return std::sqrt(std::max(0.0, a_c.squaredNorm() - lam_sq));
}

// Randomized restarts over the leading-column combination; trial 0 is the
// deterministic start. The winner has the smallest closed-loop departure,
// with earlier trials kept on ties.
inline FeedbackSolution assign_multistart(const SystemPair& sys, const PoleSpec& poles,
                                          const SolveConfig& cfg = {}) {
  const int count = std::max(1, cfg.multistart_count);
  std::optional<FeedbackSolution> best;
  double best_dep = std::numeric_limits<double>::infinity();
  std::string last_error = "no trials attempted";
  int failures = 0;
  for (int trial = 0; trial < count; ++trial) {
    try {
      InitOverride ov;
      if (trial > 0 && !poles.items.empty()) {
        NormalRng rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(trial)));
        if (const RealPole* rp = std::get_if<RealPole>(&poles.items.front())) {
          RealMatrix basis = real_init_basis(sys, rp->value, cfg.rank_tol);
          ov.real_coeffs = rng.randn_vector(basis.cols());
        } else if (!cfg.baseline_mode) {
          const PairPole pp = std::get<PairPole>(poles.items.front());
          ComplexMatrix basis = complex_init_basis(sys, pp.alpha, pp.beta, cfg.rank_tol);
          ComplexVector c(basis.cols());
          c.real() = rng.randn_vector(basis.cols());
          c.imag() = rng.randn_vector(basis.cols());
          ov.pair_coeffs = c;
        }
      }
      FeedbackSolution sol = assign_with(sys, poles, cfg, ov);
      const double dep = departure(sys.a + sys.b * sol.f, poles);
      if (!best || dep < best_dep) {
        best = std::move(sol);
        best_dep = dep;
      }
    } catch (const Error& e) {
      ++failures;
      last_error = e.what();
    }
  }
  if (!best)
    throw AllStartsFailed("all " + std::to_string(failures) + " starts failed; last: " +
                          last_error);
  return *best;
}

// Frobenius condition number of the eigenvector matrix, with unit columns.
inline double cond_eigvec(const RealMatrix& a_c) {
  Eigen::EigenSolver<RealMatrix> es(a_c);
  if (es.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  ComplexMatrix v = es.eigenvectors();
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const double nrm = v.col(j).norm();
    if (nrm > 0.0) v.col(j) /= nrm;
  }
  Eigen::FullPivLU<ComplexMatrix> lu(v);
  if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
  return v.norm() * lu.inverse().norm();
}

// Worst matched relative accuracy over the spectrum, in decimal digits.
// Pairs are matched greedily by smallest distance first.
inline int precision_digits(const std::vector<Complex>& assigned, const ComplexVector& computed) {
  const std::size_t n = assigned.size();
  if (static_cast<Eigen::Index>(n) != computed.size())
    throw Error("precision_digits: spectrum length mismatch");
  if (n == 0) return 16;
  std::vector<bool> used_a(n, false), used_c(n, false);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t pick = 0; pick < n; ++pick) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used_a[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (used_c[j]) continue;
        const double d = std::abs(assigned[i] - computed(static_cast<Eigen::Index>(j)));
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    used_a[bi] = true;
    used_c[bj] = true;
    double digits = 16.0;
    if (best != 0.0) {
      const double mag = std::abs(assigned[bi]);
      const double rel = mag < 1e-300 ? best : best / mag;
      digits = std::min(16.0, -std::log10(rel));
    }
    worst = std::min(worst, digits);
  }
  return static_cast<int>(std::floor(worst));
}

// Departure computed from the quasi-triangular factor alone: the strict
// upper part outside the 2x2 blocks plus the skew excess of each block.
inline double dep_block_form_sq(const RealMatrix& t) {
  const Eigen::Index n = t.rows();
  double total = 0.0;
  for (Eigen::Index col = 1; col < n; ++col)
    for (Eigen::Index row = 0; row < col; ++row) total += t(row, col) * t(row, col);
  Eigen::Index k = 0;
  while (k < n) {
    if (k + 1 < n && t(k + 1, k) != 0.0) {
      const double b = t(k, k + 1), c = t(k + 1, k);
      total -= b * b;
      total += (b + c) * (b + c);
      k += 2;
    } else {
      k += 1;
    }
  }
  return total;
}

struct MetricsBundle {
  double dep = 0.0;
  double cond_x = 0.0;
  int precs = 0;
  double schur_residual = 0.0;
};

inline MetricsBundle measure(const SystemPair& sys, const PoleSpec& poles,
                             const FeedbackSolution& sol) {
  const RealMatrix a_c = sys.a + sys.b * sol.f;
  MetricsBundle mb;
  mb.dep = departure(a_c, poles);
  mb.cond_x = cond_eigvec(a_c);
  Eigen::EigenSolver<RealMatrix> es(a_c, false);
  mb.precs = precision_digits(poles.expand(), es.eigenvalues());
  mb.schur_residual = (a_c - sol.x * sol.t * sol.x.transpose()).norm() / (1.0 + sys.a.norm());
  return mb;
}

inline RobustnessReport validate(const SystemPair& sys, const PoleSpec& poles,
                                 const FeedbackSolution& sol) {
  const RealMatrix a_c = sys.a + sys.b * sol.f;
  RobustnessReport rep;
  rep.dep = departure(a_c, poles);
  rep.cond_x = cond_eigvec(a_c);
  Eigen::EigenSolver<RealMatrix> es(a_c, false);
  rep.precs = precision_digits(poles.expand(), es.eigenvalues());
  const double a_norm = sys.a.norm();
  rep.schur_residual = (a_c - sol.x * sol.t * sol.x.transpose()).norm() / (1.0 + a_norm);
  rep.orth_residual =
      (sol.x.transpose() * sol.x - RealMatrix::Identity(sol.x.cols(), sol.x.cols())).norm();
  rep.constraint_residual =
      (sys.q2.transpose() * (sys.a * sol.x - sol.x * sol.t)).norm() / (1.0 + a_norm);
  const double dep_sq = rep.dep * rep.dep;
  rep.dep_identity_delta = std::abs(dep_sq - dep_block_form_sq(sol.t)) / (1.0 + dep_sq);
  return rep;
}

inline bool report_within_limits(const RobustnessReport& rep, Eigen::Index n) {
  return rep.schur_residual <= tol::validate_schur &&
         rep.orth_residual <= tol::validate_orth_factor * static_cast<double>(n) &&
         rep.constraint_residual <= tol::validate_constraint &&
         rep.dep_identity_delta <= tol::validate_identity;
}

}  // namespace polecraft
