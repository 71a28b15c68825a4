#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "polecraft/model.hpp"
#include "polecraft/rng.hpp"
#include "polecraft/solver.hpp"

namespace polecraft {

struct BenchCase {
  std::string name;
  SystemPair sys;
  PoleSpec poles;
  Eigen::Index n = 0, m = 0;
  std::optional<double> k;
};

// Identity with the last row replaced by (0, 0.5, ..., 0.5); B drives every
// state but the last. Poles: n-2 seeded normal reals plus the pair 0.5 +- ki,
// processed last.
inline BenchCase gen_example41(Eigen::Index n, double k, std::uint64_t seed) {
  if (n < 3) throw Error("gen_example41: n must be at least 3");
  RealMatrix a = RealMatrix::Identity(n, n);
  a.row(n - 1).setZero();
  a.row(n - 1).tail(n - 1).setConstant(0.5);
  RealMatrix b = RealMatrix::Zero(n, n - 1);
  b.topRows(n - 1).setIdentity();
  NormalRng rng(seed);
  RealVector reals = rng.randn_vector(n - 2);
  PoleSpec poles;
  for (Eigen::Index i = 0; i < n - 2; ++i) poles.items.push_back(RealPole{reals(i)});
  poles.items.push_back(PairPole{0.5, k});
  BenchCase c;
  char buf[64];
  std::snprintf(buf, sizeof buf, "ex41_n%lld_k%g", static_cast<long long>(n), k);
  c.name = buf;
  c.sys = make_system(a, b);
  c.poles = std::move(poles);
  c.n = n;
  c.m = n - 1;
  c.k = k;
  return c;
}

// Random controllable instance whose poles are the spectrum of A + B F0, so
// the assignment is feasible by construction. Rejection events (uncontrollable
// draw, rank-deficient B, conjugate-matching failure) continue the stream.
inline BenchCase gen_random(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  if (m < 1 || m > n) throw Error("gen_random: need 1 <= m <= n");
  NormalRng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    RealMatrix a = rng.randn(n, n);
    RealMatrix b = rng.randn(n, m);
    RealMatrix f0 = rng.randn(m, n);
    try {
      SystemPair sys = make_system(a, b);
      Eigen::EigenSolver<RealMatrix> es(a + b * f0, false);
      std::vector<Complex> spectrum;
      spectrum.reserve(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) spectrum.push_back(es.eigenvalues()(i));
      BenchCase c;
      char buf[64];
      std::snprintf(buf, sizeof buf, "rand_n%lld_m%lld", static_cast<long long>(n),
                    static_cast<long long>(m));
      c.name = buf;
      c.sys = std::move(sys);
      c.poles = canonicalize_poles(spectrum);
      c.n = n;
      c.m = m;
      return c;
    } catch (const NotControllable&) {
    } catch (const RankDeficientB&) {
    } catch (const UnmatchedConjugate&) {
    }
  }
  throw Error("gen_random: no usable instance in 100 attempts");
}

struct CaseSpec {
  std::string kind;  // "example41" or "random"
  Eigen::Index n = 0;
  Eigen::Index m = 0;   // random cases only
  double k = 0.0;       // example41 cases only
};

inline std::string case_label(const CaseSpec& spec) {
  char buf[64];
  if (spec.kind == "example41")
    std::snprintf(buf, sizeof buf, "ex41_n%lld_k%g", static_cast<long long>(spec.n), spec.k);
  else
    std::snprintf(buf, sizeof buf, "rand_n%lld_m%lld", static_cast<long long>(spec.n),
                  static_cast<long long>(spec.m));
  return buf;
}

inline BenchCase instantiate(const CaseSpec& spec, std::uint64_t seed) {
  if (spec.kind == "example41") return gen_example41(spec.n, spec.k, seed);
  if (spec.kind == "random") return gen_random(spec.n, spec.m, seed);
  throw Error("instantiate: unknown case kind '" + spec.kind + "'");
}

struct BenchRow {
  std::string case_name;
  Eigen::Index n = 0, m = 0;
  std::optional<double> k;
  std::string method;
  int repeat = 0;
  std::optional<double> dep;
  std::optional<double> cond_x;
  std::optional<int> precs;
  double wall_ms = 0.0;
  std::string status;
};

inline BenchRow run_one(const BenchCase& bc, const std::string& method, int repeat,
                        std::uint64_t inst_seed) {
  BenchRow row;
  row.case_name = bc.name;
  row.n = bc.n;
  row.m = bc.m;
  row.k = bc.k;
  row.method = method;
  row.repeat = repeat;
  SolveConfig cfg;
  if (method == "baseline-schur") {
    cfg.baseline_mode = true;
  } else if (method == "o-schur-rob") {
    cfg.multistart_count = 10;
    cfg.rng_seed = derive_seed(inst_seed, 101);
  } else if (method != "schur-rob") {
    row.status = "unknown method '" + method + "'";
    return row;
  }
  const auto t0 = std::chrono::steady_clock::now();
  try {
    FeedbackSolution sol = method == "o-schur-rob" ? assign_multistart(bc.sys, bc.poles, cfg)
                                                   : assign(bc.sys, bc.poles, cfg);
    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    RobustnessReport rep = validate(bc.sys, bc.poles, sol);
    row.dep = rep.dep;
    row.cond_x = rep.cond_x;
    row.precs = rep.precs;
    row.status = "ok";
  } catch (const Error& e) {
    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    row.status = e.what();
  }
  return row;
}

// One instance per (case, repeat), shared by every method so the comparison
// is paired. Failures become rows with a non-ok status; the suite never
// aborts.
inline std::vector<BenchRow> run_suite(const std::vector<CaseSpec>& specs,
                                       const std::vector<std::string>& methods, int repeats,
                                       std::uint64_t seed) {
  std::vector<BenchRow> rows;
  for (std::size_t ci = 0; ci < specs.size(); ++ci) {
    const std::uint64_t case_seed = derive_seed(seed, static_cast<std::uint64_t>(ci));
    for (int rep = 0; rep < repeats; ++rep) {
      const std::uint64_t inst_seed = derive_seed(case_seed, static_cast<std::uint64_t>(rep));
      std::optional<BenchCase> bc;
      std::string gen_error;
      try {
        bc = instantiate(specs[ci], inst_seed);
      } catch (const Error& e) {
        gen_error = e.what();
      }
      for (const std::string& method : methods) {
        if (bc) {
          rows.push_back(run_one(*bc, method, rep, inst_seed));
        } else {
          BenchRow row;
          row.case_name = case_label(specs[ci]);
          row.n = specs[ci].n;
          row.m = specs[ci].kind == "example41" ? specs[ci].n - 1 : specs[ci].m;
          if (specs[ci].kind == "example41") row.k = specs[ci].k;
          row.method = method;
          row.repeat = rep;
          row.status = gen_error;
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

struct Aggregate {
  std::string case_name;
  std::string method;
  int ok = 0;
  int total = 0;
  double dep_median = std::numeric_limits<double>::quiet_NaN();
  double dep_mean = std::numeric_limits<double>::quiet_NaN();
  double cond_median = std::numeric_limits<double>::quiet_NaN();
  double cond_mean = std::numeric_limits<double>::quiet_NaN();
  double precs_median = std::numeric_limits<double>::quiet_NaN();
  double precs_mean = std::numeric_limits<double>::quiet_NaN();
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Median and mean of each metric over the ok rows, per (case, method), in
// first-appearance order.
inline std::vector<Aggregate> aggregate(const std::vector<BenchRow>& rows) {
  std::vector<Aggregate> out;
  std::vector<std::vector<double>> deps, conds, precs;
  auto slot = [&](const BenchRow& r) -> std::size_t {
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i].case_name == r.case_name && out[i].method == r.method) return i;
    Aggregate a;
    a.case_name = r.case_name;
    a.method = r.method;
    out.push_back(std::move(a));
    deps.emplace_back();
    conds.emplace_back();
    precs.emplace_back();
    return out.size() - 1;
  };
  for (const BenchRow& r : rows) {
    const std::size_t i = slot(r);
    ++out[i].total;
    if (r.status == "ok") {
      ++out[i].ok;
      if (r.dep) deps[i].push_back(*r.dep);
      if (r.cond_x) conds[i].push_back(*r.cond_x);
      if (r.precs) precs[i].push_back(static_cast<double>(*r.precs));
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].dep_median = median_of(deps[i]);
    out[i].dep_mean = mean_of(deps[i]);
    out[i].cond_median = median_of(conds[i]);
    out[i].cond_mean = mean_of(conds[i]);
    out[i].precs_median = median_of(precs[i]);
    out[i].precs_mean = mean_of(precs[i]);
  }
  return out;
}

}  // namespace polecraft
