#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "polecraft/polecraft.hpp"

namespace {

struct AssignArgs {
  std::string input;
  std::string output;
  int multistart = 1;
  std::uint64_t seed = 0;
  bool baseline = false;
  bool multistart_set = false;
  bool seed_set = false;
};

int do_assign(const AssignArgs& args) {
  polecraft::ProblemFile pf = polecraft::parse_problem(polecraft::read_text_file(args.input));
  polecraft::SystemPair sys = polecraft::make_system(pf.a, pf.b, pf.config.rank_tol.value_or(0.0));
  polecraft::SolveConfig cfg;
  if (pf.config.multistart) cfg.multistart_count = *pf.config.multistart;
  if (pf.config.seed) cfg.rng_seed = *pf.config.seed;
  if (pf.config.baseline) cfg.baseline_mode = *pf.config.baseline;
  if (pf.config.rank_tol) cfg.rank_tol = *pf.config.rank_tol;
  if (pf.config.step_residual_tol) cfg.step_residual_tol = *pf.config.step_residual_tol;
  if (args.multistart_set) cfg.multistart_count = args.multistart;
  if (args.seed_set) cfg.rng_seed = args.seed;
  if (args.baseline) cfg.baseline_mode = true;
  polecraft::FeedbackSolution sol = polecraft::assign_multistart(sys, pf.poles, cfg);
  polecraft::RobustnessReport rep = polecraft::validate(sys, pf.poles, sol);
  if (!args.output.empty())
    polecraft::write_text_file(args.output,
                               polecraft::serialize_solution(make_solution_file(sol, rep)));
  std::printf("dep=%.6e cond_x=%.6e precs=%d\n", rep.dep, rep.cond_x, rep.precs);
  return 0;
}

struct BenchArgs {
  bool example41 = false;
  bool random = false;
  std::vector<long long> n;
  std::vector<long long> m;
  std::vector<double> k;
  int repeats = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> methods{"schur-rob", "o-schur-rob", "baseline-schur"};
  std::string output;
};

int do_bench(const BenchArgs& args) {
  if (args.example41 == args.random)
    throw polecraft::ParseError("bench: pass exactly one of --example41 or --random");
  std::vector<polecraft::CaseSpec> specs;
  if (args.example41) {
    if (args.n.empty() || args.k.empty())
      throw polecraft::ParseError("bench: --example41 needs --n and --k");
    for (long long n : args.n) {
      if (n < 3) throw polecraft::ParseError("bench: --example41 needs n >= 3");
      for (double k : args.k) {
        if (k <= 0.0) throw polecraft::ParseError("bench: --k values must be positive");
        specs.push_back({"example41", static_cast<Eigen::Index>(n), 0, k});
      }
    }
  } else {
    if (args.n.empty() || args.m.empty())
      throw polecraft::ParseError("bench: --random needs --n and --m");
    for (long long n : args.n)
      for (long long m : args.m) {
        if (m < 1 || m > n)
          throw polecraft::ParseError("bench: need 1 <= m <= n, got m=" + std::to_string(m) +
                                      " n=" + std::to_string(n));
        specs.push_back(
            {"random", static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m), 0.0});
      }
  }
  for (const std::string& method : args.methods)
    if (method != "schur-rob" && method != "o-schur-rob" && method != "baseline-schur")
      throw polecraft::ParseError("bench: unknown method '" + method + "'");
  if (args.repeats < 1) throw polecraft::ParseError("bench: --repeats must be >= 1");

  std::vector<polecraft::BenchRow> rows =
      polecraft::run_suite(specs, args.methods, args.repeats, args.seed);
  const std::string csv = polecraft::csv_encode(rows);
  const std::string summary = polecraft::format_aggregates(polecraft::aggregate(rows));
  if (!args.output.empty()) {
    polecraft::write_text_file(args.output, csv);
    std::fputs(summary.c_str(), stdout);
  } else {
    std::fputs(csv.c_str(), stdout);
    std::fputs(summary.c_str(), stderr);
  }
  return 0;
}

int do_validate(const std::string& solution_path, const std::string& problem_path) {
  polecraft::SolutionFile sf = polecraft::parse_solution(polecraft::read_text_file(solution_path));
  polecraft::ProblemFile pf = polecraft::parse_problem(polecraft::read_text_file(problem_path));
  polecraft::SystemPair sys = polecraft::make_system(pf.a, pf.b, pf.config.rank_tol.value_or(0.0));
  if (sf.x.rows() != sys.n())
    throw polecraft::ParseError("solution dimension " + std::to_string(sf.x.rows()) +
                                " does not match problem dimension " + std::to_string(sys.n()));
  polecraft::FeedbackSolution sol;
  sol.f = sf.f;
  sol.x = sf.x;
  sol.t = sf.t;
  sol.step_log = sf.step_log;
  polecraft::RobustnessReport rep = polecraft::validate(sys, pf.poles, sol);
  std::printf("dep=%.6e cond_x=%.6e precs=%d\n", rep.dep, rep.cond_x, rep.precs);
  std::printf("schur_residual=%.6e\n", rep.schur_residual);
  std::printf("orth_residual=%.6e\n", rep.orth_residual);
  std::printf("constraint_residual=%.6e\n", rep.constraint_residual);
  std::printf("dep_identity_delta=%.6e\n", rep.dep_identity_delta);
  const bool ok = polecraft::report_within_limits(rep, sys.n());
  std::printf("status=%s\n", ok ? "ok" : "fail");
  return ok ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust pole assignment via an orthogonal quasi-triangular construction"};
  app.require_subcommand(1);

  AssignArgs aa;
  CLI::App* assign_cmd = app.add_subcommand("assign", "Solve a problem file for a feedback matrix");
  assign_cmd->add_option("--input", aa.input, "Problem file (JSON)")->required();
  assign_cmd->add_option("--output", aa.output, "Solution file to write");
  assign_cmd->add_option("--multistart", aa.multistart, "Number of seeded restarts");
  assign_cmd->add_option("--seed", aa.seed, "Restart RNG seed");
  assign_cmd->add_flag("--baseline", aa.baseline, "Non-orthogonal baseline pair steps");

  BenchArgs ba;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Run a benchmark grid and emit CSV");
  CLI::Option* opt_e41 = bench_cmd->add_flag("--example41", ba.example41, "Structured family");
  CLI::Option* opt_rand = bench_cmd->add_flag("--random", ba.random, "Random controllable family");
  opt_e41->excludes(opt_rand);
  CLI::Option* opt_n =
      bench_cmd->add_option("--n", ba.n, "State dimensions")->delimiter(',');
  CLI::Option* opt_m = bench_cmd->add_option("--m", ba.m, "Input counts")->delimiter(',');
  CLI::Option* opt_k = bench_cmd->add_option("--k", ba.k, "Imaginary parts")->delimiter(',');
  opt_e41->needs(opt_n);
  opt_e41->needs(opt_k);
  opt_e41->excludes(opt_m);
  opt_rand->needs(opt_n);
  opt_rand->needs(opt_m);
  opt_rand->excludes(opt_k);
  bench_cmd->add_option("--repeats", ba.repeats, "Instances per case");
  bench_cmd->add_option("--seed", ba.seed, "Master seed");
  bench_cmd->add_option("--methods", ba.methods, "Methods to run")->delimiter(',');
  bench_cmd->add_option("--output", ba.output, "CSV path (default: stdout)");

  std::string sol_path, prob_path;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Check a solution file against its problem");
  validate_cmd->add_option("solution", sol_path, "Solution file")->required();
  validate_cmd->add_option("problem", prob_path, "Problem file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*assign_cmd) {
      aa.multistart_set = assign_cmd->count("--multistart") > 0;
      aa.seed_set = assign_cmd->count("--seed") > 0;
      return do_assign(aa);
    }
    if (*bench_cmd) return do_bench(ba);
    return do_validate(sol_path, prob_path);
  } catch (const polecraft::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const polecraft::UnmatchedConjugate& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const polecraft::RankDeficientB& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const polecraft::NotControllable& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const polecraft::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
