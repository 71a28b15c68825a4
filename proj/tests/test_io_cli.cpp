#include "catch_amalgamated.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "polecraft/io.hpp"

using namespace polecraft;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string temp_path(const std::string& name) {
  namespace fs = std::filesystem;
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("polecraft_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const std::string err_path = temp_path("stderr.txt");
  const std::string cmd = std::string(POLECRAFT_CLI_PATH) + " " + args + " 2>" + err_path;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int rc = ::pclose(pipe);
  REQUIRE(WIFEXITED(rc));
  r.code = WEXITSTATUS(rc);
  r.err = read_text_file(err_path);
  return r;
}

// Drops the wall_ms column so timing noise cannot break comparisons.
std::string strip_wall_ms(const std::string& csv) {
  std::string out;
  std::size_t line_start = 0;
  while (line_start < csv.size()) {
    std::size_t line_end = csv.find('\n', line_start);
    if (line_end == std::string::npos) line_end = csv.size();
    std::string line = csv.substr(line_start, line_end - line_start);
    std::vector<std::string> fields;
    std::size_t fs = 0;
    while (true) {
      std::size_t fe = line.find(',', fs);
      if (fe == std::string::npos) {
        fields.push_back(line.substr(fs));
        break;
      }
      fields.push_back(line.substr(fs, fe - fs));
      fs = fe + 1;
    }
    REQUIRE(fields.size() == 11);
    fields.erase(fields.begin() + 9);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
    line_start = line_end + 1;
  }
  return out;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

ProblemFile problem_from_case(const BenchCase& bc) {
  ProblemFile pf;
  pf.a = bc.sys.a;
  pf.b = bc.sys.b;
  pf.poles = bc.poles;
  return pf;
}

}  // namespace

TEST_CASE("non-finite doubles travel as strings") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(detail::encode_double(1.5).is_number());
  CHECK(detail::encode_double(inf) == json("inf"));
  CHECK(detail::encode_double(-inf) == json("-inf"));
  CHECK(detail::encode_double(std::nan("")) == json("nan"));
  CHECK(detail::decode_double(json(2.25), "x") == 2.25);
  CHECK(detail::decode_double(json("inf"), "x") == inf);
  CHECK(detail::decode_double(json("-inf"), "x") == -inf);
  CHECK(std::isnan(detail::decode_double(json("nan"), "x")));
  CHECK_THROWS_MATCHES(detail::decode_double(json("wat"), "report.dep"), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("report.dep")));
}

TEST_CASE("matrices round trip through JSON including specials") {
  const double inf = std::numeric_limits<double>::infinity();
  RealMatrix m(2, 3);
  m << 1.0, -0.25, inf, -inf, 0.0, 1e-300;
  RealMatrix back = detail::decode_matrix(detail::encode_matrix(m), "m");
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(back(i, j) == m(i, j));

  json nan_cell = detail::encode_matrix(RealMatrix::Constant(1, 1, std::nan("")));
  CHECK(std::isnan(detail::decode_matrix(nan_cell, "m")(0, 0)));
}

TEST_CASE("decode_matrix names the offending location") {
  json ragged = json::parse("[[1, 2], [3]]");
  CHECK_THROWS_MATCHES(detail::decode_matrix(ragged, "a"), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("a[1]")));
  CHECK_THROWS_AS(detail::decode_matrix(json::array(), "a"), ParseError);
}

TEST_CASE("parse_problem diagnostics name the field") {
  CHECK_THROWS_MATCHES(parse_problem("{\"a\": [[1]], \"poles\": [[1, 0]]}"), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("b: missing")));
  CHECK_THROWS_MATCHES(parse_problem("not json at all"), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("not valid JSON")));
  CHECK_THROWS_MATCHES(
      parse_problem("{\"a\": [[1, 0]], \"b\": [[1]], \"poles\": [[1, 0]]}"), ParseError,
      Catch::Matchers::MessageMatches(ContainsSubstring("square")));
  CHECK_THROWS_MATCHES(
      parse_problem(
          "{\"a\": [[1, 0], [0, 1]], \"b\": [[1], [0], [0]], \"poles\": [[1, 0], [2, 0]]}"),
      ParseError, Catch::Matchers::MessageMatches(ContainsSubstring("row count")));
  CHECK_THROWS_MATCHES(
      parse_problem("{\"a\": [[1, 0], [0, 1]], \"b\": [[1], [1]], \"poles\": [[1, 0]]}"),
      ParseError, Catch::Matchers::MessageMatches(ContainsSubstring("got 1 poles")));
  CHECK_THROWS_MATCHES(
      parse_problem("{\"a\": [[1]], \"b\": [[1]], \"poles\": [[1, 2, 3]]}"), ParseError,
      Catch::Matchers::MessageMatches(ContainsSubstring("poles[0]")));
}

TEST_CASE("parse_problem vets the config block") {
  const std::string base = "{\"a\": [[1]], \"b\": [[1]], \"poles\": [[0, 0]], \"config\": ";
  CHECK_THROWS_MATCHES(parse_problem(base + "{\"multistart\": 0}}"), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("config.multistart")));
  CHECK_THROWS_MATCHES(parse_problem(base + "{\"step_residual_tol\": 0}}"), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("step_residual_tol")));
  CHECK_THROWS_MATCHES(parse_problem(base + "{\"baseline\": 1}}"), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("config.baseline")));
  CHECK_THROWS_MATCHES(parse_problem(base + "{\"rank_tol\": -1}}"), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("config.rank_tol")));

  ProblemFile pf = parse_problem(base + "{\"multistart\": 4, \"seed\": 9, \"baseline\": true}}");
  REQUIRE(pf.config.multistart.has_value());
  CHECK(*pf.config.multistart == 4);
  REQUIRE(pf.config.seed.has_value());
  CHECK(*pf.config.seed == 9);
  REQUIRE(pf.config.baseline.has_value());
  CHECK(*pf.config.baseline == true);
  CHECK_FALSE(pf.config.rank_tol.has_value());
}

TEST_CASE("problem files serialize to a fixed point") {
  BenchCase bc = gen_random(5, 2, 31);
  ProblemFile pf = problem_from_case(bc);
  pf.config.multistart = 3;
  pf.config.seed = 12;
  pf.config.step_residual_tol = 1e-6;
  const std::string s1 = serialize_problem(pf);
  ProblemFile back = parse_problem(s1);
  const std::string s2 = serialize_problem(back);
  CHECK(s1 == s2);
  CHECK((back.a - pf.a).norm() == 0.0);
  CHECK((back.b - pf.b).norm() == 0.0);
  REQUIRE(back.config.step_residual_tol.has_value());
  CHECK(*back.config.step_residual_tol == 1e-6);
}

TEST_CASE("solution files survive a round trip bit for bit") {
  BenchCase bc = gen_example41(4, 100.0, 3);
  FeedbackSolution sol = assign(bc.sys, bc.poles);
  RobustnessReport rep = validate(bc.sys, bc.poles, sol);
  const std::string s1 = serialize_solution(make_solution_file(sol, rep));
  SolutionFile back = parse_solution(s1);
  CHECK(serialize_solution(back) == s1);
  CHECK((back.f - sol.f).norm() == 0.0);
  CHECK((back.x - sol.x).norm() == 0.0);
  CHECK((back.t - sol.t).norm() == 0.0);
  CHECK(back.report.dep == rep.dep);
  CHECK(back.report.precs == rep.precs);
  REQUIRE(back.step_log.size() == sol.step_log.size());
  CHECK(back.step_log[0].bound1 == std::numeric_limits<double>::infinity());
  CHECK(back.step_log.back().strategy == sol.step_log.back().strategy);
}

TEST_CASE("parse_solution names missing pieces") {
  BenchCase bc = gen_example41(4, 10.0, 5);
  FeedbackSolution sol = assign(bc.sys, bc.poles);
  const std::string text = serialize_solution(make_solution_file(sol, validate(bc.sys, bc.poles, sol)));

  json j = json::parse(text);
  j.erase("t");
  CHECK_THROWS_MATCHES(parse_solution(j.dump()), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("t: missing")));

  j = json::parse(text);
  j["report"].erase("dep_identity_delta");
  CHECK_THROWS_MATCHES(
      parse_solution(j.dump()), ParseError,
      Catch::Matchers::MessageMatches(ContainsSubstring("report.dep_identity_delta")));

  j = json::parse(text);
  j["step_log"][0].erase("dep1");
  CHECK_THROWS_MATCHES(parse_solution(j.dump()), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("step_log[0].dep1")));

  j = json::parse(text);
  j["x"] = detail::encode_matrix(RealMatrix::Identity(3, 4));
  CHECK_THROWS_MATCHES(parse_solution(j.dump()), ParseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("x: expected a square")));
}

TEST_CASE("format_short prints shortest round-trip decimals") {
  CHECK(format_short(0.1) == "0.1");
  CHECK(format_short(2.0) == "2");
  CHECK(format_short(-0.5) == "-0.5");
  CHECK(format_short(1e100) == "1e+100");
  NormalRng rng(55);
  for (int i = 0; i < 100; ++i) {
    const double v = rng.normal() * std::pow(10.0, std::floor(10.0 * rng.normal()));
    CHECK(std::stod(format_short(v)) == v);
  }
}

TEST_CASE("status text cannot break the CSV shape") {
  CHECK(sanitize_status("plain") == "plain");
  CHECK(sanitize_status("a,b\nc\rd") == "a;b c d");
}

TEST_CASE("csv_encode emits the pinned schema") {
  CHECK(csv_header() == "case,n,m,k,method,repeat,dep,cond_x,precs,wall_ms,status");

  BenchRow full;
  full.case_name = "caseX";
  full.n = 4;
  full.m = 3;
  full.k = 100.0;
  full.method = "schur-rob";
  full.repeat = 2;
  full.dep = 0.5;
  full.cond_x = 12.5;
  full.precs = 14;
  full.wall_ms = 1.25;
  full.status = "ok";
  BenchRow sparse;
  sparse.case_name = "c";
  sparse.n = 2;
  sparse.m = 1;
  sparse.method = "m";
  sparse.status = "bad, luck\nhere";
  const std::string expected = std::string(csv_header()) + "\n" +
                               "caseX,4,3,100,schur-rob,2,0.5,12.5,14,1.250,ok\n" +
                               "c,2,1,,m,0,,,,0.000,bad; luck here\n";
  CHECK(csv_encode({full, sparse}) == expected);
}

TEST_CASE("cli solves a problem file end to end") {
  BenchCase bc = gen_random(6, 3, 101);
  const std::string prob = temp_path("prob.json");
  const std::string sol = temp_path("sol.json");
  write_text_file(prob, serialize_problem(problem_from_case(bc)));

  CliResult r = run_cli("assign --input " + prob + " --output " + sol);
  CHECK(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("dep="));

  SolutionFile sf = parse_solution(read_text_file(sol));
  CHECK(sf.report.precs >= 8);
  CHECK(sf.report.orth_residual <= 1e-10 * 6);
  CHECK(report_within_limits(sf.report, 6));
}

TEST_CASE("cli rejects malformed input with a field diagnostic") {
  const std::string prob = temp_path("bad_dims.json");
  write_text_file(prob,
                  "{\"a\": [[1, 0], [0, 1]], \"b\": [[1], [0], [0]], \"poles\": [[1,0],[2,0]]}");
  CliResult r = run_cli("assign --input " + prob);
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("row count"));
}

TEST_CASE("cli rejects pole sets that are not self conjugate") {
  const std::string prob = temp_path("bad_poles.json");
  write_text_file(prob,
                  "{\"a\": [[0, 1], [0, 0]], \"b\": [[0], [1]], \"poles\": [[1, 2], [3, 4]]}");
  CliResult r = run_cli("assign --input " + prob);
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("conjugate"));
}

TEST_CASE("cli reports uncontrollable systems distinctly") {
  const std::string prob = temp_path("uncontrollable.json");
  write_text_file(prob,
                  "{\"a\": [[1, 0], [0, 1]], \"b\": [[1], [0]], \"poles\": [[0, 0], [-1, 0]]}");
  CliResult r = run_cli("assign --input " + prob);
  CHECK(r.code == 3);
  CHECK_THAT(r.err, ContainsSubstring("controllab"));
}

TEST_CASE("cli reports solver failures distinctly") {
  BenchCase bc = gen_random(5, 2, 103);
  ProblemFile pf = problem_from_case(bc);
  pf.config.step_residual_tol = 1e-30;
  const std::string prob = temp_path("strict.json");
  write_text_file(prob, serialize_problem(pf));
  CliResult r = run_cli("assign --input " + prob);
  CHECK(r.code == 4);
  CHECK_THAT(r.err, ContainsSubstring("column"));
}

TEST_CASE("cli validate accepts a fresh solution and rejects a corrupted one") {
  BenchCase bc = gen_random(6, 3, 107);
  const std::string prob = temp_path("vprob.json");
  const std::string sol = temp_path("vsol.json");
  write_text_file(prob, serialize_problem(problem_from_case(bc)));
  CliResult solved = run_cli("assign --input " + prob + " --output " + sol);
  REQUIRE(solved.code == 0);

  CliResult ok = run_cli("validate " + sol + " " + prob);
  CHECK(ok.code == 0);
  CHECK_THAT(ok.out, ContainsSubstring("status=ok"));

  SolutionFile sf = parse_solution(read_text_file(sol));
  sf.f(0, 0) += 0.5;
  const std::string bad = temp_path("vsol_bad.json");
  write_text_file(bad, serialize_solution(sf));
  CliResult fail = run_cli("validate " + bad + " " + prob);
  CHECK(fail.code == 5);
  CHECK_THAT(fail.out, ContainsSubstring("status=fail"));
}

TEST_CASE("cli validate flags the non-orthogonal baseline output") {
  BenchCase bc = gen_example41(4, 1000.0, 109);
  const std::string prob = temp_path("bprob.json");
  const std::string sol = temp_path("bsol.json");
  write_text_file(prob, serialize_problem(problem_from_case(bc)));
  CliResult solved = run_cli("assign --input " + prob + " --baseline --output " + sol);
  REQUIRE(solved.code == 0);
  CliResult r = run_cli("validate " + sol + " " + prob);
  CHECK(r.code == 5);
  CHECK_THAT(r.out, ContainsSubstring("status=fail"));
}

TEST_CASE("cli validate rejects mismatched problem and solution") {
  BenchCase big = gen_random(6, 3, 111);
  BenchCase small = gen_random(4, 2, 113);
  const std::string prob6 = temp_path("m6.json");
  const std::string prob4 = temp_path("m4.json");
  const std::string sol6 = temp_path("m6_sol.json");
  write_text_file(prob6, serialize_problem(problem_from_case(big)));
  write_text_file(prob4, serialize_problem(problem_from_case(small)));
  REQUIRE(run_cli("assign --input " + prob6 + " --output " + sol6).code == 0);
  CliResult r = run_cli("validate " + sol6 + " " + prob4);
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("dimension"));
}

TEST_CASE("cli bench grids produce the expected row counts") {
  const std::string csv1 = temp_path("grid1.csv");
  CliResult r1 = run_cli("bench --example41 --n 4 --k 1e3 --repeats 3 --seed 2 "
                         "--methods schur-rob --output " + csv1);
  REQUIRE(r1.code == 0);
  const std::string text1 = read_text_file(csv1);
  CHECK(count_lines(text1) == 4);
  CHECK(text1.rfind(csv_header(), 0) == 0);

  const std::string csv2 = temp_path("grid2.csv");
  CliResult r2 = run_cli("bench --random --n 8 --m 4 --repeats 2 --seed 2 "
                         "--methods schur-rob,baseline-schur --output " + csv2);
  REQUIRE(r2.code == 0);
  const std::string text2 = read_text_file(csv2);
  CHECK(count_lines(text2) == 5);
  for (const char* needle : {"rand_n8_m4", "schur-rob", "baseline-schur", ",ok"})
    CHECK_THAT(text2, ContainsSubstring(needle));
}

TEST_CASE("cli bench output is reproducible apart from timing") {
  const std::string a = temp_path("rep_a.csv");
  const std::string b = temp_path("rep_b.csv");
  const std::string flags = "bench --example41 --n 4 --k 1e1,1e3 --repeats 2 --seed 40 --output ";
  REQUIRE(run_cli(flags + a).code == 0);
  REQUIRE(run_cli(flags + b).code == 0);
  CHECK(strip_wall_ms(read_text_file(a)) == strip_wall_ms(read_text_file(b)));
  CHECK(count_lines(read_text_file(a)) == 1 + 2 * 2 * 3);
}

TEST_CASE("cli rejects contradictory or incomplete flags") {
  CHECK(run_cli("bench --example41 --random --n 4 --k 10 --m 2").code == 2);
  CHECK(run_cli("bench --example41 --n 4").code == 2);
  CHECK(run_cli("bench --random --n 4 --m 9").code == 2);
  CHECK(run_cli("bench --example41 --n 4 --k 10 --methods sorcery").code == 2);
  CHECK(run_cli("assign").code == 2);
  CHECK(run_cli("conjure").code == 2);
}

TEST_CASE("cli help exits cleanly") {
  CliResult top = run_cli("--help");
  CHECK(top.code == 0);
  CHECK_THAT(top.out, ContainsSubstring("assign"));
  CHECK(run_cli("bench --help").code == 0);
}
