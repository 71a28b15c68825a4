#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "polecraft/bench.hpp"
#include "polecraft/model.hpp"
#include "polecraft/solver.hpp"

namespace polecraft {

using json = nlohmann::ordered_json;

namespace detail {

// JSON has no non-finite numbers; they travel as the strings below.
inline json encode_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double decode_double(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError(where + ": expected a number");
}

inline json encode_matrix(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(encode_double(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RealMatrix decode_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw ParseError(field + ": expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw ParseError(field + "[0]: expected a nonempty row");
  const std::size_t cols = j[0].size();
  RealMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ParseError(field + "[" + std::to_string(r) + "]: expected " + std::to_string(cols) +
                       " entries");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          decode_double(j[r][c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return m;
}

}  // namespace detail

// Per-file solve settings; unset fields fall back to defaults and may be
// overridden by command-line flags.
struct FileConfig {
  std::optional<int> multistart;
  std::optional<std::uint64_t> seed;
  std::optional<bool> baseline;
  std::optional<double> rank_tol;
  std::optional<double> step_residual_tol;
};

struct ProblemFile {
  RealMatrix a, b;
  PoleSpec poles;
  FileConfig config;
};

inline ProblemFile parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("input is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("top level: expected an object");
  if (!j.contains("a")) throw ParseError("a: missing");
  if (!j.contains("b")) throw ParseError("b: missing");
  if (!j.contains("poles")) throw ParseError("poles: missing");
  ProblemFile pf;
  pf.a = detail::decode_matrix(j["a"], "a");
  if (pf.a.rows() != pf.a.cols())
    throw ParseError("a: expected a square matrix, got " + std::to_string(pf.a.rows()) + "x" +
                     std::to_string(pf.a.cols()));
  pf.b = detail::decode_matrix(j["b"], "b");
  if (pf.b.rows() != pf.a.rows())
    throw ParseError("b: row count " + std::to_string(pf.b.rows()) +
                     " does not match a's dimension " + std::to_string(pf.a.rows()));
  const json& jp = j["poles"];
  if (!jp.is_array() || jp.empty()) throw ParseError("poles: expected a nonempty array");
  std::vector<Complex> raw;
  raw.reserve(jp.size());
  for (std::size_t i = 0; i < jp.size(); ++i) {
    const std::string where = "poles[" + std::to_string(i) + "]";
    if (!jp[i].is_array() || jp[i].size() != 2)
      throw ParseError(where + ": expected a [re, im] pair");
    raw.emplace_back(detail::decode_double(jp[i][0], where + "[0]"),
                     detail::decode_double(jp[i][1], where + "[1]"));
  }
  if (static_cast<Eigen::Index>(raw.size()) != pf.a.rows())
    throw ParseError("poles: got " + std::to_string(raw.size()) + " poles for state dimension " +
                     std::to_string(pf.a.rows()));
  pf.poles = canonicalize_poles(raw);
  if (j.contains("config")) {
    const json& jc = j["config"];
    if (!jc.is_object()) throw ParseError("config: expected an object");
    if (jc.contains("multistart")) {
      if (!jc["multistart"].is_number_integer() || jc["multistart"].get<long long>() < 1)
        throw ParseError("config.multistart: expected an integer >= 1");
      pf.config.multistart = jc["multistart"].get<int>();
    }
    if (jc.contains("seed")) {
      if (!jc["seed"].is_number_integer() && !jc["seed"].is_number_unsigned())
        throw ParseError("config.seed: expected an integer");
      pf.config.seed = jc["seed"].get<std::uint64_t>();
    }
    if (jc.contains("baseline")) {
      if (!jc["baseline"].is_boolean()) throw ParseError("config.baseline: expected a boolean");
      pf.config.baseline = jc["baseline"].get<bool>();
    }
    if (jc.contains("rank_tol")) {
      const double v = detail::decode_double(jc["rank_tol"], "config.rank_tol");
      if (v < 0.0) throw ParseError("config.rank_tol: expected a nonnegative number");
      pf.config.rank_tol = v;
    }
    if (jc.contains("step_residual_tol")) {
      const double v = detail::decode_double(jc["step_residual_tol"], "config.step_residual_tol");
      if (v <= 0.0) throw ParseError("config.step_residual_tol: expected a positive number");
      pf.config.step_residual_tol = v;
    }
  }
  return pf;
}

inline std::string serialize_problem(const ProblemFile& pf) {
  json j;
  j["a"] = detail::encode_matrix(pf.a);
  j["b"] = detail::encode_matrix(pf.b);
  json poles = json::array();
  for (const Complex& z : pf.poles.expand())
    poles.push_back(json::array({detail::encode_double(z.real()),
                                 detail::encode_double(z.imag())}));
  j["poles"] = std::move(poles);
  const FileConfig& c = pf.config;
  if (c.multistart || c.seed || c.baseline || c.rank_tol || c.step_residual_tol) {
    json jc = json::object();
    if (c.multistart) jc["multistart"] = *c.multistart;
    if (c.seed) jc["seed"] = *c.seed;
    if (c.baseline) jc["baseline"] = *c.baseline;
    if (c.rank_tol) jc["rank_tol"] = detail::encode_double(*c.rank_tol);
    if (c.step_residual_tol)
      jc["step_residual_tol"] = detail::encode_double(*c.step_residual_tol);
    j["config"] = std::move(jc);
  }
  return j.dump(2) + "\n";
}

struct SolutionFile {
  RealMatrix f, x, t;
  RobustnessReport report;
  std::vector<StepRecord> step_log;
};

inline SolutionFile make_solution_file(const FeedbackSolution& sol, const RobustnessReport& rep) {
  SolutionFile sf;
  sf.f = sol.f;
  sf.x = sol.x;
  sf.t = sol.t;
  sf.report = rep;
  sf.step_log = sol.step_log;
  return sf;
}

inline std::string serialize_solution(const SolutionFile& sf) {
  json j;
  j["f"] = detail::encode_matrix(sf.f);
  j["x"] = detail::encode_matrix(sf.x);
  j["t"] = detail::encode_matrix(sf.t);
  json rep;
  rep["dep"] = detail::encode_double(sf.report.dep);
  rep["cond_x"] = detail::encode_double(sf.report.cond_x);
  rep["precs"] = sf.report.precs;
  rep["schur_residual"] = detail::encode_double(sf.report.schur_residual);
  rep["orth_residual"] = detail::encode_double(sf.report.orth_residual);
  rep["constraint_residual"] = detail::encode_double(sf.report.constraint_residual);
  rep["dep_identity_delta"] = detail::encode_double(sf.report.dep_identity_delta);
  j["report"] = std::move(rep);
  json steps = json::array();
  for (const StepRecord& s : sf.step_log) {
    json js;
    js["index"] = static_cast<long long>(s.index);
    js["kind"] = s.kind;
    js["strategy"] = s.strategy;
    js["subspace_dim"] = static_cast<long long>(s.subspace_dim);
    js["dep1"] = detail::encode_double(s.dep1);
    js["dep2"] = detail::encode_double(s.dep2);
    js["bound1"] = detail::encode_double(s.bound1);
    js["bound2"] = detail::encode_double(s.bound2);
    js["objective"] = detail::encode_double(s.objective);
    steps.push_back(std::move(js));
  }
  j["step_log"] = std::move(steps);
  return j.dump(2) + "\n";
}

inline SolutionFile parse_solution(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("input is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("top level: expected an object");
  for (const char* key : {"f", "x", "t", "report", "step_log"})
    if (!j.contains(key)) throw ParseError(std::string(key) + ": missing");
  SolutionFile sf;
  sf.f = detail::decode_matrix(j["f"], "f");
  sf.x = detail::decode_matrix(j["x"], "x");
  sf.t = detail::decode_matrix(j["t"], "t");
  if (sf.x.rows() != sf.x.cols()) throw ParseError("x: expected a square matrix");
  if (sf.t.rows() != sf.x.rows() || sf.t.cols() != sf.x.cols())
    throw ParseError("t: dimensions do not match x");
  if (sf.f.cols() != sf.x.rows()) throw ParseError("f: column count does not match x");
  const json& rep = j["report"];
  if (!rep.is_object()) throw ParseError("report: expected an object");
  for (const char* key : {"dep", "cond_x", "precs", "schur_residual", "orth_residual",
                          "constraint_residual", "dep_identity_delta"})
    if (!rep.contains(key)) throw ParseError(std::string("report.") + key + ": missing");
  sf.report.dep = detail::decode_double(rep["dep"], "report.dep");
  sf.report.cond_x = detail::decode_double(rep["cond_x"], "report.cond_x");
  if (!rep["precs"].is_number_integer()) throw ParseError("report.precs: expected an integer");
  sf.report.precs = rep["precs"].get<int>();
  sf.report.schur_residual = detail::decode_double(rep["schur_residual"], "report.schur_residual");
  sf.report.orth_residual = detail::decode_double(rep["orth_residual"], "report.orth_residual");
  sf.report.constraint_residual =
      detail::decode_double(rep["constraint_residual"], "report.constraint_residual");
  sf.report.dep_identity_delta =
      detail::decode_double(rep["dep_identity_delta"], "report.dep_identity_delta");
  const json& steps = j["step_log"];
  if (!steps.is_array()) throw ParseError("step_log: expected an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string where = "step_log[" + std::to_string(i) + "]";
    const json& js = steps[i];
    if (!js.is_object()) throw ParseError(where + ": expected an object");
    StepRecord s;
    for (const char* key :
         {"index", "kind", "strategy", "subspace_dim", "dep1", "dep2", "bound1", "bound2",
          "objective"})
      if (!js.contains(key)) throw ParseError(where + "." + key + ": missing");
    if (!js["index"].is_number_integer()) throw ParseError(where + ".index: expected an integer");
    s.index = js["index"].get<long long>();
    if (!js["kind"].is_string()) throw ParseError(where + ".kind: expected a string");
    s.kind = js["kind"].get<std::string>();
    if (!js["strategy"].is_string()) throw ParseError(where + ".strategy: expected a string");
    s.strategy = js["strategy"].get<std::string>();
    if (!js["subspace_dim"].is_number_integer())
      throw ParseError(where + ".subspace_dim: expected an integer");
    s.subspace_dim = js["subspace_dim"].get<long long>();
    s.dep1 = detail::decode_double(js["dep1"], where + ".dep1");
    s.dep2 = detail::decode_double(js["dep2"], where + ".dep2");
    s.bound1 = detail::decode_double(js["bound1"], where + ".bound1");
    s.bound2 = detail::decode_double(js["bound2"], where + ".bound2");
    s.objective = detail::decode_double(js["objective"], where + ".objective");
    sf.step_log.push_back(std::move(s));
  }
  return sf;
}

// Shortest round-trip decimal form, matching the JSON float policy.
inline std::string format_short(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string sanitize_status(std::string s) {
  for (char& ch : s) {
    if (ch == ',') ch = ';';
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

inline std::string csv_header() { return "case,n,m,k,method,repeat,dep,cond_x,precs,wall_ms,status"; }

inline std::string csv_encode(const std::vector<BenchRow>& rows) {
  std::string out = csv_header();
  out += '\n';
  char buf[64];
  for (const BenchRow& r : rows) {
    out += r.case_name;
    out += ',';
    out += std::to_string(static_cast<long long>(r.n));
    out += ',';
    out += std::to_string(static_cast<long long>(r.m));
    out += ',';
    if (r.k) out += format_short(*r.k);
    out += ',';
    out += r.method;
    out += ',';
    out += std::to_string(r.repeat);
    out += ',';
    if (r.dep) out += format_short(*r.dep);
    out += ',';
    if (r.cond_x) out += format_short(*r.cond_x);
    out += ',';
    if (r.precs) out += std::to_string(*r.precs);
    out += ',';
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
    out += buf;
    out += ',';
    out += sanitize_status(r.status);
    out += '\n';
  }
  return out;
}

inline std::string format_aggregates(const std::vector<Aggregate>& aggs) {
  std::string out;
  char buf[256];
  for (const Aggregate& a : aggs) {
    std::snprintf(buf, sizeof buf,
                  "%s %s ok=%d/%d dep med=%.3e mean=%.3e cond med=%.3e mean=%.3e "
                  "precs med=%.1f mean=%.1f\n",
                  a.case_name.c_str(), a.method.c_str(), a.ok, a.total, a.dep_median, a.dep_mean,
                  a.cond_median, a.cond_mean, a.precs_median, a.precs_mean);
    out += buf;
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw Error("failed writing " + path);
}

}  // namespace polecraft
