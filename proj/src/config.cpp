#include "cyvortex/config.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cyvortex/error.hpp"
#include "cyvortex/io.hpp"
#include "cyvortex/oracle.hpp"

namespace cyv {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::config, "config: " + msg); }

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) fail("unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where + "." + key + " must be finite");
  return d;
}

long long get_integer(const json& obj, const char* key, long long fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where + "." + key + " must be an integer");
  return v.get<long long>();
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(where + "." + key + " must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(where + "." + key + " must be a string");
  return v.get<std::string>();
}

std::size_t positive_size(long long v, const std::string& what) {
  if (v < 1) fail(what + " must be positive");
  return static_cast<std::size_t>(v);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

const char* preset_name(MetricPreset p) { return to_string(p); }

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  reject_unknown(root, "config",
                 {"metric", "vortices", "grid", "solver", "ubar", "sign", "outputs", "mms", "decay", "verify"});
  RunConfig c;

  const json metric = root.value("metric", json::object());
  reject_unknown(metric, "metric", {"preset", "mass", "table", "alpha_target", "alpha_max"});
  const std::string preset = get_string(metric, "preset", "neck", "metric");
  if (preset == "neck") c.preset = MetricPreset::neck;
  else if (preset == "wormhole") c.preset = MetricPreset::wormhole;
  else if (preset == "tabulated") c.preset = MetricPreset::tabulated;
  else fail("metric.preset must be neck, wormhole or tabulated");
  c.mass = get_number(metric, "mass", c.mass, "metric");
  c.alpha_target = get_number(metric, "alpha_target", c.alpha_target, "metric");
  c.alpha_max = get_number(metric, "alpha_max", c.alpha_max, "metric");
  if (!(c.mass > 0.0)) fail("metric.mass must be positive");
  if (!(c.alpha_target > 1.0)) fail("metric.alpha_target must exceed 1");
  if (!(c.alpha_max >= c.alpha_target)) fail("metric.alpha_max must be at least alpha_target");
  if (c.preset == MetricPreset::tabulated) {
    if (!metric.contains("table")) fail("metric.table is required for the tabulated preset");
    c.table = resolve(base_dir, get_string(metric, "table", "", "metric"));
  } else if (metric.contains("table")) {
    fail("metric.table is only valid for the tabulated preset");
  }

  const json vortices = root.value("vortices", json::array());
  if (!vortices.is_array()) fail("vortices must be a list");
  for (std::size_t k = 0; k < vortices.size(); ++k) {
    const std::string where = "vortices[" + std::to_string(k) + "]";
    const json& v = vortices[k];
    reject_unknown(v, where, {"t", "theta", "multiplicity"});
    if (!v.contains("t") || !v.contains("theta")) fail(where + " needs t and theta");
    const double t = get_number(v, "t", 0.0, where);
    const double theta = get_number(v, "theta", 0.0, where);
    const long long m = get_integer(v, "multiplicity", 1, where);
    if (m < 1 || m > 1000) fail(where + ".multiplicity must be a positive integer");
    c.vortices.push_back({StripPoint(t, theta), static_cast<int>(m)});
  }

  const json grid = root.value("grid", json::object());
  reject_unknown(grid, "grid", {"T", "n_t", "n_theta"});
  c.T = get_number(grid, "T", c.T, "grid");
  c.n_t = positive_size(get_integer(grid, "n_t", static_cast<long long>(c.n_t), "grid"), "grid.n_t");
  c.n_theta = positive_size(get_integer(grid, "n_theta", static_cast<long long>(c.n_theta), "grid"), "grid.n_theta");
  try {
    StripGrid check(c.T, c.n_t, c.n_theta);
  } catch (const Error& e) {
    fail(e.what());
  }

  const json solver = root.value("solver", json::object());
  reject_unknown(solver, "solver",
                 {"tol_residual_inf", "max_newton", "max_linesearch_halvings", "krylov", "fallback_descent_steps",
                  "preconditioner", "tail_polish", "u_cap"});
  SolverOptions& o = c.solver;
  o.tol_residual_inf = get_number(solver, "tol_residual_inf", o.tol_residual_inf, "solver");
  o.max_newton = static_cast<int>(get_integer(solver, "max_newton", o.max_newton, "solver"));
  o.max_linesearch_halvings =
      static_cast<int>(get_integer(solver, "max_linesearch_halvings", o.max_linesearch_halvings, "solver"));
  o.fallback_descent_steps =
      static_cast<int>(get_integer(solver, "fallback_descent_steps", o.fallback_descent_steps, "solver"));
  o.u_cap = get_number(solver, "u_cap", o.u_cap, "solver");
  o.tail_polish = get_bool(solver, "tail_polish", o.tail_polish, "solver");
  const std::string pre = get_string(solver, "preconditioner", "modal", "solver");
  if (pre == "modal") o.preconditioner = PreconditionerKind::modal;
  else if (pre == "jacobi") o.preconditioner = PreconditionerKind::jacobi;
  else fail("solver.preconditioner must be modal or jacobi");
  const json krylov = solver.value("krylov", json::object());
  reject_unknown(krylov, "solver.krylov", {"tol", "max_iter", "restart"});
  o.krylov.tol = get_number(krylov, "tol", o.krylov.tol, "solver.krylov");
  o.krylov.max_iter = static_cast<int>(get_integer(krylov, "max_iter", o.krylov.max_iter, "solver.krylov"));
  o.krylov.restart = static_cast<int>(get_integer(krylov, "restart", o.krylov.restart, "solver.krylov"));
  try {
    validate(o);
  } catch (const Error& e) {
    fail(e.what());
  }

  const json ubar = root.value("ubar", json::object());
  reject_unknown(ubar, "ubar", {"epsilon_scale", "source"});
  c.epsilon_scale = get_number(ubar, "epsilon_scale", c.epsilon_scale, "ubar");
  if (!(c.epsilon_scale > 0.0 && c.epsilon_scale <= 1.0)) fail("ubar.epsilon_scale must lie in (0, 1]");
  const std::string source = get_string(ubar, "source", "lattice", "ubar");
  if (source == "lattice") c.source = SourceMode::lattice;
  else if (source == "analytic") c.source = SourceMode::analytic;
  else fail("ubar.source must be lattice or analytic");

  if (root.contains("sign")) {
    const long long s = get_integer(root, "sign", 1, "config");
    if (s != 1 && s != -1) fail("sign must be +1 or -1");
    c.sign = static_cast<int>(s);
  }

  const json outputs = root.value("outputs", json::object());
  reject_unknown(outputs, "outputs", {"dump_fields", "out_dir"});
  c.dump_fields = get_bool(outputs, "dump_fields", c.dump_fields, "outputs");
  c.out_dir = resolve(base_dir, get_string(outputs, "out_dir", "out", "outputs"));

  const json mms = root.value("mms", json::object());
  reject_unknown(mms, "mms", {"case", "grids"});
  c.mms_case = get_string(mms, "case", c.mms_case, "mms");
  {
    const auto names = case_names();
    if (std::find(names.begin(), names.end(), c.mms_case) == names.end()) fail("unknown mms.case '" + c.mms_case + "'");
  }
  if (mms.contains("grids")) {
    const json& grids = mms.at("grids");
    if (!grids.is_array()) fail("mms.grids must be a list of [n_t, n_theta] pairs");
    c.mms_grids.clear();
    for (const auto& gpair : grids) {
      if (!gpair.is_array() || gpair.size() != 2 || !gpair[0].is_number_integer() || !gpair[1].is_number_integer()) {
        fail("mms.grids entries must be [n_t, n_theta] integer pairs");
      }
      c.mms_grids.emplace_back(positive_size(gpair[0].get<long long>(), "mms grid n_t"),
                               positive_size(gpair[1].get<long long>(), "mms grid n_theta"));
    }
  }

  const json decay = root.value("decay", json::object());
  reject_unknown(decay, "decay", {"floor", "edge_margin"});
  c.decay.floor = get_number(decay, "floor", c.decay.floor, "decay");
  c.decay.edge_margin = get_number(decay, "edge_margin", c.decay.edge_margin, "decay");
  if (!(c.decay.floor > 0.0)) fail("decay.floor must be positive");
  if (!(c.decay.edge_margin >= 0.0)) fail("decay.edge_margin must be non-negative");

  const json verify = root.value("verify", json::object());
  reject_unknown(verify, "verify", {"symmetry", "truncation"});
  c.verify_symmetry = get_bool(verify, "symmetry", c.verify_symmetry, "verify");
  c.verify_truncation = get_bool(verify, "truncation", c.verify_truncation, "verify");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    fail(e.what());
  }
  return parse_config(text, path.parent_path());
}

std::string resolved_config_json(const RunConfig& c, int indent) {
  json metric = {{"preset", preset_name(c.preset)},
                 {"mass", c.mass},
                 {"alpha_target", c.alpha_target},
                 {"alpha_max", c.alpha_max}};
  if (c.preset == MetricPreset::tabulated) metric["table"] = c.table.generic_string();
  json vortices = json::array();
  for (const auto& v : c.vortices) {
    vortices.push_back({{"t", v.center.t}, {"theta", v.center.theta}, {"multiplicity", v.multiplicity}});
  }
  const SolverOptions& o = c.solver;
  json grids = json::array();
  for (const auto& [nt, nq] : c.mms_grids) grids.push_back({nt, nq});
  json root = {
      {"metric", metric},
      {"vortices", vortices},
      {"grid", {{"T", c.T}, {"n_t", c.n_t}, {"n_theta", c.n_theta}}},
      {"solver",
       {{"tol_residual_inf", o.tol_residual_inf},
        {"max_newton", o.max_newton},
        {"max_linesearch_halvings", o.max_linesearch_halvings},
        {"fallback_descent_steps", o.fallback_descent_steps},
        {"preconditioner", to_string(o.preconditioner)},
        {"tail_polish", o.tail_polish},
        {"u_cap", o.u_cap},
        {"krylov", {{"tol", o.krylov.tol}, {"max_iter", o.krylov.max_iter}, {"restart", o.krylov.restart}}}}},
      {"ubar", {{"epsilon_scale", c.epsilon_scale}, {"source", to_string(c.source)}}},
      {"sign", c.sign},
      {"outputs", {{"dump_fields", c.dump_fields}, {"out_dir", c.out_dir.generic_string()}}},
      {"mms", {{"case", c.mms_case}, {"grids", grids}}},
      {"decay", {{"floor", c.decay.floor}, {"edge_margin", c.decay.edge_margin}}},
      {"verify", {{"symmetry", c.verify_symmetry}, {"truncation", c.verify_truncation}}},
  };
  return root.dump(indent);
}

CylinderMetric build_metric(const RunConfig& c) {
  MetricParams p;
  p.mass = c.mass;
  p.alpha_target = c.alpha_target;
  p.alpha_max = c.alpha_max;
  if (c.preset == MetricPreset::tabulated) {
    p.table = std::make_shared<TabulatedSamples>(read_tabulated_csv(c.table));
  }
  return CylinderMetric::make(c.preset, p);
}

}  // namespace cyv
