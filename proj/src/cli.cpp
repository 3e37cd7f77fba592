#include "plemelj/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "plemelj/curve.hpp"
#include "plemelj/density.hpp"
#include "plemelj/parallel.hpp"
#include "plemelj/pv.hpp"
#include "plemelj/transform.hpp"

namespace plemelj::cli {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(Operation op) {
  switch (op) {
    case Operation::pv: return "pv";
    case Operation::transform: return "transform";
    case Operation::boundary: return "boundary";
    case Operation::converge: return "converge";
    case Operation::classify: return "classify";
    case Operation::exists: return "exists";
    case Operation::verify_jump: return "verify-jump";
  }
  return "pv";
}

Operation operation_from_string(const std::string& s) {
  for (auto op : {Operation::pv, Operation::transform, Operation::boundary, Operation::converge,
                  Operation::classify, Operation::exists, Operation::verify_jump})
    if (s == to_string(op)) return op;
  throw Error(ErrorKind::invalid_argument, "unknown operation '" + s + "'");
}

// ---------------------------------------------------------------------------
// Line map

namespace {

class LineScanner {
 public:
  explicit LineScanner(const std::string& t) : t_(t) {}

  std::map<std::string, int> run() {
    value("");
    return std::move(lines_);
  }

 private:
  void ws() {
    while (i_ < t_.size() && (t_[i_] == ' ' || t_[i_] == '\t' || t_[i_] == '\r' || t_[i_] == '\n')) {
      if (t_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  std::string string() {
    std::string out;
    ++i_;  // opening quote
    while (i_ < t_.size() && t_[i_] != '"') {
      if (t_[i_] == '\\' && i_ + 1 < t_.size()) {
        out += t_[i_ + 1];
        i_ += 2;
      } else {
        out += t_[i_++];
      }
    }
    ++i_;
    return out;
  }

  static std::string escape(const std::string& k) {
    std::string out;
    for (char ch : k) {
      if (ch == '~') out += "~0";
      else if (ch == '/') out += "~1";
      else out += ch;
    }
    return out;
  }

  void value(const std::string& path) {
    ws();
    if (i_ >= t_.size()) return;
    lines_[path] = line_;
    const char ch = t_[i_];
    if (ch == '{') {
      ++i_;
      for (;;) {
        ws();
        if (i_ >= t_.size() || t_[i_] == '}') break;
        if (t_[i_] == ',') {
          ++i_;
          continue;
        }
        const std::string key = string();
        ws();
        ++i_;  // ':'
        value(path + "/" + escape(key));
      }
      ++i_;
    } else if (ch == '[') {
      ++i_;
      int k = 0;
      for (;;) {
        ws();
        if (i_ >= t_.size() || t_[i_] == ']') break;
        if (t_[i_] == ',') {
          ++i_;
          continue;
        }
        value(path + "/" + std::to_string(k++));
      }
      ++i_;
    } else if (ch == '"') {
      string();
    } else {
      while (i_ < t_.size() && std::string_view(",]} \t\r\n").find(t_[i_]) == std::string_view::npos) ++i_;
    }
  }

  const std::string& t_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

class Schema {
 public:
  Schema(std::map<std::string, int> lines, std::string source)
      : lines_(std::move(lines)), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    throw Error(ErrorKind::schema, source_ + ":" + std::to_string(line(ptr)) + ": " +
                                       (ptr.empty() ? "/" : ptr) + ": " + msg);
  }

  int line(std::string ptr) const {
    for (;;) {
      auto it = lines_.find(ptr);
      if (it != lines_.end()) return it->second;
      if (ptr.empty()) return 1;
      ptr.erase(ptr.rfind('/'));
    }
  }

  void only_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : allowed) ok = ok || it.key() == k;
      if (!ok) fail(ptr + "/" + it.key(), "unknown field");
    }
  }

  const json& object(const json& j, const std::string& ptr) const {
    if (!j.is_object()) fail(ptr, "expected an object");
    return j;
  }

  double number(const json& j, const std::string& ptr) const {
    if (!j.is_number()) fail(ptr, "expected a number");
    return j.get<double>();
  }

  double positive(const json& j, const std::string& ptr) const {
    const double v = number(j, ptr);
    if (!(v > 0)) fail(ptr, "must be positive");
    return v;
  }

  int integer(const json& j, const std::string& ptr, int lo, int hi) const {
    if (!j.is_number_integer()) fail(ptr, "expected an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > hi) fail(ptr, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }

  std::string string(const json& j, const std::string& ptr) const {
    if (!j.is_string()) fail(ptr, "expected a string");
    return j.get<std::string>();
  }

  std::string choice(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed) const {
    const auto s = string(j, ptr);
    std::string all;
    for (const char* a : allowed) {
      if (s == a) return s;
      all += all.empty() ? a : std::string(", ") + a;
    }
    fail(ptr, "must be one of: " + all);
  }

  std::vector<double> numbers(const json& j, const std::string& ptr) const {
    if (!j.is_array()) fail(ptr, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], ptr + "/" + std::to_string(i)));
    return out;
  }

 private:
  std::map<std::string, int> lines_;
  std::string source_;
};

std::string resolve(const std::string& file, const std::string& source) {
  const fs::path p(file);
  if (p.is_absolute() || source.empty() || source == "-") return file;
  return (fs::path(source).parent_path() / p).string();
}

}  // namespace

std::map<std::string, int> json_value_lines(const std::string& text) { return LineScanner(text).run(); }

ExperimentConfig parse_config(const std::string& text, const std::string& source, std::optional<Operation> operation) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw Error(ErrorKind::schema, source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  const Schema sc(json_value_lines(text), source);
  sc.object(j, "");
  sc.only_keys(j, "", {"schema", "operation", "curve", "density", "targets", "points", "settings", "out", "seed"});

  if (!j.contains("schema")) sc.fail("", "missing field 'schema'");
  if (!j["schema"].is_number_integer() || j["schema"].get<long long>() != 1)
    sc.fail("/schema", "unsupported schema version (expected 1)");

  ExperimentConfig cfg;
  if (j.contains("operation")) {
    const auto s = sc.choice(j["operation"], "/operation",
                             {"pv", "transform", "boundary", "converge", "classify", "exists", "verify-jump"});
    cfg.operation = operation_from_string(s);
  }
  if (operation) cfg.operation = *operation;
  else if (!j.contains("operation")) sc.fail("", "missing field 'operation' (or give a subcommand)");

  if (j.contains("curve")) {
    const auto& c = sc.object(j["curve"], "/curve");
    sc.only_keys(c, "/curve", {"builtin", "params", "points_file", "closed"});
    CurveSpec cs;
    const bool b = c.contains("builtin"), p = c.contains("points_file");
    if (b == p) sc.fail("/curve", "give exactly one of 'builtin' or 'points_file'");
    if (b) {
      cs.builtin = sc.choice(c["builtin"], "/curve/builtin", {"segment", "circle", "arc", "parabola-graph"});
      if (c.contains("params")) cs.params = sc.numbers(c["params"], "/curve/params");
      if (c.contains("closed")) sc.fail("/curve/closed", "only valid with 'points_file'");
    } else {
      cs.points_file = resolve(sc.string(c["points_file"], "/curve/points_file"), source);
      if (!fs::exists(cs.points_file)) sc.fail("/curve/points_file", "file not found: " + cs.points_file);
      if (c.contains("params")) sc.fail("/curve/params", "only valid with 'builtin'");
      if (c.contains("closed")) {
        if (!c["closed"].is_boolean()) sc.fail("/curve/closed", "expected a boolean");
        cs.closed = c["closed"].get<bool>();
      }
    }
    cfg.curve = cs;
  }

  if (j.contains("density")) {
    const auto& d = sc.object(j["density"], "/density");
    sc.only_keys(d, "/density", {"builtin", "params", "table"});
    DensitySpec ds;
    const bool b = d.contains("builtin"), t = d.contains("table");
    if (b == t) sc.fail("/density", "give exactly one of 'builtin' or 'table'");
    if (b) {
      ds.builtin = sc.choice(d["builtin"], "/density/builtin",
                             {"constant", "linear", "holder-power", "dini-log", "step"});
      if (d.contains("params")) ds.params = sc.numbers(d["params"], "/density/params");
    } else {
      ds.table = resolve(sc.string(d["table"], "/density/table"), source);
      if (!fs::exists(ds.table)) sc.fail("/density/table", "file not found: " + ds.table);
      if (d.contains("params")) sc.fail("/density/params", "only valid with 'builtin'");
    }
    cfg.density = ds;
  }

  if (j.contains("targets")) cfg.targets = sc.numbers(j["targets"], "/targets");
  if (j.contains("points")) {
    const auto& p = j["points"];
    if (!p.is_array()) sc.fail("/points", "expected an array of [re, im] pairs");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string ptr = "/points/" + std::to_string(i);
      const auto v = sc.numbers(p[i], ptr);
      if (v.size() != 2) sc.fail(ptr, "expected [re, im]");
      cfg.points.emplace_back(v[0], v[1]);
    }
  }
  if (j.contains("out")) cfg.out = sc.string(j["out"], "/out");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) sc.fail("/seed", "expected a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }

  if (j.contains("settings")) {
    const auto& s = sc.object(j["settings"], "/settings");
    sc.only_keys(s, "/settings",
                 {"abs_tol", "rel_tol", "max_subdivisions", "excision_first", "excision_last", "method", "depth",
                  "side", "shape", "ratio", "tol", "near_distance", "n_pairs", "bootstrap"});
    auto& st = cfg.settings;
    if (s.contains("abs_tol")) st.abs_tol = sc.positive(s["abs_tol"], "/settings/abs_tol");
    if (s.contains("rel_tol")) {
      st.rel_tol = sc.number(s["rel_tol"], "/settings/rel_tol");
      if (st.rel_tol < 0) sc.fail("/settings/rel_tol", "must be non-negative");
    }
    if (s.contains("max_subdivisions"))
      st.max_subdivisions = sc.integer(s["max_subdivisions"], "/settings/max_subdivisions", 1, 10000000);
    if (s.contains("excision_first")) st.excision_first = sc.integer(s["excision_first"], "/settings/excision_first", 0, 60);
    if (s.contains("excision_last")) st.excision_last = sc.integer(s["excision_last"], "/settings/excision_last", 0, 60);
    if (st.excision_last < st.excision_first + 4)
      sc.fail("/settings", "excision_last must exceed excision_first by at least 4");
    if (s.contains("method"))
      st.method = sc.choice(s["method"], "/settings/method", {"automatic", "subtraction", "excision", "disk"});
    if (s.contains("depth")) {
      st.depth = sc.integer(s["depth"], "/settings/depth", 5, 60);
      cfg.depth_set = true;
    }
    if (s.contains("side")) st.side = sc.choice(s["side"], "/settings/side", {"left", "right"});
    if (s.contains("shape")) st.shape = sc.choice(s["shape"], "/settings/shape", {"normal", "tangential"});
    if (s.contains("ratio")) st.ratio = sc.positive(s["ratio"], "/settings/ratio");
    if (s.contains("tol")) st.tol = sc.positive(s["tol"], "/settings/tol");
    if (s.contains("near_distance")) st.near_distance = sc.positive(s["near_distance"], "/settings/near_distance");
    if (s.contains("n_pairs")) st.n_pairs = sc.integer(s["n_pairs"], "/settings/n_pairs", 1000, 100000000);
    if (s.contains("bootstrap")) st.bootstrap = sc.integer(s["bootstrap"], "/settings/bootstrap", 2, 10000);
  }

  // Operation-specific requirements.
  const auto op = cfg.operation;
  const bool needs_curve = op != Operation::exists;
  if (needs_curve && !cfg.curve) sc.fail("", std::string("operation '") + to_string(op) + "' needs 'curve'");
  if (!needs_curve && cfg.curve) sc.fail("/curve", "not used by 'exists' (the density is read on [-1, 1])");
  if (!cfg.density) sc.fail("", std::string("operation '") + to_string(op) + "' needs 'density'");
  const bool needs_targets = op == Operation::pv || op == Operation::boundary || op == Operation::converge ||
                             op == Operation::verify_jump;
  if (needs_targets && cfg.targets.empty()) sc.fail("", std::string("operation '") + to_string(op) + "' needs 'targets'");
  if ((op == Operation::converge || op == Operation::verify_jump) && cfg.targets.size() != 1)
    sc.fail("/targets", "exactly one target is required");
  if (op == Operation::transform && cfg.points.empty()) sc.fail("", "operation 'transform' needs 'points'");
  return cfg;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json cjson(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Curve build_curve(const CurveSpec& s) {
  if (!s.builtin.empty()) return make_builtin_curve(s.builtin, s.params);
  auto ps = read_points(s.points_file);
  return curve_from_points(std::move(ps.points), s.closed.value_or(ps.closed));
}

Density build_density(const DensitySpec& s) {
  if (!s.builtin.empty()) return builtin_density(s.builtin, s.params);
  return read_tabulated_density(s.table);
}

PVConfig pv_config(const Settings& s, int last) {
  PVConfig p;
  p.excision_seq = PVConfig::default_excision_sequence(s.excision_first, last);
  p.quadrature.abs_tol = s.abs_tol;
  p.quadrature.rel_tol = s.rel_tol;
  p.quadrature.max_subdivisions = s.max_subdivisions;
  if (s.method == "excision") p.method = PVMethod::excision;
  else if (s.method == "subtraction") p.method = PVMethod::subtraction;
  else p.method = PVMethod::automatic;
  return p;
}

PVResult run_pv(const Curve& c, const Density& d, double tau, const Settings& s, const PVConfig& p) {
  return s.method == "disk" ? pv_curve_disk_excision(c, d, tau, p) : pv_curve(c, d, tau, p);
}

json pv_json(const PVResult& r) {
  return {{"value", cjson(r.value)},   {"error_estimate", r.error_estimate}, {"method", to_string(r.method)},
          {"converged", r.converged}, {"note", r.note},                     {"trace_length", r.trace.size()}};
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot write " + p.string());
  f << body;
  if (!f) throw Error(ErrorKind::io, "write failed: " + p.string());
}

std::string trace_csv(const std::vector<TracePoint>& t) {
  std::string s = "epsilon,re,im\n";
  for (const auto& p : t) s += num(p.epsilon) + "," + num(p.value.real()) + "," + num(p.value.imag()) + "\n";
  return s;
}

std::string convergence_csv(const ConvergenceReport& r) {
  std::string s = "n,re_z,im_z,re_phi,im_phi,abs_error\n";
  for (const auto& x : r.records)
    s += std::to_string(x.n) + "," + num(x.z.real()) + "," + num(x.z.imag()) + "," + num(x.phi.real()) + "," +
         num(x.phi.imag()) + "," + num(x.abs_error) + "\n";
  return s;
}

json convergence_json(const ConvergenceReport& r, const std::string& csv) {
  return {{"converged", r.converged},
          {"final_error", r.final_error},
          {"records", r.records.size()},
          {"truncated", r.truncated},
          {"truncation_reason", r.truncation_reason},
          {"sequence_settles", r.sequence_settles},
          {"limit", cjson(r.limit)},
          {"file", csv}};
}

json settings_json(const ExperimentConfig& cfg, int depth) {
  const auto& s = cfg.settings;
  return {{"abs_tol", s.abs_tol},
          {"rel_tol", s.rel_tol},
          {"max_subdivisions", s.max_subdivisions},
          {"excision_first", s.excision_first},
          {"excision_last", s.excision_last},
          {"method", s.method},
          {"depth", depth},
          {"side", s.side},
          {"shape", s.shape},
          {"ratio", s.ratio},
          {"tol", s.tol},
          {"near_distance", s.near_distance},
          {"n_pairs", s.n_pairs},
          {"bootstrap", s.bootstrap}};
}

int default_depth(Operation op) {
  switch (op) {
    case Operation::verify_jump: return 20;
    case Operation::exists: return 40;
    default: return 30;
  }
}

}  // namespace

int run(const ExperimentConfig& cfg, std::ostream& log) {
  const auto& st = cfg.settings;
  const int depth = cfg.depth_set ? st.depth : default_depth(cfg.operation);
  const fs::path out(cfg.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + cfg.out + ": " + ec.message());

  json report;
  report["schema"] = 1;
  report["tool"] = "plemelj";
  report["operation"] = to_string(cfg.operation);
  report["seed"] = cfg.seed;

  std::optional<Curve> curve;
  if (cfg.curve) {
    curve = build_curve(*cfg.curve);
    report["curve"] = {{"name", curve->name()},
                       {"closed", curve->closed()},
                       {"domain", {curve->a(), curve->b()}},
                       {"length", curve->length()},
                       {"orientation", curve->orientation()}};
    if (!cfg.curve->builtin.empty()) report["curve"]["params"] = cfg.curve->params;
    else report["curve"]["points_file"] = cfg.curve->points_file;
  }
  const Density density = build_density(*cfg.density);
  report["density"] = {{"name", density.name()}, {"tabulated", density.tabulated()}};
  if (!cfg.density->builtin.empty()) report["density"]["params"] = cfg.density->params;
  else report["density"]["table"] = cfg.density->table;
  if (curve && density.tabulated()) check_coverage(density, *curve);

  // pv / boundary use depth as the last excision level when given.
  int last = st.excision_last;
  if (cfg.depth_set && (cfg.operation == Operation::pv || cfg.operation == Operation::boundary)) last = depth;
  if (last < st.excision_first + 4) throw Error(ErrorKind::invalid_argument, "depth too small for the excision sequence");
  report["settings"] = settings_json(cfg, depth);
  report["settings"]["excision_last"] = last;

  const PVConfig pvc = pv_config(st, last);
  ConvergenceConfig cc;
  cc.pv = pvc;
  cc.tol = st.tol;
  cc.transform.quadrature = pvc.quadrature;
  cc.transform.near_distance = st.near_distance;

  int code = exit_ok;
  std::string verdict;
  json results = json::array();

  switch (cfg.operation) {
    case Operation::pv: {
      bool all = true;
      for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
        const double tau = cfg.targets[i];
        const auto r = run_pv(*curve, density, tau, st, pvc);
        const std::string name = cfg.targets.size() == 1 ? "trace.csv" : "trace_" + std::to_string(i) + ".csv";
        write_file(out / name, trace_csv(r.trace));
        auto e = pv_json(r);
        e["tau"] = tau;
        e["point"] = cjson(curve->point(tau));
        e["trace_file"] = name;
        results.push_back(e);
        all = all && r.converged;
      }
      verdict = all ? "converged" : "not-converged";
      code = all ? exit_ok : exit_verdict;
      break;
    }
    case Operation::transform: {
      bool all = true;
      for (const auto& z : cfg.points) {
        const auto v = cauchy_transform(*curve, density, z, cc.transform);
        results.push_back({{"z", cjson(z)},
                           {"value", cjson(v.value)},
                           {"error", v.error},
                           {"ok", v.ok},
                           {"distance", v.distance}});
        all = all && v.ok;
      }
      verdict = all ? "converged" : "not-converged";
      code = all ? exit_ok : exit_verdict;
      break;
    }
    case Operation::boundary: {
      bool all = true;
      for (double tau : cfg.targets) {
        PVConfig p = pvc;
        BoundaryValue bv;
        if (st.method == "disk") {
          // Assemble from the disk-excision P.V. directly.
          bv.pv = pv_curve_disk_excision(*curve, density, tau, p);
          bv.tau = curve->wrap(tau);
          bv.point = curve->point(bv.tau);
          bv.density_value = density({bv.tau, bv.point});
          bv.pv_part = bv.pv.value / two_pi_i;
          bv.phi_plus = 0.5 * bv.density_value + bv.pv_part;
          bv.phi_minus = -0.5 * bv.density_value + bv.pv_part;
          bv.converged = bv.pv.converged;
        } else {
          bv = boundary_values(*curve, density, tau, p);
        }
        results.push_back({{"tau", bv.tau},
                           {"point", cjson(bv.point)},
                           {"phi_plus", cjson(bv.phi_plus)},
                           {"phi_minus", cjson(bv.phi_minus)},
                           {"pv_part", cjson(bv.pv_part)},
                           {"density_value", cjson(bv.density_value)},
                           {"pv", pv_json(bv.pv)},
                           {"converged", bv.converged}});
        all = all && bv.converged;
      }
      verdict = all ? "converged" : "not-converged";
      code = all ? exit_ok : exit_verdict;
      break;
    }
    case Operation::converge: {
      const double tau = cfg.targets.front();
      const auto frame = normalize_at(*curve, tau);
      const Side side = st.side == "left" ? Side::left : Side::right;
      const auto shape = st.shape == "normal" ? ApproachShape::normal : ApproachShape::tangential_graph;
      const auto seq = make_sequence(*curve, frame, side, shape, dyadic_radii(depth), st.ratio);
      const auto rep = run_convergence(*curve, density, seq, cc);
      write_file(out / "convergence.csv", convergence_csv(rep));
      auto e = convergence_json(rep, "convergence.csv");
      e["tau"] = tau;
      e["point"] = cjson(frame.t0);
      e["side"] = st.side;
      e["shape"] = st.shape;
      e["boundary"] = {{"phi_plus", cjson(rep.boundary.phi_plus)},
                       {"phi_minus", cjson(rep.boundary.phi_minus)},
                       {"pv", pv_json(rep.boundary.pv)}};
      results.push_back(e);
      verdict = rep.converged ? "converged" : "not-converged";
      code = rep.converged ? exit_ok : exit_verdict;
      break;
    }
    case Operation::verify_jump: {
      const double tau = cfg.targets.front();
      const auto j = verify_jump(*curve, density, tau, cc, depth);
      write_file(out / "convergence_left.csv", convergence_csv(j.left));
      write_file(out / "convergence_right.csv", convergence_csv(j.right));
      const bool holds = j.jump_residual <= st.tol && j.sum_residual <= st.tol && j.limits_exist;
      results.push_back({{"tau", tau},
                         {"jump_residual", j.jump_residual},
                         {"sum_residual", j.sum_residual},
                         {"left_limit", cjson(j.left_limit)},
                         {"right_limit", cjson(j.right_limit)},
                         {"limits_exist", j.limits_exist},
                         {"density_value", cjson(j.left.boundary.density_value)},
                         {"pv", pv_json(j.left.boundary.pv)},
                         {"left", convergence_json(j.left, "convergence_left.csv")},
                         {"right", convergence_json(j.right, "convergence_right.csv")}});
      verdict = holds ? "jump-holds" : "jump-fails";
      code = holds ? exit_ok : exit_verdict;
      break;
    }
    case Operation::classify: {
      ModulusOptions mo;
      mo.n_pairs = static_cast<std::size_t>(st.n_pairs);
      mo.seed = cfg.seed;
      mo.bootstrap = st.bootstrap;
      const auto m = estimate_modulus(density, *curve, mo);
      const auto rc = classify_regularity(m);
      results.push_back({{"class", to_string(rc.kind)},
                         {"alpha", rc.kind == Regularity::holder ? json(rc.alpha) : json(nullptr)},
                         {"residual", m.holder.residual},
                         {"holder_fit", {{"alpha", m.holder.alpha}, {"C", m.holder.C}, {"valid", m.holder.valid}}},
                         {"tail_delta", m.tail_delta},
                         {"dini_tail", m.dini_tail},
                         {"tail_class", extrap::to_string(rc.tail.cls)},
                         {"grid", m.grid},
                         {"omega", m.omega},
                         {"std_error", m.std_error}});
      verdict = to_string(rc.kind);
      code = rc.kind == Regularity::unknown ? exit_verdict : exit_ok;
      break;
    }
    case Operation::exists: {
      const auto f = [&density](double x) { return density({x, Complex(x, 0.0)}); };
      const auto r = pv_exists_predicate(f, pvc, depth);
      write_file(out / "trace.csv", trace_csv(r.l1_trace));
      results.push_back({{"verdict", to_string(r.verdict)},
                         {"l1_estimate", r.l1_estimate},
                         {"decay_exponent", r.decay_exponent},
                         {"pv", cjson(r.pv)},
                         {"pv_error", r.pv_error},
                         {"trace_file", "trace.csv"}});
      verdict = to_string(r.verdict);
      code = r.verdict == Existence::exists ? exit_ok : exit_verdict;
      break;
    }
  }

  report["verdict"] = verdict;
  report["results"] = results;
  write_file(out / "report.json", report.dump(2) + "\n");
  log << to_string(cfg.operation) << ": " << verdict << " (" << (out / "report.json").string() << ")\n";
  return code;
}

// ---------------------------------------------------------------------------
// Front end

int main(int argc, char** argv) {
  CLI::App app{"Cauchy principal values, Cauchy transforms and Plemelj boundary values on smooth curves"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  struct Flags {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> abs_tol;
    std::optional<int> depth;
    std::optional<std::string> side;
    std::optional<std::string> shape;
  } flags;

  const std::vector<std::pair<Operation, const char*>> subs = {
      {Operation::pv, "Principal value at each target parameter"},
      {Operation::transform, "Cauchy transform at off-curve points"},
      {Operation::boundary, "Boundary values from the left and right"},
      {Operation::converge, "Approach-sequence convergence experiment"},
      {Operation::classify, "Modulus-of-continuity estimate and regularity class"},
      {Operation::exists, "Odd-part L1 test for existence of the P.V. at 0"},
      {Operation::verify_jump, "Jump and sum residuals from two lateral runs"},
  };
  std::optional<Operation> chosen;
  for (const auto& [op, help] : subs) {
    auto* sub = app.add_subcommand(to_string(op), help);
    sub->add_option("--config", flags.config, "Experiment config (JSON, schema 1)")->required();
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Random seed (classify)");
    sub->add_option("--abs-tol", flags.abs_tol, "Absolute quadrature tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--depth", flags.depth, "Excision or sequence depth")->check(CLI::Range(5, 60));
    sub->add_option("--side", flags.side, "Approach side")->check(CLI::IsMember({"left", "right"}));
    sub->add_option("--shape", flags.shape, "Approach shape")->check(CLI::IsMember({"normal", "tangential"}));
    sub->callback([&chosen, op = op] { chosen = op; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_error;
  }

  try {
    parallel::apply_thread_env();
    std::ifstream in(flags.config, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read config " + flags.config);
    std::stringstream buf;
    buf << in.rdbuf();
    auto cfg = parse_config(buf.str(), flags.config, chosen);
    if (flags.out) cfg.out = *flags.out;
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.abs_tol) cfg.settings.abs_tol = *flags.abs_tol;
    if (flags.depth) {
      cfg.settings.depth = *flags.depth;
      cfg.depth_set = true;
    }
    if (flags.side) cfg.settings.side = *flags.side;
    if (flags.shape) cfg.settings.shape = *flags.shape;
    return run(cfg, std::cout);
  } catch (const Error& e) {
    std::cerr << "plemelj: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_error;
  } catch (const std::exception& e) {
    std::cerr << "plemelj: internal error: " << e.what() << "\n";
    return exit_error;
  }
}

}  // namespace plemelj::cli
