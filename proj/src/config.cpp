#include "hjcell/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hjcell/errors.hpp"

namespace hjcell {
namespace {

using nlohmann::json;

// Object view that remembers which keys were read, so leftovers (typos)
// can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    detail::require_config(j.is_object(), path_ + " must be an object");
  }

  bool has(const std::string& key) {
    if (!j_.contains(key)) return false;
    if (j_.at(key).is_null()) seen_.insert(key);
    return !j_.at(key).is_null();
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + " has the wrong type");
    }
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), path_ + "." + key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown key " + path_ + "." + key);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

DislocationRegime regime_from_string(const std::string& s) {
  if (s == "local") return DislocationRegime::Local;
  if (s == "convolution") return DislocationRegime::Convolution;
  if (s == "full") return DislocationRegime::FullKernel;
  throw ConfigError("unknown dislocation regime '" + s + "' (local, convolution, full)");
}

NonconvexScheme scheme_from_string(const std::string& s) {
  if (s == "lf") return NonconvexScheme::LaxFriedrichs;
  if (s == "eo") return NonconvexScheme::EngquistOsher;
  throw ConfigError("unknown scheme '" + s + "' (lf, eo)");
}

MfgCoupling coupling_from_string(const std::string& s) {
  if (s == "quadratic") return MfgCoupling::Quadratic;
  if (s == "neglog") return MfgCoupling::NegLog;
  throw ConfigError("unknown MFG coupling '" + s + "' (quadratic, neglog)");
}

QrBackend backend_from_string(const std::string& s) {
  if (s == "auto") return QrBackend::Auto;
  if (s == "dense") return QrBackend::Dense;
  if (s == "sparse") return QrBackend::Sparse;
  throw ConfigError("unknown QR backend '" + s + "' (auto, dense, sparse)");
}

void parse_problem(Section sec, ProblemSpec& p) {
  std::string family = to_string(p.family), boundary = to_string(p.boundary);
  std::string scheme = p.scheme == NonconvexScheme::LaxFriedrichs ? "lf" : "eo";
  std::string regime = "local", coupling = "quadratic";
  std::vector<double> pvec;
  sec.get("family", family);
  p.family = family_from_string(family);
  sec.get("dim", p.dim);
  sec.get("N", p.nodes);
  sec.get("boundary", boundary);
  p.boundary = boundary_from_string(boundary);
  if (sec.has("p")) {
    const json& raw = sec.raw("p");
    if (raw.is_number()) {
      p.p = {raw.get<double>(), 0.0};
    } else {
      try {
        pvec = raw.get<std::vector<double>>();
      } catch (const json::exception&) {
        throw ConfigError("problem.p must be a number or a list of numbers");
      }
      detail::require_config(!pvec.empty() && pvec.size() <= 2, "problem.p must have 1 or 2 entries");
      p.p = {pvec[0], pvec.size() > 1 ? pvec[1] : 0.0};
    }
  }
  sec.get("L", p.stress);
  sec.get("s", p.s);
  sec.get("potential", p.potential);
  sec.get("q", p.q);
  sec.get("scheme", scheme);
  p.scheme = scheme_from_string(scheme);
  sec.get("theta", p.theta);
  sec.get("alpha", p.alpha);
  sec.get("V1", p.V1);
  sec.get("V2", p.V2);
  sec.get("c1", p.c1);
  sec.get("c2", p.c2);
  sec.get("c0", p.c0);
  sec.get("density_den", p.density_den);
  if (sec.has("regime")) {
    sec.get("regime", regime);
    p.regime = regime_from_string(regime);
  }
  sec.get("truncation", p.truncation);
  sec.get("e_ramp_width", p.e_ramp_width);
  sec.get("nu", p.nu);
  if (sec.has("coupling")) {
    sec.get("coupling", coupling);
    p.coupling = coupling_from_string(coupling);
  }
  sec.get("m_floor", p.m_floor);
  sec.get("coupling_matrix", p.coupling_matrix);
  sec.get("guess", p.guess);
  sec.get("guess_pieces", p.guess_pieces);
  sec.finish();

  detail::require_config(p.dim == 1 || p.dim == 2, "problem.dim must be 1 or 2");
  detail::require_config(p.nodes >= 3, "problem.N must be at least 3");
  detail::require_config(p.guess == "constant" || p.guess == "piecewise",
                         "problem.guess must be constant or piecewise");
  if (p.family == Family::MultiPopMfg)
    detail::require_config(!p.coupling_matrix.empty(), "multipop_mfg needs problem.coupling_matrix");
}

void parse_newton(Section sec, NewtonConfig& n) {
  std::string stop = to_string(n.stop_rule), backend = "auto";
  sec.get("epsilon", n.epsilon);
  sec.get("max_iterations", n.max_iterations);
  sec.get("damping_mu", n.damping_mu);
  sec.get("lm_tau", n.lm_tau);
  sec.get("stop_rule", stop);
  n.stop_rule = stop_rule_from_string(stop);
  sec.get("rank_tol", n.lsq.rank_tol);
  sec.get("dense_threshold", n.lsq.dense_threshold);
  if (sec.has("backend")) {
    sec.get("backend", backend);
    n.lsq.backend = backend_from_string(backend);
  }
  sec.get("record_history", n.record_history);
  if (sec.has("line_search")) {
    Section ls = sec.sub("line_search");
    ls.get("enabled", n.line_search.enabled);
    ls.get("shrink", n.line_search.shrink);
    ls.get("armijo", n.line_search.armijo);
    ls.get("max_halvings", n.line_search.max_halvings);
    ls.get("reinit_on_stall", n.line_search.reinit_on_stall);
    ls.finish();
  }
  sec.finish();
  n.validate();
}

SweepAxis parse_axis(const std::string& name, const json& j) {
  SweepAxis a;
  a.name = name;
  if (j.is_number()) {
    a.start = a.end = j.get<double>();
    return a;
  }
  Section sec(j, "sweep." + name);
  sec.get("start", a.start);
  a.end = a.start;
  sec.get("end", a.end);
  sec.get("count", a.count);
  sec.finish();
  detail::require_config(a.count >= 1, "sweep." + name + ".count must be at least 1");
  return a;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::Eikonal: return "eikonal";
    case Family::Nonconvex: return "nonconvex";
    case Family::SecondOrder: return "second_order";
    case Family::WeaklyCoupled: return "weakly_coupled";
    case Family::Dislocation: return "dislocation";
    case Family::Mfg: return "mfg";
    case Family::MultiPopMfg: return "multipop_mfg";
  }
  return "eikonal";
}

Family family_from_string(const std::string& name) {
  for (Family f : {Family::Eikonal, Family::Nonconvex, Family::SecondOrder, Family::WeaklyCoupled,
                   Family::Dislocation, Family::Mfg, Family::MultiPopMfg})
    if (to_string(f) == name) return f;
  throw ConfigError("unknown problem family '" + name + "'");
}

double SweepAxis::value(int k) const {
  if (count == 1) return start;
  return start + (end - start) * static_cast<double>(k) / static_cast<double>(count - 1);
}

std::size_t RunConfig::point_count() const {
  std::size_t n = 1;
  for (const auto& a : sweep) n *= static_cast<std::size_t>(a.count);
  return n;
}

std::vector<std::string> coordinate_names(const ProblemSpec& spec) {
  switch (spec.family) {
    case Family::Eikonal:
    case Family::WeaklyCoupled:
      return spec.dim == 2 ? std::vector<std::string>{"p1", "p2"} : std::vector<std::string>{"p1"};
    case Family::Nonconvex: return {"p1"};
    case Family::SecondOrder: return {"p1", "s"};
    case Family::Dislocation: return {"p1", "L"};
    case Family::Mfg:
    case Family::MultiPopMfg: return {};
  }
  return {};
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Section root(doc, "config");
  root.get("schema_version", cfg.schema_version);
  detail::require_config(cfg.schema_version == kSchemaVersion,
                         "unsupported schema_version " + std::to_string(cfg.schema_version));
  detail::require_config(root.has("problem"), "config.problem is required");
  parse_problem(root.sub("problem"), cfg.problem);

  if (root.has("sweep")) {
    const json& sw = root.raw("sweep");
    detail::require_config(sw.is_object(), "config.sweep must be an object");
    const auto allowed = coordinate_names(cfg.problem);
    // Fixed axis order keeps CSV ordering independent of key order in the file.
    for (const std::string name : {"p1", "p2", "L", "s"}) {
      if (!sw.contains(name)) continue;
      detail::require_config(std::find(allowed.begin(), allowed.end(), name) != allowed.end(),
                             "sweep axis '" + name + "' does not apply to family " +
                                 to_string(cfg.problem.family));
      cfg.sweep.push_back(parse_axis(name, sw.at(name)));
    }
    for (const auto& [key, value] : sw.items())
      if (key != "p1" && key != "p2" && key != "L" && key != "s")
        throw ConfigError("unknown sweep axis '" + key + "'");
  }
  if (root.has("newton")) parse_newton(root.sub("newton"), cfg.newton);
  if (root.has("output")) {
    Section out = root.sub("output");
    out.get("csv", cfg.output_csv);
    out.get("corrector_dir", cfg.corrector_dir);
    out.get("corrector_points", cfg.corrector_points);
    out.finish();
  }
  root.get("workers", cfg.workers);
  root.get("warm_start", cfg.warm_start);
  root.get("record_corrector", cfg.record_corrector);
  if (root.has("plateau")) {
    PlateauSpec ps;
    Section pl = root.sub("plateau");
    std::vector<double> bracket{ps.lo, ps.hi};
    pl.get("target", ps.target);
    pl.get("bracket", bracket);
    detail::require_config(bracket.size() == 2 && bracket[0] < bracket[1],
                           "plateau.bracket must be [lo, hi] with lo < hi");
    ps.lo = bracket[0];
    ps.hi = bracket[1];
    pl.get("tol", ps.tol);
    pl.get("threshold", ps.threshold);
    pl.get("q_values", ps.q_values);
    pl.finish();
    detail::require_config(ps.tol > 0.0, "plateau.tol must be positive");
    cfg.plateau = ps;
  }
  root.finish();
  detail::require_config(cfg.workers >= 1, "workers must be at least 1");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace hjcell
