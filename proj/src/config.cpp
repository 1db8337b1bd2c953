#include "hjflow/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hjflow {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::single: return "single";
    case ExperimentKind::sweep_kappa: return "sweep-kappa";
    case ExperimentKind::semigroup: return "semigroup";
    case ExperimentKind::eig: return "eig";
    case ExperimentKind::oracle_colehopf: return "oracle-colehopf";
    case ExperimentKind::picard_crosscheck: return "picard-crosscheck";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::single, ExperimentKind::sweep_kappa, ExperimentKind::semigroup, ExperimentKind::eig,
                 ExperimentKind::oracle_colehopf, ExperimentKind::picard_crosscheck})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

namespace {

const std::set<std::string> kKnownKeys = {
    "experiment.kind", "experiment.id", "experiment.output", "experiment.seed",
    "grid.kind", "grid.length", "grid.n", "grid.lx", "grid.ly", "grid.nx", "grid.ny", "grid.h", "grid.rects",
    "F.kind", "F.p", "F.q", "F.delta", "F.c0", "F.sign", "F.table",
    "initial.kind", "initial.amplitude", "initial.offset", "initial.modes", "initial.n_modes", "initial.radius",
    "initial.center", "initial.clip_above", "initial.seed",
    "time.dt_max", "time.t_end", "time.cfl", "time.save_stride", "time.blowup_guard", "time.solver_tol",
    "diagnostics.K", "diagnostics.t0", "diagnostics.plateau",
    "fit.eps_hi", "fit.eps_lo", "fit.rate_tol", "fit.check_rate",
    "sweep.amplitudes",
    "semigroup.fields", "semigroup.times", "semigroup.refine",
    "picard.n_time_nodes", "picard.max_iters",
};

class Keys {
 public:
  explicit Keys(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  const std::string& text(const std::string& key) const { return kv_.at(key); }

  double number(const std::string& key) const { return parse_double(key, text(key)); }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError(key + ": expected an integer");
    return static_cast<long long>(v);
  }
  long long integer(const std::string& key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  std::string str(const std::string& key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& t = text(key);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(key + ": expected true or false");
  }

  std::vector<double> list(const std::string& key, char sep = ',') const {
    std::vector<double> out;
    std::string item;
    std::istringstream s(text(key));
    while (std::getline(s, item, sep)) {
      item = trim(item);
      if (!item.empty()) out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
  }

  static double parse_double(const std::string& key, std::string t) {
    t = trim(t);
    double v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
      throw ConfigError(key + ": expected a number, got '" + t + "'");
    return v;
  }

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  }

 private:
  std::map<std::string, std::string> kv_;
};

std::map<std::string, std::string> flatten(const std::string& text) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message(), static_cast<int>(e.line()));
  }
  std::map<std::string, std::string> kv;
  auto put = [&](const std::string& key, const std::string& value) {
    if (!kKnownKeys.count(key)) throw ConfigError("unknown key '" + key + "'");
    if (!kv.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
  };
  for (const auto& [name, node] : pt) {
    if (node.empty()) {
      put(name, node.data());
    } else {
      for (const auto& [key, leaf] : node) {
        if (!leaf.empty()) throw ConfigError("nested section under '" + name + "'");
        put(name + "." + key, leaf.data());
      }
    }
  }
  return kv;
}

GridSpec parse_grid(const Keys& k) {
  GridSpec g;
  g.kind = grid_kind_from_string(k.str("grid.kind", "interval"));
  g.h = k.number("grid.h", 0.0);
  switch (g.kind) {
    case GridKind::interval:
      g.length = k.number("grid.length", 1.0);
      g.n = static_cast<int>(k.integer("grid.n", 101));
      break;
    case GridKind::rectangle:
      g.lx = k.number("grid.lx", 1.0);
      g.ly = k.number("grid.ly", 1.0);
      g.nx = static_cast<int>(k.integer("grid.nx", 41));
      g.ny = static_cast<int>(k.integer("grid.ny", 41));
      break;
    case GridKind::masked: {
      if (!k.has("grid.rects")) throw ConfigError("grid.rects: masked grids need rectangles");
      if (!(g.h > 0)) throw ConfigError("grid.h: masked grids need a positive spacing");
      std::string item;
      std::istringstream s(k.text("grid.rects"));
      while (std::getline(s, item, ';')) {
        if (Keys::trim(item).empty()) continue;
        std::istringstream r(item);
        Rect rect;
        std::string extra;
        if (!(r >> rect.x0 >> rect.y0 >> rect.x1 >> rect.y1) || (r >> extra))
          throw ConfigError("grid.rects: expected 'x0 y0 x1 y1' per rectangle");
        g.rects.push_back(rect);
      }
      if (g.rects.empty()) throw ConfigError("grid.rects: no rectangles");
      break;
    }
  }
  return g;
}

NonlinearitySpec parse_F(const Keys& k) {
  const auto kind = nonlinearity_kind_from_string(k.str("F.kind", "power"));
  NonlinearitySpec s;
  if (kind == NonlinearityKind::exponential) s = NonlinearitySpec::exponential(k.number("F.q", 2.0));
  s.kind = kind;
  s.p = k.number("F.p", s.p);
  s.q = k.number("F.q", s.q);
  s.delta = k.number("F.delta", s.delta);
  if (k.has("F.c0")) s.c0 = k.number("F.c0");
  s.sign = static_cast<int>(k.integer("F.sign", 1));
  if (k.has("F.table")) {
    std::string item;
    std::istringstream t(k.text("F.table"));
    while (std::getline(t, item, ',')) {
      if (Keys::trim(item).empty()) continue;
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("F.table: expected 'radius:value' pairs");
      s.table_radii.push_back(Keys::parse_double("F.table", item.substr(0, colon)));
      s.table_values.push_back(Keys::parse_double("F.table", item.substr(colon + 1)));
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

InitialDatum parse_initial(const Keys& k, std::uint64_t seed) {
  InitialDatum d;
  d.kind = initial_kind_from_string(k.str("initial.kind", "cosine"));
  d.amplitude = k.number("initial.amplitude", 1.0);
  d.offset = k.number("initial.offset", 0.0);
  if (k.has("initial.modes")) {
    const auto m = k.list("initial.modes");
    if (m.size() > 2) throw ConfigError("initial.modes: at most two entries");
    d.modes[0] = static_cast<int>(m[0]);
    d.modes[1] = m.size() > 1 ? static_cast<int>(m[1]) : 1;
  }
  d.n_modes = static_cast<int>(k.integer("initial.n_modes", 6));
  d.radius = k.number("initial.radius", 0.0);
  if (k.has("initial.center")) {
    const auto c = k.list("initial.center");
    if (c.size() != 2) throw ConfigError("initial.center: expected two coordinates");
    d.center = std::array<double, 2>{c[0], c[1]};
  }
  if (k.has("initial.clip_above")) d.clip_above = k.number("initial.clip_above");
  d.seed = static_cast<std::uint64_t>(k.integer("initial.seed", static_cast<long long>(seed)));
  return d;
}

}  // namespace

ExperimentManifest parse_config(const std::string& text) {
  const Keys k(flatten(text));
  ExperimentManifest m;
  try {
    m.kind = experiment_kind_from_string(k.str("experiment.kind", "single"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("experiment.kind: ") + e.what());
  }
  m.id = k.str("experiment.id", "experiment");
  if (m.id.empty() || m.id.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError("experiment.id: must be a nonempty name without spaces or slashes");
  m.output = k.str("experiment.output", "out/" + m.id);
  const long long seed = k.integer("experiment.seed", 0);
  if (seed < 0) throw ConfigError("experiment.seed: must be nonnegative");
  m.seed = static_cast<std::uint64_t>(seed);

  RunConfig base;
  base.id = m.id;
  try {
    base.grid = parse_grid(k);
    base.F = parse_F(k);
    base.initial = parse_initial(k, m.seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  base.dt_max = k.number("time.dt_max", base.dt_max);
  base.t_end = k.number("time.t_end", base.t_end);
  base.cfl = k.number("time.cfl", base.cfl);
  base.save_stride = static_cast<int>(k.integer("time.save_stride", base.save_stride));
  base.blowup_guard = k.number("time.blowup_guard", base.blowup_guard);
  base.solver_tol = k.number("time.solver_tol", base.solver_tol);
  base.robin_K = k.number("diagnostics.K", base.robin_K);
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  m.analysis.bernstein_t0 = k.number("diagnostics.t0", 0.05);
  m.analysis.plateau = k.number("diagnostics.plateau", 0.0);
  if (!(m.analysis.bernstein_t0 > 0)) throw ConfigError("diagnostics.t0: must be positive");
  if (k.has("fit.eps_hi")) m.analysis.band.eps_hi = k.number("fit.eps_hi");
  if (k.has("fit.eps_lo")) m.analysis.band.eps_lo = k.number("fit.eps_lo");
  if (m.analysis.band.eps_hi && m.analysis.band.eps_lo && !(*m.analysis.band.eps_lo < *m.analysis.band.eps_hi))
    throw ConfigError("fit.eps_lo: must be below fit.eps_hi");
  if (k.has("fit.rate_tol")) m.analysis.rate_tol = k.number("fit.rate_tol");
  m.analysis.check_rate = k.boolean("fit.check_rate", m.kind != ExperimentKind::picard_crosscheck);

  if (k.has("sweep.amplitudes")) {
    if (m.kind != ExperimentKind::sweep_kappa) throw ConfigError("sweep.amplitudes: only valid for sweep-kappa");
    m.amplitudes = k.list("sweep.amplitudes");
    for (std::size_t i = 0; i < m.amplitudes.size(); ++i) {
      if (m.amplitudes[i] < 0) throw ConfigError("sweep.amplitudes: amplitudes must be nonnegative");
      if (i > 0 && !(m.amplitudes[i] > m.amplitudes[i - 1]))
        throw ConfigError("sweep.amplitudes: amplitudes must be strictly increasing");
    }
  } else if (m.kind == ExperimentKind::sweep_kappa) {
    throw ConfigError("sweep.amplitudes: required for sweep-kappa");
  }

  m.semigroup_fields = static_cast<int>(k.integer("semigroup.fields", m.semigroup_fields));
  if (m.semigroup_fields < 1) throw ConfigError("semigroup.fields: need at least one field");
  if (k.has("semigroup.times")) m.semigroup_times = k.list("semigroup.times");
  for (double t : m.semigroup_times)
    if (!(t > 0)) throw ConfigError("semigroup.times: times must be positive");
  m.semigroup_refine = k.boolean("semigroup.refine", m.semigroup_refine);
  m.picard_nodes = static_cast<int>(k.integer("picard.n_time_nodes", m.picard_nodes));
  m.picard_max_iters = static_cast<int>(k.integer("picard.max_iters", m.picard_max_iters));
  if (m.picard_nodes < 8) throw ConfigError("picard.n_time_nodes: need at least 8 nodes");
  if (m.picard_max_iters < 1) throw ConfigError("picard.max_iters: must be positive");

  if (m.kind == ExperimentKind::oracle_colehopf &&
      !(base.F.kind == NonlinearityKind::power && base.F.p == 2.0 && base.F.sign == 1))
    throw ConfigError("F.kind: oracle-colehopf needs F = |z|^2");

  if (m.kind == ExperimentKind::sweep_kappa) {
    for (std::size_t i = 0; i < m.amplitudes.size(); ++i) {
      RunConfig r = base;
      r.initial.amplitude = m.amplitudes[i];
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s-a%zu", m.id.c_str(), i);
      r.id = buf;
      m.runs.push_back(r);
    }
  } else {
    m.runs.push_back(base);
  }
  return m;
}

ExperimentManifest load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

}  // namespace hjflow
