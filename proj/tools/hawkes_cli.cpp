// hawkes: command-line front end for the marked Hawkes library.
//
//   hawkes <transform|moments|pmf|metric|simulate|figure> --config cfg.json
//          [--out out.csv] [--seed N] [--full] [--paths paths.csv]

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hawkes/hawkes.hpp"

namespace {

using hawkes::Json;
using hawkes::cplx;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitExplosion = 4;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw hawkes::ConfigError(where + ": " + what); }

// ---------------------------------------------------------------------------
// Strict readers for the experiment part of a config. Every value read is
// also written back into `resolved`, so the header shows all defaults.

class Section {
 public:
  Section(const Json& j, std::string where, Json& resolved) : j_(j), where_(std::move(where)), out_(resolved) {
    if (!j_.is_object()) fail(where_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) { hawkes::detail::check_keys(j_, where_, keys); }
  bool has(const char* k) const { return j_.contains(k); }

  double number(const char* k, std::optional<double> def = std::nullopt) {
    double v;
    if (!j_.contains(k)) {
      if (!def) fail(where_, std::string("missing field '") + k + "'");
      v = *def;
    } else {
      v = hawkes::detail::get_number(j_, where_, k);
    }
    out_[k] = v;
    return v;
  }

  long long integer(const char* k, std::optional<long long> def = std::nullopt) {
    long long v;
    if (!j_.contains(k)) {
      if (!def) fail(where_, std::string("missing field '") + k + "'");
      v = *def;
    } else {
      const Json& e = j_.at(k);
      if (!e.is_number_integer()) fail(where_, std::string("field '") + k + "' must be an integer");
      v = e.get<long long>();
    }
    out_[k] = v;
    return v;
  }

  std::string string(const char* k, std::optional<std::string> def = std::nullopt) {
    std::string v;
    if (!j_.contains(k)) {
      if (!def) fail(where_, std::string("missing field '") + k + "'");
      v = *def;
    } else {
      if (!j_.at(k).is_string()) fail(where_, std::string("field '") + k + "' must be a string");
      v = j_.at(k).get<std::string>();
    }
    out_[k] = v;
    return v;
  }

  // A number or an array of numbers.
  std::vector<double> numbers(const char* k, std::optional<std::vector<double>> def = std::nullopt) {
    std::vector<double> v;
    if (!j_.contains(k)) {
      if (!def) fail(where_, std::string("missing field '") + k + "'");
      v = *def;
    } else if (j_.at(k).is_number()) {
      v = {j_.at(k).get<double>()};
    } else {
      v = hawkes::detail::get_numbers(j_, where_, k);
    }
    if (v.empty()) fail(where_, std::string("field '") + k + "' must not be empty");
    out_[k] = v;
    return v;
  }

  // Complex grid: each entry is a number or a [re, im] pair.
  std::vector<cplx> complex_grid(const char* k) {
    if (!j_.contains(k)) fail(where_, std::string("missing field '") + k + "'");
    const Json& a = j_.at(k);
    std::vector<cplx> v;
    Json echo = Json::array();
    auto bad = [&] { fail(where_, std::string("field '") + k + "' must be an array of numbers or [re, im] pairs"); };
    if (!a.is_array() || a.empty()) bad();
    for (const Json& e : a) {
      if (e.is_number()) {
        v.emplace_back(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        v.emplace_back(e[0].get<double>(), e[1].get<double>());
      } else {
        bad();
      }
      echo.push_back(Json::array({v.back().real(), v.back().imag()}));
    }
    out_[k] = echo;
    return v;
  }

  Section child(const char* k) {
    if (!j_.contains(k)) fail(where_, std::string("missing field '") + k + "'");
    out_[k] = Json::object();
    return Section(j_.at(k), where_ + "." + k, out_[k]);
  }
  const Json& raw(const char* k) const { return j_.at(k); }
  const std::string& where() const { return where_; }
  Json& resolved() { return out_; }

 private:
  const Json& j_;
  std::string where_;
  Json& out_;
};

template <class F>
auto config_guard(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const hawkes::InvalidArgument& e) {
    fail(where, e.what());
  }
}

// ---------------------------------------------------------------------------
// Numeric settings shared by every command

struct Numerics {
  hawkes::MetricOptions metric;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  hawkes::Mesh mesh_for(double T) const { return metric.mesh_for(T); }
};

Numerics read_numerics(const Json& cfg, Json& resolved, std::optional<std::uint64_t> seed_flag) {
  Numerics n;
  Json mesh_in = cfg.contains("mesh") ? cfg.at("mesh") : Json::object();
  resolved["mesh"] = Json::object();
  Section mesh(mesh_in, "mesh", resolved["mesh"]);
  mesh.allow({"density", "min_nodes"});
  n.metric.mesh_density = mesh.number("density", 25.0);
  n.metric.min_nodes = static_cast<int>(mesh.integer("min_nodes", 150));
  if (!(n.metric.mesh_density > 0.0) || n.metric.min_nodes < 2) fail("mesh", "need density > 0 and min_nodes >= 2");

  Json inv_in = cfg.contains("inversion") ? cfg.at("inversion") : Json::object();
  resolved["inversion"] = Json::object();
  Section inv(inv_in, "inversion", resolved["inversion"]);
  inv.allow({"A", "terms", "euler_terms", "lattice_digits", "method"});
  auto& ic = n.metric.inversion;
  ic.A = inv.number("A", ic.A);
  ic.terms = static_cast<int>(inv.integer("terms", ic.terms));
  ic.euler_terms = static_cast<int>(inv.integer("euler_terms", ic.euler_terms));
  ic.lattice_digits = inv.number("lattice_digits", ic.lattice_digits);
  const std::string method = inv.string("method", "auto");
  if (method == "auto")
    ic.method = hawkes::InversionMethod::Auto;
  else if (method == "euler")
    ic.method = hawkes::InversionMethod::Euler;
  else
    fail("inversion", "method must be 'auto' or 'euler'");
  config_guard("inversion", [&] {
    ic.validate();
    return 0;
  });

  if (seed_flag) {
    n.seed = *seed_flag;
  } else if (cfg.contains("seed")) {
    if (!cfg.at("seed").is_number_unsigned()) fail("config", "field 'seed' must be a nonnegative integer");
    n.seed = cfg.at("seed").get<std::uint64_t>();
  } else {
    n.seed = 1;
  }
  resolved["seed"] = n.seed;
  return n;
}

// ---------------------------------------------------------------------------
// Output

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;  // extra '#' lines

  void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }
};

std::string render(const std::string& command, const Json& resolved, const Numerics& n, bool full, const Table& t) {
  std::ostringstream os;
  const std::string canonical = resolved.dump();
  const auto& ic = n.metric.inversion;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  os << "# hawkes " << hawkes::kVersion << "\n";
  os << "# command: " << command << "\n";
  os << "# config_hash: fnv1a64:" << hash << "\n";
  os << "# seed: " << n.seed << "\n";
  os << "# mesh: density=" << fmt(n.metric.mesh_density) << " min_nodes=" << n.metric.min_nodes << "\n";
  os << "# inversion: method=" << (ic.method == hawkes::InversionMethod::Auto ? "auto" : "euler")
     << " A=" << fmt(ic.A) << " terms=" << ic.terms << " euler_terms=" << ic.euler_terms
     << " lattice_digits=" << fmt(ic.lattice_digits) << "\n";
  os << "# full: " << (full ? "true" : "false") << "\n";
  os << "# config: " << canonical << "\n";
  for (const auto& note : t.notes) os << "# " << note << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << text;
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw std::runtime_error("write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// Shared model pieces

hawkes::HawkesModel read_model(const Json& cfg, Json& resolved) {
  if (!cfg.contains("model")) fail("config", "missing field 'model'");
  hawkes::HawkesModel m = hawkes::model_from_json(cfg.at("model"));
  resolved["model"] = hawkes::to_json(m);
  return m;
}

hawkes::ConditioningEvent read_event(Section& s, std::optional<hawkes::ConditioningEvent> def = std::nullopt) {
  if (!s.has("event") && def) {
    s.resolved()["event"] = {{"t", def->t}, {"l1", def->l1}};
    return *def;
  }
  Section e = s.child("event");
  e.allow({"t", "l1"});
  hawkes::ConditioningEvent ev{e.number("t"), e.number("l1")};
  config_guard(e.where(), [&] {
    ev.validate();
    return 0;
  });
  return ev;
}

hawkes::LiquidityDistribution read_liquidity(Section& s) {
  Section l = s.child("liquidity");
  const std::string type = l.string("type");
  if (type == "point_mass_at_zero") {
    l.allow({"type"});
    return hawkes::LiquidityDistribution::point_mass_at_zero();
  }
  if (type == "two_sided_weibull") {
    l.allow({"type", "mass_at_zero", "shape"});
    const double p0 = l.number("mass_at_zero"), k = l.number("shape");
    return config_guard(l.where(), [&] { return hawkes::LiquidityDistribution::two_sided_weibull(p0, k); });
  }
  if (type == "weibull") {
    l.allow({"type", "mass_at_zero", "negative", "positive"});
    const double p0 = l.number("mass_at_zero");
    auto side = [&](const char* name) {
      Section w = l.child(name);
      w.allow({"weight", "shape", "scale"});
      return hawkes::WeibullSide{w.number("weight"), w.number("shape"), w.number("scale", 1.0)};
    };
    auto neg = side("negative");
    auto pos = side("positive");
    return config_guard(l.where(), [&] { return hawkes::LiquidityDistribution(p0, neg, pos); });
  }
  fail(l.where(), "unknown liquidity type '" + type + "'");
}

hawkes::Sampler read_sampler(Section& s) {
  const std::string v = s.string("sampler", "thinning");
  if (v == "thinning") return hawkes::Sampler::Thinning;
  if (v == "cluster") return hawkes::Sampler::Cluster;
  fail(s.where(), "sampler must be 'thinning' or 'cluster'");
}

std::vector<double> arange(double lo, double hi, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= n; ++i) out.push_back(lo + i * step);
  return out;
}

// ---------------------------------------------------------------------------
// Commands

Table cmd_transform(const Json& cfg, Json& resolved, const Numerics& n) {
  Section s(cfg, "config", resolved);
  s.allow({"model", "mesh", "inversion", "seed", "T", "theta1", "theta2"});
  auto model = read_model(cfg, resolved);
  const double T = s.number("T");
  if (!(T > 0.0)) fail("config", "T must be > 0");
  auto t1 = s.complex_grid("theta1");
  auto t2 = s.complex_grid("theta2");
  hawkes::SolveCache cache;
  const hawkes::Mesh mesh = n.mesh_for(T);
  Table t{{"theta1_re", "theta1_im", "theta2_re", "theta2_im", "re", "im"}, {}, {}};
  for (const cplx& a : t1)
    for (const cplx& b : t2) {
      const cplx v = config_guard("theta", [&] { return hawkes::joint_laplace(model, a, b, T, mesh, &cache); });
      t.add({fmt(a.real()), fmt(a.imag()), fmt(b.real()), fmt(b.imag()), fmt(v.real()), fmt(v.imag())});
    }
  return t;
}

Table cmd_moments(const Json& cfg, Json& resolved, const Numerics& n) {
  Section s(cfg, "config", resolved);
  s.allow({"model", "mesh", "inversion", "seed", "T"});
  auto model = read_model(cfg, resolved);
  Table t{{"T", "mean_N", "var_N", "second_N", "mean_L", "var_L", "second_L"}, {}, {}};
  for (double T : s.numbers("T")) {
    if (!(T > 0.0)) fail("config", "T must be > 0");
    const auto mo = hawkes::moments(model, T, n.mesh_for(T));
    t.add({fmt(T), fmt(mo.mean_N), fmt(mo.var_N()), fmt(mo.second_N), fmt(mo.mean_L), fmt(mo.var_L()),
           fmt(mo.second_L)});
  }
  return t;
}

Table cmd_pmf(const Json& cfg, Json& resolved, const Numerics& n) {
  Section s(cfg, "config", resolved);
  s.allow({"model", "mesh", "inversion", "seed", "T", "kmax", "variable"});
  auto model = read_model(cfg, resolved);
  const double T = s.number("T");
  const long long kmax = s.integer("kmax", 10);
  const std::string var = s.string("variable", "N");
  if (!(T > 0.0)) fail("config", "T must be > 0");
  if (kmax < 0 || kmax > hawkes::kMaxPmfOrder)
    fail("config", "kmax must be in [0, " + std::to_string(hawkes::kMaxPmfOrder) + "]");
  hawkes::PmfResult r;
  Table t;
  if (var == "N") {
    r = hawkes::pmf_N(model, T, static_cast<int>(kmax), n.mesh_for(T));
    t.columns = {"k", "prob"};
    for (int k = 0; k <= r.kmax; ++k) t.add({std::to_string(k), fmt(r.probs[k])});
  } else if (var == "L") {
    const auto span = model.marks.lattice_span();
    if (!span) fail("config", "variable 'L' needs lattice marks");
    r = hawkes::pmf_L_lattice(model, T, static_cast<int>(kmax), n.mesh_for(T));
    t.columns = {"k", "volume", "prob"};
    for (int k = 0; k <= r.kmax; ++k) t.add({std::to_string(k), fmt(k * *span), fmt(r.probs[k])});
  } else {
    fail("config", "variable must be 'N' or 'L'");
  }
  t.notes.push_back("tail_mass: " + fmt(r.tail_mass));
  return t;
}

Table cmd_metric(const Json& cfg, Json& resolved, const Numerics& n) {
  Section s(cfg, "config", resolved);
  auto model = read_model(cfg, resolved);
  const std::string name = s.string("metric");
  const auto& o = n.metric;
  Table t;
  auto common = [](std::initializer_list<const char*> extra) {
    std::vector<const char*> keys{"model", "mesh", "inversion", "seed", "metric"};
    keys.insert(keys.end(), extra.begin(), extra.end());
    return keys;
  };
  auto allow = [&](std::initializer_list<const char*> extra) {
    auto keys = common(extra);
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
      if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }) == keys.end())
        fail("config", "unknown field '" + it.key() + "' for metric '" + name + "'");
  };
  auto positive = [](const std::vector<double>& v, const char* what) {
    for (double x : v)
      if (!(x > 0.0)) fail("config", std::string(what) + " values must be > 0");
  };
  auto nonneg = [](const std::vector<double>& v, const char* what) {
    for (double x : v)
      if (!(x >= 0.0)) fail("config", std::string(what) + " values must be >= 0");
  };

  if (name == "first_fill") {
    allow({"t"});
    auto ts = s.numbers("t");
    nonneg(ts, "t");
    t.columns = {"t", "value"};
    for (double x : ts) t.add({fmt(x), fmt(hawkes::time_to_first_fill_cdf(model, x))});
  } else if (name == "complete_fill_cdf" || name == "fill_rate" || name == "nonempty_complete_fill_cdf" ||
             name == "nonempty_fill_rate") {
    const bool nonempty = name.rfind("nonempty_", 0) == 0;
    if (nonempty)
      allow({"x", "t", "liquidity"});
    else
      allow({"x", "t"});
    auto xs = s.numbers("x");
    auto ts = s.numbers("t");
    positive(xs, "x");
    nonneg(ts, "t");
    std::optional<hawkes::LiquidityDistribution> Y;
    if (nonempty) Y = read_liquidity(s);
    hawkes::SolveCache cache;
    hawkes::MetricOptions mo = o;
    mo.cache = &cache;
    t.columns = {"x", "t", "value"};
    for (double x : xs) {
      std::vector<double> vals;
      if (name == "fill_rate") {
        vals = hawkes::expected_fill_rate_curve(model, x, ts, mo);
      } else {
        for (double tt : ts) {
          if (name == "complete_fill_cdf")
            vals.push_back(hawkes::time_to_complete_fill_cdf(model, x, tt, mo));
          else if (name == "nonempty_complete_fill_cdf")
            vals.push_back(hawkes::nonempty_complete_fill_cdf(model, *Y, x, tt, mo));
          else
            vals.push_back(hawkes::nonempty_expected_fill_rate(model, *Y, x, tt, mo));
        }
      }
      for (std::size_t i = 0; i < ts.size(); ++i) t.add({fmt(x), fmt(ts[i]), fmt(vals[i])});
    }
  } else if (name == "expected_complete_fill") {
    allow({"x"});
    auto xs = s.numbers("x");
    positive(xs, "x");
    hawkes::SolveCache cache;
    hawkes::MetricOptions mo = o;
    mo.cache = &cache;
    t.columns = {"x", "value"};
    for (double x : xs) t.add({fmt(x), fmt(hawkes::expected_time_to_complete_fill(model, x, mo))});
  } else if (name == "cond_prob") {
    allow({"event", "T"});
    auto ev = read_event(s);
    auto Ts = s.numbers("T");
    nonneg(Ts, "T");
    t.columns = {"T", "p_none", "p_one", "p_at_least_one"};
    for (double T : Ts) {
      const double p0 = hawkes::cond_prob_k_fills(model, ev, T, 0, o);
      const double p1 = hawkes::cond_prob_k_fills(model, ev, T, 1, o);
      t.add({fmt(T), fmt(p0), fmt(p1), fmt(1.0 - p0)});
    }
  } else if (name == "cond_fill_size") {
    allow({"event", "T", "x"});
    auto ev = read_event(s);
    auto Ts = s.numbers("T");
    const double x = s.number("x");
    nonneg(Ts, "T");
    if (!(x > ev.l1)) fail("config", "x must exceed event.l1");
    t.columns = {"T", "value"};
    auto vals = hawkes::cond_expected_fill_size_curve(model, ev, Ts, x, o);
    for (std::size_t i = 0; i < Ts.size(); ++i) t.add({fmt(Ts[i]), fmt(vals[i])});
  } else if (name == "nonempty_first_fill") {
    allow({"t", "liquidity"});
    auto ts = s.numbers("t");
    nonneg(ts, "t");
    auto Y = read_liquidity(s);
    hawkes::SolveCache cache;
    hawkes::MetricOptions mo = o;
    mo.cache = &cache;
    t.columns = {"t", "p_immediate", "value"};
    for (double tt : ts) {
      auto r = hawkes::nonempty_first_fill(model, Y, tt, mo);
      t.add({fmt(tt), fmt(r.p_immediate), fmt(1.0 - r.survival)});
    }
  } else {
    fail("config", "unknown metric '" + name + "'");
  }
  return t;
}

// Path statistics understood by `simulate`.
struct Statistic {
  std::string name;
  std::function<double(const hawkes::EventRecord&)> fn;
};

std::vector<Statistic> read_statistics(Section& s, double T, double& horizon) {
  const std::vector<std::string> def{"N", "L", "N2", "L2"};
  std::vector<std::string> names;
  if (!s.has("statistics")) {
    names = def;
  } else {
    const Json& a = s.raw("statistics");
    if (!a.is_array() || a.empty()) fail("config", "statistics must be a non-empty array of strings");
    for (const Json& e : a) {
      if (!e.is_string()) fail("config", "statistics must be a non-empty array of strings");
      names.push_back(e.get<std::string>());
    }
  }
  s.resolved()["statistics"] = names;
  horizon = T;
  std::vector<Statistic> out;
  for (const auto& nm : names) {
    if (nm == "N") {
      out.push_back({nm, [T](const hawkes::EventRecord& r) { return static_cast<double>(r.count(T)); }});
    } else if (nm == "L") {
      out.push_back({nm, [T](const hawkes::EventRecord& r) { return r.volume(T); }});
    } else if (nm == "N2") {
      out.push_back({nm, [T](const hawkes::EventRecord& r) {
                       const double c = static_cast<double>(r.count(T));
                       return c * c;
                     }});
    } else if (nm == "L2") {
      out.push_back({nm, [T](const hawkes::EventRecord& r) {
                       const double v = r.volume(T);
                       return v * v;
                     }});
    } else if (nm.rfind("P(N=", 0) == 0 && nm.back() == ')') {
      // P(N=k)
      const std::string digits = nm.substr(4, nm.size() - 5);
      std::size_t k = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
      if (ec != std::errc() || p != digits.data() + digits.size()) fail("config", "bad statistic '" + nm + "'");
      out.push_back({nm, [T, k](const hawkes::EventRecord& r) { return r.count(T) == k ? 1.0 : 0.0; }});
    } else if (nm.rfind("fill_rate:", 0) == 0) {
      // fill_rate:x
      const double x = std::strtod(nm.c_str() + 10, nullptr);
      if (!(x > 0.0)) fail("config", "bad statistic '" + nm + "'");
      out.push_back({nm, [T, x](const hawkes::EventRecord& r) { return std::min(r.volume(T), x) / x; }});
    } else {
      fail("config", "unknown statistic '" + nm + "'");
    }
  }
  return out;
}

Table cmd_simulate(const Json& cfg, Json& resolved, const Numerics& n, const std::string& paths_out) {
  Section s(cfg, "config", resolved);
  s.allow({"model", "mesh", "inversion", "seed", "T", "n", "sampler", "statistics", "dump_paths", "max_events"});
  auto model = read_model(cfg, resolved);
  const double T = s.number("T");
  if (!(T > 0.0)) fail("config", "T must be > 0");
  const long long reps = s.integer("n", 100000);
  if (reps < 100) fail("config", "n must be >= 100");
  const hawkes::Sampler sampler = read_sampler(s);
  const long long dump = s.integer("dump_paths", 10);
  if (dump < 0) fail("config", "dump_paths must be >= 0");
  const long long max_events = s.integer("max_events", 10'000'000);
  if (max_events < 1) fail("config", "max_events must be >= 1");
  double horizon = T;
  auto stats = read_statistics(s, T, horizon);

  hawkes::EstimatorOptions eo;
  eo.threads = n.threads;
  auto est = hawkes::estimate_vector(
      [&](hawkes::Rng& rng, double* out) {
        auto rec = hawkes::detail::sample_path(model, horizon, sampler, rng, static_cast<std::size_t>(max_events));
        for (std::size_t i = 0; i < stats.size(); ++i) out[i] = stats[i].fn(rec);
      },
      stats.size(), static_cast<std::size_t>(reps), n.seed, eo);

  Table t{{"statistic", "mean", "standard_error", "n", "seed"}, {}, {}};
  for (std::size_t i = 0; i < stats.size(); ++i)
    t.add({stats[i].name, fmt(est[i].mean), fmt(est[i].standard_error), std::to_string(est[i].n),
           std::to_string(est[i].seed)});

  if (!paths_out.empty()) {
    // Replications 0..dump-1 replayed from their own substreams.
    std::ostringstream os;
    os << "# hawkes " << hawkes::kVersion << " path dump, seed " << n.seed << "\n";
    os << "path,time,mark\n";
    for (long long p = 0; p < std::min(dump, reps); ++p) {
      hawkes::Rng rng = hawkes::substream(n.seed, static_cast<std::uint64_t>(p));
      auto rec = hawkes::detail::sample_path(model, horizon, sampler, rng, static_cast<std::size_t>(max_events));
      for (std::size_t i = 0; i < rec.size(); ++i) os << p << "," << fmt(rec.times[i]) << "," << fmt(rec.marks[i]) << "\n";
    }
    emit(os.str(), paths_out);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Figures

hawkes::HawkesModel figure_model() {
  return {hawkes::BaselineIntensity::constant(1.0), hawkes::ExcitingKernel::power_law(0.9, 2.0),
          hawkes::MarkDistribution::exponential(1.0)};
}

std::vector<std::pair<std::string, hawkes::MarkDistribution>> mark_series() {
  return {{"constant", hawkes::MarkDistribution::constant(1.0)},
          {"exponential", hawkes::MarkDistribution::exponential(1.0)},
          {"hyper_exponential", hawkes::MarkDistribution::hyper_exponential({1.0 / 6.0, 5.0 / 6.0}, {0.2, 5.0})}};
}

std::vector<std::pair<std::string, hawkes::HawkesModel>> family(const std::string& fig) {
  std::vector<std::pair<std::string, hawkes::HawkesModel>> out;
  const auto base = figure_model();
  if (fig == "fig2" || fig == "fig3" || fig == "fig4") {
    for (auto& [nm, m] : mark_series()) out.emplace_back(nm, base.with_marks(m));
  } else if (fig == "fig5" || fig == "fig6" || fig == "fig7") {
    for (double g : {2.0, 2.5, 3.0})
      out.emplace_back("gamma=" + fmt(g), base.with_kernel(hawkes::ExcitingKernel::power_law(0.9, g)));
  } else if (fig == "fig_mut") {
    out.emplace_back("mu=1", base);
    out.emplace_back("mu1", base.with_baseline(hawkes::BaselineIntensity::piecewise({4.0, 8.0}, {2.0, 0.5, 1.0})));
    out.emplace_back("mu2", base.with_baseline(hawkes::BaselineIntensity::piecewise({4.0, 8.0}, {0.5, 2.0, 1.0})));
  } else if (fig == "fig8") {
    out.emplace_back("fig8", base);
  }
  return out;
}

Table cmd_figure(const std::string& fig, const Json& cfg, Json& resolved, const Numerics& n, bool full) {
  const std::vector<std::string> known{"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig_mut"};
  if (std::find(known.begin(), known.end(), fig) == known.end()) fail("figure", "unknown figure '" + fig + "'");
  Section s(cfg, "config", resolved);
  s.allow({"mesh", "inversion", "seed", "grid", "x", "event", "shapes", "mass_at_zero", "mc"});

  const bool size_axis = fig == "fig2" || fig == "fig5";
  const bool window_axis = fig == "fig4" || fig == "fig7";
  std::vector<double> grid_default;
  if (size_axis)
    grid_default = full ? arange(0.25, 10.0, 0.25) : arange(1.0, 10.0, 1.0);
  else if (window_axis)
    grid_default = full ? arange(0.1, 6.0, 0.1) : arange(0.5, 6.0, 0.5);
  else if (fig == "fig_mut")
    grid_default = full ? arange(0.0, 12.0, 0.1) : arange(0.0, 12.0, 1.0);
  else
    grid_default = full ? arange(0.0, 10.0, 0.1) : arange(0.0, 10.0, 1.0);
  const auto grid = s.numbers("grid", grid_default);
  for (double g : grid)
    if (!(g >= 0.0) || (size_axis && g == 0.0)) fail("config", "grid values out of range");
  const double x = size_axis ? 0.0 : s.number("x", 10.0);
  if (!size_axis && !(x > 0.0)) fail("config", "x must be > 0");

  // MC overlay for the fill-rate and fill-time figures.
  const bool mc_able = fig == "fig2" || fig == "fig3" || fig == "fig5" || fig == "fig6" || fig == "fig_mut";
  long long mc_n = 0;
  if (mc_able) {
    Json mc_in = cfg.contains("mc") ? cfg.at("mc") : Json::object();
    resolved["mc"] = Json::object();
    Section mc(mc_in, "mc", resolved["mc"]);
    mc.allow({"n"});
    mc_n = mc.integer("n", full ? 1000000 : 100000);
    if (mc_n != 0 && mc_n < 100) fail("mc", "n must be 0 or >= 100");
  } else if (cfg.contains("mc")) {
    fail("config", "no Monte Carlo overlay for " + fig);
  }

  Table t{{"series", "abscissa", "value"}, {}, {}};
  const auto& o = n.metric;
  hawkes::EstimatorOptions eo;
  eo.threads = n.threads;
  auto add_curve = [&](const std::string& series, const std::vector<double>& vals) {
    for (std::size_t i = 0; i < grid.size(); ++i) t.add({series, fmt(grid[i]), fmt(vals[i])});
  };
  auto add_mc = [&](const std::string& series, const std::vector<hawkes::EstimatorResult>& est) {
    for (std::size_t i = 0; i < grid.size(); ++i) t.add({series + "/mc", fmt(grid[i]), fmt(est[i].mean)});
    for (std::size_t i = 0; i < grid.size(); ++i) t.add({series + "/mc_se", fmt(grid[i]), fmt(est[i].standard_error)});
  };
  std::uint64_t stream = 0;

  if (fig == "fig8") {
    const auto shapes = s.numbers("shapes", std::vector<double>{0.5, 1.0, 2.0});
    const double p0 = s.number("mass_at_zero", 0.3);
    const auto model = figure_model();
    hawkes::SolveCache cache;
    hawkes::MetricOptions mo = o;
    mo.cache = &cache;
    for (double k : shapes) {
      auto Y = config_guard("config", [&] { return hawkes::LiquidityDistribution::two_sided_weibull(p0, k); });
      std::vector<double> vals;
      for (double tt : grid) vals.push_back(hawkes::nonempty_expected_fill_rate(model, Y, x, tt, mo));
      add_curve("k=" + fmt(k), vals);
    }
    return t;
  }

  for (const auto& [series, model] : family(fig)) {
    hawkes::SolveCache cache;
    hawkes::MetricOptions mo = o;
    mo.cache = &cache;
    const std::uint64_t sub_seed = hawkes::splitmix64(n.seed + 0x9e3779b97f4a7c15ull * ++stream);
    if (size_axis) {
      std::vector<double> vals;
      for (double xx : grid) vals.push_back(hawkes::expected_time_to_complete_fill(model, xx, mo));
      add_curve(series, vals);
      if (mc_n > 0) {
        // Each path runs until its volume reaches the largest size; sigma_x
        // is read off the same path for every size on the grid.
        const double xmax = *std::max_element(grid.begin(), grid.end());
        auto est = hawkes::estimate_vector(
            [&](hawkes::Rng& rng, double* out) {
              hawkes::EventRecord rec;
              double volume = 0.0;
              hawkes::detail::thinning_extend(
                  model, rec, 0.0, 1e6, rng, [&](std::size_t) { return model.marks.sample(rng); },
                  [&](const hawkes::EventRecord& r) {
                    volume += r.marks.back();
                    return volume >= xmax;
                  });
              if (volume < xmax) throw hawkes::NumericalError("figure MC: order not filled by t = 1e6");
              for (std::size_t i = 0; i < grid.size(); ++i) out[i] = rec.first_passage(grid[i]);
            },
            grid.size(), static_cast<std::size_t>(mc_n), sub_seed, eo);
        add_mc(series, est);
      }
    } else if (window_axis) {
      const auto ev = read_event(s, hawkes::ConditioningEvent{2.0, 1.0});
      std::vector<double> one;
      for (double T : grid) one.push_back(hawkes::cond_prob_k_fills(model, ev, T, 1, mo));
      for (std::size_t i = 0; i < grid.size(); ++i) t.add({"one_fill:" + series, fmt(grid[i]), fmt(one[i])});
      auto size = hawkes::cond_expected_fill_size_curve(model, ev, grid, x, mo);
      for (std::size_t i = 0; i < grid.size(); ++i) t.add({"fill_size:" + series, fmt(grid[i]), fmt(size[i])});
    } else {
      add_curve(series, hawkes::expected_fill_rate_curve(model, x, grid, mo));
      if (mc_n > 0) {
        const double tmax = std::max(*std::max_element(grid.begin(), grid.end()), 1e-9);
        auto est = hawkes::estimate_vector(
            [&](hawkes::Rng& rng, double* out) {
              auto rec = hawkes::simulate_thinning(model, tmax, rng);
              for (std::size_t i = 0; i < grid.size(); ++i) out[i] = std::min(rec.volume(grid[i]), x) / x;
            },
            grid.size(), static_cast<std::size_t>(mc_n), sub_seed, eo);
        add_mc(series, est);
      }
    }
  }
  return t;
}

Json load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  Json j = hawkes::parse_json_text(ss.str());
  if (!j.is_object()) fail("config", "top level must be an object");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transforms, distributions and dark-pool metrics of marked Hawkes processes"};
  app.set_version_flag("--version", std::string(hawkes::kVersion));
  app.require_subcommand(1);

  std::string config_path, out_path, paths_path, figure_name;
  std::uint64_t seed_value = 0;
  bool full = false;
  unsigned threads = 0;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"transform", "joint Laplace transform over a theta grid"},
      {"moments", "first and second moments of N_T and L_T"},
      {"pmf", "exact PMF of N_T (or L_T for lattice marks)"},
      {"metric", "dark-pool execution metrics"},
      {"simulate", "Monte Carlo estimates from simulated paths"},
      {"figure", "curve family behind a named figure"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    const bool is_figure = std::string(name) == "figure";
    if (is_figure) sub->add_option("name", figure_name, "fig2 ... fig8 or fig_mut")->required();
    auto* c = sub->add_option("--config", config_path, "JSON config");
    if (!is_figure) c->required();
    sub->add_option("--out", out_path, "output CSV (stdout if omitted)");
    sub->add_option("--seed", seed_value, "RNG seed (overrides the config)");
    sub->add_flag("--full", full, "dense plotting grids and larger MC runs");
    sub->add_option("--threads", threads, "worker threads for Monte Carlo (0: all cores)");
    if (std::string(name) == "simulate") sub->add_option("--paths", paths_path, "also dump sample paths here");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  std::optional<std::uint64_t> seed;
  if (sub->count("--seed")) seed = seed_value;
  try {
    const Json cfg = config_path.empty() ? Json::object() : load_config(config_path);
    Json resolved = Json::object();
    Numerics n = read_numerics(cfg, resolved, seed);
    n.threads = threads;
    Table table;
    std::string label = command;
    if (command == "transform")
      table = cmd_transform(cfg, resolved, n);
    else if (command == "moments")
      table = cmd_moments(cfg, resolved, n);
    else if (command == "pmf")
      table = cmd_pmf(cfg, resolved, n);
    else if (command == "metric")
      table = cmd_metric(cfg, resolved, n);
    else if (command == "simulate")
      table = cmd_simulate(cfg, resolved, n, paths_path);
    else {
      label += " " + figure_name;
      table = cmd_figure(figure_name, cfg, resolved, n, full);
    }
    emit(render(label, resolved, n, full, table), out_path);
  } catch (const hawkes::ConfigError& e) {
    std::cerr << "hawkes: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hawkes::InvalidArgument& e) {
    std::cerr << "hawkes: invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hawkes::ExplosionError& e) {
    std::cerr << "hawkes: explosion: " << e.what() << "\n";
    return kExitExplosion;
  } catch (const hawkes::NumericalError& e) {
    std::cerr << "hawkes: numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "hawkes: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
