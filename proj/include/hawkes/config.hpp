#pragma once

#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "hawkes/errors.hpp"
#include "hawkes/model.hpp"

namespace hawkes {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void config_fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

inline void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_fail(where, "expected an object");
  std::set<std::string> ok;
  for (const char* k : allowed) ok.insert(k);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) config_fail(where, "unknown field '" + it.key() + "'");
}

inline double get_number(const Json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) config_fail(where, std::string("missing field '") + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) config_fail(where, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline std::vector<double> get_numbers(const Json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) config_fail(where, std::string("missing field '") + key + "'");
  const Json& v = j.at(key);
  if (!v.is_array()) config_fail(where, std::string("field '") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number()) config_fail(where, std::string("field '") + key + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::string get_type(const Json& j, const std::string& where) {
  if (!j.is_object()) config_fail(where, "expected an object");
  if (!j.contains("type") || !j.at("type").is_string()) config_fail(where, "missing string field 'type'");
  return j.at("type").get<std::string>();
}

// Runs a constructor and reports domain failures as config errors.
template <class F>
auto build(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    config_fail(where, e.what());
  }
}

}  // namespace detail

inline ExcitingKernel kernel_from_json(const Json& j, const std::string& where = "kernel") {
  const std::string type = detail::get_type(j, where);
  if (type == "exponential") {
    detail::check_keys(j, where, {"type", "delta", "kappa"});
    const double d = detail::get_number(j, where, "delta"), k = detail::get_number(j, where, "kappa");
    return detail::build(where, [&] { return ExcitingKernel::exponential(d, k); });
  }
  if (type == "power_law") {
    detail::check_keys(j, where, {"type", "C", "gamma"});
    const double c = detail::get_number(j, where, "C"), g = detail::get_number(j, where, "gamma");
    return detail::build(where, [&] { return ExcitingKernel::power_law(c, g); });
  }
  if (type == "tabulated") {
    detail::check_keys(j, where, {"type", "grid", "values"});
    auto g = detail::get_numbers(j, where, "grid");
    auto v = detail::get_numbers(j, where, "values");
    return detail::build(where, [&] { return ExcitingKernel::tabulated(g, v); });
  }
  detail::config_fail(where, "unknown kernel type '" + type + "'");
}

inline BaselineIntensity baseline_from_json(const Json& j, const std::string& where = "baseline") {
  const std::string type = detail::get_type(j, where);
  if (type == "constant") {
    detail::check_keys(j, where, {"type", "mu"});
    const double mu = detail::get_number(j, where, "mu");
    return detail::build(where, [&] { return BaselineIntensity::constant(mu); });
  }
  if (type == "piecewise_constant") {
    detail::check_keys(j, where, {"type", "breakpoints", "levels"});
    auto b = detail::get_numbers(j, where, "breakpoints");
    auto l = detail::get_numbers(j, where, "levels");
    return detail::build(where, [&] { return BaselineIntensity::piecewise(b, l); });
  }
  if (type == "augmented") {
    detail::check_keys(j, where, {"type", "base", "shift_mass", "kernel"});
    if (!j.contains("base")) detail::config_fail(where, "missing field 'base'");
    if (!j.contains("kernel")) detail::config_fail(where, "missing field 'kernel'");
    BaselineIntensity base = baseline_from_json(j.at("base"), where + ".base");
    ExcitingKernel k = kernel_from_json(j.at("kernel"), where + ".kernel");
    const double l0 = detail::get_number(j, where, "shift_mass");
    return detail::build(where, [&] { return BaselineIntensity::augmented(base, l0, k); });
  }
  detail::config_fail(where, "unknown baseline type '" + type + "'");
}

inline MarkDistribution marks_from_json(const Json& j, const std::string& where = "marks") {
  const std::string type = detail::get_type(j, where);
  if (type == "constant") {
    detail::check_keys(j, where, {"type", "a"});
    const double a = detail::get_number(j, where, "a");
    return detail::build(where, [&] { return MarkDistribution::constant(a); });
  }
  if (type == "exponential") {
    detail::check_keys(j, where, {"type", "mean"});
    const double m = detail::get_number(j, where, "mean");
    return detail::build(where, [&] { return MarkDistribution::exponential(m); });
  }
  if (type == "hyper_exponential") {
    detail::check_keys(j, where, {"type", "weights", "rates"});
    auto w = detail::get_numbers(j, where, "weights");
    auto r = detail::get_numbers(j, where, "rates");
    return detail::build(where, [&] { return MarkDistribution::hyper_exponential(w, r); });
  }
  if (type == "lattice") {
    detail::check_keys(j, where, {"type", "delta", "probs"});
    const double d = detail::get_number(j, where, "delta");
    auto p = detail::get_numbers(j, where, "probs");
    return detail::build(where, [&] { return MarkDistribution::lattice(d, p); });
  }
  detail::config_fail(where, "unknown marks type '" + type + "'");
}

/// {"baseline": {...}, "kernel": {...}, "marks": {...}}
inline HawkesModel model_from_json(const Json& j, const std::string& where = "model") {
  detail::check_keys(j, where, {"baseline", "kernel", "marks"});
  for (const char* k : {"baseline", "kernel", "marks"})
    if (!j.contains(k)) detail::config_fail(where, std::string("missing field '") + k + "'");
  return {baseline_from_json(j.at("baseline"), where + ".baseline"), kernel_from_json(j.at("kernel"), where + ".kernel"),
          marks_from_json(j.at("marks"), where + ".marks")};
}

inline Json parse_json_text(const std::string& text, const std::string& where = "config") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    detail::config_fail(where, std::string("invalid JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Serialization back to the same schema

inline Json to_json(const ExcitingKernel& k) {
  return std::visit(
      [](const auto& v) -> Json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, ExponentialKernel>)
          return {{"type", "exponential"}, {"delta", v.delta}, {"kappa", v.kappa}};
        else if constexpr (std::is_same_v<V, PowerLawKernel>)
          return {{"type", "power_law"}, {"C", v.C}, {"gamma", v.gamma}};
        else
          return {{"type", "tabulated"}, {"grid", v.grid}, {"values", v.values}};
      },
      k.variant());
}

inline Json to_json(const BaselineIntensity& b) {
  return std::visit(
      [](const auto& v) -> Json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, ConstantBaseline>)
          return {{"type", "constant"}, {"mu", v.mu}};
        else if constexpr (std::is_same_v<V, PiecewiseConstantBaseline>)
          return {{"type", "piecewise_constant"}, {"breakpoints", v.breakpoints}, {"levels", v.levels}};
        else
          return {{"type", "augmented"}, {"base", to_json(*v.base)}, {"shift_mass", v.shift_mass},
                  {"kernel", to_json(v.kernel)}};
      },
      b.variant());
}

inline Json to_json(const MarkDistribution& m) {
  return std::visit(
      [](const auto& v) -> Json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, ConstantMarks>)
          return {{"type", "constant"}, {"a", v.a}};
        else if constexpr (std::is_same_v<V, ExponentialMarks>)
          return {{"type", "exponential"}, {"mean", v.mean}};
        else if constexpr (std::is_same_v<V, HyperExponentialMarks>)
          return {{"type", "hyper_exponential"}, {"weights", v.weights}, {"rates", v.rates}};
        else
          return {{"type", "lattice"}, {"delta", v.delta}, {"probs", v.probs}};
      },
      m.variant());
}

inline Json to_json(const HawkesModel& m) {
  return {{"baseline", to_json(m.baseline)}, {"kernel", to_json(m.kernel)}, {"marks", to_json(m.marks)}};
}

}  // namespace hawkes
