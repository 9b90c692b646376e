#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hawkes/errors.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

// h(t) = delta * exp(-kappa t)
struct ExponentialKernel {
  double delta = 0.0;
  double kappa = 1.0;
};

// h(t) = C / (1 + t)^gamma
struct PowerLawKernel {
  double C = 0.0;
  double gamma = 2.0;
};

// Piecewise linear through (grid[i], values[i]); zero beyond grid.back().
struct TabulatedKernel {
  std::vector<double> grid;
  std::vector<double> values;
};

/// The exciting function of the intensity. Immutable after construction.
///
/// A degenerate kernel (delta = 0, C = 0 or all-zero table) is accepted and
/// reported by is_zero(); solvers short-circuit it to the Poisson case.
class ExcitingKernel {
 public:
  using Variant = std::variant<ExponentialKernel, PowerLawKernel, TabulatedKernel>;

  ExcitingKernel() : ExcitingKernel(PowerLawKernel{0.0, 2.0}) {}
  explicit ExcitingKernel(Variant v) : v_(std::move(v)) { validate(); }

  static ExcitingKernel exponential(double delta, double kappa) {
    return ExcitingKernel(ExponentialKernel{delta, kappa});
  }
  static ExcitingKernel power_law(double C, double gamma) { return ExcitingKernel(PowerLawKernel{C, gamma}); }
  static ExcitingKernel tabulated(std::vector<double> grid, std::vector<double> values) {
    return ExcitingKernel(TabulatedKernel{std::move(grid), std::move(values)});
  }
  static ExcitingKernel zero() { return ExcitingKernel(); }

  const Variant& variant() const noexcept { return v_; }

  double operator()(double t) const {
    detail::require(t >= 0.0, "kernel evaluated at negative time");
    return eval_unchecked(t);
  }

  double eval_unchecked(double t) const {
    return std::visit(
        [t](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, ExponentialKernel>) {
            return k.delta * std::exp(-k.kappa * t);
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            return k.C * std::pow(1.0 + t, -k.gamma);
          } else {
            const auto& g = k.grid;
            if (t > g.back()) return 0.0;
            auto it = std::upper_bound(g.begin(), g.end(), t);
            if (it == g.end()) return k.values.back();
            std::size_t i = static_cast<std::size_t>(it - g.begin()) - 1;
            double w = (t - g[i]) / (g[i + 1] - g[i]);
            return (1.0 - w) * k.values[i] + w * k.values[i + 1];
          }
        },
        v_);
  }

  // H(t) = integral of h over [0, t], exact for every variant.
  double integral(double t) const {
    detail::require(t >= 0.0, "kernel integral over negative interval");
    return std::visit(
        [t](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, ExponentialKernel>) {
            return k.delta / k.kappa * -std::expm1(-k.kappa * t);
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            return k.C / (k.gamma - 1.0) * -std::expm1((1.0 - k.gamma) * std::log1p(t));
          } else {
            const auto& g = k.grid;
            const auto& v = k.values;
            double total = 0.0;
            for (std::size_t i = 0; i + 1 < g.size(); ++i) {
              if (t <= g[i]) break;
              double hi = std::min(t, g[i + 1]);
              double w = (hi - g[i]) / (g[i + 1] - g[i]);
              double vhi = (1.0 - w) * v[i] + w * v[i + 1];
              total += 0.5 * (hi - g[i]) * (v[i] + vhi);
            }
            return total;
          }
        },
        v_);
  }

  double l1_norm() const {
    if (const auto* k = std::get_if<TabulatedKernel>(&v_)) {
      if (k->values.back() > 0.0)
        throw NormUndefined("tabulated kernel does not decay to zero at the end of its grid");
      return integral(k->grid.back());
    }
    if (const auto* k = std::get_if<ExponentialKernel>(&v_)) return k->delta / k->kappa;
    const auto& k = std::get<PowerLawKernel>(v_);
    return k.C / (k.gamma - 1.0);
  }

  bool is_zero() const {
    return std::visit(
        [](const auto& k) -> bool {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, ExponentialKernel>) {
            return k.delta == 0.0;
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            return k.C == 0.0;
          } else {
            return std::all_of(k.values.begin(), k.values.end(), [](double x) { return x == 0.0; });
          }
        },
        v_);
  }

  // Nonincreasing on [0, inf); thinning bounds rely on it.
  bool is_monotone() const {
    if (const auto* k = std::get_if<TabulatedKernel>(&v_)) {
      for (std::size_t i = 0; i + 1 < k->values.size(); ++i)
        if (k->values[i + 1] > k->values[i]) return false;
    }
    return true;
  }

  double sup_on(double a, double b) const {
    if (is_monotone()) return eval_unchecked(std::max(a, 0.0));
    double m = std::max(eval_unchecked(std::max(a, 0.0)), eval_unchecked(b));
    if (const auto* k = std::get_if<TabulatedKernel>(&v_))
      for (std::size_t i = 0; i < k->grid.size(); ++i)
        if (k->grid[i] >= a && k->grid[i] <= b) m = std::max(m, k->values[i]);
    return m;
  }

  // Draws an offset from the density h / ||h||_1.
  double sample_offset(Rng& rng) const {
    const double u = uniform_open(rng);
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, ExponentialKernel>) {
            return -std::log(u) / k.kappa;
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            // CDF 1 - (1+t)^(1-gamma), inverted with u standing in for 1 - U.
            return std::expm1(std::log(u) / (1.0 - k.gamma));
          } else {
            return invert_tabulated(k, u * l1_norm());
          }
        },
        v_);
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, ExponentialKernel>) {
            detail::require(k.delta >= 0.0 && std::isfinite(k.delta), "exponential kernel: delta must be >= 0");
            detail::require(k.kappa > 0.0 && std::isfinite(k.kappa), "exponential kernel: kappa must be > 0");
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            detail::require(k.C >= 0.0 && std::isfinite(k.C), "power-law kernel: C must be >= 0");
            detail::require(k.gamma > 1.0 && std::isfinite(k.gamma), "power-law kernel: gamma must be > 1");
          } else {
            detail::require(k.grid.size() >= 2 && k.grid.size() == k.values.size(),
                            "tabulated kernel: need >= 2 points and matching sizes");
            detail::require(k.grid.front() == 0.0, "tabulated kernel: grid must start at 0");
            for (std::size_t i = 0; i + 1 < k.grid.size(); ++i)
              detail::require(k.grid[i + 1] > k.grid[i], "tabulated kernel: grid must be strictly ascending");
            for (double v : k.values)
              detail::require(v >= 0.0 && std::isfinite(v), "tabulated kernel: values must be finite and >= 0");
          }
        },
        v_);
  }

  // Smallest t with H(t) = target, by bisection inside the bracketing panel.
  double invert_tabulated(const TabulatedKernel& k, double target) const {
    double lo = 0.0, hi = k.grid.back();
    for (std::size_t i = 0; i + 1 < k.grid.size(); ++i) {
      if (integral(k.grid[i + 1]) >= target) {
        lo = k.grid[i];
        hi = k.grid[i + 1];
        break;
      }
    }
    for (int it = 0; it < 100 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
      double mid = 0.5 * (lo + hi);
      (integral(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  Variant v_;
};

}  // namespace hawkes
