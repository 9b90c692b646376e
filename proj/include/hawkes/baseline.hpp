#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "hawkes/errors.hpp"
#include "hawkes/kernel.hpp"

namespace hawkes {

class BaselineIntensity;

struct ConstantBaseline {
  double mu = 0.0;
};

// levels[0] on [0, b_1), levels[k] on [b_k, b_{k+1}), levels.back() on [b_m, inf).
// Right-continuous at every breakpoint.
struct PiecewiseConstantBaseline {
  std::vector<double> breakpoints;
  std::vector<double> levels;
};

// base(t) + shift_mass * h(t): the intensity left behind by a fill of size
// shift_mass at time zero.
struct AugmentedBaseline {
  std::shared_ptr<const BaselineIntensity> base;
  double shift_mass = 0.0;
  ExcitingKernel kernel;
};

// Which one-sided value to report at a jump of a piecewise baseline.
enum class Side { Left, Right };

/// Deterministic baseline intensity mu(t) >= 0.
class BaselineIntensity {
 public:
  using Variant = std::variant<ConstantBaseline, PiecewiseConstantBaseline, AugmentedBaseline>;

  BaselineIntensity() : BaselineIntensity(ConstantBaseline{1.0}) {}
  explicit BaselineIntensity(Variant v) : v_(std::move(v)) { validate(); }

  static BaselineIntensity constant(double mu) { return BaselineIntensity(ConstantBaseline{mu}); }
  static BaselineIntensity piecewise(std::vector<double> breakpoints, std::vector<double> levels) {
    return BaselineIntensity(PiecewiseConstantBaseline{std::move(breakpoints), std::move(levels)});
  }
  static BaselineIntensity augmented(BaselineIntensity base, double shift_mass, ExcitingKernel kernel) {
    return BaselineIntensity(AugmentedBaseline{std::make_shared<const BaselineIntensity>(std::move(base)),
                                               shift_mass, std::move(kernel)});
  }
  // mu + (lambda0 - mu) e^{-kappa t}, the baseline carried by an exponential
  // kernel delta e^{-kappa t} started from intensity lambda0.
  static BaselineIntensity exponential_decay(double mu, double lambda0, double delta, double kappa) {
    detail::require(delta > 0.0, "exponential_decay: delta must be > 0");
    return augmented(constant(mu), (lambda0 - mu) / delta, ExcitingKernel::exponential(delta, kappa));
  }

  const Variant& variant() const noexcept { return v_; }

  double operator()(double t) const {
    detail::require(t >= 0.0, "baseline evaluated at negative time");
    return value(t, Side::Right);
  }

  // One-sided value; only piecewise baselines distinguish the sides.
  double value(double t, Side side) const {
    return std::visit(
        [&](const auto& b) -> double {
          using B = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<B, ConstantBaseline>) {
            return b.mu;
          } else if constexpr (std::is_same_v<B, PiecewiseConstantBaseline>) {
            const auto& bp = b.breakpoints;
            auto it = side == Side::Right ? std::upper_bound(bp.begin(), bp.end(), t)
                                          : std::lower_bound(bp.begin(), bp.end(), t);
            return b.levels[static_cast<std::size_t>(it - bp.begin())];
          } else {
            return b.base->value(t, side) + b.shift_mass * b.kernel.eval_unchecked(std::max(t, 0.0));
          }
        },
        v_);
  }

  // Exact integral of mu over [a, b].
  double integral(double a, double b) const {
    detail::require(b >= a && a >= 0.0, "baseline integral needs 0 <= a <= b");
    return cumulative(b) - cumulative(a);
  }

  double cumulative(double t) const {
    return std::visit(
        [t](const auto& b) -> double {
          using B = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<B, ConstantBaseline>) {
            return b.mu * t;
          } else if constexpr (std::is_same_v<B, PiecewiseConstantBaseline>) {
            double total = 0.0, prev = 0.0;
            for (std::size_t i = 0; i < b.breakpoints.size(); ++i) {
              double edge = b.breakpoints[i];
              if (t <= edge) return total + b.levels[i] * (t - prev);
              total += b.levels[i] * (edge - prev);
              prev = edge;
            }
            return total + b.levels.back() * (t - prev);
          } else {
            return b.base->cumulative(t) + b.shift_mass * b.kernel.integral(t);
          }
        },
        v_);
  }

  double sup_on(double a, double b) const {
    return std::visit(
        [&](const auto& x) -> double {
          using B = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<B, ConstantBaseline>) {
            return x.mu;
          } else if constexpr (std::is_same_v<B, PiecewiseConstantBaseline>) {
            double m = value(a, Side::Right);
            for (std::size_t i = 0; i < x.breakpoints.size(); ++i)
              if (x.breakpoints[i] > a && x.breakpoints[i] <= b) m = std::max(m, x.levels[i + 1]);
            return m;
          } else {
            return x.base->sup_on(a, b) + x.shift_mass * x.kernel.sup_on(a, b);
          }
        },
        v_);
  }

  // Jump locations of mu (empty for continuous baselines).
  std::vector<double> breakpoints() const {
    if (const auto* p = std::get_if<PiecewiseConstantBaseline>(&v_)) return p->breakpoints;
    if (const auto* a = std::get_if<AugmentedBaseline>(&v_)) return a->base->breakpoints();
    return {};
  }

  std::optional<double> constant_value() const {
    if (const auto* c = std::get_if<ConstantBaseline>(&v_)) return c->mu;
    if (const auto* p = std::get_if<PiecewiseConstantBaseline>(&v_)) {
      if (std::all_of(p->levels.begin(), p->levels.end(), [&](double l) { return l == p->levels.front(); }))
        return p->levels.front();
      return std::nullopt;
    }
    const auto& a = std::get<AugmentedBaseline>(v_);
    if (a.shift_mass == 0.0 || a.kernel.is_zero()) return a.base->constant_value();
    return std::nullopt;
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& b) {
          using B = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<B, ConstantBaseline>) {
            detail::require(b.mu >= 0.0 && std::isfinite(b.mu), "constant baseline: mu must be finite and >= 0");
          } else if constexpr (std::is_same_v<B, PiecewiseConstantBaseline>) {
            detail::require(b.levels.size() == b.breakpoints.size() + 1,
                            "piecewise baseline: need one more level than breakpoints");
            for (std::size_t i = 0; i < b.breakpoints.size(); ++i) {
              detail::require(b.breakpoints[i] > 0.0, "piecewise baseline: breakpoints must be > 0");
              if (i > 0)
                detail::require(b.breakpoints[i] > b.breakpoints[i - 1],
                                "piecewise baseline: breakpoints must be ascending");
            }
            for (double l : b.levels)
              detail::require(l >= 0.0 && std::isfinite(l), "piecewise baseline: levels must be finite and >= 0");
          } else {
            detail::require(b.base != nullptr, "augmented baseline: missing base");
            detail::require(b.shift_mass >= 0.0 && std::isfinite(b.shift_mass),
                            "augmented baseline: shift mass must be >= 0");
          }
        },
        v_);
  }

  Variant v_;
};

}  // namespace hawkes
