#pragma once

#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <variant>
#include <vector>

#include "hawkes/errors.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

using cplx = std::complex<double>;

struct ConstantMarks {
  double a = 1.0;
};

struct ExponentialMarks {
  double mean = 1.0;
};

// Mixture of exponentials: weight c_i on rate lambda_i (mean 1/lambda_i).
struct HyperExponentialMarks {
  std::vector<double> weights;
  std::vector<double> rates;
};

// P(l = k delta) = probs[k-1] for k >= 1.
struct LatticeMarks {
  double delta = 1.0;
  std::vector<double> probs;
};

/// Law of the i.i.d. marks (trade sizes). Support is (0, inf) for every variant.
class MarkDistribution {
 public:
  using Variant = std::variant<ConstantMarks, ExponentialMarks, HyperExponentialMarks, LatticeMarks>;

  MarkDistribution() : MarkDistribution(ConstantMarks{1.0}) {}
  explicit MarkDistribution(Variant v) : v_(std::move(v)) { validate(); }

  static MarkDistribution constant(double a) { return MarkDistribution(ConstantMarks{a}); }
  static MarkDistribution exponential(double mean) { return MarkDistribution(ExponentialMarks{mean}); }
  static MarkDistribution hyper_exponential(std::vector<double> weights, std::vector<double> rates) {
    return MarkDistribution(HyperExponentialMarks{std::move(weights), std::move(rates)});
  }
  static MarkDistribution lattice(double delta, std::vector<double> probs) {
    return MarkDistribution(LatticeMarks{delta, std::move(probs)});
  }

  const Variant& variant() const noexcept { return v_; }

  // E[exp(omega l)] on the closed left half-plane.
  cplx mgf(cplx omega) const {
    detail::require(omega.real() <= 0.0, "mark mgf: Re(omega) must be <= 0");
    return moment_exp(0, omega);
  }

  // E[l^m exp(omega l)], the m-th derivative of the mgf. No domain check; the
  // solvers only call it with Re(omega) <= 0 up to roundoff.
  cplx moment_exp(int m, cplx omega) const {
    return std::visit(
        [&](const auto& d) -> cplx {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, ConstantMarks>) {
            return std::pow(d.a, m) * std::exp(d.a * omega);
          } else if constexpr (std::is_same_v<D, ExponentialMarks>) {
            return exponential_term(1.0 / d.mean, m, omega);
          } else if constexpr (std::is_same_v<D, HyperExponentialMarks>) {
            cplx s = 0.0;
            for (std::size_t i = 0; i < d.rates.size(); ++i) s += d.weights[i] * exponential_term(d.rates[i], m, omega);
            return s;
          } else {
            cplx s = 0.0;
            double remaining = 1.0;
            for (std::size_t k = 0; k < d.probs.size() && remaining > 1e-14; ++k) {
              const double size = static_cast<double>(k + 1) * d.delta;
              s += d.probs[k] * std::pow(size, m) * std::exp(size * omega);
              remaining -= d.probs[k];
            }
            return s;
          }
        },
        v_);
  }

  double mean() const {
    return std::visit(
        [](const auto& d) -> double {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, ConstantMarks>) {
            return d.a;
          } else if constexpr (std::is_same_v<D, ExponentialMarks>) {
            return d.mean;
          } else if constexpr (std::is_same_v<D, HyperExponentialMarks>) {
            double m = 0.0;
            for (std::size_t i = 0; i < d.rates.size(); ++i) m += d.weights[i] / d.rates[i];
            return m;
          } else {
            double m = 0.0;
            for (std::size_t k = 0; k < d.probs.size(); ++k) m += d.probs[k] * (k + 1.0) * d.delta;
            return m;
          }
        },
        v_);
  }

  double second_moment() const {
    return std::visit(
        [](const auto& d) -> double {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, ConstantMarks>) {
            return d.a * d.a;
          } else if constexpr (std::is_same_v<D, ExponentialMarks>) {
            return 2.0 * d.mean * d.mean;
          } else if constexpr (std::is_same_v<D, HyperExponentialMarks>) {
            double m = 0.0;
            for (std::size_t i = 0; i < d.rates.size(); ++i) m += 2.0 * d.weights[i] / (d.rates[i] * d.rates[i]);
            return m;
          } else {
            double m = 0.0;
            for (std::size_t k = 0; k < d.probs.size(); ++k) {
              double s = (k + 1.0) * d.delta;
              m += d.probs[k] * s * s;
            }
            return m;
          }
        },
        v_);
  }

  double sample(Rng& rng) const {
    return std::visit(
        [&](const auto& d) -> double {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, ConstantMarks>) {
            return d.a;
          } else if constexpr (std::is_same_v<D, ExponentialMarks>) {
            return d.mean * -std::log(uniform_open(rng));
          } else if constexpr (std::is_same_v<D, HyperExponentialMarks>) {
            double u = uniform_open(rng), acc = 0.0;
            std::size_t i = 0;
            for (; i + 1 < d.weights.size(); ++i) {
              acc += d.weights[i];
              if (u <= acc) break;
            }
            return -std::log(uniform_open(rng)) / d.rates[i];
          } else {
            double u = uniform_open(rng), acc = 0.0;
            std::size_t k = 0;
            for (; k + 1 < d.probs.size(); ++k) {
              acc += d.probs[k];
              if (u <= acc) break;
            }
            return (k + 1.0) * d.delta;
          }
        },
        v_);
  }

  // Span delta when the marks live on {delta, 2 delta, ...}.
  std::optional<double> lattice_span() const {
    if (const auto* c = std::get_if<ConstantMarks>(&v_)) return c->a;
    if (const auto* l = std::get_if<LatticeMarks>(&v_)) return l->delta;
    return std::nullopt;
  }

  // Lattice probabilities p_1, p_2, ... (a constant mark a is the lattice {a} with p_1 = 1).
  std::vector<double> lattice_probs() const {
    if (std::holds_alternative<ConstantMarks>(v_)) return {1.0};
    if (const auto* l = std::get_if<LatticeMarks>(&v_)) return l->probs;
    throw InvalidArgument("marks are not lattice distributed");
  }

 private:
  // lambda m! / (lambda - omega)^{m+1}
  static cplx exponential_term(double rate, int m, cplx omega) {
    cplx r = rate / (rate - omega);
    cplx term = r;
    for (int j = 1; j <= m; ++j) term *= static_cast<double>(j) / (rate - omega);
    return term;
  }

  void validate() const {
    std::visit(
        [](const auto& d) {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, ConstantMarks>) {
            detail::require(d.a > 0.0 && std::isfinite(d.a), "constant marks: a must be > 0");
          } else if constexpr (std::is_same_v<D, ExponentialMarks>) {
            detail::require(d.mean > 0.0 && std::isfinite(d.mean), "exponential marks: mean must be > 0");
          } else if constexpr (std::is_same_v<D, HyperExponentialMarks>) {
            detail::require(!d.weights.empty() && d.weights.size() == d.rates.size(),
                            "hyper-exponential marks: weights and rates must be non-empty and match");
            for (std::size_t i = 0; i < d.weights.size(); ++i) {
              detail::require(d.weights[i] > 0.0 && d.weights[i] <= 1.0, "hyper-exponential marks: weight outside (0,1]");
              detail::require(d.rates[i] > 0.0 && std::isfinite(d.rates[i]), "hyper-exponential marks: rates must be > 0");
            }
            double total = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
            detail::require(std::abs(total - 1.0) < 1e-12, "hyper-exponential marks: weights must sum to 1");
          } else {
            detail::require(d.delta > 0.0 && std::isfinite(d.delta), "lattice marks: delta must be > 0");
            detail::require(!d.probs.empty(), "lattice marks: need at least one probability");
            for (double p : d.probs) detail::require(p >= 0.0 && p <= 1.0, "lattice marks: probability outside [0,1]");
            double total = std::accumulate(d.probs.begin(), d.probs.end(), 0.0);
            detail::require(std::abs(total - 1.0) < 1e-12, "lattice marks: probabilities must sum to 1");
          }
        },
        v_);
  }

  Variant v_;
};

}  // namespace hawkes
