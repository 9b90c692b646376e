#pragma once

#include <bit>
#include <cstdint>

#include "hawkes/baseline.hpp"
#include "hawkes/kernel.hpp"
#include "hawkes/marks.hpp"

namespace hawkes {

/// The triple (mu, h, law of l) that fixes the law of (N, L):
/// lambda_t = mu(t) + sum_{tau_i < t} h(t - tau_i) l_i.
struct HawkesModel {
  BaselineIntensity baseline;
  ExcitingKernel kernel;
  MarkDistribution marks;

  // Expected direct offspring per event.
  double branching_ratio() const { return kernel.l1_norm() * marks.mean(); }

  HawkesModel with_baseline(BaselineIntensity b) const { return {std::move(b), kernel, marks}; }
  HawkesModel with_marks(MarkDistribution m) const { return {baseline, kernel, std::move(m)}; }
  HawkesModel with_kernel(ExcitingKernel k) const { return {baseline, std::move(k), marks}; }
};

namespace detail {

class Fingerprint {
 public:
  void add(double x) { mix(std::bit_cast<std::uint64_t>(x)); }
  void add(std::uint64_t x) { mix(x); }
  void add(const std::vector<double>& v) {
    add(static_cast<std::uint64_t>(v.size()));
    for (double x : v) add(x);
  }
  std::uint64_t value() const { return h_; }

 private:
  void mix(std::uint64_t x) { h_ = splitmix64(h_ ^ (x + 0x9e3779b97f4a7c15ULL + (h_ << 6) + (h_ >> 2))); }
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace detail

// Identifies (kernel, marks): the only inputs of the transform fixed-point
// equations. Baselines enter only the outer integrals.
inline std::uint64_t dynamics_fingerprint(const ExcitingKernel& kernel, const MarkDistribution& marks) {
  detail::Fingerprint f;
  f.add(static_cast<std::uint64_t>(kernel.variant().index()));
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ExponentialKernel>) {
          f.add(k.delta), f.add(k.kappa);
        } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
          f.add(k.C), f.add(k.gamma);
        } else {
          f.add(k.grid), f.add(k.values);
        }
      },
      kernel.variant());
  f.add(static_cast<std::uint64_t>(100 + marks.variant().index()));
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantMarks>) {
          f.add(m.a);
        } else if constexpr (std::is_same_v<M, ExponentialMarks>) {
          f.add(m.mean);
        } else if constexpr (std::is_same_v<M, HyperExponentialMarks>) {
          f.add(m.weights), f.add(m.rates);
        } else {
          f.add(m.delta), f.add(m.probs);
        }
      },
      marks.variant());
  return f.value();
}

}  // namespace hawkes
