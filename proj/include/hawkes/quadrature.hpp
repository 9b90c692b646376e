#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "hawkes/errors.hpp"

namespace hawkes {

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

namespace detail {
// Legendre P_n(x) and P_{n-1}(x) by the three-term recurrence.
inline std::pair<double, double> legendre_pair(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  return {p1, p0};
}
}  // namespace detail

// Gauss-Legendre rule with n points via Newton iteration on P_n.
inline QuadratureRule gauss_legendre(int n) {
  detail::require(n >= 1, "gauss_legendre: n must be >= 1");
  QuadratureRule rule;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {2.0};
    return rule;
  }
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      auto [pn, pm] = detail::legendre_pair(n, x);
      double dp = n * (x * pn - pm) / (x * x - 1.0);
      double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    auto [pn, pm] = detail::legendre_pair(n, x);
    double dp = n * (x * pn - pm) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

// Rules are built once per size and never freed.
inline const QuadratureRule& gauss_legendre_cached(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> rules;
  std::lock_guard lock(mutex);
  auto& slot = rules[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(gauss_legendre(n));
  return *slot;
}

// Integrates f over [a, b], splitting into panels at the sorted cut points.
template <class F>
double integrate_gauss(F&& f, double a, double b, std::span<const double> cuts, int nodes = 64) {
  if (!(b > a)) return 0.0;
  const QuadratureRule& rule = gauss_legendre_cached(nodes);
  std::vector<double> edges{a};
  for (double c : cuts)
    if (c > a && c < b) edges.push_back(c);
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double lo = edges[p], hi = edges[p + 1];
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) panel += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += half * panel;
  }
  return total;
}

template <class F>
double integrate_gauss(F&& f, double a, double b, int nodes = 64) {
  return integrate_gauss(std::forward<F>(f), a, b, std::span<const double>{}, nodes);
}

// Tree summation; the result is independent of how the values were produced.
template <class T>
T pairwise_sum(std::span<const T> v) {
  if (v.empty()) return T{};
  if (v.size() <= 8) {
    T s{};
    for (const T& x : v) s += x;
    return s;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise_sum(v.subspan(0, mid)) + pairwise_sum(v.subspan(mid));
}

}  // namespace hawkes
