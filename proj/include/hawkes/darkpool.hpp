#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "hawkes/distribution.hpp"
#include "hawkes/quadrature.hpp"

namespace hawkes {

struct MetricOptions {
  InversionConfig inversion{};
  double mesh_density = 25.0;
  int min_nodes = 150;
  int fill_rate_panels = 200;
  int gauss_nodes = 64;
  int liquidity_nodes = 80;
  // Expected fill time: horizon doubling stops once P(L_T < x) < tail_tolerance.
  double tail_tolerance = 1e-4;
  double initial_horizon = 8.0;
  double max_horizon = 1024.0;
  SolveCache* cache = nullptr;

  Mesh mesh_for(double T) const { return Mesh::for_horizon(T, mesh_density, min_nodes); }
};

// ---------------------------------------------------------------------------
// Empty pool

/// P(time to first fill <= t) = 1 - exp(-int_0^t mu).
inline double time_to_first_fill_cdf(const HawkesModel& model, double t) {
  detail::require(t >= 0.0, "time_to_first_fill_cdf: t must be >= 0");
  return -std::expm1(-model.baseline.cumulative(t));
}

/// P(sigma_x <= t) = P(L_t >= x).
inline double time_to_complete_fill_cdf(const HawkesModel& model, double x, double t, const MetricOptions& opt = {}) {
  detail::require(x > 0.0 && t >= 0.0, "time_to_complete_fill_cdf: need x > 0, t >= 0");
  if (t == 0.0) return 0.0;
  VolumeDistribution law(model, opt.inversion, opt.cache, opt.mesh_density, opt.min_nodes);
  return 1.0 - law.prob_less(t, x);
}

struct FillTimeResult {
  double value = 0.0;
  double horizon = 0.0;  // where the trapezoid part stopped
  double tail = 0.0;     // exponential extrapolation beyond the horizon
};

namespace detail {
// int_0^T g by the trapezoid rule on the mesh plus g(T) / rate from a single
// exponential fitted through g(T/2) and g(T).
inline FillTimeResult integrate_with_tail(const Mesh& mesh, std::span<const double> g) {
  FillTimeResult out;
  out.horizon = mesh.horizon;
  double sum = 0.0;
  for (int i = 0; i < mesh.n; ++i) sum += 0.5 * (g[i] + g[i + 1]);
  sum *= mesh.step();
  const double gT = g[mesh.n];
  const double gh = interpolate<double>(mesh, g, 0.5 * mesh.horizon);
  if (gT > 0.0 && gh > gT) {
    const double rate = std::log(gh / gT) / (0.5 * mesh.horizon);
    out.tail = gT / rate;
  }
  out.value = sum + out.tail;
  return out;
}
}  // namespace detail

/// E[sigma_x] = int_0^inf P(L_t < x) dt.
inline FillTimeResult expected_time_to_complete_fill_detail(const HawkesModel& model, double x,
                                                            const MetricOptions& opt = {}) {
  detail::require(x > 0.0, "expected_time_to_complete_fill: x must be > 0");
  VolumeDistribution law(model, opt.inversion, opt.cache, opt.mesh_density, opt.min_nodes);
  for (double T = opt.initial_horizon; T <= opt.max_horizon * (1.0 + 1e-12); T *= 2.0) {
    const Mesh mesh = opt.mesh_for(T);
    const std::vector<double> g = law.prob_less_on_nodes(x, mesh);
    if (g.back() < opt.tail_tolerance) return detail::integrate_with_tail(mesh, g);
  }
  throw TruncationError("expected_time_to_complete_fill: P(L_t < x) still above tolerance at the maximum horizon");
}

inline double expected_time_to_complete_fill(const HawkesModel& model, double x, const MetricOptions& opt = {}) {
  return expected_time_to_complete_fill_detail(model, x, opt).value;
}

/// E[min(L_t, x)] / x, trapezoid in y (exact cell sums for lattice marks).
inline double expected_fill_rate(const HawkesModel& model, double x, double t, const MetricOptions& opt = {}) {
  detail::require(x > 0.0 && t >= 0.0, "expected_fill_rate: need x > 0, t >= 0");
  if (t == 0.0) return 0.0;
  VolumeDistribution vd(model, opt.inversion, opt.cache, opt.mesh_density, opt.min_nodes);
  return law_expected_min_trapezoid(vd.law(t), x, opt.inversion, opt.fill_rate_panels) / x;
}

/// Fill rate at each t in `times` (ascending, >= 0), sharing one mesh on
/// [0, max t] so every Volterra solve is reused across times.
inline std::vector<double> expected_fill_rate_curve(const HawkesModel& model, double x, std::span<const double> times,
                                                    const MetricOptions& opt = {}) {
  detail::require(x > 0.0, "expected_fill_rate: x must be > 0");
  std::vector<double> out(times.size(), 0.0);
  if (times.empty()) return out;
  const double tmax = *std::max_element(times.begin(), times.end());
  if (tmax <= 0.0) return out;
  SolveCache local;
  MetricOptions o = opt;
  if (!o.cache) o.cache = &local;
  VolumeDistribution vd(model, o.inversion, o.cache, o.mesh_density, o.min_nodes);
  const Mesh mesh = o.mesh_for(tmax);
  for (std::size_t i = 0; i < times.size(); ++i) {
    detail::require(times[i] >= 0.0, "expected_fill_rate: times must be >= 0");
    if (times[i] > 0.0) out[i] = law_expected_min_trapezoid(vd.law(times[i], mesh), x, o.inversion, o.fill_rate_panels) / x;
  }
  return out;
}

/// Fill rate for a random deadline independent of (N, L), given as weights
/// on a grid of deterministic deadlines.
inline double expected_fill_rate_random_deadline(const HawkesModel& model, double x, std::span<const double> times,
                                                 std::span<const double> weights, const MetricOptions& opt = {}) {
  detail::require(times.size() == weights.size() && !times.empty(), "random deadline: one weight per time");
  double total_w = 0.0;
  for (double w : weights) {
    detail::require(w >= 0.0, "random deadline: weights must be >= 0");
    total_w += w;
  }
  detail::require(std::abs(total_w - 1.0) < 1e-9, "random deadline: weights must sum to 1");
  const std::vector<double> rates = expected_fill_rate_curve(model, x, times, opt);
  double s = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) s += weights[i] * rates[i];
  return s;
}

// ---------------------------------------------------------------------------
// Conditioning on one past fill

/// {N_t = 1, l_1 = l1}: one fill of size l1 somewhere in (0, t].
struct ConditioningEvent {
  double t = 0.0;
  double l1 = 0.0;

  void validate() const {
    detail::require(t > 0.0 && std::isfinite(t), "conditioning event: t must be > 0");
    detail::require(l1 > 0.0 && std::isfinite(l1), "conditioning event: l1 must be > 0");
  }
};

namespace detail {

inline std::vector<double> breakpoints_in(const BaselineIntensity& b, double lo, double hi) {
  std::vector<double> out;
  for (double x : b.breakpoints())
    if (x > lo && x < hi) out.push_back(x);
  return out;
}

// Weight of a first fill at tau given N_t = 1 and l_1 = l1, up to the factor
// exp(-int_0^t mu) shared by numerator and denominator:
//   mu(tau) exp(-l1 H(t - tau)).
// The integral over tau in [0, t] is the conditioning denominator.
inline double conditioning_denominator(const HawkesModel& model, const ConditioningEvent& ev, int nodes) {
  const auto cuts = breakpoints_in(model.baseline, 0.0, ev.t);
  return integrate_gauss(
      [&](double tau) { return model.baseline(tau) * std::exp(-ev.l1 * model.kernel.integral(ev.t - tau)); }, 0.0,
      ev.t, cuts, nodes);
}

inline double checked_denominator(const HawkesModel& model, const ConditioningEvent& ev, int nodes) {
  const double D = conditioning_denominator(model, ev, nodes);
  if (!(D > 1e-300) || !std::isfinite(D))
    throw ConditioningImpossible("conditioning event has zero probability (baseline vanishes on [0, t])");
  return D;
}

}  // namespace detail

/// P(N_{t+T} - N_t = k | N_t = 1, l_1 = l1) for k in {0, 1}.
inline double cond_prob_k_fills(const HawkesModel& model, const ConditioningEvent& ev, double T, int k,
                                const MetricOptions& opt = {}) {
  ev.validate();
  detail::require(T >= 0.0, "cond_prob_k_fills: T must be >= 0");
  detail::require(k == 0 || k == 1, "cond_prob_k_fills: k must be 0 or 1");
  const double D = detail::checked_denominator(model, ev, opt.gauss_nodes);
  if (T == 0.0) return k == 0 ? 1.0 : 0.0;
  const double t = ev.t, l1 = ev.l1;
  const double window = model.baseline.integral(t, t + T);
  const auto tau_cuts = detail::breakpoints_in(model.baseline, 0.0, t);
  const auto s_cuts = detail::breakpoints_in(model.baseline, t, t + T);
  const ExcitingKernel& h = model.kernel;

  if (k == 0) {
    const double num = integrate_gauss(
        [&](double tau) { return model.baseline(tau) * std::exp(-l1 * h.integral(t + T - tau)); }, 0.0, t, tau_cuts,
        opt.gauss_nodes);
    return std::clamp(std::exp(-window) * num / D, 0.0, 1.0);
  }

  const double num = integrate_gauss(
      [&](double tau) {
        const double inner = integrate_gauss(
            [&](double s) {
              const double rate = model.baseline(s) + l1 * h.eval_unchecked(s - tau);
              return rate * model.marks.mgf(-h.integral(T + t - s)).real();
            },
            t, t + T, s_cuts, opt.gauss_nodes);
        return model.baseline(tau) * std::exp(-l1 * h.integral(t + T - tau)) * inner;
      },
      0.0, t, tau_cuts, opt.gauss_nodes);
  return std::clamp(std::exp(-window) * num / D, 0.0, 1.0);
}

/// P(at least one fill in (t, t+T] | event) = 1 - P(no fill).
inline double cond_prob_at_least_one_fill(const HawkesModel& model, const ConditioningEvent& ev, double T,
                                          const MetricOptions& opt = {}) {
  return 1.0 - cond_prob_k_fills(model, ev, T, 0, opt);
}

/// Conditional law of L_{t+T} - L_t given the event:
///   E[e^{-theta dL} | event] = int w(tau) exp(int_0^T rate_tau(u) (F_L(u) - 1) du) dtau / int w(tau) dtau,
/// rate_tau(u) = mu(t + T - u) + l1 h(t + T - u - tau), w(tau) = mu(tau) exp(-l1 H(t - tau)),
/// with F_L solved on a mesh covering [0, T].
inline TransformLaw conditional_volume_law(const HawkesModel& model, const ConditioningEvent& ev, double T,
                                           const Mesh& mesh, const MetricOptions& opt = {}) {
  ev.validate();
  detail::require(T > 0.0 && mesh.horizon >= T * (1.0 - 1e-12), "conditional law: mesh must cover [0, T]");
  const double D = detail::checked_denominator(model, ev, opt.gauss_nodes);
  const double t = ev.t;
  const auto tau_cuts = detail::breakpoints_in(model.baseline, 0.0, t);
  // Jumps of w -> mu(t + w) within the window, as distances from t.
  std::vector<double> jumps;
  for (double b : detail::breakpoints_in(model.baseline, t, t + T)) jumps.push_back(b - t);

  TransformLaw law;
  law.p_zero = cond_prob_k_fills(model, ev, T, 0, opt);
  law.span = model.marks.lattice_span();
  law.transform = [model, ev, T, mesh, D, tau_cuts, jumps, nodes = opt.gauss_nodes, cache = opt.cache](cplx theta) {
    auto sol = detail::solve_maybe_cached(cache, model.kernel, model.marks, 0.0, theta, mesh);
    const std::vector<cplx> g = detail::minus_one(sol->values);
    const QuadratureRule& rule = gauss_legendre_cached(nodes);
    std::vector<double> edges{0.0};
    edges.insert(edges.end(), tau_cuts.begin(), tau_cuts.end());
    edges.push_back(ev.t);
    cplx total = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double mid = 0.5 * (edges[p] + edges[p + 1]), half = 0.5 * (edges[p + 1] - edges[p]);
      cplx panel = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double tau = mid + half * rule.nodes[q];
        const double w = model.baseline(tau) * std::exp(-ev.l1 * model.kernel.integral(ev.t - tau));
        auto rate = [&](double v, Side side) {
          return model.baseline.value(ev.t + std::max(v, 0.0), side) +
                 ev.l1 * model.kernel.eval_unchecked(ev.t - tau + std::max(v, 0.0));
        };
        const cplx inner = detail::outer_integral<cplx>(rate, jumps, mesh, std::span<const cplx>(g), T);
        panel += rule.weights[q] * w * std::exp(inner);
      }
      total += half * panel;
    }
    return total / D;
  };
  return law;
}

/// E[min(L_{t+T} - L_t, x - l1) | N_t = 1, l_1 = l1].
inline double cond_expected_fill_size(const HawkesModel& model, const ConditioningEvent& ev, double T, double x,
                                      const MetricOptions& opt = {}) {
  ev.validate();
  detail::require(ev.l1 < x, "cond_expected_fill_size: need l1 < x");
  detail::require(T >= 0.0, "cond_expected_fill_size: T must be >= 0");
  if (T == 0.0) return 0.0;
  SolveCache local;
  MetricOptions o = opt;
  if (!o.cache) o.cache = &local;
  const TransformLaw law = conditional_volume_law(model, ev, T, o.mesh_for(T), o);
  return law_expected_min_trapezoid(law, x - ev.l1, o.inversion, o.fill_rate_panels);
}

/// The conditional expected fill size at each window length in `windows`,
/// reusing F_L solves on one mesh over [0, max window].
inline std::vector<double> cond_expected_fill_size_curve(const HawkesModel& model, const ConditioningEvent& ev,
                                                         std::span<const double> windows, double x,
                                                         const MetricOptions& opt = {}) {
  ev.validate();
  detail::require(ev.l1 < x, "cond_expected_fill_size: need l1 < x");
  std::vector<double> out(windows.size(), 0.0);
  if (windows.empty()) return out;
  const double Tmax = *std::max_element(windows.begin(), windows.end());
  if (Tmax <= 0.0) return out;
  SolveCache local;
  MetricOptions o = opt;
  if (!o.cache) o.cache = &local;
  const Mesh mesh = o.mesh_for(Tmax);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    detail::require(windows[i] >= 0.0, "cond_expected_fill_size: windows must be >= 0");
    if (windows[i] == 0.0) continue;
    const TransformLaw law = conditional_volume_law(model, ev, windows[i], mesh, o);
    out[i] = law_expected_min_trapezoid(law, x - ev.l1, o.inversion, o.fill_rate_panels);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Non-empty pool

// Weight on (0, inf) (or its mirror) with density weight * k y^{k-1} e^{-(y/scale)^k} / scale^k.
struct WeibullSide {
  double weight = 0.0;
  double shape = 1.0;
  double scale = 1.0;
};

// Piecewise linear density through (grid, density) on [grid.front(), grid.back()],
// normalized to `weight`.
struct TabulatedSide {
  double weight = 0.0;
  std::vector<double> grid;
  std::vector<double> density;
};

/// Initial liquidity Y in the pool: an atom at zero plus a density on each side.
/// Y > 0 is resting same-side volume, Y < 0 opposite-side volume.
class LiquidityDistribution {
 public:
  using Side = std::variant<WeibullSide, TabulatedSide>;

  LiquidityDistribution(double mass_at_zero, Side negative, Side positive)
      : p0_(mass_at_zero), neg_(std::move(negative)), pos_(std::move(positive)) {
    validate();
  }

  // The two-sided Weibull example: mass p0 at zero, (1 - p0) / 2 on each side,
  // scale 1 and shape k.
  static LiquidityDistribution two_sided_weibull(double p0, double k) {
    const double w = 0.5 * (1.0 - p0);
    return LiquidityDistribution(p0, WeibullSide{w, k, 1.0}, WeibullSide{w, k, 1.0});
  }
  static LiquidityDistribution point_mass_at_zero() { return LiquidityDistribution(1.0, WeibullSide{}, WeibullSide{}); }

  double mass_at_zero() const { return p0_; }
  double negative_mass() const { return weight(neg_); }
  double positive_mass() const { return weight(pos_); }
  const Side& negative_side() const { return neg_; }
  const Side& positive_side() const { return pos_; }

  // CDF of |Y| on one side, conditional on that side; and its inverse.
  static double side_cdf(const Side& s, double y) {
    if (y <= 0.0) return 0.0;
    if (const auto* w = std::get_if<WeibullSide>(&s)) return -std::expm1(-std::pow(y / w->scale, w->shape));
    const auto& tab = std::get<TabulatedSide>(s);
    return tabulated_cdf(tab, y);
  }
  static double side_quantile(const Side& s, double u) {
    if (const auto* w = std::get_if<WeibullSide>(&s)) return w->scale * std::pow(-std::log1p(-u), 1.0 / w->shape);
    const auto& tab = std::get<TabulatedSide>(s);
    double lo = tab.grid.front(), hi = tab.grid.back();
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (tabulated_cdf(tab, mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  static double weight(const Side& s) {
    return std::visit([](const auto& x) { return x.weight; }, s);
  }

  // F_Y(y) = P(Y <= y).
  double cdf(double y) const {
    if (y < 0.0) return negative_mass() * (1.0 - side_cdf(neg_, -y));
    return negative_mass() + p0_ + positive_mass() * side_cdf(pos_, y);
  }

 private:
  static double tabulated_cdf(const TabulatedSide& tab, double y) {
    const auto& g = tab.grid;
    const auto& d = tab.density;
    double total = 0.0, upto = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
      const double a = 0.5 * (d[i] + d[i + 1]) * (g[i + 1] - g[i]);
      total += a;
      if (y >= g[i + 1]) {
        upto += a;
      } else if (y > g[i]) {
        const double w = (y - g[i]) / (g[i + 1] - g[i]);
        const double dy = d[i] + w * (d[i + 1] - d[i]);
        upto += 0.5 * (d[i] + dy) * (y - g[i]);
      }
    }
    return std::clamp(upto / total, 0.0, 1.0);
  }

  static void validate_side(const Side& s) {
    if (const auto* w = std::get_if<WeibullSide>(&s)) {
      detail::require(w->weight >= 0.0 && w->weight <= 1.0, "liquidity: side weight outside [0, 1]");
      detail::require(w->shape > 0.0 && w->scale > 0.0, "liquidity: Weibull shape and scale must be > 0");
      return;
    }
    const auto& t = std::get<TabulatedSide>(s);
    detail::require(t.weight >= 0.0 && t.weight <= 1.0, "liquidity: side weight outside [0, 1]");
    detail::require(t.grid.size() >= 2 && t.grid.size() == t.density.size(),
                    "liquidity: tabulated side needs >= 2 points and matching sizes");
    detail::require(t.grid.front() >= 0.0, "liquidity: tabulated side must live on [0, inf)");
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < t.grid.size(); ++i) {
      detail::require(t.grid[i + 1] > t.grid[i], "liquidity: tabulated grid must be ascending");
      area += 0.5 * (t.density[i] + t.density[i + 1]) * (t.grid[i + 1] - t.grid[i]);
    }
    for (double v : t.density) detail::require(v >= 0.0, "liquidity: densities must be >= 0");
    detail::require(t.weight == 0.0 || area > 0.0, "liquidity: tabulated density integrates to zero");
  }

  void validate() const {
    detail::require(p0_ >= 0.0 && p0_ <= 1.0, "liquidity: mass at zero outside [0, 1]");
    validate_side(neg_);
    validate_side(pos_);
    detail::require(std::abs(p0_ + negative_mass() + positive_mass() - 1.0) < 1e-9,
                    "liquidity: masses must sum to 1");
  }

  double p0_;
  Side neg_, pos_;
};

namespace detail {
// sum_q w_q g(Q(u_q)) with u on (0, u_max): the side integral int g dF over
// |Y| < Q(u_max), in probability scale so densities singular at zero are
// handled without special panels.
template <class G>
double side_integral(const LiquidityDistribution::Side& side, double u_max, int nodes, G&& g) {
  if (u_max <= 0.0) return 0.0;
  const QuadratureRule& rule = gauss_legendre_cached(nodes);
  double total = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double u = 0.5 * u_max * (1.0 + rule.nodes[q]);
    total += rule.weights[q] * g(LiquidityDistribution::side_quantile(side, u));
  }
  return 0.5 * u_max * total;
}

// The model after a fill of size a at time zero: baseline mu + a h.
inline HawkesModel shifted_model(const HawkesModel& model, double a) {
  return model.with_baseline(BaselineIntensity::augmented(model.baseline, a, model.kernel));
}
}  // namespace detail

struct FirstFillResult {
  double p_immediate = 0.0;
  double survival = 0.0;  // P(tau(1) > t)
};

/// tau(1) = inf{t : L_t > Y}.
inline FirstFillResult nonempty_first_fill(const HawkesModel& model, const LiquidityDistribution& Y, double t,
                                           const MetricOptions& opt = {}) {
  detail::require(t >= 0.0, "nonempty_first_fill: t must be >= 0");
  FirstFillResult r;
  r.p_immediate = Y.negative_mass();
  const double none = std::exp(-model.baseline.cumulative(t));
  if (t == 0.0) {
    r.survival = Y.mass_at_zero() + Y.positive_mass();
    return r;
  }
  SolveCache local;
  MetricOptions o = opt;
  if (!o.cache) o.cache = &local;
  VolumeDistribution vd(model, o.inversion, o.cache, o.mesh_density, o.min_nodes);
  const TransformLaw law = vd.law(t);
  const double positive = Y.positive_mass() == 0.0
                              ? 0.0
                              : detail::side_integral(Y.positive_side(), 1.0, o.liquidity_nodes,
                                                      [&](double y) { return law_cdf(law, y, o.inversion); });
  r.survival = std::clamp(Y.mass_at_zero() * none + Y.positive_mass() * positive, 0.0, 1.0);
  return r;
}

/// P(sigma_x <= t) with sigma_x = inf{t : L_t >= x + Y}.
inline double nonempty_complete_fill_cdf(const HawkesModel& model, const LiquidityDistribution& Y, double x,
                                         double t, const MetricOptions& opt = {}) {
  detail::require(x > 0.0 && t >= 0.0, "nonempty_complete_fill_cdf: need x > 0, t >= 0");
  const auto& neg = Y.negative_side();
  const double u_neg = LiquidityDistribution::side_cdf(neg, x);
  const double immediate = Y.negative_mass() * (1.0 - u_neg);  // F_Y(-x)
  if (t == 0.0) return immediate;

  SolveCache local;
  MetricOptions o = opt;
  if (!o.cache) o.cache = &local;
  VolumeDistribution vd(model, o.inversion, o.cache, o.mesh_density, o.min_nodes);
  const TransformLaw law = vd.law(t);

  // P(L_t < x + Y) over the three regimes.
  double less = Y.mass_at_zero() * law_prob_less(law, x, o.inversion);
  if (Y.positive_mass() > 0.0)
    less += Y.positive_mass() * detail::side_integral(Y.positive_side(), 1.0, o.liquidity_nodes, [&](double y) {
              return law_prob_less(law, x + y, o.inversion);
            });
  if (Y.negative_mass() > 0.0)
    less += Y.negative_mass() * detail::side_integral(neg, u_neg, o.liquidity_nodes, [&](double a) {
              VolumeDistribution shifted(detail::shifted_model(model, a), o.inversion, o.cache, o.mesh_density,
                                         o.min_nodes);
              return law_prob_less(shifted.law(t), x - a, o.inversion);
            });
  return std::clamp(1.0 - less, 0.0, 1.0);
}

/// E[min((L_t - Y)^+, x)] / x.
inline double nonempty_expected_fill_rate(const HawkesModel& model, const LiquidityDistribution& Y, double x,
                                          double t, const MetricOptions& opt = {}) {
  detail::require(x > 0.0 && t >= 0.0, "nonempty_expected_fill_rate: need x > 0, t >= 0");
  const auto& neg = Y.negative_side();
  const double u_neg = LiquidityDistribution::side_cdf(neg, x);
  // Y <= -x fills completely at time zero.
  double filled = Y.negative_mass() * (1.0 - u_neg) * x;

  if (t == 0.0) {
    // Only the immediate partial fills min(|Y|, x) for Y < 0.
    if (Y.negative_mass() > 0.0)
      filled += Y.negative_mass() * detail::side_integral(neg, u_neg, opt.liquidity_nodes, [](double a) { return a; });
    return std::clamp(filled / x, 0.0, 1.0);
  }

  SolveCache local;
  MetricOptions o = opt;
  if (!o.cache) o.cache = &local;
  VolumeDistribution vd(model, o.inversion, o.cache, o.mesh_density, o.min_nodes);
  const TransformLaw law = vd.law(t);

  filled += Y.mass_at_zero() * law_expected_min(law, x, o.inversion);
  if (Y.positive_mass() > 0.0)
    // int_y^{y+x} P(L > v) dv = E[min(L, y + x)] - E[min(L, y)]
    filled += Y.positive_mass() * detail::side_integral(Y.positive_side(), 1.0, o.liquidity_nodes, [&](double y) {
                return law_expected_min(law, y + x, o.inversion) - law_expected_min(law, y, o.inversion);
              });
  if (Y.negative_mass() > 0.0)
    filled += Y.negative_mass() * detail::side_integral(neg, u_neg, o.liquidity_nodes, [&](double a) {
                VolumeDistribution shifted(detail::shifted_model(model, a), o.inversion, o.cache, o.mesh_density,
                                           o.min_nodes);
                return a + law_expected_min(shifted.law(t), x - a, o.inversion);
              });
  return std::clamp(filled / x, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Compound Poisson closed forms (h = 0, constant baseline)

struct CompoundPoissonFillTime {
  double value = 0.0;
  bool exact = true;  // false: value is a strict lower bound
  std::optional<double> upper_bound;
};

inline CompoundPoissonFillTime compound_poisson_expected_fill_time(const MarkDistribution& marks, double mu,
                                                                   double x) {
  detail::require(mu > 0.0 && std::isfinite(mu), "compound Poisson fill time: mu must be > 0");
  detail::require(x > 0.0 && std::isfinite(x), "compound Poisson fill time: x must be > 0");
  return std::visit(
      [&](const auto& d) -> CompoundPoissonFillTime {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, ConstantMarks>) {
          return {std::ceil(x / d.a - 1e-12) / mu, true, std::nullopt};
        } else if constexpr (std::is_same_v<D, ExponentialMarks>) {
          // One plus a Poisson(x / m) number of renewals before crossing.
          return {(x + d.mean) / (d.mean * mu), true, std::nullopt};
        } else if constexpr (std::is_same_v<D, LatticeMarks>) {
          // u(j): expected number of marks until the sum reaches j lattice units.
          const int K = static_cast<int>(std::ceil(x / d.delta - 1e-12));
          std::vector<double> u(static_cast<std::size_t>(K) + 1, 0.0);
          for (int j = 1; j <= K; ++j) {
            double s = 1.0;
            for (std::size_t k = 1; k <= d.probs.size() && static_cast<int>(k) < j; ++k) s += d.probs[k - 1] * u[j - k];
            u[j] = s;
          }
          return {u[K] / mu, true, std::nullopt};
        } else {
          // Wald: E[count] * m = x + E[overshoot]; the overshoot of a mixture
          // of exponentials lies strictly between the mean and the largest
          // component mean.
          double m = 0.0, largest = 0.0;
          for (std::size_t i = 0; i < d.rates.size(); ++i) {
            m += d.weights[i] / d.rates[i];
            largest = std::max(largest, 1.0 / d.rates[i]);
          }
          return {(x + m) / (m * mu), false, (x + largest) / (m * mu)};
        }
      },
      marks.variant());
}

}  // namespace hawkes
