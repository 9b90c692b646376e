#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "hawkes/cache.hpp"
#include "hawkes/errors.hpp"
#include "hawkes/model.hpp"
#include "hawkes/transform.hpp"
#include "hawkes/volterra.hpp"

namespace hawkes {

// ---------------------------------------------------------------------------
// Exact PMFs

struct PmfResult {
  std::vector<double> probs;  // p_0 .. p_kmax, clamped to [0, 1]
  double tail_mass = 0.0;     // 1 - sum(probs), clamped at 0
  int kmax = 0;
};

inline constexpr int kMaxPmfOrder = 30;

namespace detail {

// Taylor coefficients in z of the generating-function analogue of F: f[j-1][i]
// is the coefficient of z^j at node t_i. Counting uses
//   f_j = sum_r W_{j-1,r} E[l^r e^{-l H}],
// lattice volume uses
//   f_j = sum_{k<=j} p_k e^{-k delta H} sum_r (k delta)^r W_{j-k,r},
// where H(t) = int_0^t h, x_i(t) = int_0^t h(s) f_i(t-s) ds and
//   W_{n,r} = [z^n] (sum_i x_i z^i)^r / r!.
// At every node the W rows, the f_j and the x_j are filled in increasing j, so
// each step only uses quantities already known.
struct CoefficientFunctions {
  Mesh mesh;
  std::vector<std::vector<double>> f;
};

enum class CoefficientKind { Counting, LatticeVolume };

inline CoefficientFunctions coefficient_functions(const HawkesModel& model, int kmax, const Mesh& mesh,
                                                  CoefficientKind kind) {
  const int K = kmax;
  CoefficientFunctions out{mesh, std::vector<std::vector<double>>(K, std::vector<double>(mesh.size(), 0.0))};
  if (K == 0) return out;
  std::vector<double> lattice;
  double span = 0.0;
  if (kind == CoefficientKind::LatticeVolume) {
    lattice = model.marks.lattice_probs();
    span = *model.marks.lattice_span();
    lattice.resize(static_cast<std::size_t>(K), 0.0);
  }
  const std::vector<double> h = kernel_on_nodes(model.kernel, mesh);
  const double dt = mesh.step();
  const bool zero_kernel = model.kernel.is_zero();

  std::vector<std::vector<double>> x(K, std::vector<double>(mesh.size(), 0.0));
  // W[n][r], n, r in [0, K-1]
  std::vector<std::vector<double>> W(K, std::vector<double>(K, 0.0));
  std::vector<double> moments(K), decay(K + 1);

  for (int i = 0; i <= mesh.n; ++i) {
    const double H = zero_kernel ? 0.0 : model.kernel.integral(mesh.node(i));
    if (kind == CoefficientKind::Counting) {
      for (int r = 0; r < K; ++r) moments[r] = model.marks.moment_exp(r, -H).real();
    } else {
      for (int k = 1; k <= K; ++k) decay[k] = std::exp(-k * span * H);
    }
    for (auto& row : W) std::fill(row.begin(), row.end(), 0.0);
    W[0][0] = 1.0;

    for (int j = 1; j <= K; ++j) {
      const int n = j - 1;
      if (n >= 1) {
        for (int r = 1; r <= n; ++r) {
          double s = 0.0;
          for (int q = 1; q <= n - r + 1; ++q) s += x[q - 1][i] * W[n - q][r - 1];
          W[n][r] = s / r;
        }
      }
      double fj = 0.0;
      if (kind == CoefficientKind::Counting) {
        for (int r = 0; r <= n; ++r) fj += W[n][r] * moments[r];
      } else {
        for (int k = 1; k <= j; ++k) {
          if (lattice[k - 1] == 0.0) continue;
          const int m = j - k;
          const double c = k * span;
          double inner = 0.0, cr = 1.0;
          for (int r = 0; r <= m; ++r, cr *= c) inner += cr * W[m][r];
          fj += lattice[k - 1] * decay[k] * inner;
        }
      }
      out.f[j - 1][i] = fj;

      if (!zero_kernel && i > 0) {
        const std::vector<double>& fv = out.f[j - 1];
        double conv = 0.5 * (h[0] * fv[i] + h[i] * fv[0]);
        for (int m = 1; m < i; ++m) conv += h[m] * fv[i - m];
        x[j - 1][i] = dt * conv;
      }
    }
  }
  return out;
}

// p_k = e^{-Lambda} [z^k] exp(sum_j M_j z^j), M_j = int_0^T mu(T-s) f_j(s) ds.
inline PmfResult assemble_pmf(const HawkesModel& model, const CoefficientFunctions& cf, double T, int kmax) {
  const std::vector<double> jumps = model.baseline.breakpoints();
  std::vector<double> M(static_cast<std::size_t>(kmax) + 1, 0.0);
  for (int j = 1; j <= kmax; ++j)
    M[j] = outer_integral<double>(baseline_rate(model.baseline), jumps, cf.mesh, std::span<const double>(cf.f[j - 1]), T);
  std::vector<double> c(static_cast<std::size_t>(kmax) + 1, 0.0);
  c[0] = 1.0;
  for (int k = 1; k <= kmax; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * M[j] * c[k - j];
    c[k] = s / k;
  }
  const double p0 = std::exp(-model.baseline.cumulative(T));
  PmfResult res{std::vector<double>(static_cast<std::size_t>(kmax) + 1), 0.0, kmax};
  double total = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    double p = p0 * c[k];
    if (!std::isfinite(p) || p < -1e-10 || p > 1.0 + 1e-10)
      throw NumericalError("pmf: coefficient outside [0, 1]; refine the mesh");
    res.probs[k] = std::clamp(p, 0.0, 1.0);
    total += res.probs[k];
  }
  res.tail_mass = std::max(0.0, 1.0 - total);
  return res;
}

}  // namespace detail

/// P(N_T = k), k = 0..kmax.
inline PmfResult pmf_N(const HawkesModel& model, double T, int kmax, const Mesh& mesh) {
  detail::require(T > 0.0, "pmf_N: T must be > 0");
  detail::require(kmax >= 0 && kmax <= kMaxPmfOrder, "pmf_N: kmax must be in [0, 30]");
  detail::require(mesh.horizon >= T * (1.0 - 1e-12), "pmf_N: mesh must cover [0, T]");
  auto cf = detail::coefficient_functions(model, kmax, mesh, detail::CoefficientKind::Counting);
  return detail::assemble_pmf(model, cf, T, kmax);
}

/// P(L_T = k delta), k = 0..kmax, for marks on the lattice delta N.
inline PmfResult pmf_L_lattice(const HawkesModel& model, double T, int kmax, const Mesh& mesh) {
  detail::require(T > 0.0, "pmf_L_lattice: T must be > 0");
  detail::require(kmax >= 0 && kmax <= kMaxPmfOrder, "pmf_L_lattice: kmax must be in [0, 30]");
  detail::require(model.marks.lattice_span().has_value(), "pmf_L_lattice: marks are not lattice distributed");
  detail::require(mesh.horizon >= T * (1.0 - 1e-12), "pmf_L_lattice: mesh must cover [0, T]");
  auto cf = detail::coefficient_functions(model, kmax, mesh, detail::CoefficientKind::LatticeVolume);
  return detail::assemble_pmf(model, cf, T, kmax);
}

// ---------------------------------------------------------------------------
// Laplace inversion

enum class InversionMethod {
  Auto,   // lattice contour inversion for lattice marks, Euler otherwise
  Euler,  // always the Fourier-series method
};

struct InversionConfig {
  double A = 18.4;
  int terms = 38;
  int euler_terms = 12;
  // Aliasing error 10^-digits of the lattice contour inversion.
  double lattice_digits = 8.0;
  InversionMethod method = InversionMethod::Auto;

  void validate() const {
    detail::require(A > 0.0 && std::isfinite(A), "inversion: A must be > 0");
    detail::require(euler_terms >= 1 && terms > euler_terms, "inversion: need terms > euler_terms >= 1");
    detail::require(lattice_digits > 0.0 && lattice_digits <= 12.0, "inversion: lattice_digits must be in (0, 12]");
  }
};

/// theta_k = (A + 2 pi i k) / (2x), k = 0..terms-1.
inline std::vector<cplx> inversion_nodes(double x, const InversionConfig& cfg = {}) {
  cfg.validate();
  detail::require(x > 0.0 && std::isfinite(x), "inversion: x must be > 0");
  std::vector<cplx> nodes(static_cast<std::size_t>(cfg.terms));
  for (int k = 0; k < cfg.terms; ++k) nodes[k] = cplx(cfg.A, 2.0 * std::numbers::pi * k) / (2.0 * x);
  return nodes;
}

/// Euler-summed Fourier series for P(X <= x) from transform values at the
/// inversion nodes. Not clamped.
inline double combine_inversion(std::span<const cplx> values, double x, const InversionConfig& cfg = {}) {
  const std::vector<cplx> nodes = inversion_nodes(x, cfg);
  detail::require(values.size() == nodes.size(), "inversion: one transform value per node required");
  const double scale = std::exp(0.5 * cfg.A) / x;
  std::vector<double> partial(nodes.size());
  double s = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    double term = (values[k] / nodes[k]).real() * scale;
    if (k == 0) term *= 0.5;
    if (k % 2 == 1) term = -term;
    s += term;
    partial[k] = s;
  }
  const int m = cfg.euler_terms - 1;
  const std::size_t first = nodes.size() - static_cast<std::size_t>(cfg.euler_terms);
  double result = 0.0, binom = 1.0;
  const double weight = std::ldexp(1.0, -m);
  for (int j = 0; j <= m; ++j) {
    result += binom * weight * partial[first + j];
    binom = binom * (m - j) / (j + 1);
  }
  return result;
}

/// P(X <= x) for a nonnegative X given theta -> E[exp(-theta X)].
template <class Transform>
double invert_laplace_cdf(Transform&& transform, double x, const InversionConfig& cfg = {}) {
  const std::vector<cplx> nodes = inversion_nodes(x, cfg);
  std::vector<cplx> values(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) values[k] = transform(nodes[k]);
  return std::clamp(combine_inversion(values, x, cfg), 0.0, 1.0);
}

// Lattice variables: P(X = k delta) from the generating function
// z -> E[z^{X/delta}] sampled on the circle |z| = r at m points,
//   p_k = (1 / (m r^k)) sum_j G(r w^j) w^{-jk},  w = e^{2 pi i / m},
// with aliasing error at most r^m = 10^-digits. The transform is read at
// theta_j = -log(r w^j) / delta, whose real part is positive.
struct LatticeContour {
  int m = 0;
  double r = 1.0;
  double span = 1.0;
};

inline LatticeContour lattice_contour(int kmax, double span, const InversionConfig& cfg = {}) {
  detail::require(kmax >= 0 && span > 0.0, "lattice inversion: need kmax >= 0 and span > 0");
  LatticeContour c;
  c.m = std::max(16, 2 * (kmax + 1));
  c.r = std::pow(10.0, -cfg.lattice_digits / c.m);
  c.span = span;
  return c;
}

// Only j = 0..m/2 are needed: the other half are complex conjugates.
inline std::vector<cplx> lattice_inversion_nodes(const LatticeContour& c) {
  std::vector<cplx> nodes(static_cast<std::size_t>(c.m / 2 + 1));
  for (int j = 0; j <= c.m / 2; ++j)
    nodes[j] = cplx(-std::log(c.r), -2.0 * std::numbers::pi * j / c.m) / c.span;
  return nodes;
}

// p_0..p_kmax from transform values at lattice_inversion_nodes.
inline std::vector<double> combine_lattice_inversion(std::span<const cplx> values, int kmax, const LatticeContour& c) {
  detail::require(values.size() == static_cast<std::size_t>(c.m / 2 + 1), "lattice inversion: wrong number of values");
  const int half = c.m / 2;
  std::vector<double> p(static_cast<std::size_t>(kmax) + 1);
  double rk = 1.0;
  for (int k = 0; k <= kmax; ++k, rk *= c.r) {
    double s = values[0].real() + ((k % 2) ? -values[half].real() : values[half].real());
    for (int j = 1; j < half; ++j) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(j) * k / c.m;
      s += 2.0 * (values[j] * std::polar(1.0, phase)).real();
    }
    p[k] = s / (c.m * rk);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Laws known through their transform

/// A nonnegative random variable X given by theta -> E[exp(-theta X)], with
/// its atom at zero and, when X lives on delta N, the span delta.
struct TransformLaw {
  std::function<cplx(cplx)> transform;
  double p_zero = 0.0;
  std::optional<double> span;
};

namespace detail {
inline int lattice_floor(double x, double span) { return static_cast<int>(std::floor(x / span + 1e-9)); }

// p_0..p_K of a lattice law by contour inversion.
inline std::vector<double> law_lattice_pmf(const TransformLaw& law, int K, const InversionConfig& cfg) {
  const LatticeContour c = lattice_contour(K, *law.span, cfg);
  const std::vector<cplx> thetas = lattice_inversion_nodes(c);
  std::vector<cplx> values(thetas.size());
  for (std::size_t j = 0; j < thetas.size(); ++j) values[j] = law.transform(thetas[j]);
  return combine_lattice_inversion(values, K, c);
}

inline bool law_is_lattice(const TransformLaw& law, const InversionConfig& cfg) {
  return law.span.has_value() && cfg.method == InversionMethod::Auto;
}
}  // namespace detail

/// P(X <= x), x > 0.
inline double law_cdf(const TransformLaw& law, double x, const InversionConfig& cfg = {}) {
  detail::require(x > 0.0, "law_cdf: x must be > 0");
  if (detail::law_is_lattice(law, cfg)) {
    double total = 0.0;
    for (double p : detail::law_lattice_pmf(law, detail::lattice_floor(x, *law.span), cfg)) total += p;
    return std::clamp(total, 0.0, 1.0);
  }
  return invert_laplace_cdf(law.transform, x, cfg);
}

/// P(X > y), y >= 0; exact at y = 0.
inline double law_prob_greater(const TransformLaw& law, double y, const InversionConfig& cfg = {}) {
  detail::require(y >= 0.0, "law_prob_greater: y must be >= 0");
  if (y == 0.0) return 1.0 - law.p_zero;
  return 1.0 - law_cdf(law, y, cfg);
}

/// P(X < x), x > 0.
inline double law_prob_less(const TransformLaw& law, double x, const InversionConfig& cfg = {}) {
  detail::require(x > 0.0, "law_prob_less: x must be > 0");
  if (detail::law_is_lattice(law, cfg)) {
    const int K = static_cast<int>(std::ceil(x / *law.span - 1e-9)) - 1;
    double total = 0.0;
    for (double p : detail::law_lattice_pmf(law, K, cfg)) total += p;
    return std::clamp(total, 0.0, 1.0);
  }
  return invert_laplace_cdf(law.transform, x, cfg);
}

namespace detail {
// E[min(X, c)] = sum over lattice cells [k delta, (k+1) delta) below c of
// width * P(X > k delta).
inline double law_expected_min_lattice(const TransformLaw& law, double c, const InversionConfig& cfg) {
  const double d = *law.span;
  const int K = static_cast<int>(std::ceil(c / d - 1e-9)) - 1;
  const std::vector<double> p = law_lattice_pmf(law, K, cfg);
  double below = 0.0, total = 0.0;
  for (int k = 0; k <= K; ++k) {
    below += p[k];
    const double width = std::min(d, c - k * d);
    total += width * std::clamp(1.0 - below, 0.0, 1.0);
  }
  return total;
}
}  // namespace detail

/// E[min(X, c)] = int_0^c P(X > y) dy by the composite trapezoid rule with
/// `panels` panels (exact cell sums for lattice laws).
inline double law_expected_min_trapezoid(const TransformLaw& law, double c, const InversionConfig& cfg = {},
                                         int panels = 200) {
  detail::require(c >= 0.0, "expected_min: cap must be >= 0");
  detail::require(panels >= 1, "expected_min: need at least one panel");
  if (c == 0.0) return 0.0;
  if (detail::law_is_lattice(law, cfg)) return detail::law_expected_min_lattice(law, c, cfg);
  const double dy = c / panels;
  double total = 0.5 * (law_prob_greater(law, 0.0, cfg) + law_prob_greater(law, c, cfg));
  for (int j = 1; j < panels; ++j) total += law_prob_greater(law, j * dy, cfg);
  return std::clamp(total * dy, 0.0, c);
}

/// E[min(X, c)] = c - int_0^c P(X <= y) dy, where the integrated CDF is
/// inverted directly from theta -> E[exp(-theta X)] / theta^2.
inline double law_expected_min(const TransformLaw& law, double c, const InversionConfig& cfg = {}) {
  detail::require(c >= 0.0, "expected_min: cap must be >= 0");
  if (c == 0.0) return 0.0;
  if (detail::law_is_lattice(law, cfg)) return detail::law_expected_min_lattice(law, c, cfg);
  const std::vector<cplx> nodes = inversion_nodes(c, cfg);
  std::vector<cplx> values(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) values[k] = law.transform(nodes[k]) / nodes[k];
  const double integrated = combine_inversion(values, c, cfg);
  return std::clamp(c - integrated, 0.0, c);
}

// ---------------------------------------------------------------------------
// Law of L_t

/// Distribution of the cumulative volume L_t of one model, evaluated by
/// inversion of laplace_L. Volterra solves go through a cache, and one set of
/// solves on [0, horizon] yields the CDF at every mesh node for a fixed x.
class VolumeDistribution {
 public:
  explicit VolumeDistribution(HawkesModel model, InversionConfig cfg = {}, SolveCache* cache = nullptr,
                              double density = 25.0, int min_nodes = 150)
      : model_(std::move(model)), cfg_(cfg), cache_(cache), density_(density), min_nodes_(min_nodes) {
    cfg_.validate();
    if (!cache_) {
      own_cache_ = std::make_shared<SolveCache>();
      cache_ = own_cache_.get();
    }
  }

  const HawkesModel& model() const { return model_; }
  const InversionConfig& config() const { return cfg_; }
  SolveCache& cache() const { return *cache_; }
  Mesh mesh_for(double t) const { return Mesh::for_horizon(t, density_, min_nodes_); }

  // Law of L_t read from solves on `mesh`, which must cover [0, t].
  TransformLaw law(double t, const Mesh& mesh) const {
    detail::require(t > 0.0 && mesh.horizon >= t * (1.0 - 1e-12), "law: mesh must cover [0, t]");
    TransformLaw out;
    out.transform = [model = &model_, cache = cache_, t, mesh](cplx th) { return laplace_L(*model, th, t, mesh, cache); };
    out.p_zero = std::exp(-model_.baseline.cumulative(t));
    out.span = model_.marks.lattice_span();
    return out;
  }
  TransformLaw law(double t) const { return law(t, mesh_for(t)); }

  bool uses_lattice_inversion() const {
    return cfg_.method == InversionMethod::Auto && model_.marks.lattice_span().has_value();
  }

  // P(L_t <= x).
  double cdf(double t, double x) const {
    detail::require(t >= 0.0 && x > 0.0, "cdf_L: need t >= 0 and x > 0");
    if (t == 0.0) return 1.0;
    const Mesh mesh = mesh_for(t);
    const std::vector<cplx> thetas = nodes_for(x);
    std::vector<cplx> values(thetas.size());
    for (std::size_t k = 0; k < thetas.size(); ++k) values[k] = laplace_L(model_, thetas[k], t, mesh, cache_);
    return combine(values, x);
  }

  // P(L_{t_i} <= x) at every node of a mesh starting at 0.
  std::vector<double> cdf_on_nodes(double x, const Mesh& mesh) const {
    detail::require(x > 0.0, "cdf_L: x must be > 0");
    const std::vector<cplx> thetas = nodes_for(x);
    std::vector<std::vector<cplx>> values(thetas.size());
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      auto sol = cache_->get_or_solve(model_.kernel, model_.marks, 0.0, thetas[k], mesh);
      values[k] = transform_on_nodes(model_.baseline, *sol);
    }
    std::vector<double> out(mesh.size());
    std::vector<cplx> column(thetas.size());
    out[0] = 1.0;
    for (std::size_t i = 1; i < mesh.size(); ++i) {
      for (std::size_t k = 0; k < thetas.size(); ++k) column[k] = values[k][i];
      out[i] = combine(column, x);
    }
    return out;
  }

  // Threshold at which P(L < x) is read off the inverted CDF.
  double strict_point(double x) const {
    if (auto d = model_.marks.lattice_span()) return std::ceil(x / *d - 1e-9) * *d - 0.5 * *d;
    return x;
  }
  // Threshold at which P(L <= y) is read off.
  double weak_point(double y) const {
    if (auto d = model_.marks.lattice_span()) return std::floor(y / *d + 1e-9) * *d + 0.5 * *d;
    return y;
  }

  // P(L_t < x), x > 0.
  double prob_less(double t, double x) const {
    detail::require(x > 0.0, "prob_less: x must be > 0");
    return cdf(t, strict_point(x));
  }

  // P(L_t > y), y >= 0. The atom at zero is exact: P(L_t > 0) = P(N_t > 0).
  double prob_greater(double t, double y) const {
    detail::require(y >= 0.0 && t >= 0.0, "prob_greater: need t, y >= 0");
    if (t == 0.0) return 0.0;
    if (y == 0.0) return -std::expm1(-model_.baseline.cumulative(t));
    return 1.0 - cdf(t, weak_point(y));
  }

  std::vector<double> prob_less_on_nodes(double x, const Mesh& mesh) const {
    return cdf_on_nodes(strict_point(x), mesh);
  }

  std::vector<double> prob_greater_on_nodes(double y, const Mesh& mesh) const {
    std::vector<double> out(mesh.size());
    if (y == 0.0) {
      for (std::size_t i = 0; i < mesh.size(); ++i)
        out[i] = -std::expm1(-model_.baseline.cumulative(mesh.node(static_cast<int>(i))));
      return out;
    }
    out = cdf_on_nodes(weak_point(y), mesh);
    for (double& v : out) v = 1.0 - v;
    return out;
  }

 private:
  int lattice_index(double x) const {
    return static_cast<int>(std::floor(x / *model_.marks.lattice_span() + 1e-9));
  }
  LatticeContour contour_for(double x) const {
    return lattice_contour(lattice_index(x), *model_.marks.lattice_span(), cfg_);
  }
  std::vector<cplx> nodes_for(double x) const {
    if (uses_lattice_inversion()) return lattice_inversion_nodes(contour_for(x));
    return inversion_nodes(x, cfg_);
  }
  double combine(std::span<const cplx> values, double x) const {
    if (uses_lattice_inversion()) {
      const std::vector<double> p = combine_lattice_inversion(values, lattice_index(x), contour_for(x));
      double total = 0.0;
      for (double v : p) total += v;
      return std::clamp(total, 0.0, 1.0);
    }
    return std::clamp(combine_inversion(values, x, cfg_), 0.0, 1.0);
  }

  HawkesModel model_;
  InversionConfig cfg_;
  SolveCache* cache_ = nullptr;
  std::shared_ptr<SolveCache> own_cache_;
  double density_;
  int min_nodes_;
};

/// P(L_T <= x) by inversion of laplace_L on the given mesh.
inline double cdf_L(const HawkesModel& model, double T, double x, const Mesh& mesh, const InversionConfig& cfg = {},
                    SolveCache* cache = nullptr) {
  detail::require(T > 0.0 && x > 0.0, "cdf_L: need T > 0 and x > 0");
  auto span = model.marks.lattice_span();
  if (cfg.method == InversionMethod::Auto && span) {
    const int K = static_cast<int>(std::floor(x / *span + 1e-9));
    const LatticeContour c = lattice_contour(K, *span, cfg);
    const std::vector<cplx> thetas = lattice_inversion_nodes(c);
    std::vector<cplx> values(thetas.size());
    for (std::size_t k = 0; k < thetas.size(); ++k) values[k] = laplace_L(model, thetas[k], T, mesh, cache);
    double total = 0.0;
    for (double p : combine_lattice_inversion(values, K, c)) total += p;
    return std::clamp(total, 0.0, 1.0);
  }
  return invert_laplace_cdf([&](cplx th) { return laplace_L(model, th, T, mesh, cache); }, x, cfg);
}

}  // namespace hawkes
