#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "hawkes/cache.hpp"
#include "hawkes/errors.hpp"
#include "hawkes/model.hpp"
#include "hawkes/volterra.hpp"

namespace hawkes {

namespace detail {

// int_0^T rate(T - s) g(s) ds with g the linear interpolant of node values.
// Panels are the mesh cells cut at T - b for every jump b of the rate, so the
// trapezoid rule never straddles a discontinuity; within a panel the rate is
// taken as its one-sided limit at each end.
template <class T, class Rate>
T outer_integral(const Rate& rate, std::span<const double> jumps, const Mesh& mesh, std::span<const T> g,
                 double horizon) {
  require(horizon >= 0.0 && horizon <= mesh.horizon * (1.0 + 1e-12), "outer integral beyond the mesh horizon");
  horizon = std::min(horizon, mesh.horizon);
  if (horizon == 0.0) return T{};
  std::vector<double> pts;
  const double dt = mesh.step();
  for (int i = 0; i <= mesh.n && mesh.node(i) < horizon; ++i) pts.push_back(mesh.node(i));
  pts.push_back(horizon);
  bool cut = false;
  for (double b : jumps)
    if (b > 0.0 && b < horizon) pts.push_back(horizon - b), cut = true;
  if (cut) std::sort(pts.begin(), pts.end());

  const double tiny = 1e-13 * (1.0 + horizon);
  T total{};
  for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
    const double a = pts[p], c = pts[p + 1];
    if (c - a <= tiny) continue;
    T ga, gc;
    if (!cut) {
      // Panels coincide with mesh cells except possibly the last one.
      ga = g[p];
      gc = (std::abs(c - mesh.node(static_cast<int>(p) + 1)) <= tiny) ? g[p + 1] : interpolate<T>(mesh, g, c);
    } else {
      ga = interpolate<T>(mesh, g, a);
      gc = interpolate<T>(mesh, g, c);
    }
    (void)dt;
    total += 0.5 * (c - a) * (rate(horizon - a, Side::Left) * ga + rate(horizon - c, Side::Right) * gc);
  }
  return total;
}

inline auto baseline_rate(const BaselineIntensity& b) {
  return [&b](double u, Side side) { return b.value(std::max(u, 0.0), side); };
}

inline std::vector<cplx> minus_one(std::span<const cplx> F) {
  std::vector<cplx> g(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) g[i] = F[i] - 1.0;
  return g;
}

}  // namespace detail

/// exp(int_0^T mu(T-s)(F(s)-1) ds) for a solved F on a mesh covering [0, T].
inline cplx transform_from_solution(const BaselineIntensity& baseline, const TransformSolution& sol, double T) {
  const std::vector<cplx> g = detail::minus_one(sol.values);
  const std::vector<double> jumps = baseline.breakpoints();
  return std::exp(detail::outer_integral<cplx>(detail::baseline_rate(baseline), jumps, sol.mesh,
                                               std::span<const cplx>(g), T));
}

/// The transform at every mesh node t_i (value 1 at t_0). Linear time for a
/// constant baseline, quadratic otherwise.
inline std::vector<cplx> transform_on_nodes(const BaselineIntensity& baseline, const TransformSolution& sol) {
  const Mesh& mesh = sol.mesh;
  std::vector<cplx> out(mesh.size());
  const std::vector<cplx> g = detail::minus_one(sol.values);
  if (auto mu = baseline.constant_value()) {
    cplx acc = 0.0;
    out[0] = 1.0;
    for (int i = 1; i <= mesh.n; ++i) {
      acc += 0.5 * mesh.step() * (*mu) * (g[i - 1] + g[i]);
      out[i] = std::exp(acc);
    }
    return out;
  }
  const std::vector<double> jumps = baseline.breakpoints();
  for (int i = 0; i <= mesh.n; ++i)
    out[i] = std::exp(detail::outer_integral<cplx>(detail::baseline_rate(baseline), jumps, mesh,
                                                   std::span<const cplx>(g), mesh.node(i)));
  return out;
}

/// E[exp(-theta1 N_T - theta2 L_T)].
inline cplx joint_laplace(const HawkesModel& model, cplx theta1, cplx theta2, double T, const Mesh& mesh,
                          SolveCache* cache = nullptr) {
  detail::require(T > 0.0, "joint_laplace: T must be > 0");
  detail::require(mesh.horizon >= T * (1.0 - 1e-12), "joint_laplace: mesh must cover [0, T]");
  auto sol = detail::solve_maybe_cached(cache, model.kernel, model.marks, theta1, theta2, mesh);
  return transform_from_solution(model.baseline, *sol, T);
}

inline cplx joint_laplace(const HawkesModel& model, cplx theta1, cplx theta2, double T) {
  return joint_laplace(model, theta1, theta2, T, Mesh::for_horizon(T));
}

/// E[exp(-theta N_T)].
inline cplx laplace_N(const HawkesModel& model, cplx theta, double T, const Mesh& mesh,
                      SolveCache* cache = nullptr) {
  return joint_laplace(model, theta, 0.0, T, mesh, cache);
}

/// E[exp(-theta L_T)].
inline cplx laplace_L(const HawkesModel& model, cplx theta, double T, const Mesh& mesh,
                      SolveCache* cache = nullptr) {
  return joint_laplace(model, 0.0, theta, T, mesh, cache);
}

// ---------------------------------------------------------------------------
// Moments

struct Moments {
  double mean_N = 0.0;
  double mean_L = 0.0;
  double second_N = 0.0;
  double second_L = 0.0;

  double var_N() const { return second_N - mean_N * mean_N; }
  double var_L() const { return second_L - mean_L * mean_L; }
};

/// The renewal functions behind the first two moments.
struct RenewalFunctions {
  RenewalSolution psi1, psi2, psi3;
};

inline RenewalFunctions renewal_functions(const HawkesModel& model, const Mesh& mesh) {
  const double m1 = model.marks.mean(), m2 = model.marks.second_moment();
  std::vector<double> ones(mesh.size(), 1.0);
  RenewalSolution psi1 = solve_renewal(ones, m1, model.kernel, mesh);
  // Cluster of one event with remaining window t: the offspring count is
  // Poisson with a random mean l * int h, so its second moment carries E[l^2].
  std::vector<double> f2(mesh.size()), f3(mesh.size());
  const double spread = m2 / (m1 * m1);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double p = psi1.values[i];
    f2[i] = 2.0 * p - 1.0 + spread * (p - 1.0) * (p - 1.0);
    f3[i] = m2 * p * p;
  }
  RenewalSolution psi2 = solve_renewal(f2, m1, model.kernel, mesh);
  RenewalSolution psi3 = solve_renewal(f3, m1, model.kernel, mesh);
  return {std::move(psi1), std::move(psi2), std::move(psi3)};
}

inline double baseline_convolution(const BaselineIntensity& baseline, const RenewalSolution& psi, double T) {
  const std::vector<double> jumps = baseline.breakpoints();
  return detail::outer_integral<double>(detail::baseline_rate(baseline), jumps, psi.mesh,
                                        std::span<const double>(psi.values), T);
}

inline Moments moments(const HawkesModel& model, double T, const Mesh& mesh) {
  detail::require(T > 0.0, "moments: T must be > 0");
  RenewalFunctions r = renewal_functions(model, mesh);
  const double m1 = model.marks.mean();
  Moments out;
  out.mean_N = baseline_convolution(model.baseline, r.psi1, T);
  out.mean_L = m1 * out.mean_N;
  out.second_N = baseline_convolution(model.baseline, r.psi2, T) + out.mean_N * out.mean_N;
  out.second_L = baseline_convolution(model.baseline, r.psi3, T) + out.mean_L * out.mean_L;
  return out;
}

inline double mean_N(const HawkesModel& model, double T, const Mesh& mesh) {
  std::vector<double> ones(mesh.size(), 1.0);
  return baseline_convolution(model.baseline, solve_renewal(ones, model.marks.mean(), model.kernel, mesh), T);
}
inline double mean_L(const HawkesModel& model, double T, const Mesh& mesh) {
  return model.marks.mean() * mean_N(model, T, mesh);
}
inline double second_moment_N(const HawkesModel& model, double T, const Mesh& mesh) {
  return moments(model, T, mesh).second_N;
}
inline double second_moment_L(const HawkesModel& model, double T, const Mesh& mesh) {
  return moments(model, T, mesh).second_L;
}

// ---------------------------------------------------------------------------
// Exponential-kernel ODE reference

/// A(t) and B-integral int_0^t A on a uniform fine grid for h = delta e^{-kappa t}:
///   A' = -kappa A - 1 + f(delta A - theta2) e^{-theta1},  A(0) = 0.
struct OdeReference {
  double delta = 0.0, kappa = 1.0;
  cplx theta1{0.0}, theta2{0.0};
  double step = 1e-4;
  std::vector<cplx> A;         // A(j * step)
  std::vector<cplx> integral;  // int_0^{j step} A

  // The Volterra solution recovered from A: F(t) = e^{-theta1} f(delta A(t) - theta2).
  cplx F_at(std::size_t j, const MarkDistribution& marks) const {
    return std::exp(-theta1) * marks.moment_exp(0, delta * A[j] - theta2);
  }
};

inline OdeReference ode_reference_solution(double delta, double kappa, const MarkDistribution& marks, cplx theta1,
                                           cplx theta2, double T, std::size_t steps) {
  detail::require(delta >= 0.0 && kappa > 0.0, "ode reference: need delta >= 0, kappa > 0");
  detail::require(T > 0.0 && steps >= 1, "ode reference: need T > 0 and steps >= 1");
  detail::require(theta1.real() >= 0.0 && theta2.real() >= 0.0, "ode reference: Re(theta) must be >= 0");
  OdeReference ref{delta, kappa, theta1, theta2, T / static_cast<double>(steps), {}, {}};
  detail::require(ref.step <= 1e-4 * (1.0 + 1e-12), "ode reference: step must be <= 1e-4");
  const cplx scale = std::exp(-theta1);
  auto rhs = [&](cplx a) { return -kappa * a - 1.0 + scale * marks.moment_exp(0, delta * a - theta2); };
  ref.A.resize(steps + 1);
  ref.integral.resize(steps + 1);
  cplx a = 0.0, I = 0.0;
  ref.A[0] = a;
  ref.integral[0] = I;
  const double h = ref.step;
  for (std::size_t j = 1; j <= steps; ++j) {
    // Classical RK4 on the pair (A, int A).
    cplx k1 = rhs(a), q1 = a;
    cplx a2 = a + 0.5 * h * k1;
    cplx k2 = rhs(a2), q2 = a2;
    cplx a3 = a + 0.5 * h * k2;
    cplx k3 = rhs(a3), q3 = a3;
    cplx a4 = a + h * k3;
    cplx k4 = rhs(a4), q4 = a4;
    a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    I += h / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || std::abs(a) > 1e8)
      throw NumericalError("ode reference: integration became unstable");
    ref.A[j] = a;
    ref.integral[j] = I;
  }
  return ref;
}

/// exp(mu int_0^T kappa A dt + lambda0 A(T)) for baseline mu + e^{-kappa t}(lambda0 - mu).
inline cplx ode_reference_transform(double delta, double kappa, double mu, double lambda0,
                                    const MarkDistribution& marks, cplx theta1, cplx theta2, double T,
                                    double max_step = 1e-4) {
  detail::require(mu >= 0.0 && lambda0 >= mu, "ode reference: requires lambda0 >= mu >= 0");
  const auto steps = static_cast<std::size_t>(std::ceil(T / max_step - 1e-9));
  OdeReference ref = ode_reference_solution(delta, kappa, marks, theta1, theta2, T, steps);
  return std::exp(mu * kappa * ref.integral.back() + lambda0 * ref.A.back());
}

}  // namespace hawkes
