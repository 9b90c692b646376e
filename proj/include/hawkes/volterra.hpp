#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "hawkes/errors.hpp"
#include "hawkes/model.hpp"

namespace hawkes {

/// Uniform mesh t_i = i T / n on [0, T].
struct Mesh {
  double horizon = 1.0;
  int n = 150;

  Mesh() = default;
  Mesh(double horizon_, int n_) : horizon(horizon_), n(n_) {
    detail::require(horizon > 0.0 && std::isfinite(horizon), "mesh horizon must be > 0");
    detail::require(n >= 2, "mesh needs at least 2 subintervals");
  }

  // max(min_nodes, ceil(density * T)) subintervals.
  static Mesh for_horizon(double T, double density = 25.0, int min_nodes = 150) {
    return Mesh(T, std::max(min_nodes, static_cast<int>(std::ceil(density * T - 1e-9))));
  }

  double step() const { return horizon / n; }
  double node(int i) const { return i == n ? horizon : i * step(); }
  std::size_t size() const { return static_cast<std::size_t>(n) + 1; }
};

namespace detail {

// Piecewise linear interpolation of node values at t in [0, horizon].
template <class T>
T interpolate(const Mesh& mesh, std::span<const T> values, double t) {
  if (t <= 0.0) return values.front();
  if (t >= mesh.horizon) return values.back();
  double pos = t / mesh.step();
  int i = std::min(static_cast<int>(pos), mesh.n - 1);
  double w = pos - i;
  return (1.0 - w) * values[i] + w * values[i + 1];
}

inline std::vector<double> kernel_on_nodes(const ExcitingKernel& kernel, const Mesh& mesh) {
  std::vector<double> h(mesh.size());
  for (int i = 0; i <= mesh.n; ++i) h[i] = kernel.eval_unchecked(mesh.node(i));
  return h;
}

}  // namespace detail

/// Node values of F solving
///   F(t) = e^{-theta1} E[exp(-theta2 l + l int_0^t h(s)(F(t-s)-1) ds)].
struct TransformSolution {
  Mesh mesh;
  std::vector<cplx> values;
  cplx theta1{0.0};
  cplx theta2{0.0};

  cplx at(double t) const { return detail::interpolate<cplx>(mesh, values, t); }
};

struct RenewalSolution {
  Mesh mesh;
  std::vector<double> values;

  double at(double t) const { return detail::interpolate<double>(mesh, values, t); }
};

enum class InitialGuess { PreviousNode, Zero, ExpTheta1 };

struct SolverOptions {
  double tolerance = 1e-12;
  int max_iterations = 200;
  InitialGuess guess = InitialGuess::PreviousNode;
};

// Collocation at the mesh nodes with the convolution integral replaced by the
// trapezoid rule on the piecewise linear interpolant. The right endpoint term
// h(0)(F(t_i)-1) involves the unknown node value and is resolved by fixed-point
// iteration; everything else depends on earlier nodes only.
inline TransformSolution solve_transform_equation(const ExcitingKernel& kernel, const MarkDistribution& marks,
                                                  cplx theta1, cplx theta2, const Mesh& mesh,
                                                  const SolverOptions& opts = {}) {
  detail::require(theta1.real() >= 0.0 && theta2.real() >= 0.0, "transform parameters need Re(theta) >= 0");
  TransformSolution sol{mesh, std::vector<cplx>(mesh.size()), theta1, theta2};
  const cplx scale = std::exp(-theta1);
  sol.values[0] = scale * marks.mgf(-theta2);
  if (kernel.is_zero()) {
    std::fill(sol.values.begin(), sol.values.end(), sol.values[0]);
    return sol;
  }

  const std::vector<double> h = detail::kernel_on_nodes(kernel, mesh);
  const double dt = mesh.step();
  const double implicit_weight = 0.5 * dt * h[0];
  std::vector<cplx>& F = sol.values;

  for (int i = 1; i <= mesh.n; ++i) {
    cplx history = 0.5 * h[i] * (F[0] - 1.0);
    for (int j = 1; j < i; ++j) history += h[j] * (F[i - j] - 1.0);
    const cplx base = -theta2 + dt * history;

    cplx f;
    switch (opts.guess) {
      case InitialGuess::PreviousNode: f = F[i - 1]; break;
      case InitialGuess::Zero: f = 0.0; break;
      case InitialGuess::ExpTheta1: f = scale; break;
    }
    double last_residual = INFINITY;
    bool damped = false, converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
      cplx next = scale * marks.moment_exp(0, base + implicit_weight * (f - 1.0));
      double residual = std::abs(next - f);
      if (residual > last_residual) damped = true;
      f = damped ? 0.5 * (f + next) : next;
      last_residual = residual;
      if (residual < opts.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) throw SolverDivergence(static_cast<std::size_t>(i), "transform fixed point did not converge");
    F[i] = f;
  }
  return sol;
}

inline TransformSolution solve_transform_equation(const HawkesModel& model, cplx theta1, cplx theta2,
                                                  const Mesh& mesh, const SolverOptions& opts = {}) {
  return solve_transform_equation(model.kernel, model.marks, theta1, theta2, mesh, opts);
}

// F_N: the counting-process equation (theta2 = 0).
inline TransformSolution solve_counting_equation(const HawkesModel& model, cplx theta, const Mesh& mesh) {
  return solve_transform_equation(model.kernel, model.marks, theta, 0.0, mesh);
}

// F_L: the volume equation (theta1 = 0).
inline TransformSolution solve_volume_equation(const HawkesModel& model, cplx theta, const Mesh& mesh) {
  return solve_transform_equation(model.kernel, model.marks, 0.0, theta, mesh);
}

/// psi(t) = forcing(t) + weight int_0^t h(t-s) psi(s) ds on the mesh, trapezoid
/// convolution; the diagonal term is solved algebraically at each node.
inline RenewalSolution solve_renewal(std::span<const double> forcing, double weight, const ExcitingKernel& kernel,
                                     const Mesh& mesh) {
  detail::require(forcing.size() == mesh.size(), "renewal forcing must have one value per mesh node");
  detail::require(weight >= 0.0 && std::isfinite(weight), "renewal weight must be >= 0");
  for (double f : forcing) detail::require(std::isfinite(f), "renewal forcing must be finite");
  RenewalSolution sol{mesh, std::vector<double>(forcing.begin(), forcing.end())};
  if (weight == 0.0 || kernel.is_zero()) return sol;

  const std::vector<double> h = detail::kernel_on_nodes(kernel, mesh);
  const double dt = mesh.step();
  const double diagonal = 1.0 - 0.5 * weight * dt * h[0];
  if (diagonal <= 0.0) throw MeshTooCoarse("renewal equation: 1 - weight h(0) dt / 2 <= 0; refine the mesh");
  std::vector<double>& psi = sol.values;
  for (int i = 1; i <= mesh.n; ++i) {
    double conv = 0.5 * h[i] * psi[0];
    for (int j = 1; j < i; ++j) conv += h[j] * psi[i - j];
    psi[i] = (forcing[i] + weight * dt * conv) / diagonal;
  }
  return sol;
}

}  // namespace hawkes
