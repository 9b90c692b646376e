#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hawkes/hawkes.hpp"

using namespace hawkes;

namespace {

HawkesModel fig1() {
  return {BaselineIntensity::constant(1.0), ExcitingKernel::power_law(0.9, 2.0), MarkDistribution::exponential(1.0)};
}

HawkesModel poisson(MarkDistribution marks = MarkDistribution::constant(1.0)) {
  return {BaselineIntensity::constant(1.0), ExcitingKernel::zero(), std::move(marks)};
}

MarkDistribution hyper() { return MarkDistribution::hyper_exponential({1.0 / 6.0, 5.0 / 6.0}, {0.2, 5.0}); }

}  // namespace

TEST(JointLaplace, Trivial) {
  EXPECT_EQ(joint_laplace(fig1(), 0.0, 0.0, 2.0), cplx(1.0));
  EXPECT_NEAR(std::abs(joint_laplace(poisson(), std::log(2.0), 0.0, 1.0) - std::exp(-0.5)), 0.0, 1e-15);
}

TEST(JointLaplace, MatchesOdeOracle) {
  HawkesModel m{BaselineIntensity::exponential_decay(1.0, 2.0, 0.5, 1.0), ExcitingKernel::exponential(0.5, 1.0),
                MarkDistribution::exponential(1.0)};
  const cplx ref = ode_reference_transform(0.5, 1.0, 1.0, 2.0, m.marks, 1.0, 0.5, 3.0);
  EXPECT_NEAR(std::abs(joint_laplace(m, 1.0, 0.5, 3.0, Mesh(3.0, 600)) - ref), 0.0, 1e-6);
}

TEST(JointLaplace, SingleTransformsAreSpecialCases) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> re(0.0, 2.0), im(-5.0, 5.0);
  Mesh mesh(2.0, 150);
  for (int i = 0; i < 10; ++i) {
    const cplx th(re(gen), im(gen));
    EXPECT_LE(std::abs(laplace_N(fig1(), th, 2.0, mesh) - joint_laplace(fig1(), th, 0.0, 2.0, mesh)), 1e-12);
    EXPECT_LE(std::abs(laplace_L(fig1(), th, 2.0, mesh) - joint_laplace(fig1(), 0.0, th, 2.0, mesh)), 1e-12);
  }
  EXPECT_EQ(laplace_L(fig1(), 0.0, 2.0, mesh), cplx(1.0));
  auto cp = poisson(MarkDistribution::exponential(1.0));
  EXPECT_NEAR(std::abs(laplace_L(cp, 1.0, 1.0, Mesh(1.0, 150)) - std::exp(-0.5)), 0.0, 1e-15);
}

TEST(JointLaplace, PiecewiseBaselinePoisson) {
  auto m = poisson().with_baseline(BaselineIntensity::piecewise({4.0, 8.0}, {2.0, 0.5, 1.0}));
  for (double T : {3.0, 4.0, 5.5, 10.0}) {
    const double Lambda = m.baseline.cumulative(T);
    const cplx th(0.7, 1.3);
    const cplx exact = std::exp(Lambda * (std::exp(-th) - 1.0));
    EXPECT_NEAR(std::abs(laplace_N(m, th, T, Mesh::for_horizon(T)) - exact), 0.0, 1e-12) << T;
  }
}

TEST(OdeReference, Trivial) {
  auto marks = MarkDistribution::exponential(1.0);
  EXPECT_NEAR(std::abs(ode_reference_transform(0.5, 1.0, 1.0, 2.0, marks, 0.0, 0.0, 3.0) - 1.0), 0.0, 1e-15);
  auto ref = ode_reference_solution(0.5, 1.0, marks, 0.0, 0.0, 1.0, 10000);
  for (const cplx& a : ref.A) EXPECT_EQ(a, cplx(0.0));
  EXPECT_EQ(ref.A[0], cplx(0.0));
  EXPECT_EQ(ref.integral[0], cplx(0.0));
}

TEST(OdeReference, DecoupledWhenDeltaIsZero) {
  auto marks = MarkDistribution::exponential(1.0);
  const double mu = 1.0, l0 = 2.0, kappa = 1.0, T = 3.0;
  const cplx t1(0.4, 0.2), t2(0.9, -0.3);
  const cplx c = std::exp(-t1) * marks.mgf(-t2);
  const double Lambda = mu * T + (l0 - mu) * (1.0 - std::exp(-kappa * T)) / kappa;
  const cplx expected = std::exp(Lambda * (c - 1.0));
  EXPECT_NEAR(std::abs(ode_reference_transform(0.0, kappa, mu, l0, marks, t1, t2, T) - expected), 0.0, 1e-10);
}

TEST(OdeReference, RefusesLambdaBelowMu) {
  EXPECT_THROW(ode_reference_transform(0.5, 1.0, 2.0, 1.0, MarkDistribution::exponential(1.0), 1.0, 0.0, 1.0),
               InvalidArgument);
}

TEST(Moments, Poisson) {
  Mesh mesh(2.0, 150);
  EXPECT_NEAR(mean_N(poisson(), 2.0, mesh), 2.0, 1e-14);
  EXPECT_NEAR(second_moment_N(poisson(), 2.0, mesh), 6.0, 1e-13);
  EXPECT_NEAR(second_moment_L(poisson(MarkDistribution::exponential(1.0)), 1.0, Mesh(1.0, 150)), 3.0, 1e-13);
}

TEST(Moments, ExponentialKernelClosedForm) {
  HawkesModel m{BaselineIntensity::constant(1.0), ExcitingKernel::exponential(1.0, 1.0),
                MarkDistribution::exponential(0.5)};
  const double exact = 2.0 - 2.0 * (1.0 - std::exp(-0.5));
  EXPECT_NEAR(mean_N(m, 1.0, Mesh(1.0, 400)), exact, 1e-6);
  EXPECT_NEAR(mean_N(m, 1.0, Mesh(1.0, 150)), 1.2131, 1e-4);
}

TEST(Moments, MeanVolumeIdentity) {
  for (auto marks : {MarkDistribution::exponential(2.0), hyper(), MarkDistribution::lattice(0.5, {0.3, 0.7})}) {
    auto m = fig1().with_marks(marks);
    Mesh mesh(3.0, 150);
    EXPECT_NEAR(mean_L(m, 3.0, mesh) / mean_N(m, 3.0, mesh), marks.mean(), 1e-14);
  }
}

TEST(MomentsProperty, VarianceNonnegative) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> C(0.05, 0.9), g(1.5, 4.0), mu(0.1, 3.0), mean(0.2, 1.0);
  for (int i = 0; i < 25; ++i) {
    HawkesModel m{BaselineIntensity::constant(mu(gen)), ExcitingKernel::power_law(C(gen), g(gen)),
                  MarkDistribution::exponential(mean(gen))};
    auto mo = moments(m, 3.0, Mesh(3.0, 150));
    EXPECT_GE(mo.var_N(), 0.0);
    EXPECT_GE(mo.var_L(), 0.0);
  }
}

TEST(TransformProperty, ModulusAtMostOne) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> re(0.0, 2.0), im(-8.0, 8.0);
  Mesh mesh(2.0, 150);
  for (int i = 0; i < 30; ++i) {
    const cplx t1(re(gen), im(gen)), t2(re(gen), im(gen));
    const double a = std::abs(joint_laplace(fig1(), t1, t2, 2.0, mesh));
    EXPECT_LE(a, 1.0 + 1e-12);
    if (std::abs(t1) + std::abs(t2) > 0.05) {
      EXPECT_LT(a, 1.0 - 1e-10);
    }
  }
  EXPECT_NEAR(std::abs(joint_laplace(fig1(), 0.0, 0.0, 2.0, mesh)), 1.0, 1e-10);
}

TEST(TransformProperty, DerivativesGiveMoments) {
  const double T = 2.0;
  Mesh mesh(T, 150);
  for (auto m : {fig1(), fig1().with_marks(hyper())}) {
    auto mo = moments(m, T, mesh);
    auto fN = [&](double th) { return laplace_N(m, th, T, mesh).real(); };
    auto fL = [&](double th) { return laplace_L(m, th, T, mesh).real(); };
    // One-sided stencils: the transform is only defined for Re(theta) >= 0.
    const double h = 1e-4;
    const double dN = (-3.0 * fN(0.0) + 4.0 * fN(h) - fN(2.0 * h)) / (2.0 * h);
    const double dL = (-3.0 * fL(0.0) + 4.0 * fL(h) - fL(2.0 * h)) / (2.0 * h);
    EXPECT_NEAR(-dN / mo.mean_N, 1.0, 1e-4);
    EXPECT_NEAR(-dL / mo.mean_L, 1.0, 1e-4);
    // Heavy hyper-exponential tails make the O(k^2) stencil error visible at k = 1e-3.
    const double k = 2.5e-4;
    const double d2N = (2.0 * fN(0.0) - 5.0 * fN(k) + 4.0 * fN(2.0 * k) - fN(3.0 * k)) / (k * k);
    const double d2L = (2.0 * fL(0.0) - 5.0 * fL(k) + 4.0 * fL(2.0 * k) - fL(3.0 * k)) / (k * k);
    EXPECT_NEAR(d2N / mo.second_N, 1.0, 1e-3);
    EXPECT_NEAR(d2L / mo.second_L, 1.0, 1e-3);
  }
}

TEST(MomentsProperty, CountMomentsAndMarkSpread) {
  // E[N] sees only the mark mean; E[N^2] grows with the mark second moment.
  Mesh mesh(4.0, 150);
  std::vector<Moments> mo;
  for (auto marks : {MarkDistribution::constant(1.0), MarkDistribution::exponential(1.0), hyper()})
    mo.push_back(moments(fig1().with_marks(marks), 4.0, mesh));
  for (const auto& m : mo) EXPECT_NEAR(m.mean_N, mo[0].mean_N, 1e-12);
  EXPECT_LT(mo[0].second_N, mo[1].second_N);
  EXPECT_LT(mo[1].second_N, mo[2].second_N);
}
