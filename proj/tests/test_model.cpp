#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hawkes/hawkes.hpp"

using namespace hawkes;

namespace {

MarkDistribution hyper() { return MarkDistribution::hyper_exponential({1.0 / 6.0, 5.0 / 6.0}, {0.2, 5.0}); }

std::vector<ExcitingKernel> sample_kernels() {
  return {ExcitingKernel::power_law(0.9, 2.0), ExcitingKernel::power_law(0.9, 3.0),
          ExcitingKernel::exponential(0.9, 1.0), ExcitingKernel::exponential(2.0, 4.0),
          ExcitingKernel::tabulated({0.0, 1.0, 2.5, 4.0}, {0.8, 0.5, 0.1, 0.0})};
}

std::vector<MarkDistribution> sample_marks() {
  return {MarkDistribution::constant(1.0), MarkDistribution::exponential(1.0), hyper(),
          MarkDistribution::lattice(1.0, {0.5, 0.5}), MarkDistribution::lattice(0.5, {0.2, 0.3, 0.5})};
}

}  // namespace

TEST(Kernel, PointValues) {
  EXPECT_DOUBLE_EQ(ExcitingKernel::power_law(0.9, 2.0)(0.0), 0.9);
  EXPECT_DOUBLE_EQ(ExcitingKernel::exponential(1.0, 1.0)(0.0), 1.0);
  EXPECT_DOUBLE_EQ(ExcitingKernel::power_law(0.9, 2.0)(1.0), 0.225);
  EXPECT_THROW(ExcitingKernel::power_law(0.9, 2.0)(-0.1), InvalidArgument);
}

TEST(Kernel, L1Norms) {
  EXPECT_DOUBLE_EQ(ExcitingKernel::power_law(0.9, 2.0).l1_norm(), 0.9);
  EXPECT_DOUBLE_EQ(ExcitingKernel::exponential(2.0, 4.0).l1_norm(), 0.5);
  EXPECT_NEAR(ExcitingKernel::power_law(0.9, 3.0).l1_norm(), 0.45, 1e-15);
  // Trapezoid of the interpolant: 0.5*(0.8+0.5) + 0.75*(0.5+0.1) + 0.75*0.1.
  EXPECT_NEAR(sample_kernels()[4].l1_norm(), 0.65 + 0.45 + 0.075, 1e-14);
}

TEST(Kernel, NonDecayingTableHasNoNorm) {
  auto k = ExcitingKernel::tabulated({0.0, 1.0}, {1.0, 0.5});
  EXPECT_THROW(k.l1_norm(), NormUndefined);
}

TEST(Kernel, RejectsBadParameters) {
  EXPECT_THROW(ExcitingKernel::power_law(0.9, 1.0), InvalidArgument);
  EXPECT_THROW(ExcitingKernel::exponential(1.0, 0.0), InvalidArgument);
  EXPECT_THROW(ExcitingKernel::tabulated({0.0, 1.0}, {1.0, -0.1}), InvalidArgument);
  EXPECT_THROW(ExcitingKernel::tabulated({0.0, 0.0}, {1.0, 0.0}), InvalidArgument);
}

TEST(KernelProperty, NonnegativeOnGrid) {
  for (const auto& k : sample_kernels())
    for (int i = 0; i <= 1000; ++i) EXPECT_GE(k(0.1 * i), 0.0);
}

TEST(KernelProperty, PowerLawNormIdentity) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> C(0.01, 5.0), g(1.05, 6.0);
  for (int i = 0; i < 200; ++i) {
    const double c = C(gen), gamma = g(gen);
    EXPECT_NEAR(ExcitingKernel::power_law(c, gamma).l1_norm() * (gamma - 1.0) / c, 1.0, 4e-16);
  }
}

TEST(KernelProperty, IntegralMatchesQuadrature) {
  for (const auto& k : sample_kernels()) {
    for (double t : {0.3, 1.7, 5.0}) {
      const double q = integrate_gauss([&](double s) { return k(s); }, 0.0, t, std::vector<double>{1.0, 2.5, 4.0}, 64);
      EXPECT_NEAR(k.integral(t), q, 1e-10);
    }
  }
}

TEST(Baseline, PointValues) {
  auto mu1 = BaselineIntensity::piecewise({4.0, 8.0}, {2.0, 0.5, 1.0});
  EXPECT_DOUBLE_EQ(mu1(2.0), 2.0);
  EXPECT_DOUBLE_EQ(mu1(5.0), 0.5);
  EXPECT_DOUBLE_EQ(mu1(9.0), 1.0);
  EXPECT_DOUBLE_EQ(BaselineIntensity::constant(1.0)(123.0), 1.0);
  auto aug = BaselineIntensity::augmented(BaselineIntensity::constant(1.0), 1.0, ExcitingKernel::power_law(0.9, 2.0));
  EXPECT_DOUBLE_EQ(aug(0.0), 1.9);
}

TEST(Baseline, RightContinuousWithLeftLimits) {
  auto mu1 = BaselineIntensity::piecewise({4.0, 8.0}, {2.0, 0.5, 1.0});
  EXPECT_DOUBLE_EQ(mu1(4.0), 0.5);
  EXPECT_DOUBLE_EQ(mu1.value(4.0, Side::Left), 2.0);
  EXPECT_DOUBLE_EQ(mu1.value(8.0, Side::Left), 0.5);
}

TEST(Baseline, ExactIntegrals) {
  auto mu1 = BaselineIntensity::piecewise({4.0, 8.0}, {2.0, 0.5, 1.0});
  EXPECT_DOUBLE_EQ(mu1.cumulative(5.0), 8.5);
  EXPECT_DOUBLE_EQ(mu1.cumulative(10.0), 12.0);
  EXPECT_DOUBLE_EQ(mu1.integral(3.0, 9.0), 2.0 + 2.0 + 1.0);
  auto dec = BaselineIntensity::exponential_decay(1.0, 2.0, 0.5, 1.0);
  EXPECT_NEAR(dec(0.0), 2.0, 1e-15);
  EXPECT_NEAR(dec.cumulative(3.0), 3.0 + (1.0 - std::exp(-3.0)), 1e-14);
}

TEST(Baseline, RejectsBadParameters) {
  EXPECT_THROW(BaselineIntensity::constant(-1.0), InvalidArgument);
  EXPECT_THROW(BaselineIntensity::piecewise({4.0, 3.0}, {1.0, 1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(BaselineIntensity::piecewise({4.0}, {1.0}), InvalidArgument);
  EXPECT_THROW(BaselineIntensity::constant(1.0)(-1.0), InvalidArgument);
}

TEST(Marks, Mgf) {
  EXPECT_NEAR(std::abs(MarkDistribution::exponential(1.0).mgf(-1.0) - 0.5), 0.0, 1e-16);
  EXPECT_EQ(MarkDistribution::constant(1.0).mgf(0.0), cplx(1.0));
  const double expected = (1.0 / 6.0) * (0.2 / 1.2) + (5.0 / 6.0) * (5.0 / 6.0);
  EXPECT_NEAR(hyper().mgf(-1.0).real(), expected, 1e-15);
  EXPECT_NEAR(hyper().mgf(-1.0).real(), 0.7222, 1e-4);
  EXPECT_THROW(hyper().mgf(0.1), InvalidArgument);
}

TEST(Marks, Moments) {
  EXPECT_DOUBLE_EQ(MarkDistribution::exponential(1.0).mean(), 1.0);
  EXPECT_DOUBLE_EQ(MarkDistribution::exponential(1.0).second_moment(), 2.0);
  EXPECT_DOUBLE_EQ(MarkDistribution::constant(1.0).mean(), 1.0);
  EXPECT_DOUBLE_EQ(MarkDistribution::constant(1.0).second_moment(), 1.0);
  EXPECT_NEAR(hyper().mean(), 1.0, 1e-15);
  EXPECT_NEAR(hyper().second_moment(), (1.0 / 6.0) * 50.0 + (5.0 / 6.0) * 0.08, 1e-13);
}

TEST(Marks, Sampling) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(MarkDistribution::constant(2.0).sample(rng), 2.0);
  auto lat = MarkDistribution::lattice(1.0, {0.5, 0.5});
  for (int i = 0; i < 1000; ++i) {
    const double v = lat.sample(rng);
    EXPECT_TRUE(v == 1.0 || v == 2.0);
  }
  auto r = estimate([](Rng& g) { return MarkDistribution::exponential(1.0).sample(g); }, 1000000, 3);
  EXPECT_NEAR(r.mean, 1.0, 0.005);
  auto h = estimate([](Rng& g) { return hyper().sample(g); }, 1000000, 4);
  EXPECT_NEAR(h.mean, 1.0, 3.0 * h.standard_error + 1e-12);
}

TEST(Marks, RejectsBadParameters) {
  EXPECT_THROW(MarkDistribution::constant(0.0), InvalidArgument);
  EXPECT_THROW(MarkDistribution::exponential(-1.0), InvalidArgument);
  EXPECT_THROW(MarkDistribution::hyper_exponential({0.5, 0.4}, {1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(MarkDistribution::lattice(1.0, {0.5, 0.6}), InvalidArgument);
}

TEST(MarksProperty, MgfBoundedOnLaplaceAxis) {
  for (const auto& m : sample_marks())
    for (double th : {0.0, 0.01, 0.5, 1.0, 3.0, 50.0}) {
      const cplx v = m.mgf(-th);
      EXPECT_NEAR(v.imag(), 0.0, 1e-15);
      EXPECT_GT(v.real(), 0.0);
      EXPECT_LE(v.real(), 1.0 + 1e-15);
    }
}

TEST(MarksProperty, MgfAtZeroIsOne) {
  for (const auto& m : sample_marks()) EXPECT_EQ(m.mgf(0.0), cplx(1.0));
}

TEST(MarksProperty, MgfDerivativeIsMean) {
  // Central difference straddles 0, so it goes through the unchecked moment_exp.
  const double h = 1e-5;
  for (const auto& m : sample_marks()) {
    const double d = (m.moment_exp(0, h).real() - m.moment_exp(0, -h).real()) / (2.0 * h);
    EXPECT_NEAR(d / m.mean(), 1.0, 1e-6);
  }
}

TEST(MarksProperty, ExponentialMomentsMatchDerivatives) {
  for (const auto& m : sample_marks()) {
    const cplx w(-0.7, 0.3);
    const double h = 1e-5;
    const cplx d = (m.mgf(w + h) - m.mgf(w - h)) / (2.0 * h);
    EXPECT_NEAR(std::abs(m.moment_exp(1, w) - d), 0.0, 1e-7);
    EXPECT_NEAR(std::abs(m.moment_exp(0, w) - m.mgf(w)), 0.0, 1e-15);
  }
}

TEST(Model, BranchingRatio) {
  HawkesModel m{BaselineIntensity::constant(1.0), ExcitingKernel::power_law(0.9, 2.0), hyper()};
  EXPECT_NEAR(m.branching_ratio(), 0.9, 1e-15);
}
