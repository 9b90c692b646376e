#include <gtest/gtest.h>

#include <cmath>

#include "hawkes/hawkes.hpp"

using namespace hawkes;

namespace {

HawkesModel fig1() {
  return {BaselineIntensity::constant(1.0), ExcitingKernel::power_law(0.9, 2.0), MarkDistribution::exponential(1.0)};
}

MarkDistribution hyper() { return MarkDistribution::hyper_exponential({1.0 / 6.0, 5.0 / 6.0}, {0.2, 5.0}); }

HawkesModel poisson(MarkDistribution marks) {
  return {BaselineIntensity::constant(1.0), ExcitingKernel::zero(), std::move(marks)};
}

double poisson_pmf(double lambda, int k) { return std::exp(-lambda + k * std::log(lambda) - std::lgamma(k + 1.0)); }

bool within(const EstimatorResult& r, double value, double sigmas = 3.0) {
  return std::abs(r.mean - value) <= sigmas * r.standard_error;
}

}  // namespace

TEST(FirstFill, Cdf) {
  EXPECT_NEAR(time_to_first_fill_cdf(fig1(), 1.0), 0.63212, 1e-5);
  EXPECT_EQ(time_to_first_fill_cdf(fig1(), 0.0), 0.0);
  auto mu1 = fig1().with_baseline(BaselineIntensity::piecewise({4.0, 8.0}, {2.0, 0.5, 1.0}));
  EXPECT_NEAR(time_to_first_fill_cdf(mu1, 5.0), 1.0 - std::exp(-8.5), 1e-15);
}

TEST(CompleteFill, Cdf) {
  EXPECT_EQ(time_to_complete_fill_cdf(fig1(), 2.0, 0.0), 0.0);
  const double tail = 1.0 - poisson_pmf(4.0, 0) - poisson_pmf(4.0, 1) - poisson_pmf(4.0, 2);
  EXPECT_NEAR(time_to_complete_fill_cdf(poisson(MarkDistribution::constant(1.0)), 2.5, 4.0), tail, 1e-8);
  EXPECT_NEAR(tail, 0.76190, 1e-5);
}

TEST(CompleteFillProperty, IncreasingInTime) {
  double prev = 0.0;
  for (double t : {6.0, 7.2, 8.4, 10.0}) {
    const double v = time_to_complete_fill_cdf(fig1(), 20.0, t);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(CompleteFillProperty, ComplementsSurvival) {
  VolumeDistribution vd(fig1());
  for (double t : {0.5, 2.0, 5.0})
    for (double x : {0.5, 3.0, 10.0})
      EXPECT_NEAR(time_to_complete_fill_cdf(fig1(), x, t) + vd.prob_less(t, x), 1.0, 1e-8);
}

TEST(ExpectedFillTime, CompoundPoisson) {
  EXPECT_NEAR(expected_time_to_complete_fill(poisson(MarkDistribution::exponential(1.0)), 3.5), 4.5, 5e-3);
  EXPECT_NEAR(expected_time_to_complete_fill(poisson(MarkDistribution::constant(1.0)), 3.5), 4.0, 5e-3);
  EXPECT_GT(expected_time_to_complete_fill(poisson(hyper()), 3.5), 4.5);
}

TEST(ExpectedFillTime, TruncationIsReported) {
  MetricOptions o;
  o.max_horizon = 8.0;
  EXPECT_THROW(expected_time_to_complete_fill(fig1(), 40.0, o), TruncationError);
}

TEST(ExpectedFillTimeProperty, NondecreasingInSize) {
  SolveCache cache;
  MetricOptions o;
  o.cache = &cache;
  double prev = 0.0;
  for (int x = 1; x <= 10; ++x) {
    const double v = expected_time_to_complete_fill(fig1(), x, o);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(FillRate, Limits) {
  EXPECT_EQ(expected_fill_rate(fig1(), 10.0, 0.0), 0.0);
  EXPECT_NEAR(expected_fill_rate(fig1(), 1e-3, 2.0), 1.0 - std::exp(-2.0), 1e-3);
}

TEST(FillRate, MarkOrdering) {
  SolveCache cache;
  MetricOptions o;
  o.cache = &cache;
  const double c = expected_fill_rate(fig1().with_marks(MarkDistribution::constant(1.0)), 10.0, 4.0, o);
  const double e = expected_fill_rate(fig1(), 10.0, 4.0, o);
  const double h = expected_fill_rate(fig1().with_marks(hyper()), 10.0, 4.0, o);
  EXPECT_GE(c, e);
  EXPECT_GE(e, h);
}

TEST(FillRate, MatchesSimulation) {
  const double rate = expected_fill_rate(fig1(), 10.0, 4.0);
  auto est = estimate([](Rng& rng) { return std::min(simulate_thinning(fig1(), 4.0, rng).volume(4.0), 10.0) / 10.0; },
                      100000, 201);
  EXPECT_TRUE(within(est, rate)) << est.mean << " vs " << rate;
}

TEST(FillRate, CurveAndRandomDeadline) {
  const std::vector<double> ts{0.0, 1.0, 2.0, 4.0};
  auto curve = expected_fill_rate_curve(fig1(), 10.0, ts);
  EXPECT_EQ(curve[0], 0.0);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    // The curve shares one mesh on [0, 4], the pointwise call meshes [0, t].
    EXPECT_NEAR(curve[i], expected_fill_rate(fig1(), 10.0, ts[i]), 1e-4);
    EXPECT_GE(curve[i], curve[i - 1]);
  }
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  double mix = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) mix += w[i] * curve[i];
  EXPECT_NEAR(expected_fill_rate_random_deadline(fig1(), 10.0, ts, w), mix, 1e-12);
}

TEST(Conditional, PoissonCollapse) {
  for (double t : {0.5, 2.0})
    for (double l1 : {0.3, 1.0, 4.0}) {
      auto m = poisson(MarkDistribution::exponential(1.0));
      EXPECT_NEAR(cond_prob_k_fills(m, {t, l1}, 2.0, 0), std::exp(-2.0), 1e-14);
      EXPECT_NEAR(cond_prob_k_fills(m, {t, l1}, 2.0, 1), 2.0 * std::exp(-2.0), 1e-12);
    }
}

TEST(ConditionalProperty, AtLeastOneFillIgnoresMarks) {
  const ConditioningEvent ev{2.0, 1.0};
  for (double T : {0.5, 1.0, 2.0, 4.0}) {
    const double a = cond_prob_at_least_one_fill(fig1(), ev, T);
    EXPECT_NEAR(cond_prob_at_least_one_fill(fig1().with_marks(MarkDistribution::constant(1.0)), ev, T), a, 1e-9);
    EXPECT_NEAR(cond_prob_at_least_one_fill(fig1().with_marks(hyper()), ev, T), a, 1e-9);
  }
}

TEST(Conditional, OneFillOrdering) {
  const ConditioningEvent ev{2.0, 1.0};
  const double c = cond_prob_k_fills(fig1().with_marks(MarkDistribution::constant(1.0)), ev, 2.0, 1);
  const double e = cond_prob_k_fills(fig1(), ev, 2.0, 1);
  const double h = cond_prob_k_fills(fig1().with_marks(hyper()), ev, 2.0, 1);
  EXPECT_GE(h, e);
  EXPECT_GE(e, c);
}

TEST(Conditional, ImpossibleEvent) {
  auto m = fig1().with_baseline(BaselineIntensity::constant(0.0));
  EXPECT_THROW(cond_prob_k_fills(m, {2.0, 1.0}, 1.0, 0), ConditioningImpossible);
  EXPECT_THROW(cond_prob_k_fills(fig1(), {0.0, 1.0}, 1.0, 0), InvalidArgument);
}

TEST(ConditionalFillSize, Trivial) {
  EXPECT_EQ(cond_expected_fill_size(fig1(), {2.0, 1.0}, 0.0, 10.0), 0.0);
  auto cp = poisson(MarkDistribution::exponential(1.0));
  // With no excitation the window volume is compound Poisson(1.5) with unit
  // means; its mass above 15 is negligible. 400 panels put the trapezoid
  // error near 4e-5.
  MetricOptions fine;
  fine.fill_rate_panels = 400;
  EXPECT_NEAR(cond_expected_fill_size(cp, {2.0, 1.0}, 1.5, 16.0, fine), 1.5, 1e-4);
  EXPECT_THROW(cond_expected_fill_size(fig1(), {2.0, 1.0}, 1.0, 1.0), InvalidArgument);
}

TEST(ConditionalFillSizeProperty, BoundedAndNondecreasing) {
  const std::vector<double> Ts{0.5, 1.0, 2.0, 3.0, 4.0};
  auto curve = cond_expected_fill_size_curve(fig1(), {2.0, 1.0}, Ts, 10.0);
  double prev = 0.0;
  for (double v : curve) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 9.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_NEAR(curve.back(), cond_expected_fill_size(fig1(), {2.0, 1.0}, 4.0, 10.0), 1e-6);
}

TEST(Conditional, MatchesConditionedSimulation) {
  const ConditioningEvent ev{2.0, 1.0};
  const double T = 2.0, x = 10.0;
  for (auto marks : {MarkDistribution::exponential(1.0), hyper()}) {
    auto m = fig1().with_marks(marks);
    const double p0 = cond_prob_k_fills(m, ev, T, 0);
    const double p1 = cond_prob_k_fills(m, ev, T, 1);
    const double size = cond_expected_fill_size(m, ev, T, x);
    auto est = estimate_vector(
        [&](Rng& rng, double* out) {
          auto p = simulate_conditioned(m, ev.t, ev.l1, T, rng);
          const std::size_t n = p.record.count(ev.t + T) - 1;
          out[0] = n == 0 ? 1.0 : 0.0;
          out[1] = n == 1 ? 1.0 : 0.0;
          out[2] = std::min(p.record.volume(ev.t + T) - ev.l1, x - ev.l1);
        },
        3, 100000, 202);
    EXPECT_TRUE(within(est[0], p0)) << est[0].mean << " vs " << p0;
    EXPECT_TRUE(within(est[1], p1)) << est[1].mean << " vs " << p1;
    EXPECT_TRUE(within(est[2], size)) << est[2].mean << " vs " << size;
  }
}

TEST(Liquidity, WeibullExample) {
  auto Y = LiquidityDistribution::two_sided_weibull(0.3, 1.0);
  EXPECT_NEAR(Y.negative_mass(), 0.35, 1e-15);
  EXPECT_NEAR(Y.positive_mass(), 0.35, 1e-15);
  EXPECT_NEAR(Y.cdf(0.0), 0.65, 1e-12);
  EXPECT_NEAR(Y.cdf(-1.0), 0.35 * std::exp(-1.0), 1e-12);
  EXPECT_THROW(LiquidityDistribution::two_sided_weibull(1.2, 1.0), InvalidArgument);
}

TEST(NonemptyPool, FirstFill) {
  auto Y = LiquidityDistribution::two_sided_weibull(0.3, 1.0);
  auto r0 = nonempty_first_fill(fig1(), Y, 0.0);
  EXPECT_NEAR(r0.p_immediate, 0.35, 1e-15);
  EXPECT_NEAR(r0.survival, 0.65, 1e-15);
  auto z = nonempty_first_fill(fig1(), LiquidityDistribution::point_mass_at_zero(), 1.5);
  EXPECT_EQ(z.p_immediate, 0.0);
  EXPECT_NEAR(1.0 - z.survival, time_to_first_fill_cdf(fig1(), 1.5), 1e-14);
}

TEST(NonemptyPool, ReducesToEmptyPool) {
  auto Y = LiquidityDistribution::point_mass_at_zero();
  for (double t : {1.0, 3.0}) {
    EXPECT_NEAR(nonempty_complete_fill_cdf(fig1(), Y, 5.0, t), time_to_complete_fill_cdf(fig1(), 5.0, t), 1e-10);
    // Direct E[min] inversion against the 200-panel trapezoid: the gap is the
    // trapezoid's own error.
    EXPECT_NEAR(nonempty_expected_fill_rate(fig1(), Y, 10.0, t), expected_fill_rate(fig1(), 10.0, t), 2e-5);
  }
}

TEST(NonemptyPool, FillRateAtPlacement) {
  auto Y = LiquidityDistribution::two_sided_weibull(0.3, 1.0);
  // (1/x) int_0^x P((-Y)^+ > z) dz with P(-Y > z) = 0.35 e^{-z}.
  // 80 quantile-scale Gauss nodes meet the log singularity of the quantile.
  EXPECT_NEAR(nonempty_expected_fill_rate(fig1(), Y, 10.0, 0.0), 0.35 * -std::expm1(-10.0) / 10.0, 2e-5);
  EXPECT_NEAR(nonempty_complete_fill_cdf(fig1(), Y, 10.0, 0.0), 0.35 * std::exp(-10.0), 1e-14);
}

TEST(NonemptyPool, MatchesSimulation) {
  const double x = 10.0, t = 2.0;
  auto Y = LiquidityDistribution::two_sided_weibull(0.3, 1.0);
  const double rate = nonempty_expected_fill_rate(fig1(), Y, x, t);
  const double fill = nonempty_complete_fill_cdf(fig1(), Y, 3.0, t);
  EXPECT_GT(rate, expected_fill_rate(fig1(), x, t));
  const HawkesModel m = fig1();
  auto est = estimate_vector(
      [&](Rng& rng, double* out) {
        // Y: atom 0.3 at zero, Exp(1) magnitude on either side with 0.35 each.
        const double u = uniform_open(rng);
        const double mag = exponential(rng, 1.0);
        const double y = u < 0.3 ? 0.0 : (u < 0.65 ? -mag : mag);
        EventRecord rec;
        double immediate = 0.0;
        if (y < 0.0) {
          // Opposite-side volume trades at once and excites like a fill at time zero.
          immediate = -y;
          rec.times.push_back(0.0);
          rec.marks.push_back(-y);
        }
        auto draw = [&](std::size_t) { return m.marks.sample(rng); };
        detail::thinning_extend(m, rec, 0.0, t, rng, draw, [](const EventRecord&) { return false; });
        const double L = rec.volume(t) - immediate;
        const double traded = y < 0.0 ? immediate + L : std::max(L - y, 0.0);
        out[0] = std::min(traded, x) / x;
        out[1] = (y < 0.0 ? immediate + L : L - y) >= 3.0 ? 1.0 : 0.0;
      },
      2, 100000, 203);
  EXPECT_TRUE(within(est[0], rate)) << est[0].mean << " vs " << rate;
  EXPECT_TRUE(within(est[1], fill)) << est[1].mean << " vs " << fill;
}

TEST(CompoundPoisson, ClosedForms) {
  auto e = compound_poisson_expected_fill_time(MarkDistribution::exponential(1.0), 1.0, 3.5);
  EXPECT_DOUBLE_EQ(e.value, 4.5);
  EXPECT_TRUE(e.exact);
  auto c = compound_poisson_expected_fill_time(MarkDistribution::constant(1.0), 1.0, 3.5);
  EXPECT_DOUBLE_EQ(c.value, 4.0);
  auto h = compound_poisson_expected_fill_time(hyper(), 1.0, 3.5);
  EXPECT_DOUBLE_EQ(h.value, 4.5);
  EXPECT_FALSE(h.exact);
  ASSERT_TRUE(h.upper_bound.has_value());
  EXPECT_GT(*h.upper_bound, h.value);
  auto lat = compound_poisson_expected_fill_time(MarkDistribution::lattice(1.0, {1.0}), 2.0, 3.5);
  EXPECT_DOUBLE_EQ(lat.value, 2.0);
}

TEST(CompoundPoisson, AgreesWithTransformRoute) {
  for (double x : {0.5, 2.0, 3.5}) {
    auto lat = MarkDistribution::lattice(1.0, {0.5, 0.5});
    EXPECT_NEAR(expected_time_to_complete_fill(poisson(lat), x),
                compound_poisson_expected_fill_time(lat, 1.0, x).value, 5e-3);
  }
}

TEST(KernelDominance, SteeperKernelFillsSlower) {
  SolveCache cache;
  MetricOptions o;
  o.cache = &cache;
  auto g2 = fig1(), g3 = fig1().with_kernel(ExcitingKernel::power_law(0.9, 3.0));
  for (double t : {1.0, 3.0, 6.0}) EXPECT_LE(expected_fill_rate(g3, 10.0, t, o), expected_fill_rate(g2, 10.0, t, o) + 2e-3);
  for (double x : {1.0, 5.0})
    EXPECT_GE(expected_time_to_complete_fill(g3, x, o), expected_time_to_complete_fill(g2, x, o) - 2e-3);
}
