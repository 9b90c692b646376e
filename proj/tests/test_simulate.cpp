#include <gtest/gtest.h>

#include <cmath>

#include "hawkes/hawkes.hpp"
#include "stats.hpp"

using namespace hawkes;

namespace {

HawkesModel fig1() {
  return {BaselineIntensity::constant(1.0), ExcitingKernel::power_law(0.9, 2.0), MarkDistribution::exponential(1.0)};
}

HawkesModel poisson() {
  return {BaselineIntensity::constant(1.0), ExcitingKernel::zero(), MarkDistribution::exponential(1.0)};
}

bool within(const EstimatorResult& r, double value, double sigmas = 3.0) {
  return std::abs(r.mean - value) <= sigmas * r.standard_error;
}

void expect_valid_record(const EventRecord& rec, double horizon) {
  ASSERT_EQ(rec.times.size(), rec.marks.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    EXPECT_GT(rec.times[i], 0.0);
    EXPECT_LE(rec.times[i], horizon);
    EXPECT_GT(rec.marks[i], 0.0);
    if (i > 0) {
      EXPECT_GT(rec.times[i], rec.times[i - 1]);
    }
  }
}

}  // namespace

TEST(Thinning, PoissonRate) {
  Rng rng = substream(1, 0);
  auto rec = simulate_thinning(poisson(), 1e4, rng);
  EXPECT_NEAR(rec.size() / 1e4, 1.0, 0.03);
  expect_valid_record(rec, 1e4);
}

TEST(Thinning, EmptyBaseline) {
  Rng rng = substream(1, 1);
  auto m = fig1().with_baseline(BaselineIntensity::constant(0.0));
  EXPECT_EQ(simulate_thinning(m, 10.0, rng).size(), 0u);
  EXPECT_EQ(simulate_cluster(m, 10.0, rng).size(), 0u);
}

TEST(Thinning, RejectsNonMonotoneKernel) {
  Rng rng = substream(1, 2);
  auto m = fig1().with_kernel(ExcitingKernel::tabulated({0.0, 1.0, 2.0}, {0.2, 0.5, 0.0}));
  EXPECT_THROW(simulate_thinning(m, 5.0, rng), BoundInvalid);
  // The cluster construction needs no bound.
  EXPECT_NO_THROW(simulate_cluster(m, 5.0, rng));
}

TEST(Thinning, PiecewiseBaselineCounts) {
  auto m = poisson().with_baseline(BaselineIntensity::piecewise({4.0, 8.0}, {2.0, 0.5, 1.0}));
  auto est = estimate_vector(
      [&](Rng& rng, double* out) {
        auto rec = simulate_thinning(m, 10.0, rng);
        out[0] = static_cast<double>(rec.count(4.0));
        out[1] = static_cast<double>(rec.count(8.0) - rec.count(4.0));
      },
      2, 20000, 5);
  EXPECT_TRUE(within(est[0], 8.0));
  EXPECT_TRUE(within(est[1], 2.0));
}

TEST(Cluster, PoissonImmigrantsOnly) {
  auto est = estimate([](Rng& rng) { return static_cast<double>(simulate_cluster(poisson(), 3.0, rng).size()); },
                      100000, 6);
  EXPECT_TRUE(within(est, 3.0));
  EXPECT_NEAR(est.standard_error * std::sqrt(1e5), std::sqrt(3.0), 0.02);
}

TEST(Cluster, Tree) {
  Rng rng = substream(2, 0);
  auto nodes = simulate_cluster_tree(fig1(), 5.0, rng);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.parent == ClusterNode::npos) {
      EXPECT_EQ(n.generation, 0u);
    } else {
      EXPECT_GT(n.birth_time, nodes[n.parent].birth_time);
      EXPECT_EQ(n.generation, nodes[n.parent].generation + 1);
    }
    for (std::size_t c : n.children) EXPECT_EQ(nodes[c].parent, i);
    EXPECT_LE(n.birth_time, 5.0);
  }
  Rng again = substream(2, 0);
  expect_valid_record(simulate_cluster(fig1(), 5.0, again), 5.0);
}

TEST(Cluster, DetectsExplosion) {
  Rng rng = substream(3, 0);
  auto m = fig1().with_kernel(ExcitingKernel::exponential(5.0, 1.0));
  ClusterOptions opt;
  opt.max_nodes = 100000;
  EXPECT_THROW(simulate_cluster(m, 50.0, rng, opt), ExplosionError);
}

TEST(Cluster, PowerLawOffsets) {
  for (double gamma : {2.0, 3.0}) {
    auto k = ExcitingKernel::power_law(0.9, gamma);
    Rng rng = substream(4, static_cast<std::uint64_t>(gamma));
    std::vector<double> xs(100000);
    for (double& x : xs) x = k.sample_offset(rng);
    const double d = teststats::ks_one_sample(xs, [&](double t) { return 1.0 - std::pow(1.0 + t, 1.0 - gamma); });
    EXPECT_LT(d, teststats::ks_critical_one(xs.size()));
  }
}

TEST(Cluster, TabulatedOffsets) {
  auto k = ExcitingKernel::tabulated({0.0, 1.0, 3.0}, {1.0, 0.5, 0.0});
  Rng rng = substream(4, 10);
  std::vector<double> xs(100000);
  for (double& x : xs) x = k.sample_offset(rng);
  const double d = teststats::ks_one_sample(xs, [&](double t) { return k.integral(t) / k.l1_norm(); });
  EXPECT_LT(d, teststats::ks_critical_one(xs.size()));
}

TEST(Samplers, MatchTransformMoments) {
  const double mean = mean_N(fig1(), 2.0, Mesh(2.0, 600));
  for (Sampler s : {Sampler::Thinning, Sampler::Cluster}) {
    auto est = estimate_vector(
        [&](Rng& rng, double* out) {
          auto rec = detail::sample_path(fig1(), 2.0, s, rng);
          out[0] = static_cast<double>(rec.count(2.0));
          out[1] = rec.volume(2.0);
        },
        2, 200000, 7);
    EXPECT_TRUE(within(est[0], mean)) << est[0].mean << " vs " << mean;
    EXPECT_TRUE(within(est[1], mean * fig1().marks.mean())) << est[1].mean;
  }
}

TEST(Samplers, TimeRescaling) {
  // Compensator increments between events of a correct sampler are unit exponential.
  auto m = fig1().with_kernel(ExcitingKernel::exponential(0.8, 1.0));
  Rng rng = substream(8, 0);
  auto rec = simulate_thinning(m, 2500.0, rng);
  ASSERT_GT(rec.size(), 10000u);
  std::vector<double> gaps;
  double prev = 0.0;
  for (std::size_t i = 0; i < 10000; ++i) {
    const double c = compensator(m, rec, rec.times[i]);
    gaps.push_back(c - prev);
    prev = c;
  }
  const double d = teststats::ks_one_sample(gaps, [](double g) { return 1.0 - std::exp(-g); });
  EXPECT_LT(d, teststats::ks_critical_one(gaps.size()));
}

TEST(Conditioned, PinnedMarkPaths) {
  Rng rng = substream(9, 0);
  for (int i = 0; i < 100; ++i) {
    auto p = simulate_conditioned(fig1(), 2.0, 1.5, 3.0, rng);
    EXPECT_EQ(p.record.count(2.0), 1u);
    EXPECT_EQ(p.record.marks[0], 1.5);
    EXPECT_GE(p.attempts, 1u);
    expect_valid_record(p.record, 5.0);
  }
}

TEST(Conditioned, EpsilonBandAgreesWithFormula) {
  const ConditioningEvent ev{2.0, 1.0};
  const double p0 = cond_prob_k_fills(fig1(), ev, 2.0, 0);
  ConditionedOptions opt;
  opt.mode = ConditioningMode::EpsilonBand;
  opt.epsilon = 0.01;
  auto est = estimate(
      [&](Rng& rng) {
        auto p = simulate_conditioned(fig1(), ev.t, ev.l1, 2.0, rng, opt);
        return p.record.count(4.0) == 1 ? 1.0 : 0.0;
      },
      10000, 10);
  EXPECT_TRUE(within(est, p0)) << est.mean << " vs " << p0;
}

TEST(Conditioned, ImpossibleEventGivesUp) {
  Rng rng = substream(9, 1);
  ConditionedOptions opt;
  opt.max_attempts = 50;
  auto m = fig1().with_baseline(BaselineIntensity::constant(0.0));
  EXPECT_THROW(simulate_conditioned(m, 2.0, 1.0, 1.0, rng, opt), ConditioningImpossible);
}

TEST(Estimator, PoissonMean) {
  auto r = estimate(poisson(), [](const EventRecord& rec) { return static_cast<double>(rec.count(1.0)); }, 1.0,
                    1000000, 11);
  EXPECT_NEAR(r.mean, 1.0, 0.003);
  EXPECT_EQ(r.n, 1000000u);
  EXPECT_EQ(r.seed, 11u);
}

TEST(Estimator, ScheduleIndependent) {
  auto f = [](Rng& rng) { return simulate_thinning(fig1(), 2.0, rng).volume(2.0); };
  EstimatorOptions one, many;
  one.threads = 1;
  many.threads = 4;
  auto a = estimate(f, 20000, 12, one);
  auto b = estimate(f, 20000, 12, many);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.standard_error, b.standard_error);
  Rng r1 = substream(12, 77), r2 = substream(12, 77);
  auto p1 = simulate_cluster(fig1(), 3.0, r1), p2 = simulate_cluster(fig1(), 3.0, r2);
  EXPECT_EQ(p1.times, p2.times);
  EXPECT_EQ(p1.marks, p2.marks);
}

TEST(Estimator, RequiresReplications) {
  EXPECT_THROW(estimate([](Rng&) { return 1.0; }, 99, 1), InvalidArgument);
}
