#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "hawkes/errors.hpp"
#include "hawkes/model.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

/// Event times tau_1 < tau_2 < ... with their marks.
struct EventRecord {
  std::vector<double> times;
  std::vector<double> marks;

  std::size_t size() const { return times.size(); }

  // N_t: events in [0, t].
  std::size_t count(double t) const {
    return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
  }
  // L_t: total mark over [0, t].
  double volume(double t) const {
    const std::size_t n = count(t);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += marks[i];
    return s;
  }
  // First time L_t >= x, or +inf if the record never gets there.
  double first_passage(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      s += marks[i];
      if (s >= x) return times[i];
    }
    return std::numeric_limits<double>::infinity();
  }
};

struct ThinningOptions {
  double window = 0.1;
  std::size_t max_events = 10'000'000;
};

namespace detail {

inline double excitation(const ExcitingKernel& h, const EventRecord& rec, double t) {
  double s = 0.0;
  for (std::size_t i = 0; i < rec.times.size(); ++i) s += rec.marks[i] * h.eval_unchecked(t - rec.times[i]);
  return s;
}

// Extends `rec` by Ogata thinning on (start, horizon]. Within each window the
// intensity is bounded by sup mu + sum l_i h(s - tau_i), valid because h is
// nonincreasing; the bound is refreshed after every candidate. `mark_for`
// returns the mark of the event with the given index. `stop` is checked after
// each accepted event.
template <class MarkFn, class StopFn>
void thinning_extend(const HawkesModel& model, EventRecord& rec, double start, double horizon, Rng& rng,
                     MarkFn&& mark_for, StopFn&& stop, const ThinningOptions& opt = {}) {
  if (!model.kernel.is_monotone())
    throw BoundInvalid("thinning: kernel is not nonincreasing, so the local intensity bound is invalid");
  detail::require(opt.window > 0.0, "thinning: window must be > 0");
  const bool excites = !model.kernel.is_zero();
  double s = start;
  while (s < horizon) {
    const double w_end = std::min(s + opt.window, horizon);
    const double bound = model.baseline.sup_on(s, w_end) + (excites ? excitation(model.kernel, rec, s) : 0.0);
    if (!(bound > 0.0)) {
      s = w_end;
      continue;
    }
    const double cand = s + exponential(rng, bound);
    if (cand > w_end) {
      s = w_end;
      continue;
    }
    s = cand;
    const double lambda = model.baseline(cand) + (excites ? excitation(model.kernel, rec, cand) : 0.0);
    if (lambda > bound * (1.0 + 1e-12))
      throw BoundInvalid("thinning: intensity exceeded its local bound");
    if (uniform_open(rng) * bound <= lambda) {
      if (rec.times.size() >= opt.max_events)
        throw ExplosionError("thinning: event budget exceeded (branching looks supercritical)");
      rec.times.push_back(cand);
      rec.marks.push_back(mark_for(rec.times.size() - 1));
      if (stop(rec)) return;
    }
  }
}

}  // namespace detail

/// One path on [0, horizon] by Ogata thinning.
inline EventRecord simulate_thinning(const HawkesModel& model, double horizon, Rng& rng,
                                     const ThinningOptions& opt = {}) {
  detail::require(horizon > 0.0, "simulate_thinning: horizon must be > 0");
  EventRecord rec;
  detail::thinning_extend(
      model, rec, 0.0, horizon, rng, [&](std::size_t) { return model.marks.sample(rng); },
      [](const EventRecord&) { return false; }, opt);
  return rec;
}

/// Runs a path until L_t >= x or t = max_time and returns the passage time
/// (+inf if not reached).
inline double simulate_first_passage(const HawkesModel& model, double x, double max_time, Rng& rng,
                                     const ThinningOptions& opt = {}) {
  detail::require(x > 0.0 && max_time > 0.0, "simulate_first_passage: need x > 0, max_time > 0");
  EventRecord rec;
  double volume = 0.0;
  detail::thinning_extend(
      model, rec, 0.0, max_time, rng, [&](std::size_t) { return model.marks.sample(rng); },
      [&](const EventRecord& r) {
        volume += r.marks.back();
        return volume >= x;
      },
      opt);
  return volume >= x ? rec.times.back() : std::numeric_limits<double>::infinity();
}

/// Compensator int_0^t lambda_s ds along a recorded path.
inline double compensator(const HawkesModel& model, const EventRecord& rec, double t) {
  double s = model.baseline.cumulative(t);
  if (!model.kernel.is_zero())
    for (std::size_t i = 0; i < rec.size() && rec.times[i] < t; ++i)
      s += rec.marks[i] * model.kernel.integral(t - rec.times[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Cluster construction

/// One event of the branching construction. Roots have parent == npos.
struct ClusterNode {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  double birth_time = 0.0;
  double mark = 0.0;
  std::size_t parent = npos;
  std::uint32_t generation = 0;
  std::vector<std::size_t> children;
};

struct ClusterOptions {
  std::uint32_t max_generations = 10000;
  std::size_t max_nodes = 10'000'000;
  double window = 0.1;  // immigrant thinning window
};

namespace detail {
// Inhomogeneous Poisson points of rate mu on [0, horizon] by windowed thinning.
inline std::vector<double> poisson_immigrants(const BaselineIntensity& mu, double horizon, Rng& rng, double window) {
  std::vector<double> out;
  if (auto c = mu.constant_value()) {
    if (*c == 0.0) return out;
    double s = 0.0;
    for (;;) {
      s += exponential(rng, *c);
      if (s > horizon) return out;
      out.push_back(s);
    }
  }
  double s = 0.0;
  while (s < horizon) {
    const double w_end = std::min(s + window, horizon);
    const double bound = mu.sup_on(s, w_end);
    if (!(bound > 0.0)) {
      s = w_end;
      continue;
    }
    const double cand = s + exponential(rng, bound);
    if (cand > w_end) {
      s = w_end;
      continue;
    }
    s = cand;
    if (uniform_open(rng) * bound <= mu(cand)) out.push_back(cand);
  }
  return out;
}

inline std::uint64_t poisson_draw(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> d(mean);
  return d(rng);
}
}  // namespace detail

/// The full tree (immigrants and their descendants born by `horizon`),
/// expanded generation by generation.
inline std::vector<ClusterNode> simulate_cluster_tree(const HawkesModel& model, double horizon, Rng& rng,
                                                      const ClusterOptions& opt = {}) {
  detail::require(horizon > 0.0, "simulate_cluster: horizon must be > 0");
  const double norm = model.kernel.is_zero() ? 0.0 : model.kernel.l1_norm();
  std::vector<ClusterNode> nodes;
  for (double b : detail::poisson_immigrants(model.baseline, horizon, rng, opt.window))
    nodes.push_back({b, model.marks.sample(rng), ClusterNode::npos, 0, {}});
  if (norm == 0.0) return nodes;

  std::size_t begin = 0, end = nodes.size();
  std::uint32_t generation = 0;
  while (begin < end) {
    if (generation >= opt.max_generations)
      throw ExplosionError("simulate_cluster: generation cap exceeded (branching looks supercritical)");
    for (std::size_t p = begin; p < end; ++p) {
      const std::uint64_t kids = detail::poisson_draw(rng, nodes[p].mark * norm);
      for (std::uint64_t c = 0; c < kids; ++c) {
        const double birth = nodes[p].birth_time + model.kernel.sample_offset(rng);
        if (birth > horizon) continue;
        if (nodes.size() >= opt.max_nodes)
          throw ExplosionError("simulate_cluster: node budget exceeded (branching looks supercritical)");
        nodes.push_back({birth, model.marks.sample(rng), p, generation + 1, {}});
        nodes[p].children.push_back(nodes.size() - 1);
      }
    }
    begin = end;
    end = nodes.size();
    ++generation;
  }
  return nodes;
}

/// One path on [0, horizon] from the immigration-birth construction.
inline EventRecord simulate_cluster(const HawkesModel& model, double horizon, Rng& rng,
                                    const ClusterOptions& opt = {}) {
  const std::vector<ClusterNode> nodes = simulate_cluster_tree(model, horizon, rng, opt);
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nodes[a].birth_time < nodes[b].birth_time; });
  EventRecord rec;
  rec.times.reserve(nodes.size());
  rec.marks.reserve(nodes.size());
  for (std::size_t i : order) {
    rec.times.push_back(nodes[i].birth_time);
    rec.marks.push_back(nodes[i].mark);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Conditioned paths

enum class ConditioningMode {
  // Fix l_1 = l1 and reject unless N_t = 1. Exact: l_1 is independent of
  // everything before tau_1, and the event N_t = 1 does not involve l_1 beyond
  // the intensity it creates.
  PinnedMark,
  // Reject unless N_t = 1 and |l_1 - l1| <= epsilon.
  EpsilonBand,
};

struct ConditionedOptions {
  ConditioningMode mode = ConditioningMode::PinnedMark;
  double epsilon = 0.01;
  std::size_t max_attempts = 100'000'000;
  ThinningOptions thinning{};
};

struct ConditionedPath {
  EventRecord record;  // on [0, t + T]
  std::size_t attempts = 0;
};

/// A path on [0, t + T] drawn from the law given {N_t = 1, l_1 = l1}.
inline ConditionedPath simulate_conditioned(const HawkesModel& model, double t, double l1, double T, Rng& rng,
                                            const ConditionedOptions& opt = {}) {
  detail::require(t > 0.0 && l1 > 0.0 && T >= 0.0, "simulate_conditioned: need t > 0, l1 > 0, T >= 0");
  for (std::size_t attempt = 1; attempt <= opt.max_attempts; ++attempt) {
    EventRecord rec;
    auto mark_for = [&](std::size_t i) {
      return (i == 0 && opt.mode == ConditioningMode::PinnedMark) ? l1 : model.marks.sample(rng);
    };
    detail::thinning_extend(
        model, rec, 0.0, t, rng, mark_for, [](const EventRecord& r) { return r.size() > 1; }, opt.thinning);
    if (rec.size() != 1) continue;
    if (opt.mode == ConditioningMode::EpsilonBand && std::abs(rec.marks[0] - l1) > opt.epsilon) continue;
    if (T > 0.0)
      detail::thinning_extend(
          model, rec, t, t + T, rng, [&](std::size_t) { return model.marks.sample(rng); },
          [](const EventRecord&) { return false; }, opt.thinning);
    return {std::move(rec), attempt};
  }
  throw ConditioningImpossible("simulate_conditioned: no accepted path within the attempt budget");
}

}  // namespace hawkes
