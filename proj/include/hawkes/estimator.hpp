#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "hawkes/errors.hpp"
#include "hawkes/model.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/simulate.hpp"

namespace hawkes {

struct EstimatorResult {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct EstimatorOptions {
  unsigned threads = 0;           // 0: hardware concurrency
  std::size_t block = 4096;       // replications per reduction block
  std::size_t min_replications = 100;
};

enum class Sampler { Thinning, Cluster };

namespace detail {

// Runs replications [0, n) in fixed blocks. Replication i always uses
// substream(seed, i), each block is accumulated serially, and block totals are
// combined by pairwise summation, so the result does not depend on threads.
// `draw(rng, out)` writes `dim` values.
template <class Draw>
std::vector<EstimatorResult> run_blocks(Draw&& draw, std::size_t dim, std::size_t n, std::uint64_t seed,
                                        const EstimatorOptions& opt) {
  require(n >= opt.min_replications, "estimate: need at least 100 replications");
  require(dim >= 1 && opt.block >= 1, "estimate: need dim >= 1 and block >= 1");
  const std::size_t blocks = (n + opt.block - 1) / opt.block;
  std::vector<double> sums(blocks * dim, 0.0), squares(blocks * dim, 0.0);

  auto work = [&](std::size_t b) {
    std::vector<double> v(dim), s(dim, 0.0), q(dim, 0.0);
    const std::size_t lo = b * opt.block, hi = std::min(n, lo + opt.block);
    for (std::size_t i = lo; i < hi; ++i) {
      Rng rng = substream(seed, i);
      draw(rng, v.data());
      for (std::size_t d = 0; d < dim; ++d) s[d] += v[d], q[d] += v[d] * v[d];
    }
    for (std::size_t d = 0; d < dim; ++d) sums[d * blocks + b] = s[d], squares[d * blocks + b] = q[d];
  };

  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
  if (threads <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) work(b);
  } else {
    // The first failure stops every worker and is rethrown on this thread.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    std::atomic<bool> failed{false};
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t b = t; b < blocks && !failed.load(); b += threads) work(b);
        } catch (...) {
          errors[t] = std::current_exception();
          failed = true;
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<EstimatorResult> out(dim);
  const double nn = static_cast<double>(n);
  for (std::size_t d = 0; d < dim; ++d) {
    const double s = pairwise_sum(std::span<const double>(sums.data() + d * blocks, blocks));
    const double q = pairwise_sum(std::span<const double>(squares.data() + d * blocks, blocks));
    const double mean = s / nn;
    const double var = std::max(0.0, (q - nn * mean * mean) / (nn - 1.0));
    out[d] = {mean, std::sqrt(var / nn), n, seed};
  }
  return out;
}

inline EventRecord sample_path(const HawkesModel& model, double horizon, Sampler sampler, Rng& rng,
                               std::size_t max_events = 10'000'000) {
  if (sampler == Sampler::Thinning) {
    ThinningOptions t;
    t.max_events = max_events;
    return simulate_thinning(model, horizon, rng, t);
  }
  ClusterOptions c;
  c.max_nodes = max_events;
  return simulate_cluster(model, horizon, rng, c);
}

}  // namespace detail

/// Mean and standard error of fn(rng) over n independent replications.
template <class Fn>
EstimatorResult estimate(Fn&& fn, std::size_t n, std::uint64_t seed, const EstimatorOptions& opt = {}) {
  return detail::run_blocks([&](Rng& rng, double* out) { out[0] = fn(rng); }, 1, n, seed, opt)[0];
}

/// Componentwise estimates of a vector functional fn(rng, out) with `dim` outputs.
template <class Fn>
std::vector<EstimatorResult> estimate_vector(Fn&& fn, std::size_t dim, std::size_t n, std::uint64_t seed,
                                             const EstimatorOptions& opt = {}) {
  return detail::run_blocks(std::forward<Fn>(fn), dim, n, seed, opt);
}

/// Path functional on [0, horizon] paths drawn by the chosen sampler.
inline EstimatorResult estimate(const HawkesModel& model, const std::function<double(const EventRecord&)>& functional,
                                double horizon, std::size_t n, std::uint64_t seed,
                                Sampler sampler = Sampler::Thinning, const EstimatorOptions& opt = {}) {
  return estimate([&](Rng& rng) { return functional(detail::sample_path(model, horizon, sampler, rng)); }, n, seed,
                  opt);
}

}  // namespace hawkes
