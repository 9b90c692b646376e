#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <tuple>

#include "hawkes/volterra.hpp"

namespace hawkes {

/// Memo of transform solutions keyed by (theta1, theta2, mesh, dynamics).
/// Reads take a shared lock; inserts take an exclusive one. A solve for a
/// missing key runs outside the lock, so two threads may both compute it; the
/// first insert wins and both results are identical.
class SolveCache {
 public:
  using Ptr = std::shared_ptr<const TransformSolution>;

  Ptr get_or_solve(const ExcitingKernel& kernel, const MarkDistribution& marks, cplx theta1, cplx theta2,
                   const Mesh& mesh) {
    Key key{theta1.real(), theta1.imag(), theta2.real(), theta2.imag(), mesh.horizon, mesh.n,
            dynamics_fingerprint(kernel, marks)};
    {
      std::shared_lock lock(mutex_);
      if (auto it = map_.find(key); it != map_.end()) {
        hits_.fetch_add(1, std::memory_order_relaxed);
        return it->second;
      }
    }
    auto sol = std::make_shared<const TransformSolution>(
        solve_transform_equation(kernel, marks, theta1, theta2, mesh));
    solves_.fetch_add(1, std::memory_order_relaxed);
    std::unique_lock lock(mutex_);
    auto [it, inserted] = map_.emplace(key, std::move(sol));
    return it->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
  }
  std::uint64_t hits() const { return hits_.load(); }
  std::uint64_t solves() const { return solves_.load(); }

  void clear() {
    std::unique_lock lock(mutex_);
    map_.clear();
  }

 private:
  using Key = std::tuple<double, double, double, double, double, int, std::uint64_t>;
  mutable std::shared_mutex mutex_;
  std::map<Key, Ptr> map_;
  std::atomic<std::uint64_t> hits_{0}, solves_{0};
};

namespace detail {
// Solve through the cache when one is supplied.
inline SolveCache::Ptr solve_maybe_cached(SolveCache* cache, const ExcitingKernel& kernel,
                                          const MarkDistribution& marks, cplx theta1, cplx theta2,
                                          const Mesh& mesh) {
  if (cache) return cache->get_or_solve(kernel, marks, theta1, theta2, mesh);
  return std::make_shared<const TransformSolution>(solve_transform_equation(kernel, marks, theta1, theta2, mesh));
}
}  // namespace detail

}  // namespace hawkes
