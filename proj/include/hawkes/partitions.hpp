#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "hawkes/errors.hpp"

namespace hawkes {

/// All multiplicity tuples (m_1, ..., m_n) with sum_i i m_i = n.
struct IntegerPartitionMultiset {
  int n = 0;
  std::vector<std::vector<int>> tuples;

  std::size_t size() const { return tuples.size(); }
};

namespace detail {
// Chooses m_part, then recurses on the smaller parts.
inline void partitions_rec(int remaining, int part, std::vector<int>& m, std::vector<std::vector<int>>& out) {
  if (part == 0) {
    if (remaining == 0) out.push_back(m);
    return;
  }
  if (part == 1) {
    m[0] = remaining;
    out.push_back(m);
    m[0] = 0;
    return;
  }
  for (int c = 0; c * part <= remaining; ++c) {
    m[part - 1] = c;
    partitions_rec(remaining - c * part, part - 1, m, out);
  }
  m[part - 1] = 0;
}
}  // namespace detail

// Ordered by m_1 descending, then m_2, and so on: n = 3 gives
// (3,0,0), (1,1,0), (0,0,1).
inline IntegerPartitionMultiset enumerate_partitions(int n) {
  detail::require(n >= 1 && n <= 40, "enumerate_partitions: n must be in [1, 40]");
  IntegerPartitionMultiset result{n, {}};
  std::vector<int> m(static_cast<std::size_t>(n), 0);
  detail::partitions_rec(n, n, m, result.tuples);
  std::sort(result.tuples.begin(), result.tuples.end(), std::greater<>());
  return result;
}

}  // namespace hawkes
