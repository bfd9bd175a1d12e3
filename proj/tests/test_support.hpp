#pragma once
// Shared fixtures and independent oracles for the test suites. Everything
// here recomputes expectations from first principles so the tests never
// lean on the code paths they check.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "airindex/builders.hpp"
#include "airindex/cost.hpp"
#include "airindex/data.hpp"
#include "airindex/model.hpp"
#include "airindex/storage.hpp"

namespace airindex::testing {

// The four-pair collection from the step/band walkthrough:
// {(1,[0,10)), (4,[10,20)), (5,[20,25)), (7,[25,35))}.
inline KeyPositionSet four_pair_set() {
  return KeyPositionSet::from_pairs({{1, 0, 10}, {4, 10, 20}, {5, 20, 25}, {7, 25, 35}});
}

inline KeyPositionSet uniform_pairs(size_t n, uint64_t pair_bytes = 16, Key key_step = 10,
                                    Key first_key = 100) {
  std::vector<KeyPosition> pairs;
  pairs.reserve(n);
  for (size_t i = 0; i < n; ++i)
    pairs.push_back({first_key + Key(i) * key_step, i * pair_bytes, (i + 1) * pair_bytes});
  return KeyPositionSet::from_pairs(std::move(pairs));
}

// Random key-position collection with jittered pair sizes and key gaps.
inline KeyPositionSet random_pairs(size_t n, uint64_t seed, uint64_t max_pair_bytes = 64,
                                   Key max_key_gap = 1000) {
  std::mt19937_64 rng(seed);
  std::vector<KeyPosition> pairs;
  pairs.reserve(n);
  Key key = rng() % 1000;
  uint64_t offset = 0;
  for (size_t i = 0; i < n; ++i) {
    uint64_t bytes = 1 + rng() % max_pair_bytes;
    pairs.push_back({key, offset, offset + bytes});
    offset += bytes;
    key += 1 + rng() % max_key_gap;
  }
  return KeyPositionSet::from_pairs(std::move(pairs));
}

// Exact feasibility of one line stabbing every pair's segment within total
// width lambda, by brute force over the pairwise slope bounds. Mirrors the
// corridor definition but shares no code with it.
inline bool line_feasible(std::span<const KeyPosition> group, uint64_t lambda) {
  using i128 = __int128;
  // Doubled ordinates: A = 2*hi - lambda <= g(x) <= 2*lo + lambda = B.
  for (const auto& p : group)
    if (i128(2) * p.hi - i128(lambda) > i128(2) * p.lo + i128(lambda)) return false;
  // max over i<j of (A_j - B_i)/(x_j - x_i) <= min over i<j of (B_j - A_i)/(x_j - x_i)
  bool has_min = false, has_max = false;
  long double m_min = 0, m_max = 0;
  for (size_t i = 0; i < group.size(); ++i) {
    for (size_t j = i + 1; j < group.size(); ++j) {
      long double dx = (long double)(group[j].key - group[i].key);
      long double a_j = 2.0L * group[j].hi - (long double)lambda;
      long double b_j = 2.0L * group[j].lo + (long double)lambda;
      long double a_i = 2.0L * group[i].hi - (long double)lambda;
      long double b_i = 2.0L * group[i].lo + (long double)lambda;
      long double lo = (a_j - b_i) / dx;
      long double hi = (b_j - a_i) / dx;
      if (!has_min || lo > m_min) { m_min = lo; has_min = true; }
      if (!has_max || hi < m_max) { m_max = hi; has_max = true; }
    }
  }
  if (!has_min || !has_max) return true;  // single pair
  return m_min <= m_max;
}

// Minimum number of contiguous groups such that every group is either a
// singleton or admits a lambda-feasible line; dynamic programming.
inline size_t min_band_segments(const KeyPositionSet& data, uint64_t lambda) {
  size_t n = data.size();
  std::vector<size_t> best(n + 1, size_t(-1));
  best[0] = 0;
  std::span<const KeyPosition> pairs(data.pairs());
  for (size_t end = 1; end <= n; ++end) {
    for (size_t start = end; start-- > 0;) {
      size_t len = end - start;
      if (len > 1 && !line_feasible(pairs.subspan(start, len), lambda)) {
        // Feasibility is prefix-closed, so longer groups ending here fail too.
        break;
      }
      if (best[start] != size_t(-1)) best[end] = std::min(best[end], best[start] + 1);
    }
  }
  return best[n];
}

// B-tree-like reference: stack GStep(p, lambda) layers until the top layer
// is a single node (the root page).
inline IndexDesign btree_reference(const KeyPositionSet& data, uint32_t pieces, uint64_t lambda) {
  IndexDesign design;
  KeyPositionSet current = data;
  for (int guard = 0; guard < 64; ++guard) {
    LayerDesign layer = build_gstep(current, pieces, lambda);
    bool done = layer.node_count() == 1;
    current = outline(layer);
    design.layers.push_back(std::move(layer));
    if (done) break;
  }
  return design;
}

}  // namespace airindex::testing
