#include "airindex/builders.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "airindex/util.hpp"

namespace airindex {

namespace {

using i128 = __int128;

// Band fitting works on doubled ordinates (2*y +- lambda), which keeps the
// corridor arithmetic in exact integers. Extents must leave headroom.
void check_extent_headroom(const KeyPositionSet& data) {
  if (data.end_offset() >= (1ull << 61))
    throw Error(Error::Code::InvalidArgument, "collection extent too large for band arithmetic");
}

struct HullPoint {
  uint64_t x;
  int64_t y2;  // doubled ordinate
};

i128 cross(const HullPoint& p, const HullPoint& q, const HullPoint& r) {
  return (i128(q.x) - i128(p.x)) * (i128(r.y2) - i128(p.y2)) -
         (i128(q.y2) - i128(p.y2)) * (i128(r.x) - i128(p.x));
}

// slope(a -> b) <= slope(c -> d), all denominators positive.
bool slope_leq(const HullPoint& a, const HullPoint& b, const HullPoint& c, const HullPoint& d) {
  return (i128(b.y2) - i128(a.y2)) * (i128(d.x) - i128(c.x)) <=
         (i128(d.y2) - i128(c.y2)) * (i128(b.x) - i128(a.x));
}

struct Slope {
  i128 num = 0;
  i128 den = 1;  // > 0

  static Slope of(const HullPoint& from, const HullPoint& to) {
    return {i128(to.y2) - i128(from.y2), i128(to.x) - i128(from.x)};
  }
  bool operator<=(const Slope& other) const { return num * other.den <= other.num * den; }
  double value() const { return double(num) / double(den); }
};

// Incremental feasibility of "a line stabs every [A_i, B_i] segment", with
// the slope window maintained exactly. Query points always arrive to the
// right of the hulls, so the binding contact is found by binary search on
// which side of an edge line the query falls (see slope_peak below).
class Corridor {
 public:
  bool empty() const { return lower_of_b_.empty(); }
  size_t count() const { return lower_of_b_.size(); }

  // Whether the group stays feasible with (x, a2, b2) appended.
  bool admits(uint64_t x, int64_t a2, int64_t b2, Slope* new_min, Slope* new_max,
              bool* has_min_out, bool* has_max_out) const {
    if (a2 > b2) return false;
    Slope min_s = min_slope_, max_s = max_slope_;
    bool has_min = has_min_, has_max = has_max_;
    HullPoint qa{x, a2}, qb{x, b2};
    {  // steepest required slope: from some B_i up to A_new
      const HullPoint& contact = slope_peak(lower_of_b_, qa, /*maximize=*/true);
      Slope s = Slope::of(contact, qa);
      if (!has_min || min_s <= s) { min_s = s; has_min = true; }
    }
    {  // shallowest allowed slope: from some A_i up to B_new
      const HullPoint& contact = slope_peak(upper_of_a_, qb, /*maximize=*/false);
      Slope s = Slope::of(contact, qb);
      if (!has_max || s <= max_s) { max_s = s; has_max = true; }
    }
    if (has_min && has_max && !(min_s <= max_s)) return false;
    *new_min = min_s;
    *new_max = max_s;
    *has_min_out = has_min;
    *has_max_out = has_max;
    return true;
  }

  void push(uint64_t x, int64_t a2, int64_t b2, const Slope& min_s, const Slope& max_s,
            bool has_min, bool has_max, uint64_t* touches) {
    min_slope_ = min_s;
    max_slope_ = max_s;
    has_min_ = has_min;
    has_max_ = has_max;
    hull_push(lower_of_b_, {x, b2}, /*lower=*/true, touches);
    hull_push(upper_of_a_, {x, a2}, /*lower=*/false, touches);
  }

  double mid_slope2() const {  // witness slope, doubled space
    if (!has_min_ && !has_max_) return 0.0;
    if (!has_min_) return max_slope_.value();
    if (!has_max_) return min_slope_.value();
    return (min_slope_.value() + max_slope_.value()) / 2.0;
  }

  void reset() {
    lower_of_b_.clear();
    upper_of_a_.clear();
    has_min_ = has_max_ = false;
  }

 private:
  static void hull_push(std::vector<HullPoint>& hull, HullPoint p, bool lower, uint64_t* touches) {
    while (hull.size() >= 2) {
      i128 c = cross(hull[hull.size() - 2], hull.back(), p);
      if (lower ? c <= 0 : c >= 0) {
        hull.pop_back();
        if (touches) ++*touches;
      } else {
        break;
      }
    }
    hull.push_back(p);
    if (touches) ++*touches;
  }

  // Hull vertex with the max (or min) slope toward q, q right of all points.
  // slope(v_i -> q) improves while q lies above (resp. below) edge i's line,
  // and that predicate is monotone along the chain.
  static const HullPoint& slope_peak(const std::vector<HullPoint>& hull, const HullPoint& q,
                                     bool maximize) {
    size_t lo = 0, hi = hull.size() - 1;
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      i128 c = cross(hull[mid], hull[mid + 1], q);
      bool improves = maximize ? c >= 0 : c <= 0;
      if (improves) lo = mid + 1;
      else hi = mid;
    }
    return hull[lo];
  }

  std::vector<HullPoint> lower_of_b_;
  std::vector<HullPoint> upper_of_a_;
  Slope min_slope_, max_slope_;
  bool has_min_ = false, has_max_ = false;
};

// Finishes a band node over pairs [first, last]: snap the line to integer
// endpoints at the group's first and last keys, then grow delta until the
// exact predict arithmetic contains every pair.
BandNode materialize_band(std::span<const KeyPosition> group, double slope, double value_at_first,
                          uint64_t extent_below) {
  BandNode node;
  const KeyPosition& front = group.front();
  const KeyPosition& back = group.back();
  if (group.size() == 1) {
    node.x1 = front.key;
    node.x2 = front.key + 1;
    node.y1 = node.y2 = int64_t((front.lo + front.hi) / 2);
    node.delta = (front.hi - front.lo + 1) / 2;
  } else {
    node.x1 = front.key;
    node.x2 = back.key;
    node.y1 = int64_t(std::llround(value_at_first));
    node.y2 = int64_t(std::llround(value_at_first + slope * double(back.key - front.key)));
    double need = 0.0;
    for (const auto& p : group) {
      double f = band_center(node, p.key);
      need = std::max({need, f - double(p.lo), double(p.hi) - f});
    }
    node.delta = need <= 0.0 ? 0 : uint64_t(std::ceil(need));
  }
  for (int guard = 0; guard < 64; ++guard) {
    bool ok = true;
    for (const auto& p : group) {
      if (!node.predict(p.key, extent_below).contains(p.lo, p.hi)) { ok = false; break; }
    }
    if (ok) return node;
    ++node.delta;
  }
  throw Error(Error::Code::Corrupt, "band containment did not converge");
}

LayerDesign gstep_chunk(std::span<const KeyPosition> pairs, uint32_t pieces, uint64_t lambda,
                        uint64_t end_offset, BuildStats* stats) {
  LayerDesign layer;
  layer.node_type = NodeType::Step;
  layer.step_pieces = uint16_t(pieces);

  StepNode node;
  auto flush = [&](bool pad) {
    if (node.keys.empty()) return;
    if (pad) {
      while (node.keys.size() < pieces) {
        node.keys.push_back(kMaxKey);
        node.positions.push_back(end_offset);
      }
    }
    layer.lower_keys.push_back(node.keys.front());
    layer.step_nodes.push_back(std::move(node));
    node = {};
  };

  for (const auto& pair : pairs) {
    if (stats) ++stats->touches;
    if (!node.keys.empty() && pair.hi - node.positions.back() <= lambda) continue;
    if (node.keys.size() == pieces) flush(false);
    node.keys.push_back(pair.key);
    node.positions.push_back(pair.lo);
  }
  flush(true);
  return layer;
}

LayerDesign gband_chunk(std::span<const KeyPosition> pairs, uint64_t lambda, uint64_t end_offset,
                        BuildStats* stats) {
  LayerDesign layer;
  layer.node_type = NodeType::Band;

  Corridor corridor;
  size_t group_start = 0;
  auto flush = [&](size_t group_end) {  // [group_start, group_end)
    if (group_end == group_start) return;
    auto group = pairs.subspan(group_start, group_end - group_start);
    double slope2 = corridor.mid_slope2();
    // Intercept window at the witness slope, relative to the first key.
    double c_lo2 = -1e300, c_hi2 = 1e300;
    for (const auto& p : group) {
      double dx = double(p.key - group.front().key);
      c_lo2 = std::max(c_lo2, double(2.0 * double(p.hi) - double(lambda)) - slope2 * dx);
      c_hi2 = std::min(c_hi2, double(2.0 * double(p.lo) + double(lambda)) - slope2 * dx);
    }
    double value_at_first = (c_lo2 + c_hi2) / 4.0;  // halve: doubled ordinates
    layer.lower_keys.push_back(group.front().key);
    layer.band_nodes.push_back(materialize_band(group, slope2 / 2.0, value_at_first, end_offset));
    corridor.reset();
  };

  for (size_t i = 0; i < pairs.size(); ++i) {
    if (stats) ++stats->touches;
    const auto& p = pairs[i];
    int64_t a2 = int64_t(2 * p.hi) - int64_t(lambda);
    int64_t b2 = int64_t(2 * p.lo) + int64_t(lambda);
    if (corridor.empty()) {
      if (a2 > b2) {  // pair wider than lambda: its own node
        layer.lower_keys.push_back(p.key);
        layer.band_nodes.push_back(
            materialize_band(pairs.subspan(i, 1), 0.0, 0.0, end_offset));
        group_start = i + 1;
        continue;
      }
      corridor.push(p.key, a2, b2, {}, {}, false, false, stats ? &stats->touches : nullptr);
      group_start = i;
      continue;
    }
    Slope min_s, max_s;
    bool has_min, has_max;
    if (corridor.admits(p.key, a2, b2, &min_s, &max_s, &has_min, &has_max)) {
      corridor.push(p.key, a2, b2, min_s, max_s, has_min, has_max,
                    stats ? &stats->touches : nullptr);
    } else {
      flush(i);
      --i;  // reprocess the offending pair as a fresh group
    }
  }
  flush(pairs.size());
  return layer;
}

LayerDesign eband_chunk(std::span<const KeyPosition> pairs, uint64_t lambda, uint64_t end_offset,
                        BuildStats* stats) {
  LayerDesign layer;
  layer.node_type = NodeType::Band;

  size_t start = 0;
  while (start < pairs.size()) {
    if (stats) ++stats->touches;
    size_t end = start + 1;
    while (end < pairs.size() && pairs[end].hi - pairs[start].lo <= lambda) {
      if (stats) ++stats->touches;
      ++end;
    }
    auto group = pairs.subspan(start, end - start);
    if (group.size() == 1) {
      layer.lower_keys.push_back(group.front().key);
      layer.band_nodes.push_back(materialize_band(group, 0.0, 0.0, end_offset));
    } else {
      // Least squares on range midpoints, relative to the group's first pair.
      double n = double(group.size());
      double sx = 0.0, sy = 0.0;
      for (const auto& p : group) {
        if (stats) ++stats->touches;
        sx += double(p.key - group.front().key);
        sy += (double(p.lo) + double(p.hi)) / 2.0 - double(group.front().lo);
      }
      double mx = sx / n, my = sy / n;
      double sxx = 0.0, sxy = 0.0;
      for (const auto& p : group) {
        double dx = double(p.key - group.front().key) - mx;
        double dy = (double(p.lo) + double(p.hi)) / 2.0 - double(group.front().lo) - my;
        sxx += dx * dx;
        sxy += dx * dy;
      }
      double slope = sxy / sxx;
      double value_at_first = double(group.front().lo) + my - slope * mx;
      layer.lower_keys.push_back(group.front().key);
      layer.band_nodes.push_back(materialize_band(group, slope, value_at_first, end_offset));
    }
    start = end;
  }
  return layer;
}

template <typename ChunkFn>
LayerDesign build_chunked(const KeyPositionSet& data, int parallelism, BuildStats* stats,
                          ChunkFn chunk_fn) {
  if (data.empty()) throw Error(Error::Code::InvalidArgument, "cannot build a layer over nothing");
  check_extent_headroom(data);
  uint64_t end_offset = data.end_offset();
  std::span<const KeyPosition> pairs(data.pairs());
  size_t chunks = (pairs.size() + kBuildPartitionPairs - 1) / kBuildPartitionPairs;

  std::vector<BuildStats> chunk_stats(chunks);
  std::function<LayerDesign(size_t)> run = [&](size_t c) {
    size_t begin = c * kBuildPartitionPairs;
    size_t len = std::min(kBuildPartitionPairs, pairs.size() - begin);
    return chunk_fn(pairs.subspan(begin, len), end_offset, stats ? &chunk_stats[c] : nullptr);
  };
  std::vector<LayerDesign> parts = parallel_map<LayerDesign>(chunks, parallelism, run);

  LayerDesign merged = std::move(parts.front());
  for (size_t c = 1; c < parts.size(); ++c) {
    auto& part = parts[c];
    merged.lower_keys.insert(merged.lower_keys.end(), part.lower_keys.begin(), part.lower_keys.end());
    merged.step_nodes.insert(merged.step_nodes.end(),
                             std::make_move_iterator(part.step_nodes.begin()),
                             std::make_move_iterator(part.step_nodes.end()));
    merged.band_nodes.insert(merged.band_nodes.end(),
                             std::make_move_iterator(part.band_nodes.begin()),
                             std::make_move_iterator(part.band_nodes.end()));
  }
  merged.extent_below = end_offset;
  if (stats) {
    for (const auto& s : chunk_stats) stats->touches += s.touches;
  }
  return merged;
}

}  // namespace

std::string BuilderSpec::name() const {
  char buf[64];
  switch (family) {
    case Family::GStep:
      std::snprintf(buf, sizeof(buf), "gstep(p=%u,lambda=%llu)", pieces,
                    (unsigned long long)lambda);
      break;
    case Family::GBand:
      std::snprintf(buf, sizeof(buf), "gband(lambda=%llu)", (unsigned long long)lambda);
      break;
    case Family::EBand:
      std::snprintf(buf, sizeof(buf), "eband(lambda=%llu)", (unsigned long long)lambda);
      break;
  }
  return buf;
}

BuilderSet default_builder_set(uint64_t lambda_low, uint64_t lambda_high, double base,
                               uint32_t pieces) {
  if (lambda_low < 16 || lambda_low > lambda_high || base <= 1.0 || pieces < 1)
    throw Error(Error::Code::InvalidArgument, "bad builder grid");
  std::vector<uint64_t> grid;
  for (uint64_t lambda = lambda_low; lambda <= lambda_high;) {
    grid.push_back(lambda);
    uint64_t next = uint64_t(std::llround(double(lambda) * base));
    lambda = next > lambda ? next : lambda + 1;
  }
  BuilderSet set;
  set.lambda_low = lambda_low;
  set.lambda_high = lambda_high;
  set.base = base;
  for (uint64_t lambda : grid) set.builders.push_back({BuilderSpec::Family::GStep, pieces, lambda});
  for (uint64_t lambda : grid) set.builders.push_back({BuilderSpec::Family::GBand, 0, lambda});
  for (uint64_t lambda : grid) set.builders.push_back({BuilderSpec::Family::EBand, 0, lambda});
  return set;
}

LayerDesign build_gstep(const KeyPositionSet& data, uint32_t pieces, uint64_t lambda,
                        int parallelism, BuildStats* stats) {
  if (pieces < 1) throw Error(Error::Code::InvalidArgument, "step nodes need >= 1 piece");
  return build_chunked(data, parallelism, stats,
                       [&](std::span<const KeyPosition> pairs, uint64_t end, BuildStats* s) {
                         return gstep_chunk(pairs, pieces, lambda, end, s);
                       });
}

LayerDesign build_gband(const KeyPositionSet& data, uint64_t lambda, int parallelism,
                        BuildStats* stats) {
  return build_chunked(data, parallelism, stats,
                       [&](std::span<const KeyPosition> pairs, uint64_t end, BuildStats* s) {
                         return gband_chunk(pairs, lambda, end, s);
                       });
}

LayerDesign build_eband(const KeyPositionSet& data, uint64_t lambda, int parallelism,
                        BuildStats* stats) {
  return build_chunked(data, parallelism, stats,
                       [&](std::span<const KeyPosition> pairs, uint64_t end, BuildStats* s) {
                         return eband_chunk(pairs, lambda, end, s);
                       });
}

LayerDesign build_layer(const KeyPositionSet& data, const BuilderSpec& spec, int parallelism,
                        BuildStats* stats) {
  switch (spec.family) {
    case BuilderSpec::Family::GStep:
      return build_gstep(data, spec.pieces, spec.lambda, parallelism, stats);
    case BuilderSpec::Family::GBand:
      return build_gband(data, spec.lambda, parallelism, stats);
    case BuilderSpec::Family::EBand:
      return build_eband(data, spec.lambda, parallelism, stats);
  }
  throw Error(Error::Code::InvalidArgument, "unknown builder family");
}

KeyPositionSet outline(const LayerDesign& layer) {
  if (layer.node_count() == 0)
    throw Error(Error::Code::InvalidArgument, "cannot outline an empty layer");
  std::vector<KeyPosition> pairs;
  pairs.reserve(layer.node_count());
  uint64_t entry = layer.entry_size();
  for (size_t j = 0; j < layer.node_count(); ++j)
    pairs.push_back({layer.lower_keys[j], j * entry, (j + 1) * entry});
  return KeyPositionSet::from_pairs(std::move(pairs));
}

}  // namespace airindex
