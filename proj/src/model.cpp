#include "airindex/model.hpp"

#include <algorithm>
#include <cmath>

namespace airindex {

KeyPositionSet KeyPositionSet::from_pairs(std::vector<KeyPosition> pairs) {
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.key == kMaxKey) throw Error(Error::Code::InvalidArgument, "key 2^64-1 is reserved");
    if (p.lo > p.hi) throw Error(Error::Code::InvalidArgument, "position range inverted");
    if (i > 0) {
      if (pairs[i - 1].key >= p.key)
        throw Error(Error::Code::InvalidArgument, "keys must be strictly increasing");
      if (pairs[i - 1].hi > p.lo)
        throw Error(Error::Code::InvalidArgument, "position ranges must be non-overlapping");
    }
  }
  KeyPositionSet set;
  set.pairs_ = std::move(pairs);
  return set;
}

size_t KeyPositionSet::find(Key x) const {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), x,
                             [](const KeyPosition& p, Key k) { return p.key < k; });
  if (it == pairs_.end() || it->key != x) return npos;
  return size_t(it - pairs_.begin());
}

PositionRange StepNode::predict(Key x, uint64_t terminal) const {
  if (x < keys.front())
    throw Error(Error::Code::InvalidArgument, "key below step node's first partition");
  // Last piece i with a_i <= x.
  auto it = std::upper_bound(keys.begin(), keys.end(), x);
  size_t i = size_t(it - keys.begin()) - 1;
  uint64_t hi = (i + 1 < positions.size()) ? positions[i + 1] : terminal;
  uint64_t lo = positions[i];
  if (hi <= lo) hi = lo + 1;  // minimum-read rule
  return {lo, hi};
}

double band_center(const BandNode& node, Key x) {
  double m = (double(node.y2) - double(node.y1)) / (double(node.x2) - double(node.x1));
  double c = double(node.y1) - m * double(node.x1);
  return m * double(x) + c;
}

PositionRange BandNode::predict(Key x, uint64_t extent_below) const {
  double f = band_center(*this, x);
  double lo_f = std::floor(f - double(delta));
  double hi_f = std::ceil(f + double(delta));
  uint64_t lo = lo_f <= 0.0 ? 0 : uint64_t(lo_f);
  uint64_t hi = hi_f <= 0.0 ? 0 : uint64_t(hi_f);
  hi = std::min(hi, extent_below);
  lo = std::min(lo, hi);
  if (hi == lo) {  // widen degenerate predictions to one byte
    if (hi < extent_below) ++hi;
    else if (lo > 0) --lo;
    else hi = 1;
  }
  return {lo, hi};
}

PositionRange predict_step(const StepNode& node, Key x, uint64_t terminal) {
  return node.predict(x, terminal);
}

PositionRange predict_band(const BandNode& node, Key x, uint64_t extent_below) {
  return node.predict(x, extent_below);
}

size_t LayerDesign::route(Key x) const {
  if (lower_keys.empty() || x < lower_keys.front())
    throw Error(Error::Code::InvalidArgument, "key below the layer's covered key space");
  auto it = std::upper_bound(lower_keys.begin(), lower_keys.end(), x);
  return size_t(it - lower_keys.begin()) - 1;
}

uint64_t LayerDesign::step_terminal(size_t j) const {
  return j + 1 < step_nodes.size() ? step_nodes[j + 1].positions.front() : extent_below;
}

PositionRange LayerDesign::predict(Key x) const {
  size_t j = route(x);
  if (node_type == NodeType::Step) return step_nodes[j].predict(x, step_terminal(j));
  return band_nodes[j].predict(x, extent_below);
}

PositionRange layer_predict(const LayerDesign& layer, Key x) { return layer.predict(x); }

std::vector<Violation> validate_design(const IndexDesign& design, const KeyPositionSet& data) {
  std::vector<Violation> violations;
  const size_t levels = design.layer_count();
  for (const auto& pair : data) {
    for (size_t l = levels; l >= 1; --l) {
      const LayerDesign& layer = design.layers[l - 1];
      PositionRange pred;
      try {
        pred = layer.predict(pair.key);
      } catch (const Error& e) {
        violations.push_back({pair.key, l, e.what()});
        break;
      }
      if (l == 1) {
        if (!pred.contains(pair.lo, pair.hi))
          violations.push_back({pair.key, l, "prediction misses the true position"});
      } else {
        // Must cover the routed node's serialized bytes in the layer below.
        const LayerDesign& below = design.layers[l - 2];
        size_t j = below.route(pair.key);
        uint64_t entry = below.entry_size();
        if (!pred.contains(j * entry, (j + 1) * entry)) {
          violations.push_back({pair.key, l, "prediction misses the routed node below"});
        }
      }
    }
  }
  return violations;
}

}  // namespace airindex
