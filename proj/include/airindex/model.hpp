#pragma once
// The unified index model: keys, byte positions, step/band predictor nodes,
// per-layer designs and whole-index designs.
//
// A layer is an ordered run of nodes partitioning the key space; a node maps
// a key to a byte range in the layer below that is guaranteed to contain the
// key's true position. Layer 0 is the data layer itself.

#include <cstdint>
#include <string>
#include <vector>

#include "airindex/util.hpp"

namespace airindex {

using Key = uint64_t;

// Reserved "infinity" partition key; datasets must not contain it.
inline constexpr Key kMaxKey = UINT64_MAX;

// Half-open [lo, hi) byte range in the layer below.
struct PositionRange {
  uint64_t lo = 0;
  uint64_t hi = 0;

  uint64_t width() const { return hi - lo; }
  bool contains(uint64_t a, uint64_t b) const { return lo <= a && b <= hi; }
  bool operator==(const PositionRange&) const = default;
};

struct KeyPosition {
  Key key = 0;
  uint64_t lo = 0;
  uint64_t hi = 0;
};

// Sorted key-position collection: the tuner's working currency. Keys are
// strictly increasing, ranges non-overlapping and non-decreasing.
class KeyPositionSet {
 public:
  KeyPositionSet() = default;
  static KeyPositionSet from_pairs(std::vector<KeyPosition> pairs);

  bool empty() const { return pairs_.empty(); }
  size_t size() const { return pairs_.size(); }
  const KeyPosition& operator[](size_t i) const { return pairs_[i]; }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }
  const std::vector<KeyPosition>& pairs() const { return pairs_; }

  // s_D: y+ of the last pair minus y- of the first.
  uint64_t total_extent() const { return empty() ? 0 : pairs_.back().hi - pairs_.front().lo; }
  // Upper bound of the address space this collection occupies.
  uint64_t end_offset() const { return empty() ? 0 : pairs_.back().hi; }

  // Index of the pair with key == x, or npos.
  size_t find(Key x) const;
  static constexpr size_t npos = size_t(-1);

 private:
  std::vector<KeyPosition> pairs_;
};

// p-piece constant function: piece i covers keys [a_i, a_{i+1}) and predicts
// positions [b_i, b_{i+1}). The final piece's upper bound is the caller's
// `terminal` (next node's first position, or the extent of the layer below).
// Nodes built from short inputs are padded with (kMaxKey, end) sentinel
// pieces, which keeps every serialized node at exactly 16p payload bytes.
struct StepNode {
  std::vector<Key> keys;            // a, strictly increasing
  std::vector<uint64_t> positions;  // b, non-decreasing

  uint32_t pieces() const { return uint32_t(keys.size()); }
  PositionRange predict(Key x, uint64_t terminal) const;
};

// Thick line through (x1, y1) and (x2, y2), widened by +-delta. Endpoints are
// signed: a fitted line may dip below position zero at the node's left edge.
struct BandNode {
  Key x1 = 0;
  Key x2 = 0;
  int64_t y1 = 0;
  int64_t y2 = 0;
  uint64_t delta = 0;

  PositionRange predict(Key x, uint64_t extent_below) const;
};

// Line value m*x + c evaluated the same way everywhere (fitting measures
// deviations against this exact expression, so containment can never drift).
double band_center(const BandNode& node, Key x);

enum class NodeType : uint8_t { Step = 0, Band = 1 };

// One index layer: same-typed nodes, routed by greatest lower_key <= x.
struct LayerDesign {
  NodeType node_type = NodeType::Step;
  uint16_t step_pieces = 0;  // p; step layers only
  std::vector<Key> lower_keys;
  std::vector<StepNode> step_nodes;
  std::vector<BandNode> band_nodes;
  uint64_t extent_below = 0;  // byte size of the layer this one predicts into

  size_t node_count() const { return lower_keys.size(); }
  uint64_t entry_payload() const { return node_type == NodeType::Step ? 16ull * step_pieces : 40ull; }
  uint64_t entry_size() const { return 8 + entry_payload(); }
  uint64_t serialized_size() const { return node_count() * entry_size(); }

  // Index of the node responsible for x; throws if x precedes the first node.
  size_t route(Key x) const;
  PositionRange predict(Key x) const;
  // Terminal bound for node j's last step piece.
  uint64_t step_terminal(size_t j) const;
};

// Full parameter tuple: layers[0] is closest to the data layer,
// layers.back() is the root. Empty means "no index, scan the data".
struct IndexDesign {
  std::vector<LayerDesign> layers;

  size_t layer_count() const { return layers.size(); }
  const LayerDesign& root() const { return layers.back(); }
  uint64_t root_size() const { return layers.empty() ? 0 : layers.back().serialized_size(); }
};

struct Violation {
  Key key = 0;
  size_t layer = 0;  // 1-based layer whose prediction failed; 0 = data layer issue
  std::string detail;
};

// Empty iff composing predictions from the root down covers, for every pair,
// each routed node's serialized bytes and finally the pair's true position.
std::vector<Violation> validate_design(const IndexDesign& design, const KeyPositionSet& data);

PositionRange predict_step(const StepNode& node, Key x, uint64_t terminal);
PositionRange predict_band(const BandNode& node, Key x, uint64_t extent_below);
PositionRange layer_predict(const LayerDesign& layer, Key x);

}  // namespace airindex
