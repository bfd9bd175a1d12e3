#pragma once
// On-storage layout, all little-endian, version 1.
//
// Layer object: entries back to back, one per node.
//   entry = u64 lower_key | payload
//   step payload = p x (u64 partition_key, u64 partition_position)  (16p bytes)
//   band payload = u64 x1 | u64 x2 | i64 y1 | i64 y2 | u64 delta    (40 bytes)
//
// Root object: metadata block, then the root layer's entries.
//   metadata = "AIRX" | u16 version | u16 layer_count
//            | per layer 1..L: u8 node_type | (u16 p, step only) | u64 node_count
//                            | u32 len + resource id | u64 serialized_size
//            | u32 len + data resource id | u32 data_entry_size
//
// An L-layer index is stored as L objects: `<prefix>.layer1` ..
// `<prefix>.layer<L-1>` plus `<prefix>.root` (root layer co-located with
// the metadata). Data layer: consecutive (u64 key, u64 value) entries.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "airindex/model.hpp"
#include "airindex/storage.hpp"

namespace airindex {

inline constexpr char kIndexMagic[4] = {'A', 'I', 'R', 'X'};
inline constexpr uint16_t kFormatVersion = 1;
inline constexpr uint32_t kDataEntrySize = 16;

struct LayerMeta {
  NodeType node_type = NodeType::Step;
  uint16_t step_pieces = 0;  // recorded for step layers only
  uint64_t node_count = 0;
  std::string resource;
  uint64_t serialized_size = 0;
};

struct IndexMetadata {
  uint16_t version = kFormatVersion;
  std::vector<LayerMeta> layers;  // layers[0] = layer 1 .. layers[L-1] = root
  std::string data_resource;
  uint32_t data_entry_size = kDataEntrySize;
};

std::vector<uint8_t> encode_metadata(const IndexMetadata& metadata);
// Returns the metadata and the number of bytes it occupied.
std::pair<IndexMetadata, uint64_t> decode_metadata(std::span<const uint8_t> bytes);

std::vector<uint8_t> encode_layer(const LayerDesign& layer);

// Entries decoded from a byte view; pair each lower key with its node.
struct DecodedNodes {
  std::vector<Key> lower_keys;
  std::vector<StepNode> step_nodes;
  std::vector<BandNode> band_nodes;

  size_t size() const { return lower_keys.size(); }
};

// `bytes` must be a whole number of entries (the query path aligns reads
// to entry boundaries before issuing them).
DecodedNodes decode_nodes(std::span<const uint8_t> bytes, NodeType node_type, uint16_t step_pieces);

// Data layer: consecutive 16-byte (key, value) entries, keys sorted
// (equal runs allowed; lookups return the first match).
std::vector<uint8_t> encode_data_layer(std::span<const std::pair<Key, uint64_t>> pairs);

// A persisted index, ready for lookups.
struct BuiltIndex {
  IndexMetadata metadata;
  std::vector<uint8_t> root_bytes;
  uint64_t metadata_size = 0;
  ResourceId root_resource;
  uint64_t data_extent = 0;

  size_t layer_count() const { return metadata.layers.size(); }
};

// Writes layers 1..L-1 to `<prefix>.layer<l>` and metadata + root layer to
// `<prefix>.root`. Idempotent overwrite.
BuiltIndex build_index(const IndexDesign& design, const ResourceId& data_resource,
                       const ResourceId& out_prefix, Backend& backend);

BuiltIndex open_index(const ResourceId& root_resource, Backend& backend);

}  // namespace airindex
