#include "airindex/format.hpp"

#include <algorithm>
#include <cstring>

namespace airindex {

std::vector<uint8_t> encode_metadata(const IndexMetadata& metadata) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kIndexMagic, kIndexMagic + 4);
  le::put_u16(out, metadata.version);
  le::put_u16(out, uint16_t(metadata.layers.size()));
  for (const auto& layer : metadata.layers) {
    out.push_back(uint8_t(layer.node_type));
    if (layer.node_type == NodeType::Step) le::put_u16(out, layer.step_pieces);
    le::put_u64(out, layer.node_count);
    le::put_u32(out, uint32_t(layer.resource.size()));
    out.insert(out.end(), layer.resource.begin(), layer.resource.end());
    le::put_u64(out, layer.serialized_size);
  }
  le::put_u32(out, uint32_t(metadata.data_resource.size()));
  out.insert(out.end(), metadata.data_resource.begin(), metadata.data_resource.end());
  le::put_u32(out, metadata.data_entry_size);
  return out;
}

std::pair<IndexMetadata, uint64_t> decode_metadata(std::span<const uint8_t> bytes) {
  le::Reader in(bytes);
  auto magic = in.take(4);
  if (std::memcmp(magic.data(), kIndexMagic, 4) != 0)
    throw Error(Error::Code::Corrupt, "bad index magic");
  IndexMetadata md;
  md.version = in.u16();
  if (md.version != kFormatVersion)
    throw Error(Error::Code::Corrupt, "unsupported format version " + std::to_string(md.version));
  uint16_t layer_count = in.u16();
  md.layers.resize(layer_count);
  for (auto& layer : md.layers) {
    uint8_t tag = in.u8();
    if (tag > 1) throw Error(Error::Code::UnknownNodeType, "unknown node type tag");
    layer.node_type = NodeType(tag);
    if (layer.node_type == NodeType::Step) layer.step_pieces = in.u16();
    layer.node_count = in.u64();
    auto res = in.take(in.u32());
    layer.resource.assign(res.begin(), res.end());
    layer.serialized_size = in.u64();
  }
  auto res = in.take(in.u32());
  md.data_resource.assign(res.begin(), res.end());
  md.data_entry_size = in.u32();
  return {std::move(md), in.pos()};
}

std::vector<uint8_t> encode_layer(const LayerDesign& layer) {
  std::vector<uint8_t> out;
  out.reserve(layer.serialized_size());
  for (size_t j = 0; j < layer.node_count(); ++j) {
    le::put_u64(out, layer.lower_keys[j]);
    if (layer.node_type == NodeType::Step) {
      const StepNode& node = layer.step_nodes[j];
      if (node.keys.size() != layer.step_pieces)
        throw Error(Error::Code::InvalidArgument, "step node piece count differs from the layer's");
      for (size_t i = 0; i < node.keys.size(); ++i) {
        le::put_u64(out, node.keys[i]);
        le::put_u64(out, node.positions[i]);
      }
    } else {
      const BandNode& node = layer.band_nodes[j];
      le::put_u64(out, node.x1);
      le::put_u64(out, node.x2);
      le::put_i64(out, node.y1);
      le::put_i64(out, node.y2);
      le::put_u64(out, node.delta);
    }
  }
  return out;
}

DecodedNodes decode_nodes(std::span<const uint8_t> bytes, NodeType node_type,
                          uint16_t step_pieces) {
  if (node_type != NodeType::Step && node_type != NodeType::Band)
    throw Error(Error::Code::UnknownNodeType, "unknown node type tag");
  uint64_t entry = node_type == NodeType::Step ? 8 + 16ull * step_pieces : 48;
  if (bytes.size() % entry != 0)
    throw Error(Error::Code::Misaligned,
                "byte range is not a whole number of " + std::to_string(entry) + "-byte entries");
  DecodedNodes out;
  size_t count = bytes.size() / entry;
  out.lower_keys.reserve(count);
  le::Reader in(bytes);
  for (size_t j = 0; j < count; ++j) {
    out.lower_keys.push_back(in.u64());
    if (node_type == NodeType::Step) {
      StepNode node;
      node.keys.resize(step_pieces);
      node.positions.resize(step_pieces);
      for (size_t i = 0; i < step_pieces; ++i) {
        node.keys[i] = in.u64();
        node.positions[i] = in.u64();
      }
      out.step_nodes.push_back(std::move(node));
    } else {
      BandNode node;
      node.x1 = in.u64();
      node.x2 = in.u64();
      node.y1 = in.i64();
      node.y2 = in.i64();
      node.delta = in.u64();
      out.band_nodes.push_back(node);
    }
  }
  return out;
}

std::vector<uint8_t> encode_data_layer(std::span<const std::pair<Key, uint64_t>> pairs) {
  std::vector<uint8_t> out;
  out.reserve(pairs.size() * kDataEntrySize);
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0 && pairs[i].first < pairs[i - 1].first)
      throw Error(Error::Code::InvalidArgument, "data keys must be sorted");
    le::put_u64(out, pairs[i].first);
    le::put_u64(out, pairs[i].second);
  }
  return out;
}

BuiltIndex build_index(const IndexDesign& design, const ResourceId& data_resource,
                       const ResourceId& out_prefix, Backend& backend) {
  size_t levels = design.layer_count();
  IndexMetadata md;
  md.data_resource = data_resource.str();
  ResourceId root_resource = out_prefix.with_suffix(".root");

  for (size_t l = 1; l <= levels; ++l) {
    const LayerDesign& layer = design.layers[l - 1];
    LayerMeta meta;
    meta.node_type = layer.node_type;
    meta.step_pieces = layer.node_type == NodeType::Step ? layer.step_pieces : 0;
    meta.node_count = layer.node_count();
    meta.serialized_size = layer.serialized_size();
    meta.resource = (l == levels) ? root_resource.str()
                                  : out_prefix.with_suffix(".layer" + std::to_string(l)).str();
    md.layers.push_back(std::move(meta));
  }

  for (size_t l = 1; l < levels; ++l) {
    auto bytes = encode_layer(design.layers[l - 1]);
    backend.write(ResourceId::parse(md.layers[l - 1].resource), bytes);
  }

  BuiltIndex built;
  built.metadata = md;
  built.root_resource = root_resource;
  auto object = encode_metadata(md);
  built.metadata_size = object.size();
  if (levels > 0) {
    built.root_bytes = encode_layer(design.layers[levels - 1]);
    object.insert(object.end(), built.root_bytes.begin(), built.root_bytes.end());
  }
  backend.write(root_resource, object);
  built.data_extent = backend.extent(data_resource);
  return built;
}

BuiltIndex open_index(const ResourceId& root_resource, Backend& backend) {
  uint64_t size = backend.extent(root_resource);
  auto object = backend.read(root_resource, {0, size});
  auto [md, md_size] = decode_metadata(object);
  BuiltIndex built;
  built.metadata = std::move(md);
  built.metadata_size = md_size;
  built.root_resource = root_resource;
  built.root_bytes.assign(object.begin() + long(md_size), object.end());
  if (!built.metadata.layers.empty() &&
      built.root_bytes.size() != built.metadata.layers.back().serialized_size)
    throw Error(Error::Code::Corrupt, "root layer size differs from metadata");
  built.data_extent = backend.extent(ResourceId::parse(built.metadata.data_resource));
  return built;
}

}  // namespace airindex
