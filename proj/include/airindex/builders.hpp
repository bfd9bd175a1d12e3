#pragma once
// Layer builders: map a key-position collection to one candidate index
// layer. Three families, each swept over a geometric granularity grid:
//
//   GStep(p, lambda) - p-piece step nodes, greedy packing, piece span <= lambda
//   GBand(lambda)    - band nodes grown while a line can stab every pair's
//                      range within total width lambda (monotone-chain hulls)
//   EBand(lambda)    - band nodes over equal position-span groups, least
//                      squares on range midpoints
//
// Inputs larger than kBuildPartitionPairs are built in independent chunks
// and concatenated, so builds parallelize without changing the output.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airindex/model.hpp"

namespace airindex {

struct BuilderSpec {
  enum class Family { GStep, GBand, EBand };

  Family family = Family::GStep;
  uint32_t pieces = 16;  // GStep only
  uint64_t lambda = 4096;

  std::string name() const;
  bool operator==(const BuilderSpec&) const = default;
};

struct BuilderSet {
  std::vector<BuilderSpec> builders;
  uint64_t lambda_low = 0;
  uint64_t lambda_high = 0;
  double base = 2.0;

  size_t size() const { return builders.size(); }
};

// {GStep(p, l)} u {GBand(l)} u {EBand(l)} over l = lambda_low * base^i <= lambda_high.
BuilderSet default_builder_set(uint64_t lambda_low = 64, uint64_t lambda_high = 1048576,
                               double base = 2.0, uint32_t pieces = 16);

// Instrumentation for the single-pass property: pair visits plus hull pushes
// and pops, summed across chunks.
struct BuildStats {
  uint64_t touches = 0;
};

LayerDesign build_gstep(const KeyPositionSet& data, uint32_t pieces, uint64_t lambda,
                        int parallelism = 1, BuildStats* stats = nullptr);
LayerDesign build_gband(const KeyPositionSet& data, uint64_t lambda, int parallelism = 1,
                        BuildStats* stats = nullptr);
LayerDesign build_eband(const KeyPositionSet& data, uint64_t lambda, int parallelism = 1,
                        BuildStats* stats = nullptr);
LayerDesign build_layer(const KeyPositionSet& data, const BuilderSpec& spec, int parallelism = 1,
                        BuildStats* stats = nullptr);

// The key-position collection the next layer up must index: pair j covers
// node j's lower key and serialized byte range.
KeyPositionSet outline(const LayerDesign& layer);

// Chunk size for partitioned building.
inline constexpr size_t kBuildPartitionPairs = 1'000'000;

}  // namespace airindex
