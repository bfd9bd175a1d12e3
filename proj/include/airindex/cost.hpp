#pragma once
// The storage-model latency objective: per-lookup cost breakdowns, expected
// cost over a key distribution, the step-index-complexity selection
// heuristic, and the ideal-layer latency used by the tuner's stopping rule.

#include <cstdint>
#include <vector>

#include "airindex/model.hpp"
#include "airindex/storage.hpp"

namespace airindex {

// Ideal serialized footprint of a 1-piece step entry (8-byte key + 8-byte
// position); the balancing constant inside the complexity heuristic.
inline constexpr double kStepEntryBytes = 16.0;

struct CostBreakdown {
  double root_cost = 0.0;                // T(s(root)); T(s_D) when there is no index
  std::vector<double> per_layer_costs;   // T(delta) for layers L-1 .. 0 in traversal order
  double total = 0.0;
};

// How expectations over keys are evaluated: exact mean when the collection
// has at most `max_exhaustive` keys, otherwise a seeded uniform sample.
struct SampleSpec {
  uint64_t max_exhaustive = 1'000'000;
  size_t sample_count = 10'000;
  uint64_t seed = 0x5eedULL;
};

// T(s(root)) + sum of T(delta(x; layer_l)) for l = L..1; T(s_D) when L = 0.
CostBreakdown lookup_cost(const IndexDesign& design, const KeyPositionSet& data, Key x,
                          const StorageProfile& profile);

// Mean lookup cost over the collection's keys (uniform distribution).
double expected_cost(const IndexDesign& design, const KeyPositionSet& data,
                     const StorageProfile& profile, const SampleSpec& sampling = {});

// Mean T(|layer.predict(x)|) over the collection's keys; the layer-local
// term of both the objective and the selection score.
double mean_layer_read_cost(const LayerDesign& layer, const KeyPositionSet& data,
                            const StorageProfile& profile, const SampleSpec& sampling = {});

// Expected bytes fetched per lookup: s(root) + sum of mean deltas.
double expected_read_volume(const IndexDesign& design, const KeyPositionSet& data,
                            const SampleSpec& sampling = {});

struct StepComplexity {
  double seconds = 0.0;
  uint32_t layers = 0;  // argmin L; smallest L on ties
};

// min over L in {0..ceil(log2 s_D)} of (L+1) * T((s_D * 16^L)^(1/(L+1))):
// the cost of an idealized, perfectly balanced step index over s_D bytes.
StepComplexity step_index_complexity(uint64_t s_d, const StorageProfile& profile);

// T(1) + T(1): a hypothetical 1-byte root with 1-byte precision. An extra
// layer can only help while the current layer costs more than this.
double ideal_latency_with_index(const StorageProfile& profile);

}  // namespace airindex
