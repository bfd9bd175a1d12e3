#pragma once
// Guided graph search over layer-builder decisions. From the data layer up:
// build one candidate layer per builder, score each as "remaining work"
// (step index complexity of its outline) plus its own expected partial-read
// cost, keep the top k, recurse on their outlines, and return the design
// with the lowest modeled expected latency. A branch stops growing once
// even an ideal 1-byte layer could not beat scanning the branch collection.

#include <cstdint>
#include <string>
#include <vector>

#include "airindex/builders.hpp"
#include "airindex/cost.hpp"
#include "airindex/model.hpp"
#include "airindex/storage.hpp"

namespace airindex {

struct TuneConfig {
  size_t top_k = 5;
  BuilderSet builder_set = default_builder_set();
  size_t max_layers = 8;  // safety bound; the stopping rule fires far earlier
  int parallelism = 1;
  SampleSpec sampling;
};

struct Candidate {
  size_t builder_index = 0;  // position in the builder grid (tie-break order)
  LayerDesign layer;
  KeyPositionSet outlined;
  double score = 0.0;
};

// tau_hat(outline) + mean T(|layer.predict(x)|) over the branch collection.
double score_candidate(const LayerDesign& layer, uint64_t outlined_extent,
                       const KeyPositionSet& data, const StorageProfile& profile,
                       const SampleSpec& sampling = {});

// k lowest scores; ties broken by smaller outlined extent, then grid order.
std::vector<Candidate> select_top_k(std::vector<Candidate> candidates, size_t k);

struct LayerReport {
  std::string builder;
  size_t node_count = 0;
  uint64_t serialized_bytes = 0;
  double mean_read_cost_s = 0.0;
};

struct TuneResult {
  IndexDesign design;
  double expected_cost_s = 0.0;
  double root_cost_s = 0.0;
  size_t explored_candidates = 0;
  std::vector<LayerReport> layers;  // index 0 = layer closest to the data

  std::string report_json() const;
  std::string report_text() const;
};

TuneResult airtune(const KeyPositionSet& data, const StorageProfile& profile,
                   const TuneConfig& config = {});

}  // namespace airindex
