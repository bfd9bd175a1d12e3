#include "airindex/cost.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace airindex {

CostBreakdown lookup_cost(const IndexDesign& design, const KeyPositionSet& data, Key x,
                          const StorageProfile& profile) {
  if (data.find(x) == KeyPositionSet::npos)
    throw Error(Error::Code::NotFound, "key absent from the collection");
  CostBreakdown out;
  if (design.layers.empty()) {
    out.root_cost = profile.cost(double(data.total_extent()));
    out.total = out.root_cost;
    return out;
  }
  out.root_cost = profile.cost(double(design.root_size()));
  out.total = out.root_cost;
  for (size_t l = design.layer_count(); l >= 1; --l) {
    double delta = double(design.layers[l - 1].predict(x).width());
    double c = profile.cost(delta);
    out.per_layer_costs.push_back(c);
    out.total += c;
  }
  return out;
}

namespace {

// Visits either every pair index or a seeded uniform sample of them.
template <typename Fn>
double mean_over_keys(const KeyPositionSet& data, const SampleSpec& sampling, Fn per_pair) {
  size_t n = data.size();
  std::vector<double> values;
  if (uint64_t(n) <= sampling.max_exhaustive) {
    values.resize(n);
    for (size_t i = 0; i < n; ++i) values[i] = per_pair(i);
  } else {
    std::mt19937_64 rng(mix_seed(sampling.seed));
    values.resize(sampling.sample_count);
    for (size_t s = 0; s < sampling.sample_count; ++s) values[s] = per_pair(rng() % n);
  }
  return pairwise_sum(values) / double(values.size());
}

}  // namespace

double mean_layer_read_cost(const LayerDesign& layer, const KeyPositionSet& data,
                            const StorageProfile& profile, const SampleSpec& sampling) {
  return mean_over_keys(data, sampling, [&](size_t i) {
    return profile.cost(double(layer.predict(data[i].key).width()));
  });
}

double expected_cost(const IndexDesign& design, const KeyPositionSet& data,
                     const StorageProfile& profile, const SampleSpec& sampling) {
  if (data.empty()) throw Error(Error::Code::InvalidArgument, "empty collection");
  if (design.layers.empty()) return profile.cost(double(data.total_extent()));
  double total = profile.cost(double(design.root_size()));
  for (const auto& layer : design.layers) total += mean_layer_read_cost(layer, data, profile, sampling);
  return total;
}

double expected_read_volume(const IndexDesign& design, const KeyPositionSet& data,
                            const SampleSpec& sampling) {
  if (design.layers.empty()) return double(data.total_extent());
  double volume = double(design.root_size());
  for (const auto& layer : design.layers) {
    volume += mean_over_keys(data, sampling,
                             [&](size_t i) { return double(layer.predict(data[i].key).width()); });
  }
  return volume;
}

StepComplexity step_index_complexity(uint64_t s_d, const StorageProfile& profile) {
  if (s_d < 1) throw Error(Error::Code::InvalidArgument, "collection size must be >= 1");
  uint32_t max_layers = uint32_t(std::ceil(std::log2(double(s_d))));
  StepComplexity best;
  for (uint32_t layers = 0; layers <= max_layers; ++layers) {
    double balanced = std::pow(double(s_d) * std::pow(kStepEntryBytes, double(layers)),
                               1.0 / double(layers + 1));
    double cost = double(layers + 1) * profile.cost(balanced);
    if (layers == 0 || cost < best.seconds) best = {cost, layers};
  }
  return best;
}

double ideal_latency_with_index(const StorageProfile& profile) {
  return profile.cost(1.0) + profile.cost(1.0);
}

}  // namespace airindex
