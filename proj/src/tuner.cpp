#include "airindex/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>

#include "json.hpp"

namespace airindex {

double score_candidate(const LayerDesign& layer, uint64_t outlined_extent,
                       const KeyPositionSet& data, const StorageProfile& profile,
                       const SampleSpec& sampling) {
  return step_index_complexity(outlined_extent, profile).seconds +
         mean_layer_read_cost(layer, data, profile, sampling);
}

std::vector<Candidate> select_top_k(std::vector<Candidate> candidates, size_t k) {
  if (candidates.empty()) throw Error(Error::Code::InvalidArgument, "no candidates to select from");
  auto order = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.outlined.total_extent() != b.outlined.total_extent())
      return a.outlined.total_extent() < b.outlined.total_extent();
    return a.builder_index < b.builder_index;
  };
  std::sort(candidates.begin(), candidates.end(), order);
  if (candidates.size() > k) candidates.resize(k);
  return candidates;
}

namespace {

// One explored design: the layers stacked above some branch collection,
// bottom (closest to that collection) first.
struct Chain {
  std::vector<LayerDesign> layers;
  std::vector<size_t> builder_indices;
};

struct SearchCtx {
  const StorageProfile& profile;
  const TuneConfig& config;
  std::atomic<size_t> explored{0};
};

double chain_cost(const Chain& chain, const KeyPositionSet& data, const SearchCtx& ctx) {
  IndexDesign design{chain.layers};
  return expected_cost(design, data, ctx.profile, ctx.config.sampling);
}

// Deterministic preference among equal-cost designs: fewer layers, then a
// smaller root.
bool better(double cost_a, const Chain& a, double cost_b, const Chain& b) {
  if (cost_a != cost_b) return cost_a < cost_b;
  if (a.layers.size() != b.layers.size()) return a.layers.size() < b.layers.size();
  uint64_t root_a = a.layers.empty() ? UINT64_MAX : a.layers.back().serialized_size();
  uint64_t root_b = b.layers.empty() ? UINT64_MAX : b.layers.back().serialized_size();
  return root_a < root_b;
}

Chain search(const KeyPositionSet& collection, size_t depth, SearchCtx& ctx) {
  Chain best;  // empty design: scan the collection
  if (depth >= ctx.config.max_layers) return best;
  double scan_cost = ctx.profile.cost(double(collection.total_extent()));
  if (scan_cost < ideal_latency_with_index(ctx.profile)) return best;

  // Build one candidate layer per builder.
  const auto& builders = ctx.config.builder_set.builders;
  std::function<Candidate(size_t)> build_one = [&](size_t i) {
    Candidate cand;
    cand.builder_index = i;
    cand.layer = build_layer(collection, builders[i], 1);
    cand.outlined = outline(cand.layer);
    cand.score = score_candidate(cand.layer, cand.outlined.total_extent(), collection, ctx.profile,
                                 ctx.config.sampling);
    return cand;
  };
  std::vector<Candidate> candidates =
      parallel_map<Candidate>(builders.size(), ctx.config.parallelism, build_one);
  ctx.explored += candidates.size();

  // A layer that does not shrink the collection cannot lead anywhere.
  std::erase_if(candidates, [&](const Candidate& c) {
    return c.outlined.total_extent() >= collection.total_extent();
  });
  if (candidates.empty()) return best;

  std::vector<Candidate> top = select_top_k(std::move(candidates), ctx.config.top_k);

  std::function<Chain(size_t)> recurse = [&](size_t i) {
    Chain chain;
    Chain upper = search(top[i].outlined, depth + 1, ctx);
    chain.layers.push_back(std::move(top[i].layer));
    chain.builder_indices.push_back(top[i].builder_index);
    for (auto& layer : upper.layers) chain.layers.push_back(std::move(layer));
    for (size_t b : upper.builder_indices) chain.builder_indices.push_back(b);
    return chain;
  };
  std::vector<Chain> chains = parallel_map<Chain>(top.size(), ctx.config.parallelism, recurse);

  double best_cost = scan_cost;
  for (auto& chain : chains) {
    double cost = chain_cost(chain, collection, ctx);
    if (better(cost, chain, best_cost, best)) {
      best = std::move(chain);
      best_cost = cost;
    }
  }
  return best;
}

}  // namespace

TuneResult airtune(const KeyPositionSet& data, const StorageProfile& profile,
                   const TuneConfig& config) {
  if (data.empty()) throw Error(Error::Code::InvalidArgument, "cannot tune over an empty collection");
  if (config.top_k < 1 || config.max_layers < 1)
    throw Error(Error::Code::InvalidArgument, "top_k and max_layers must be >= 1");

  SearchCtx ctx{profile, config};
  Chain chain = search(data, 0, ctx);

  TuneResult result;
  result.design = IndexDesign{chain.layers};
  result.expected_cost_s = expected_cost(result.design, data, profile, config.sampling);
  result.root_cost_s = profile.cost(double(result.design.layers.empty()
                                               ? data.total_extent()
                                               : result.design.root_size()));
  result.explored_candidates = ctx.explored.load();
  for (size_t l = 0; l < chain.layers.size(); ++l) {
    const LayerDesign& layer = result.design.layers[l];
    LayerReport report;
    report.builder = config.builder_set.builders[chain.builder_indices[l]].name();
    report.node_count = layer.node_count();
    report.serialized_bytes = layer.serialized_size();
    report.mean_read_cost_s = mean_layer_read_cost(layer, data, profile, config.sampling);
    result.layers.push_back(std::move(report));
  }
  return result;
}

std::string TuneResult::report_json() const {
  nlohmann::json j;
  j["layer_count"] = design.layer_count();
  j["expected_cost_s"] = expected_cost_s;
  j["root_cost_s"] = root_cost_s;
  j["explored_candidates"] = explored_candidates;
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : layers) {
    j["layers"].push_back({{"builder", layer.builder},
                           {"node_count", layer.node_count},
                           {"serialized_bytes", layer.serialized_bytes},
                           {"mean_read_cost_s", layer.mean_read_cost_s}});
  }
  return j.dump(2);
}

std::string TuneResult::report_text() const {
  std::ostringstream out;
  out << "layers: " << design.layer_count() << "\n";
  out << "expected cost: " << expected_cost_s * 1e3 << " ms\n";
  out << "explored candidates: " << explored_candidates << "\n";
  for (size_t l = 0; l < layers.size(); ++l) {
    out << "  layer " << (l + 1) << ": " << layers[l].builder << ", " << layers[l].node_count
        << " nodes, " << layers[l].serialized_bytes << " bytes\n";
  }
  return out.str();
}

}  // namespace airindex
