#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "airindex/cost.hpp"
#include "test_support.hpp"

using namespace airindex;
using namespace airindex::testing;

namespace {

const StorageProfile kEnvA = StorageProfile::affine(100e-6, 1e9);   // 100us, 1 GB/s
const StorageProfile kEnvB = StorageProfile::affine(100e-3, 100e6); // 100ms, 100 MB/s

// A step layer whose every real-key prediction is [0, read_bytes), padded
// with sentinel nodes until the layer serializes to exactly `layer_bytes`.
// Step entries are 1008 bytes (p=62), so sizes must be multiples of 1008.
LayerDesign constant_read_layer(uint64_t read_bytes, uint64_t layer_bytes, uint64_t extent_below,
                                Key first_key) {
  constexpr uint16_t kPieces = 62;
  constexpr uint64_t kEntry = 8 + 16ull * kPieces;
  REQUIRE(layer_bytes % kEntry == 0);
  LayerDesign layer;
  layer.node_type = NodeType::Step;
  layer.step_pieces = kPieces;
  layer.extent_below = extent_below;
  auto sentinel_node = [&] {
    StepNode node;
    node.keys.assign(kPieces, kMaxKey);
    node.positions.assign(kPieces, read_bytes);
    return node;
  };
  StepNode lead = sentinel_node();
  lead.keys[0] = first_key;
  lead.positions[0] = 0;
  layer.lower_keys.push_back(first_key);
  layer.step_nodes.push_back(lead);
  for (size_t j = 1; j * kEntry < layer_bytes; ++j) {
    layer.lower_keys.push_back(kMaxKey - (layer_bytes / kEntry) + j);
    layer.step_nodes.push_back(sentinel_node());
  }
  return layer;
}

// Structure A: three step layers, every read 4 KB (decimal), over a 4000-byte
// data layer of 250 16-byte pairs.
struct MotivationFixture {
  KeyPositionSet data;
  IndexDesign structure_a;
  IndexDesign structure_b;
};

MotivationFixture motivation_fixture() {
  MotivationFixture fx;
  fx.data = uniform_pairs(250);
  Key first = fx.data[0].key;

  fx.structure_a.layers.push_back(constant_read_layer(4000, 1008, 4000, first));
  fx.structure_a.layers.push_back(constant_read_layer(4000, 1008, 1008, first));
  fx.structure_a.layers.push_back(constant_read_layer(4000, 4032, 1008, first));

  fx.structure_b.layers.push_back(constant_read_layer(4000, 1008, 4000, first));
  fx.structure_b.layers.push_back(constant_read_layer(100'000, 100'800, 1008, first));
  return fx;
}

}  // namespace

TEST_CASE("motivating lookup arithmetic, exact to six digits") {
  auto fx = motivation_fixture();
  REQUIRE(validate_design(fx.structure_a, fx.data).empty());
  REQUIRE(validate_design(fx.structure_b, fx.data).empty());

  Key x = fx.data[17].key;
  auto a_cold = lookup_cost(fx.structure_a, fx.data, x, kEnvA);
  CHECK(a_cold.total == doctest::Approx(416e-6).epsilon(1e-7));
  CHECK(a_cold.per_layer_costs.size() == 3);
  CHECK(a_cold.root_cost == doctest::Approx(100e-6 + 4032.0 / 1e9).epsilon(1e-9));

  auto b_cold = lookup_cost(fx.structure_b, fx.data, x, kEnvA);
  CHECK(b_cold.total == doctest::Approx(504e-6).epsilon(1e-7));

  CHECK(lookup_cost(fx.structure_a, fx.data, x, kEnvB).total ==
        doctest::Approx(400.16e-3).epsilon(1e-7));
  CHECK(lookup_cost(fx.structure_b, fx.data, x, kEnvB).total ==
        doctest::Approx(302.04e-3).epsilon(1e-7));
}

TEST_CASE("lookup cost breakdown adds up and flags absent keys") {
  auto data = uniform_pairs(64);
  IndexDesign design;
  design.layers.push_back(build_gstep(data, 4, 64));
  auto breakdown = lookup_cost(design, data, data[10].key, kEnvA);
  double sum = breakdown.root_cost;
  for (double c : breakdown.per_layer_costs) sum += c;
  CHECK(breakdown.total == doctest::Approx(sum).epsilon(1e-15));
  CHECK(breakdown.per_layer_costs.size() == design.layer_count());
  CHECK_THROWS_AS(lookup_cost(design, data, data[10].key + 1, kEnvA), Error);
}

TEST_CASE("no index means one full scan") {
  auto data = uniform_pairs(250);  // 4000 bytes
  IndexDesign empty;
  auto breakdown = lookup_cost(empty, data, data[0].key, kEnvA);
  CHECK(breakdown.total == doctest::Approx(104e-6).epsilon(1e-9));
  CHECK(breakdown.per_layer_costs.empty());
  CHECK(expected_cost(empty, data, kEnvA) == doctest::Approx(104e-6).epsilon(1e-9));
}

TEST_CASE("exhaustive expected cost equals the arithmetic mean") {
  auto data = random_pairs(2000, 5);
  IndexDesign design;
  design.layers.push_back(build_gband(data, 4096));
  design.layers.push_back(build_gstep(outline(design.layers[0]), 8, 1024));
  REQUIRE(validate_design(design, data).empty());

  double mean = 0.0;
  for (const auto& p : data) mean += lookup_cost(design, data, p.key, kEnvA).total;
  mean /= double(data.size());
  CHECK(expected_cost(design, data, kEnvA) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("constant-delta design costs root plus L times T(c)") {
  auto fx = motivation_fixture();
  double expected = (100e-6 + 4032.0 / 1e9) + 3 * (100e-6 + 4000.0 / 1e9);
  CHECK(expected_cost(fx.structure_a, fx.data, kEnvA) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("step index complexity minimizes over L by hand") {
  // s_D = 64: L=0 costs T(64) = 100.064us; L=1 costs 2*T(32) = 200.064us.
  auto result = step_index_complexity(64, kEnvA);
  CHECK(result.layers == 0);
  CHECK(result.seconds == doctest::Approx(100.064e-6).epsilon(1e-9));

  auto tiny = step_index_complexity(1, kEnvA);
  CHECK(tiny.layers == 0);
  CHECK(tiny.seconds == doctest::Approx(kEnvA.cost(1)).epsilon(1e-12));
}

TEST_CASE("step index complexity equals brute force over the full range") {
  auto nfs = StorageProfile::affine(0.05, 12e6);
  uint64_t s_d = 6'400'000'000ull;
  auto result = step_index_complexity(s_d, nfs);
  double best = 1e300;
  uint32_t best_layers = 0;
  for (uint32_t layers = 0; layers <= 33; ++layers) {
    double size = std::exp((std::log(double(s_d)) + double(layers) * std::log(16.0)) /
                           double(layers + 1));
    double cost = double(layers + 1) * nfs.cost(size);
    if (cost < best) { best = cost; best_layers = layers; }
  }
  CHECK(result.layers == best_layers);
  CHECK(result.seconds == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("step index complexity randomized oracle and monotonicity") {
  std::mt19937_64 rng(2024);
  auto rand_log = [&](double lo, double hi) {
    double u = double(rng() % 1'000'000) / 1e6;
    return lo * std::pow(hi / lo, u);
  };
  double prev = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    uint64_t s_d = uint64_t(rand_log(1, 1e12));
    auto profile = StorageProfile::affine(rand_log(1e-6, 1e3), rand_log(1e3, 1e12));
    auto result = step_index_complexity(s_d, profile);
    double best = 1e300;
    uint32_t best_layers = 0;
    uint32_t max_layers = uint32_t(std::ceil(std::log2(double(s_d))));
    for (uint32_t layers = 0; layers <= max_layers; ++layers) {
      double size = std::pow(double(s_d) * std::pow(16.0, double(layers)), 1.0 / double(layers + 1));
      double cost = double(layers + 1) * profile.cost(size);
      if (cost < best) { best = cost; best_layers = layers; }
    }
    CHECK(result.layers == best_layers);
    CHECK(result.seconds == doctest::Approx(best).epsilon(1e-12));
    (void)prev;
  }
  // Non-decreasing in s_D at a fixed profile.
  auto profile = StorageProfile::affine(1e-3, 1e8);
  prev = 0.0;
  for (uint64_t s_d = 1; s_d < (1ull << 40); s_d *= 7) {
    double cost = step_index_complexity(s_d, profile).seconds;
    CHECK(cost >= prev - 1e-15);
    prev = cost;
  }
}

TEST_CASE("pure step designs never beat the idealized step optimum") {
  auto data = uniform_pairs(4096);
  auto profile = StorageProfile::affine(250e-6, 175e6);
  double floor_cost = step_index_complexity(data.total_extent(), profile).seconds;
  for (uint64_t lambda : {256, 1024, 4096, 16384}) {
    IndexDesign design;
    KeyPositionSet current = data;
    for (int l = 0; l < 4; ++l) {
      design.layers.push_back(build_gstep(current, 16, lambda));
      current = outline(design.layers.back());
      if (current.size() == 1) break;
    }
    CHECK(expected_cost(design, data, profile) >= floor_cost - 1e-12);
  }
}

TEST_CASE("ideal latency with an index is two unit reads") {
  CHECK(ideal_latency_with_index(kEnvA) == doctest::Approx(2 * (100e-6 + 1e-9)).epsilon(1e-12));
  auto nfs = StorageProfile::affine(0.05, 12e6);
  CHECK(ideal_latency_with_index(nfs) == doctest::Approx(0.1 + 2.0 / 12e6).epsilon(1e-12));
  auto table = StorageProfile::table({{1, 0.25}, {100, 0.5}});
  CHECK(ideal_latency_with_index(table) == doctest::Approx(0.5).epsilon(1e-12));
}
