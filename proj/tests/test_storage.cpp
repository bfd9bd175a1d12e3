#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <random>

#include "airindex/storage.hpp"

using namespace airindex;

namespace {

std::vector<uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("affine cost reproduces the motivating arithmetic") {
  auto env_a = StorageProfile::affine(100e-6, 1e9);  // 100us, 1 GB/s
  CHECK(env_a.cost(4000) == doctest::Approx(104e-6).epsilon(1e-12));
  CHECK(env_a.cost(100'000) == doctest::Approx(200e-6).epsilon(1e-12));
  CHECK(env_a.cost(0) == doctest::Approx(100e-6).epsilon(1e-12));
}

TEST_CASE("affine-uniform expectation") {
  auto p = StorageProfile::affine_uniform(1e-3, 3e-3, 1e6, 4e6);
  double expected = 2e-3 + 1000.0 * (std::log(4e6) - std::log(1e6)) / 3e6;
  CHECK(p.cost(1000) == doctest::Approx(expected).epsilon(1e-12));
  // Degenerate band collapses to plain affine.
  auto q = StorageProfile::affine_uniform(1e-3, 1e-3, 2e6, 2e6);
  CHECK(q.cost(2e6) == doctest::Approx(1e-3 + 1.0).epsilon(1e-12));
}

TEST_CASE("table profile interpolates and clamps") {
  auto p = StorageProfile::table({{100, 1.0}, {200, 2.0}, {400, 2.0}});
  CHECK(p.cost(150) == doctest::Approx(1.5));
  CHECK(p.cost(10) == doctest::Approx(1.0));    // clamped low
  CHECK(p.cost(1000) == doctest::Approx(2.0));  // clamped high
  CHECK_THROWS_AS(StorageProfile::table({{100, 2.0}, {200, 1.0}}), Error);
  CHECK_THROWS_AS(StorageProfile::table({{100, 1.0}, {100, 2.0}}), Error);
}

TEST_CASE("cost is monotone for every profile kind") {
  std::mt19937_64 rng(7);
  std::vector<StorageProfile> profiles = {
      StorageProfile::affine(1e-4, 1e8),
      StorageProfile::affine_uniform(1e-4, 1e-3, 1e6, 1e9),
      StorageProfile::table({{0, 1e-4}, {4096, 2e-4}, {1 << 20, 5e-3}}),
  };
  for (const auto& p : profiles) {
    for (int i = 0; i < 200; ++i) {
      double d1 = double(rng() % 2'000'000);
      double d2 = double(rng() % 2'000'000);
      if (d1 > d2) std::swap(d1, d2);
      CHECK(p.cost(d1) <= p.cost(d2));
    }
  }
}

TEST_CASE("profile text round trip") {
  auto p = StorageProfile::affine(0.05, 12e6);
  auto text = p.to_text();
  CHECK(text.substr(0, 12) == "kind=affine\n");
  auto q = StorageProfile::from_text(text);
  CHECK(q.latency_s() == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(q.bandwidth_bps() == doctest::Approx(12e6).epsilon(1e-15));
}

TEST_CASE("resource ids parse and reject garbage") {
  auto mem = ResourceId::parse("mem://scratch");
  CHECK(mem.scheme == ResourceId::Scheme::Mem);
  CHECK(mem.path == "scratch");
  auto file = ResourceId::parse("file:///tmp/x.bin");
  CHECK(file.scheme == ResourceId::Scheme::File);
  CHECK(file.path == "/tmp/x.bin");
  CHECK(file.with_suffix(".root").str() == "file:///tmp/x.bin.root");
  CHECK_THROWS_AS(ResourceId::parse("http://nope"), Error);
  CHECK_THROWS_AS(ResourceId::parse("mem://"), Error);
}

TEST_CASE("mem backend read semantics") {
  MemBackend backend;
  auto id = ResourceId::parse("mem://obj");
  backend.write(id, bytes_of("abcdef"));
  CHECK(backend.read(id, {2, 3}) == bytes_of("cde"));
  CHECK(backend.read(id, {4, 10}) == bytes_of("ef"));  // truncated at extent
  CHECK_THROWS_AS(backend.read(id, {6, 1}), Error);    // offset beyond extent
  CHECK_THROWS_AS(backend.read(ResourceId::parse("mem://missing"), {0, 1}), Error);

  backend.write(id, bytes_of(""));  // zero-extent object
  CHECK(backend.extent(id) == 0);
  CHECK_THROWS_AS(backend.read(id, {0, 1}), Error);

  backend.write(id, bytes_of("xyz"));  // overwrite shrinks/replaces
  CHECK(backend.extent(id) == 3);
  CHECK(backend.read(id, {0, 3}) == bytes_of("xyz"));
}

TEST_CASE("file backend round trip") {
  auto path = std::filesystem::temp_directory_path() / "airindex_storage_test.bin";
  auto id = ResourceId::parse("file://" + path.string());
  FileBackend backend;
  std::vector<uint8_t> content(4096);
  for (size_t i = 0; i < content.size(); ++i) content[i] = uint8_t(i * 31);
  backend.write(id, content);
  CHECK(backend.extent(id) == 4096);
  CHECK(backend.read(id, {0, 4096}) == content);
  CHECK(backend.read(id, {4090, 100}).size() == 6);
  CHECK_THROWS_AS(backend.read(id, {5000, 1}), Error);
  std::filesystem::remove(path);
}

TEST_CASE("profiling recovers an injected affine model") {
  MemBackend backend(StorageProfile::affine(0.05, 12e6));
  auto id = ResourceId::parse("mem://target");
  backend.write(id, std::vector<uint8_t>(2 << 20, 0));
  std::vector<uint64_t> deltas = {4096, 16384, 65536, 262144, 1048576};
  auto fitted = profile_backend(backend, id, deltas, 9);
  CHECK(fitted.latency_s() == doctest::Approx(0.05).epsilon(0.05));
  CHECK(fitted.bandwidth_bps() == doctest::Approx(12e6).epsilon(0.05));
}

TEST_CASE("profiling clamps zero latency and floors the slope") {
  {
    MemBackend backend(StorageProfile::affine(0.0, 1e9));
    auto id = ResourceId::parse("mem://target");
    backend.write(id, std::vector<uint8_t>(1 << 20, 0));
    auto fitted = profile_backend(backend, id, {4096, 1048576}, 3);
    CHECK(fitted.latency_s() >= 0.0);
    CHECK(fitted.latency_s() <= 1e-9);
  }
  {
    // Constant-time backend: slope floor keeps the bandwidth finite.
    MemBackend backend(StorageProfile::table({{0, 1e-3}, {1 << 20, 1e-3}}));
    auto id = ResourceId::parse("mem://target");
    backend.write(id, std::vector<uint8_t>(1 << 20, 0));
    auto fitted = profile_backend(backend, id, {4096, 1048576}, 5);
    CHECK(fitted.bandwidth_bps() <= 1.001e15);
    CHECK(std::isfinite(fitted.cost(1e12)));
  }
  {
    MemBackend backend;
    auto id = ResourceId::parse("mem://x");
    backend.write(id, std::vector<uint8_t>(8192, 0));
    CHECK_THROWS_AS(profile_backend(backend, id, {4096, 4096}, 1), Error);  // one distinct delta
    CHECK_THROWS_AS(profile_backend(backend, id, {4096, 8192}, 0), Error);  // reps < 1
  }
}

TEST_CASE("injected-delay backend records modeled costs") {
  MemBackend backend(StorageProfile::affine(0.01, 1e6));
  auto id = ResourceId::parse("mem://obj");
  backend.write(id, std::vector<uint8_t>(10000, 0));
  backend.take_records();
  auto [bytes, cost] = backend.timed_read(id, {0, 1000});
  CHECK(bytes.size() == 1000);
  CHECK(cost == doctest::Approx(0.01 + 1000 / 1e6).epsilon(1e-12));
  auto records = backend.take_records();
  REQUIRE(records.size() == 1);
  CHECK(records[0].delta == 1000);
  CHECK(backend.take_records().empty());
}
