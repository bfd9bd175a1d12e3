#include "airindex/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "airindex/format.hpp"

namespace airindex {

std::vector<Key> load_sosd(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Error::Code::NotFound, "cannot open dataset: " + path);
  in.seekg(0, std::ios::end);
  uint64_t size = uint64_t(in.tellg());
  if (size < 8) throw Error(Error::Code::Corrupt, "dataset truncated: " + path);
  in.seekg(0);
  uint8_t header[8];
  in.read(reinterpret_cast<char*>(header), 8);
  uint64_t count = 0;
  for (int i = 0; i < 8; ++i) count |= uint64_t(header[i]) << (8 * i);
  if (size != 8 + count * 8)
    throw Error(Error::Code::Corrupt, "dataset count disagrees with file size: " + path);
  std::vector<Key> keys(count);
  std::vector<uint8_t> raw(count * 8);
  in.read(reinterpret_cast<char*>(raw.data()), long(raw.size()));
  if (!in) throw Error(Error::Code::Io, "short read on " + path);
  for (uint64_t i = 0; i < count; ++i) {
    uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= uint64_t(raw[i * 8 + b]) << (8 * b);
    keys[i] = v;
  }
  if (!std::is_sorted(keys.begin(), keys.end())) std::sort(keys.begin(), keys.end());
  return keys;
}

void save_sosd(const std::string& path, std::span<const Key> keys) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Error::Code::Io, "cannot write dataset: " + path);
  std::vector<uint8_t> bytes;
  bytes.reserve(8 + keys.size() * 8);
  le::put_u64(bytes, keys.size());
  for (Key k : keys) le::put_u64(bytes, k);
  out.write(reinterpret_cast<const char*>(bytes.data()), long(bytes.size()));
  if (!out) throw Error(Error::Code::Io, "short write on " + path);
}

namespace {

// Uniform double in [0, 1); fixed construction so streams are identical
// across standard libraries.
double unit_double(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// Box-Muller; one draw per call, the paired value is discarded.
double normal_draw(std::mt19937_64& rng) {
  double u1 = unit_double(rng);
  double u2 = unit_double(rng);
  while (u1 <= 0.0) u1 = unit_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

}  // namespace

std::vector<Key> gen_gmm(size_t n, size_t clusters, uint64_t seed) {
  if (n < 1 || clusters < 1) throw Error(Error::Code::InvalidArgument, "need n >= 1 and clusters >= 1");
  std::mt19937_64 rng(mix_seed(seed));
  std::vector<double> centers(clusters), stddevs(clusters);
  for (size_t c = 0; c < clusters; ++c) centers[c] = double(rng() >> 1);  // [0, 2^63)
  for (size_t c = 0; c < clusters; ++c)
    stddevs[c] = double(1ull << 20) + unit_double(rng) * (double(1ull << 30) - double(1ull << 20));

  std::set<Key> keys;
  while (keys.size() < n) {
    size_t c = size_t(rng() % clusters);
    double sample = centers[c] + stddevs[c] * normal_draw(rng);
    if (sample < 0.0 || sample >= double(kMaxKey)) continue;
    Key key = Key(std::llround(sample));
    if (key == kMaxKey) continue;
    keys.insert(key);
  }
  return {keys.begin(), keys.end()};
}

std::vector<Key> gen_uniform(size_t n, uint64_t seed) {
  if (n < 1) throw Error(Error::Code::InvalidArgument, "need n >= 1");
  std::mt19937_64 rng(mix_seed(seed));
  std::set<Key> keys;
  while (keys.size() < n) {
    Key key = rng();
    if (key == kMaxKey) continue;
    keys.insert(key);
  }
  return {keys.begin(), keys.end()};
}

KeyPositionSet to_key_position_set(std::span<const Key> sorted_keys) {
  std::vector<KeyPosition> pairs;
  uint64_t offset = 0;
  for (size_t i = 0; i < sorted_keys.size();) {
    Key key = sorted_keys[i];
    if (key == kMaxKey) throw Error(Error::Code::InvalidArgument, "key 2^64-1 is reserved");
    if (i > 0 && key < sorted_keys[i - 1])
      throw Error(Error::Code::InvalidArgument, "keys must be sorted");
    size_t run = i;
    while (run < sorted_keys.size() && sorted_keys[run] == key) ++run;
    uint64_t bytes = uint64_t(run - i) * kDataEntrySize;
    pairs.push_back({key, offset, offset + bytes});
    offset += bytes;
    i = run;
  }
  return KeyPositionSet::from_pairs(std::move(pairs));
}

std::vector<std::pair<Key, uint64_t>> rank_pairs(std::span<const Key> sorted_keys) {
  std::vector<std::pair<Key, uint64_t>> pairs;
  pairs.reserve(sorted_keys.size());
  for (size_t i = 0; i < sorted_keys.size(); ++i) pairs.emplace_back(sorted_keys[i], i);
  return pairs;
}

}  // namespace airindex
