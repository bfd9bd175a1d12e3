#pragma once
// Dataset loading and generation: SOSD-style binary files, Gaussian-mixture
// and uniform synthetic keys, and ingestion into a key-position collection
// over a 16-byte-entry data layer (value = rank of the key).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "airindex/model.hpp"

namespace airindex {

// File format: u64 LE count, then count u64 LE keys. Keys are sorted on
// load if needed; duplicates are preserved.
std::vector<Key> load_sosd(const std::string& path);
void save_sosd(const std::string& path, std::span<const Key> keys);

// Deterministic per seed: `clusters` normal clusters with centers uniform
// in [0, 2^63) and stddev uniform in [2^20, 2^30); samples rounded to u64,
// deduplicated, resampled until n distinct keys.
std::vector<Key> gen_gmm(size_t n, size_t clusters, uint64_t seed);

// n distinct uniform keys.
std::vector<Key> gen_uniform(size_t n, uint64_t seed);

// Collapses duplicate keys into one pair spanning all duplicate entries;
// pair ranges are the 16-byte data-layer extents of the original entries.
KeyPositionSet to_key_position_set(std::span<const Key> sorted_keys);

// (key, rank) pairs for the data layer; rank = index of the entry.
std::vector<std::pair<Key, uint64_t>> rank_pairs(std::span<const Key> sorted_keys);

}  // namespace airindex
