#pragma once
// Lookup over a built index: read the root layer, then per layer decode the
// parent-predicted range (expanded outward to entry boundaries and widened
// by one entry per side), binary-search the routed node, reconstruct it,
// and predict the next range, until the data layer yields the value.
//
// Reads optionally go through a FIFO read-through page cache; without one,
// every layer read hits the backend (the cold state the objective models).

#include <cstdint>
#include <deque>
#include <list>
#include <map>
#include <shared_mutex>
#include <vector>

#include "airindex/format.hpp"
#include "airindex/model.hpp"
#include "airindex/storage.hpp"

namespace airindex {

class PageCache {
 public:
  explicit PageCache(uint64_t page_size = 4096, size_t capacity_pages = 1024);

  uint64_t page_size() const { return page_size_; }
  size_t capacity() const { return capacity_; }
  size_t entries() const;

  // Test hook: the (resource, page) keys currently cached, oldest first.
  std::vector<std::pair<std::string, uint64_t>> fifo_order() const;

 private:
  friend struct CacheAccess;
  using PageKey = std::pair<std::string, uint64_t>;

  uint64_t page_size_;
  size_t capacity_;
  mutable std::shared_mutex mutex_;
  std::map<PageKey, std::vector<uint8_t>> pages_;
  std::deque<PageKey> fifo_;
};

struct ReadThroughResult {
  std::vector<uint8_t> bytes;
  size_t pages_missed = 0;
  std::vector<uint64_t> issued_reads;  // backend read sizes (misses, coalesced)
};

// Serves the range from cached pages, fetching missing pages in coalesced
// backend reads and inserting them FIFO.
ReadThroughResult read_through(PageCache& cache, Backend& backend, const ResourceId& resource,
                               ByteRange range);

struct TraceEntry {
  ByteRange read;                      // the range the query process asked for
  bool cache_hit = false;              // served entirely from cache
  std::vector<uint64_t> issued_reads;  // actual backend read sizes
  double modeled_cost = 0.0;           // filled by modeled_trace_cost
};

struct LookupResult {
  bool found = false;
  Key key = 0;
  uint64_t value = 0;
  std::vector<TraceEntry> trace;  // exactly L+1 entries, root first
};

LookupResult lookup(const BuiltIndex& index, Backend& backend, Key x, PageCache* cache = nullptr);

// Sum of T over the trace's actually-issued backend reads; cache hits
// contribute nothing. Fills each entry's modeled_cost.
double modeled_trace_cost(LookupResult& result, const StorageProfile& profile);

}  // namespace airindex
