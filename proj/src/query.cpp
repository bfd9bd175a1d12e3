#include "airindex/query.hpp"

#include <algorithm>
#include <cstring>

namespace airindex {

PageCache::PageCache(uint64_t page_size, size_t capacity_pages)
    : page_size_(page_size), capacity_(capacity_pages) {
  if (page_size == 0 || capacity_pages == 0)
    throw Error(Error::Code::InvalidArgument, "page cache needs page_size > 0 and capacity > 0");
}

size_t PageCache::entries() const {
  std::shared_lock lock(mutex_);
  return pages_.size();
}

std::vector<std::pair<std::string, uint64_t>> PageCache::fifo_order() const {
  std::shared_lock lock(mutex_);
  return {fifo_.begin(), fifo_.end()};
}

struct CacheAccess {
  static bool lookup_page(PageCache& cache, const PageCache::PageKey& key,
                          std::vector<uint8_t>* out) {
    std::shared_lock lock(cache.mutex_);
    auto it = cache.pages_.find(key);
    if (it == cache.pages_.end()) return false;
    *out = it->second;
    return true;
  }

  static void insert_page(PageCache& cache, const PageCache::PageKey& key,
                          std::vector<uint8_t> bytes) {
    std::unique_lock lock(cache.mutex_);
    auto [it, inserted] = cache.pages_.try_emplace(key, std::move(bytes));
    if (!inserted) {  // concurrent fill raced; last one wins
      it->second = std::move(bytes);
      return;
    }
    cache.fifo_.push_back(key);
    while (cache.fifo_.size() > cache.capacity_) {
      cache.pages_.erase(cache.fifo_.front());
      cache.fifo_.pop_front();
    }
  }
};

ReadThroughResult read_through(PageCache& cache, Backend& backend, const ResourceId& resource,
                               ByteRange range) {
  if (range.length == 0) throw Error(Error::Code::InvalidArgument, "zero-length read");
  uint64_t extent = backend.extent(resource);
  if (range.offset >= extent)
    throw Error(Error::Code::OffsetBeyondExtent, "read offset beyond extent of " + resource.str());
  uint64_t end = std::min(range.offset + range.length, extent);
  uint64_t page = cache.page_size();
  uint64_t first_page = range.offset / page;
  uint64_t last_page = (end - 1) / page;

  ReadThroughResult out;
  std::vector<std::vector<uint8_t>> page_bytes(size_t(last_page - first_page + 1));
  std::vector<bool> missing(page_bytes.size(), false);
  for (uint64_t p = first_page; p <= last_page; ++p) {
    size_t idx = size_t(p - first_page);
    if (!CacheAccess::lookup_page(cache, {resource.path, p}, &page_bytes[idx])) {
      missing[idx] = true;
      ++out.pages_missed;
    }
  }

  // Fetch runs of adjacent missing pages with one backend read each.
  for (size_t i = 0; i < missing.size();) {
    if (!missing[i]) { ++i; continue; }
    size_t j = i;
    while (j + 1 < missing.size() && missing[j + 1]) ++j;
    uint64_t off = (first_page + i) * page;
    uint64_t len = std::min((uint64_t(j - i) + 1) * page, extent - off);
    auto bytes = backend.read(resource, {off, len});
    out.issued_reads.push_back(bytes.size());
    for (size_t k = i; k <= j; ++k) {
      uint64_t page_off = (uint64_t(k - i)) * page;
      uint64_t page_len = std::min(page, bytes.size() > page_off ? bytes.size() - page_off : 0);
      page_bytes[k].assign(bytes.begin() + long(page_off), bytes.begin() + long(page_off + page_len));
      CacheAccess::insert_page(cache, {resource.path, first_page + k}, page_bytes[k]);
    }
    i = j + 1;
  }

  out.bytes.reserve(end - range.offset);
  for (size_t i = 0; i < page_bytes.size(); ++i) {
    uint64_t page_start = (first_page + i) * page;
    uint64_t from = std::max(range.offset, page_start) - page_start;
    uint64_t to = std::min(end, page_start + page) - page_start;
    if (from >= page_bytes[i].size()) continue;
    to = std::min<uint64_t>(to, page_bytes[i].size());
    out.bytes.insert(out.bytes.end(), page_bytes[i].begin() + long(from),
                     page_bytes[i].begin() + long(to));
  }
  return out;
}

namespace {

// Expand to entry boundaries, widen one entry per side, clamp to the layer.
ByteRange align_range(PositionRange pred, uint64_t entry, uint64_t layer_size) {
  uint64_t lo = (pred.lo / entry) * entry;
  uint64_t hi = ((pred.hi + entry - 1) / entry) * entry;
  lo = lo >= entry ? lo - entry : 0;
  hi = std::min(hi + entry, (layer_size / entry) * entry);
  return {lo, hi - lo};
}

struct FetchResult {
  std::vector<uint8_t> bytes;
  TraceEntry entry;
};

FetchResult fetch(Backend& backend, PageCache* cache, const ResourceId& resource, ByteRange range) {
  FetchResult out;
  out.entry.read = range;
  if (cache == nullptr) {
    out.bytes = backend.timed_read(resource, range).first;
    out.entry.issued_reads.push_back(out.bytes.size());
    return out;
  }
  auto through = read_through(*cache, backend, resource, range);
  out.bytes = std::move(through.bytes);
  out.entry.cache_hit = through.pages_missed == 0;
  out.entry.issued_reads = std::move(through.issued_reads);
  return out;
}

// Value for x among 16-byte (key, value) entries; first match wins.
bool search_data(std::span<const uint8_t> bytes, Key x, uint64_t* value) {
  size_t count = bytes.size() / kDataEntrySize;
  size_t lo = 0, hi = count;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    le::Reader in(bytes.subspan(mid * kDataEntrySize, kDataEntrySize));
    if (in.u64() < x) lo = mid + 1;
    else hi = mid;
  }
  if (lo == count) return false;
  le::Reader in(bytes.subspan(lo * kDataEntrySize, kDataEntrySize));
  if (in.u64() != x) return false;
  *value = in.u64();
  return true;
}

}  // namespace

LookupResult lookup(const BuiltIndex& index, Backend& backend, Key x, PageCache* cache) {
  LookupResult result;
  result.key = x;
  const auto& layers = index.metadata.layers;
  size_t levels = layers.size();
  ResourceId data_resource = ResourceId::parse(index.metadata.data_resource);

  PositionRange pred{0, index.data_extent};  // what to read from the layer below
  for (size_t l = levels; l >= 1; --l) {
    const LayerMeta& meta = layers[l - 1];
    uint64_t below_size = (l == 1) ? index.data_extent : layers[l - 2].serialized_size;
    uint64_t entry =
        meta.node_type == NodeType::Step ? 8 + 16ull * meta.step_pieces : 48;

    ByteRange range = (l == levels)
                          ? ByteRange{index.metadata_size, meta.serialized_size}  // whole root
                          : align_range(pred, entry, meta.serialized_size);
    auto fetched = fetch(backend, cache, ResourceId::parse(meta.resource), range);
    result.trace.push_back(std::move(fetched.entry));

    DecodedNodes nodes = decode_nodes(fetched.bytes, meta.node_type, meta.step_pieces);
    if (nodes.size() == 0) throw Error(Error::Code::Corrupt, "empty layer read");

    // Routed node: last decoded entry with lower_key <= x; clamp below.
    auto it = std::upper_bound(nodes.lower_keys.begin(), nodes.lower_keys.end(), x);
    size_t j = it == nodes.lower_keys.begin() ? 0 : size_t(it - nodes.lower_keys.begin()) - 1;

    if (meta.node_type == NodeType::Step) {
      uint64_t terminal;
      if (j + 1 < nodes.size()) {
        terminal = nodes.step_nodes[j + 1].positions.front();
      } else {
        // Last decoded entry; it is the layer's physically last node
        // (reads are widened by one entry, so a successor would be here).
        terminal = below_size;
      }
      Key piece_floor = nodes.step_nodes[j].keys.front();
      pred = nodes.step_nodes[j].predict(x < piece_floor ? piece_floor : x, terminal);
    } else {
      pred = nodes.band_nodes[j].predict(x, below_size);
    }
  }

  // Data layer.
  ByteRange range = levels == 0
                        ? ByteRange{0, index.data_extent}
                        : align_range(pred, kDataEntrySize, index.data_extent);
  auto fetched = fetch(backend, cache, data_resource, range);
  result.trace.push_back(std::move(fetched.entry));
  if (fetched.bytes.size() % kDataEntrySize != 0)
    throw Error(Error::Code::Misaligned, "data read is not entry-aligned");
  result.found = search_data(fetched.bytes, x, &result.value);
  return result;
}

double modeled_trace_cost(LookupResult& result, const StorageProfile& profile) {
  double total = 0.0;
  for (auto& entry : result.trace) {
    entry.modeled_cost = 0.0;
    for (uint64_t issued : entry.issued_reads) entry.modeled_cost += profile.cost(double(issued));
    total += entry.modeled_cost;
  }
  return total;
}

}  // namespace airindex
