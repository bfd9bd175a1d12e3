#pragma once
// Small shared helpers: little-endian codecs, stable float reduction,
// a deterministic parallel map, and the library error type.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace airindex {

class Error : public std::runtime_error {
 public:
  enum class Code {
    NotFound,
    OffsetBeyondExtent,
    InvalidArgument,
    Misaligned,
    UnknownNodeType,
    Corrupt,
    Io,
  };

  Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

namespace le {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

inline void put_i64(std::vector<uint8_t>& out, int64_t v) { put_u64(out, uint64_t(v)); }

// Bounds-checked sequential reader over a byte view.
class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint64_t remaining() const { return bytes_.size() - pos_; }
  uint64_t pos() const { return pos_; }

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16() {
    auto b = take(2);
    return uint16_t(b[0]) | uint16_t(b[1]) << 8;
  }
  uint32_t u32() {
    auto b = take(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(b[i]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    auto b = take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
  }
  int64_t i64() { return int64_t(u64()); }
  std::span<const uint8_t> take(uint64_t n) {
    if (remaining() < n) throw Error(Error::Code::Corrupt, "truncated input");
    auto view = bytes_.subspan(pos_, n);
    pos_ += n;
    return view;
  }

 private:
  std::span<const uint8_t> bytes_;
  uint64_t pos_ = 0;
};

}  // namespace le

// Pairwise summation; keeps the reduction order fixed so results do not
// depend on worker scheduling.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

// Applies fn(i) for i in [0, count) across up to `workers` threads and
// collects results by index, so the output is identical to a serial run.
template <typename T>
std::vector<T> parallel_map(size_t count, int workers, const std::function<T(size_t)>& fn) {
  std::vector<T> out(count);
  if (workers <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<size_t> next{0};
  auto run = [&] {
    for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) out[i] = fn(i);
  };
  size_t n_threads = std::min<size_t>(size_t(workers), count);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  return out;
}

// splitmix64; used to derive independent deterministic seeds.
inline uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace airindex
