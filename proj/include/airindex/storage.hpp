#pragma once
// Storage backends and read-cost profiles.
//
// A StorageProfile models T(delta), the expected seconds to read delta
// consecutive bytes from a device. Backends serve whole-object writes and
// byte-range reads on named resources (mem:// objects or file:// paths).
// The mem backend can carry an injected delay model and a log of
// (delta, modeled cost) per read, which keeps profiling and cost-fidelity
// tests hermetic: no wall clocks involved.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "airindex/util.hpp"

namespace airindex {

struct ByteRange {
  uint64_t offset = 0;
  uint64_t length = 0;
};

// `mem://<name>` or `file://<absolute-or-relative-path>`.
struct ResourceId {
  enum class Scheme { Mem, File };

  Scheme scheme = Scheme::Mem;
  std::string path;

  static ResourceId parse(std::string_view url);
  ResourceId with_suffix(std::string_view suffix) const;
  std::string str() const;
  bool operator==(const ResourceId&) const = default;
};

class StorageProfile {
 public:
  enum class Kind { Affine, AffineUniform, Table };

  // T(d) = ell + d / bandwidth
  static StorageProfile affine(double latency_s, double bandwidth_bps);
  // Latency uniform in [ell0, ell1], bandwidth uniform in [b0, b1]:
  // T(d) = (ell0 + ell1)/2 + d * (ln b1 - ln b0) / (b1 - b0)
  static StorageProfile affine_uniform(double ell0, double ell1, double b0, double b1);
  // Piecewise-linear interpolation between samples, clamped at both ends.
  static StorageProfile table(std::vector<std::pair<uint64_t, double>> samples);

  double cost(double delta_bytes) const;

  Kind kind() const { return kind_; }
  double latency_s() const { return ell_; }
  double bandwidth_bps() const { return bandwidth_; }

  // `kind=affine\nlatency_s=<f64>\nbandwidth_bps=<f64>\n` (affine only).
  std::string to_text() const;
  static StorageProfile from_text(std::string_view text);

 private:
  StorageProfile() = default;

  Kind kind_ = Kind::Affine;
  double ell_ = 0.0;
  double bandwidth_ = 1.0;
  double ell0_ = 0.0, ell1_ = 0.0, b0_ = 1.0, b1_ = 1.0;
  std::vector<std::pair<uint64_t, double>> samples_;
};

// One timed read as seen by the storage layer: bytes actually returned and
// the cost attributed to the read (modeled for injected-delay backends,
// wall-clock otherwise).
struct ReadRecord {
  uint64_t delta = 0;
  double cost_s = 0.0;
};

class Backend {
 public:
  virtual ~Backend() = default;

  // Returns min(length, extent - offset) bytes starting at offset.
  virtual std::vector<uint8_t> read(const ResourceId& resource, ByteRange range) = 0;
  // Whole-object replace.
  virtual void write(const ResourceId& resource, std::span<const uint8_t> bytes) = 0;
  virtual uint64_t extent(const ResourceId& resource) = 0;
  virtual bool exists(const ResourceId& resource) = 0;

  // read() plus the seconds to attribute to it.
  virtual std::pair<std::vector<uint8_t>, double> timed_read(const ResourceId& resource,
                                                             ByteRange range);
};

// In-process object store. With an injected profile, every read is charged
// that profile's modeled cost and appended to a record log.
class MemBackend : public Backend {
 public:
  MemBackend() = default;
  explicit MemBackend(StorageProfile injected) : injected_(std::move(injected)), has_injected_(true) {}

  std::vector<uint8_t> read(const ResourceId& resource, ByteRange range) override;
  void write(const ResourceId& resource, std::span<const uint8_t> bytes) override;
  uint64_t extent(const ResourceId& resource) override;
  bool exists(const ResourceId& resource) override;
  std::pair<std::vector<uint8_t>, double> timed_read(const ResourceId& resource,
                                                     ByteRange range) override;

  std::vector<ReadRecord> take_records();

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::vector<uint8_t>> objects_;
  StorageProfile injected_ = StorageProfile::affine(0.0, 1.0);
  bool has_injected_ = false;
  std::mutex records_mutex_;
  std::vector<ReadRecord> records_;
};

// OS files addressed by path; reads open per call so concurrent readers
// never share state.
class FileBackend : public Backend {
 public:
  std::vector<uint8_t> read(const ResourceId& resource, ByteRange range) override;
  void write(const ResourceId& resource, std::span<const uint8_t> bytes) override;
  uint64_t extent(const ResourceId& resource) override;
  bool exists(const ResourceId& resource) override;
};

// Issues `reps` timed reads per delta at randomized offsets, takes the
// per-delta median, and least-squares fits (ell, 1/B) over the medians.
// ell is clamped at >= 0 and the slope floored at 1e-15 s/byte.
StorageProfile profile_backend(Backend& backend, const ResourceId& resource,
                               const std::vector<uint64_t>& deltas, int reps,
                               uint64_t seed = 0x5eedULL);

}  // namespace airindex
