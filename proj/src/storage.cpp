#include "airindex/storage.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace airindex {

ResourceId ResourceId::parse(std::string_view url) {
  constexpr std::string_view kMem = "mem://";
  constexpr std::string_view kFile = "file://";
  ResourceId id;
  if (url.substr(0, kMem.size()) == kMem) {
    id.scheme = Scheme::Mem;
    id.path = std::string(url.substr(kMem.size()));
  } else if (url.substr(0, kFile.size()) == kFile) {
    id.scheme = Scheme::File;
    id.path = std::string(url.substr(kFile.size()));
  } else {
    throw Error(Error::Code::InvalidArgument, "resource id must start with mem:// or file://: " + std::string(url));
  }
  if (id.path.empty()) throw Error(Error::Code::InvalidArgument, "empty resource path");
  return id;
}

ResourceId ResourceId::with_suffix(std::string_view suffix) const {
  ResourceId out = *this;
  out.path += suffix;
  return out;
}

std::string ResourceId::str() const {
  return (scheme == Scheme::Mem ? "mem://" : "file://") + path;
}

StorageProfile StorageProfile::affine(double latency_s, double bandwidth_bps) {
  if (latency_s < 0.0 || bandwidth_bps <= 0.0)
    throw Error(Error::Code::InvalidArgument, "affine profile needs ell >= 0 and bandwidth > 0");
  StorageProfile p;
  p.kind_ = Kind::Affine;
  p.ell_ = latency_s;
  p.bandwidth_ = bandwidth_bps;
  return p;
}

StorageProfile StorageProfile::affine_uniform(double ell0, double ell1, double b0, double b1) {
  if (ell0 < 0.0 || ell0 > ell1 || b0 <= 0.0 || b0 > b1)
    throw Error(Error::Code::InvalidArgument, "affine-uniform profile needs 0 <= ell0 <= ell1 and 0 < b0 <= b1");
  StorageProfile p;
  p.kind_ = Kind::AffineUniform;
  p.ell0_ = ell0;
  p.ell1_ = ell1;
  p.b0_ = b0;
  p.b1_ = b1;
  p.ell_ = (ell0 + ell1) / 2.0;
  p.bandwidth_ = (b0 == b1) ? b0 : (b1 - b0) / (std::log(b1) - std::log(b0));
  return p;
}

StorageProfile StorageProfile::table(std::vector<std::pair<uint64_t, double>> samples) {
  if (samples.size() < 2) throw Error(Error::Code::InvalidArgument, "table profile needs >= 2 samples");
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    if (samples[i + 1].first <= samples[i].first)
      throw Error(Error::Code::InvalidArgument, "table deltas must be strictly increasing");
    if (samples[i + 1].second < samples[i].second)
      throw Error(Error::Code::InvalidArgument, "table costs must be non-decreasing");
  }
  StorageProfile p;
  p.kind_ = Kind::Table;
  p.samples_ = std::move(samples);
  return p;
}

double StorageProfile::cost(double delta_bytes) const {
  switch (kind_) {
    case Kind::Affine:
      return ell_ + delta_bytes / bandwidth_;
    case Kind::AffineUniform:
      return ell_ + delta_bytes / bandwidth_;
    case Kind::Table: {
      if (delta_bytes <= double(samples_.front().first)) return samples_.front().second;
      if (delta_bytes >= double(samples_.back().first)) return samples_.back().second;
      auto it = std::lower_bound(samples_.begin(), samples_.end(), delta_bytes,
                                 [](const auto& s, double d) { return double(s.first) < d; });
      auto [d1, c1] = *it;
      auto [d0, c0] = *(it - 1);
      double t = (delta_bytes - double(d0)) / (double(d1) - double(d0));
      return c0 + t * (c1 - c0);
    }
  }
  return 0.0;
}

std::string StorageProfile::to_text() const {
  if (kind_ != Kind::Affine)
    throw Error(Error::Code::InvalidArgument, "only affine profiles have a text form");
  char buf[128];
  std::snprintf(buf, sizeof(buf), "kind=affine\nlatency_s=%.17g\nbandwidth_bps=%.17g\n", ell_, bandwidth_);
  return buf;
}

StorageProfile StorageProfile::from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  double ell = -1.0, bw = -1.0;
  bool kind_ok = false;
  while (std::getline(in, line)) {
    if (line == "kind=affine") kind_ok = true;
    else if (line.rfind("latency_s=", 0) == 0) ell = std::stod(line.substr(10));
    else if (line.rfind("bandwidth_bps=", 0) == 0) bw = std::stod(line.substr(14));
  }
  if (!kind_ok || ell < 0.0 || bw <= 0.0)
    throw Error(Error::Code::Corrupt, "malformed profile document");
  return affine(ell, bw);
}

std::pair<std::vector<uint8_t>, double> Backend::timed_read(const ResourceId& resource, ByteRange range) {
  auto start = std::chrono::steady_clock::now();
  auto bytes = read(resource, range);
  std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return {std::move(bytes), elapsed.count()};
}

namespace {

std::vector<uint8_t> slice_object(std::span<const uint8_t> object, ByteRange range, const std::string& name) {
  if (range.offset >= object.size())
    throw Error(Error::Code::OffsetBeyondExtent,
                "read offset " + std::to_string(range.offset) + " beyond extent of " + name);
  uint64_t len = std::min<uint64_t>(range.length, object.size() - range.offset);
  return {object.begin() + long(range.offset), object.begin() + long(range.offset + len)};
}

}  // namespace

std::vector<uint8_t> MemBackend::read(const ResourceId& resource, ByteRange range) {
  std::shared_lock lock(mutex_);
  auto it = objects_.find(resource.path);
  if (it == objects_.end()) throw Error(Error::Code::NotFound, "no such mem object: " + resource.path);
  return slice_object(it->second, range, resource.str());
}

void MemBackend::write(const ResourceId& resource, std::span<const uint8_t> bytes) {
  std::unique_lock lock(mutex_);
  objects_[resource.path].assign(bytes.begin(), bytes.end());
}

uint64_t MemBackend::extent(const ResourceId& resource) {
  std::shared_lock lock(mutex_);
  auto it = objects_.find(resource.path);
  if (it == objects_.end()) throw Error(Error::Code::NotFound, "no such mem object: " + resource.path);
  return it->second.size();
}

bool MemBackend::exists(const ResourceId& resource) {
  std::shared_lock lock(mutex_);
  return objects_.count(resource.path) > 0;
}

std::pair<std::vector<uint8_t>, double> MemBackend::timed_read(const ResourceId& resource, ByteRange range) {
  if (!has_injected_) return Backend::timed_read(resource, range);
  auto bytes = read(resource, range);
  double cost = injected_.cost(double(bytes.size()));
  {
    std::lock_guard lock(records_mutex_);
    records_.push_back({bytes.size(), cost});
  }
  return {std::move(bytes), cost};
}

std::vector<ReadRecord> MemBackend::take_records() {
  std::lock_guard lock(records_mutex_);
  return std::exchange(records_, {});
}

std::vector<uint8_t> FileBackend::read(const ResourceId& resource, ByteRange range) {
  std::ifstream in(resource.path, std::ios::binary);
  if (!in) throw Error(Error::Code::NotFound, "cannot open file: " + resource.path);
  in.seekg(0, std::ios::end);
  uint64_t size = uint64_t(in.tellg());
  if (range.offset >= size)
    throw Error(Error::Code::OffsetBeyondExtent,
                "read offset " + std::to_string(range.offset) + " beyond extent of " + resource.str());
  uint64_t len = std::min<uint64_t>(range.length, size - range.offset);
  std::vector<uint8_t> out(len);
  in.seekg(long(range.offset));
  in.read(reinterpret_cast<char*>(out.data()), long(len));
  if (!in) throw Error(Error::Code::Io, "short read on " + resource.path);
  return out;
}

void FileBackend::write(const ResourceId& resource, std::span<const uint8_t> bytes) {
  std::filesystem::path path(resource.path);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(resource.path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Error::Code::Io, "cannot write file: " + resource.path);
  out.write(reinterpret_cast<const char*>(bytes.data()), long(bytes.size()));
  if (!out) throw Error(Error::Code::Io, "short write on " + resource.path);
}

uint64_t FileBackend::extent(const ResourceId& resource) {
  std::error_code ec;
  auto size = std::filesystem::file_size(resource.path, ec);
  if (ec) throw Error(Error::Code::NotFound, "cannot stat file: " + resource.path);
  return size;
}

bool FileBackend::exists(const ResourceId& resource) {
  return std::filesystem::exists(resource.path);
}

StorageProfile profile_backend(Backend& backend, const ResourceId& resource,
                               const std::vector<uint64_t>& deltas, int reps, uint64_t seed) {
  if (reps < 1) throw Error(Error::Code::InvalidArgument, "profiling needs reps >= 1");
  std::vector<uint64_t> distinct = deltas;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2)
    throw Error(Error::Code::InvalidArgument, "profiling needs >= 2 distinct deltas");

  uint64_t size = backend.extent(resource);
  uint64_t max_delta = distinct.back();
  if (size < max_delta)
    throw Error(Error::Code::InvalidArgument, "profiling target smaller than max delta");

  std::mt19937_64 rng(mix_seed(seed));
  std::vector<double> xs, ys;
  xs.reserve(distinct.size());
  ys.reserve(distinct.size());
  std::vector<double> times(static_cast<size_t>(reps));
  for (uint64_t delta : distinct) {
    for (int r = 0; r < reps; ++r) {
      uint64_t max_offset = size - delta;
      uint64_t offset = max_offset == 0 ? 0 : rng() % (max_offset + 1);
      times[size_t(r)] = backend.timed_read(resource, {offset, delta}).second;
    }
    std::nth_element(times.begin(), times.begin() + reps / 2, times.end());
    double median = times[size_t(reps / 2)];
    if (reps % 2 == 0) {
      double below = *std::max_element(times.begin(), times.begin() + reps / 2);
      median = (median + below) / 2.0;
    }
    xs.push_back(double(delta));
    ys.push_back(median);
  }

  // Ordinary least squares for t = ell + delta * slope.
  double n = double(xs.size());
  double mx = pairwise_sum(xs) / n;
  double my = pairwise_sum(ys) / n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  constexpr double kMinSlope = 1e-15;  // s/byte; caps fitted bandwidth at 1e15 B/s
  double slope = std::max(sxy / sxx, kMinSlope);
  double ell = std::max(my - slope * mx, 0.0);
  return StorageProfile::affine(ell, 1.0 / slope);
}

}  // namespace airindex
