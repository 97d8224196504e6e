#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhino/array.hpp"
#include "rhino/error.hpp"
#include "rhino/rng.hpp"

namespace rhino {

constexpr int kCheckpointFormatVersion = 1;

/// Named trainable arrays with matching gradient buffers. Weights are
/// created lazily by the ops that use them, drawing from the store's own
/// seeded stream so a fixed seed reproduces the full initialization.
class ParameterStore {
 public:
  explicit ParameterStore(uint64_t seed = 0) : rng_(seed) {}

  bool has(const std::string& name) const { return entries_.count(name) > 0; }

  /// Uniform [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
  DenseArray& get_or_init(const std::string& name, Shape shape, int64_t fan_in, int64_t fan_out) {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      Entry e;
      e.value = rng_.uniform_array(shape, -a, a);
      e.grad = DenseArray::zeros(shape);
      it = entries_.emplace(name, std::move(e)).first;
    }
    check_shape(name, it->second.value, shape);
    return it->second.value;
  }

  DenseArray& get_or_init_zeros(const std::string& name, Shape shape) {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      Entry e;
      e.value = DenseArray::zeros(shape);
      e.grad = DenseArray::zeros(shape);
      it = entries_.emplace(name, std::move(e)).first;
    }
    check_shape(name, it->second.value, shape);
    return it->second.value;
  }

  /// Explicit assignment; used by tests and checkpoint loading.
  void set(const std::string& name, DenseArray value) {
    Entry e;
    e.grad = DenseArray::zeros(value.shape());
    e.value = std::move(value);
    entries_[name] = std::move(e);
  }

  DenseArray& value(const std::string& name) { return entry(name).value; }
  const DenseArray& value(const std::string& name) const { return entry(name).value; }
  DenseArray& grad(const std::string& name) { return entry(name).grad; }
  const DenseArray& grad(const std::string& name) const { return entry(name).grad; }

  void zero_grads() {
    for (auto& [name, e] : entries_)
      std::fill(e.grad.vec_data().begin(), e.grad.vec_data().end(), 0.0);
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, e] : entries_) out.push_back(name);
    return out;
  }

  size_t size() const { return entries_.size(); }
  uint64_t seed() const { return rng_.seed(); }
  SeededRng& init_rng() { return rng_; }

  int64_t total_elements() const {
    int64_t n = 0;
    for (const auto& [name, e] : entries_) n += e.value.numel();
    return n;
  }

  /// Writes <path> as a JSON manifest and <path>.bin as the flat blob of
  /// little-endian 64-bit floats, in manifest order.
  void save(const std::string& path) const {
    nlohmann::json manifest;
    manifest["format_version"] = kCheckpointFormatVersion;
    manifest["dtype"] = "f64";
    manifest["seed"] = rng_.seed();
    nlohmann::json params = nlohmann::json::array();
    int64_t offset = 0;
    for (const auto& [name, e] : entries_) {
      nlohmann::json p;
      p["name"] = name;
      p["shape"] = e.value.shape();
      p["byte_offset"] = offset * static_cast<int64_t>(sizeof(double));
      params.push_back(p);
      offset += e.value.numel();
    }
    manifest["params"] = params;

    std::ofstream mf(path);
    if (!mf) throw IoError("cannot write " + path);
    mf << manifest.dump(2) << "\n";

    std::string blob_path = path + ".bin";
    std::ofstream bf(blob_path, std::ios::binary);
    if (!bf) throw IoError("cannot write " + blob_path);
    for (const auto& [name, e] : entries_)
      bf.write(reinterpret_cast<const char*>(e.value.data()),
               static_cast<std::streamsize>(e.value.numel() * sizeof(double)));
  }

  static ParameterStore load(const std::string& path) {
    std::ifstream mf(path);
    if (!mf) throw IoError("cannot read " + path);
    nlohmann::json manifest;
    mf >> manifest;
    if (manifest.value("format_version", -1) != kCheckpointFormatVersion)
      throw IoError(path + ": unsupported checkpoint format version");
    if (manifest.value("dtype", "") != std::string("f64"))
      throw IoError(path + ": unsupported dtype");

    ParameterStore store(manifest.value("seed", uint64_t{0}));
    std::string blob_path = path + ".bin";
    std::ifstream bf(blob_path, std::ios::binary);
    if (!bf) throw IoError("cannot read " + blob_path);
    for (const auto& p : manifest.at("params")) {
      std::string name = p.at("name").get<std::string>();
      Shape shape = p.at("shape").get<Shape>();
      DenseArray value(shape);
      bf.seekg(p.at("byte_offset").get<int64_t>());
      bf.read(reinterpret_cast<char*>(value.data()),
              static_cast<std::streamsize>(value.numel() * sizeof(double)));
      if (!bf) throw IoError(blob_path + ": truncated blob at " + name);
      store.set(name, std::move(value));
    }
    return store;
  }

 private:
  struct Entry {
    DenseArray value;
    DenseArray grad;
  };

  Entry& entry(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ParameterError("unknown parameter '" + name + "'");
    return it->second;
  }
  const Entry& entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ParameterError("unknown parameter '" + name + "'");
    return it->second;
  }

  static void check_shape(const std::string& name, const DenseArray& v, const Shape& shape) {
    if (v.shape() != shape)
      throw DimensionError("parameter '" + name + "' has shape " + shape_str(v.shape()) +
                           ", requested " + shape_str(shape));
  }

  std::map<std::string, Entry> entries_;
  SeededRng rng_;
};

}  // namespace rhino
