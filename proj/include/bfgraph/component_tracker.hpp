#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bfgraph {

using Vertex = std::uint32_t;

enum class MergeOutcome { merged, already_joined };

/// Union-find forest over a growing vertex set that keeps the component
/// statistics S2 = sum C_i^2, S3 = sum C_i^3, the largest component and the
/// number of singletons exact after every operation.
///
/// Union by size with path halving. The root of a merge is the larger
/// component; equal sizes keep the smaller root id, so a given sequence of
/// operations always yields the same forest.
class ComponentTracker {
 public:
  ComponentTracker() = default;

  explicit ComponentTracker(std::size_t n) {
    if (n == 0) throw std::invalid_argument("ComponentTracker: n must be >= 1");
    reserve(n);
    for (std::size_t i = 0; i < n; ++i) add_vertex();
  }

  void reserve(std::size_t n) {
    parent_.reserve(n);
    size_.reserve(n);
  }

  Vertex add_vertex() {
    const auto id = static_cast<Vertex>(parent_.size());
    parent_.push_back(id);
    size_.push_back(1);
    s2_ += 1;
    s3_ += 1;
    ++singletons_;
    if (max_size_ == 0) max_size_ = 1;
    return id;
  }

  Vertex find(Vertex v) {
    check(v);
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  MergeOutcome merge(Vertex u, Vertex v) {
    Vertex ru = find(u);
    Vertex rv = find(v);
    if (ru == rv) return MergeOutcome::already_joined;
    const std::uint64_t a = size_[ru];
    const std::uint64_t b = size_[rv];
    if (a < b || (a == b && rv < ru)) std::swap(ru, rv);
    parent_[rv] = ru;
    size_[ru] = a + b;
    s2_ += 2 * a * b;
    s3_ += 3 * a * b * (a + b);
    if (a == 1) --singletons_;
    if (b == 1) --singletons_;
    max_size_ = std::max<std::uint64_t>(max_size_, a + b);
    return MergeOutcome::merged;
  }

  std::uint64_t component_size(Vertex v) { return size_[find(v)]; }
  bool is_singleton(Vertex v) { return component_size(v) == 1; }

  /// All component sizes, nonincreasing.
  std::vector<std::uint64_t> component_sizes() const {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < parent_.size(); ++i)
      if (parent_[i] == i) out.push_back(size_[i]);
    std::sort(out.begin(), out.end(), std::greater<>{});
    return out;
  }

  /// The k largest component sizes, nonincreasing.
  std::vector<std::uint64_t> largest_components(std::size_t k) const {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < parent_.size(); ++i)
      if (parent_[i] == i) out.push_back(size_[i]);
    k = std::min(k, out.size());
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end(),
                      std::greater<>{});
    out.resize(k);
    return out;
  }

  std::size_t n_vertices() const { return parent_.size(); }
  std::uint64_t s2() const { return s2_; }
  std::uint64_t s3() const { return s3_; }
  std::uint64_t max_size() const { return max_size_; }
  std::uint64_t singleton_count() const { return singletons_; }

 private:
  void check(Vertex v) const {
    if (v >= parent_.size())
      throw std::out_of_range("ComponentTracker: invalid vertex id " + std::to_string(v));
  }

  std::vector<Vertex> parent_;
  std::vector<std::uint64_t> size_;
  std::uint64_t s2_ = 0;
  std::uint64_t s3_ = 0;
  std::uint64_t max_size_ = 0;
  std::uint64_t singletons_ = 0;
};

}  // namespace bfgraph
