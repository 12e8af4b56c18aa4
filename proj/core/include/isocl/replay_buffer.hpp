#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "isocl/spectral.hpp"

namespace isocl {

/// Fixed-capacity, class-balanced rehearsal memory of raw inputs.
struct ReplayBuffer {
  struct Entry {
    Vector input;
    int label = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::size_t capacity = 200;
  std::uint64_t rng_seed = 0;
  std::vector<Entry> entries;
  std::size_t updates = 0;  // number of update_buffer calls so far

  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }
  std::map<int, std::size_t> class_counts() const;

  /// Entries as a labeled D x n feature matrix (D taken from the first entry,
  /// or `dimension` when empty).
  FeatureMatrix as_features(Eigen::Index dimension) const;

  friend bool operator==(const ReplayBuffer&, const ReplayBuffer&) = default;
};

/// Per-class slot counts: capacity / |classes| each, with the remainder going
/// to the lowest class ids.
std::map<int, std::size_t> buffer_quotas(std::size_t capacity, const std::set<int>& classes);

/// Rebalances the buffer after an experience. Old classes keep a seeded
/// uniform subsample of their entries; new classes are drawn uniformly from
/// the experience data. Classes with fewer samples than their quota keep all.
ReplayBuffer update_buffer(const ReplayBuffer& buffer, const FeatureMatrix& experience_data,
                           const std::set<int>& seen_classes);

}  // namespace isocl
