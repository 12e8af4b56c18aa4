#include "isocl/replay_buffer.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "isocl/error.hpp"

namespace isocl {

std::map<int, std::size_t> ReplayBuffer::class_counts() const {
  std::map<int, std::size_t> counts;
  for (const auto& e : entries) counts[e.label] += 1;
  return counts;
}

FeatureMatrix ReplayBuffer::as_features(Eigen::Index dimension) const {
  const Eigen::Index d = entries.empty() ? dimension : entries.front().input.size();
  Matrix data(d, static_cast<Eigen::Index>(entries.size()));
  std::vector<int> labels;
  labels.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    data.col(static_cast<Eigen::Index>(i)) = entries[i].input;
    labels.push_back(entries[i].label);
  }
  return FeatureMatrix(std::move(data), std::move(labels));
}

std::map<int, std::size_t> buffer_quotas(std::size_t capacity, const std::set<int>& classes) {
  require(!classes.empty(), "buffer: no classes to allocate");
  require(capacity >= classes.size(), "buffer: capacity " + std::to_string(capacity) +
                                          " cannot hold one sample for each of " +
                                          std::to_string(classes.size()) + " classes");
  const std::size_t base = capacity / classes.size();
  std::size_t extra = capacity % classes.size();
  std::map<int, std::size_t> quotas;
  for (int c : classes) {  // std::set iterates in ascending order
    quotas[c] = base + (extra > 0 ? 1 : 0);
    if (extra > 0) --extra;
  }
  return quotas;
}

namespace {

// Seeded uniform subsample of `count` positions out of `n`, in ascending order.
std::vector<std::size_t> subsample(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (count >= n) return idx;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

ReplayBuffer update_buffer(const ReplayBuffer& buffer, const FeatureMatrix& experience_data,
                           const std::set<int>& seen_classes) {
  require(buffer.capacity > 0, "buffer: capacity must be positive");
  require(experience_data.has_labels(), "buffer: experience data must be labeled");
  const auto quotas = buffer_quotas(buffer.capacity, seen_classes);

  std::map<int, std::vector<Vector>> pool;
  std::set<int> old_classes;
  for (const auto& e : buffer.entries) {
    require(seen_classes.count(e.label) > 0,
            "buffer: stored class " + std::to_string(e.label) + " missing from seen classes");
    pool[e.label].push_back(e.input);
    old_classes.insert(e.label);
  }
  const auto& labels = *experience_data.labels();
  for (Eigen::Index j = 0; j < experience_data.samples(); ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    require(seen_classes.count(y) > 0,
            "buffer: experience class " + std::to_string(y) + " missing from seen classes");
    if (old_classes.count(y) > 0) continue;  // an old class never gains samples
    pool[y].push_back(experience_data.data().col(j));
  }

  std::seed_seq seq{static_cast<std::uint32_t>(buffer.rng_seed),
                    static_cast<std::uint32_t>(buffer.rng_seed >> 32),
                    static_cast<std::uint32_t>(buffer.updates), 0xb0ffu};
  std::mt19937_64 rng(seq);

  ReplayBuffer out;
  out.capacity = buffer.capacity;
  out.rng_seed = buffer.rng_seed;
  out.updates = buffer.updates + 1;
  for (const auto& [cls, quota] : quotas) {
    const auto it = pool.find(cls);
    if (it == pool.end()) continue;
    for (std::size_t i : subsample(it->second.size(), quota, rng)) {
      out.entries.push_back({it->second[i], cls});
    }
  }
  return out;
}

}  // namespace isocl
