#include "isocl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "isocl/error.hpp"

namespace isocl {

namespace {

const std::vector<int>& labels_of(const FeatureMatrix& x) {
  require(x.has_labels(), "class geometry: labels are required");
  return *x.labels();
}

// Column indices sorted by (label, lexicographic feature values).
std::vector<Eigen::Index> canonical_order(const FeatureMatrix& x) {
  const auto& labels = labels_of(x);
  const Matrix& m = x.data();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m.cols()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (m(r, a) != m(r, b)) return m(r, a) < m(r, b);
    }
    return false;
  });
  return idx;
}

FeatureMatrix canonicalize(const FeatureMatrix& x) {
  const auto order = canonical_order(x);
  Matrix data(x.dimension(), x.samples());
  std::vector<int> labels(order.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    data.col(static_cast<Eigen::Index>(j)) = x.data().col(order[j]);
    labels[j] = (*x.labels())[static_cast<std::size_t>(order[j])];
  }
  return FeatureMatrix(std::move(data), std::move(labels));
}

// Contiguous column ranges per class; input must be canonical.
std::map<int, std::pair<Eigen::Index, Eigen::Index>> class_ranges(const std::vector<int>& labels) {
  std::map<int, std::pair<Eigen::Index, Eigen::Index>> ranges;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    auto [it, inserted] = ranges.try_emplace(labels[j], static_cast<Eigen::Index>(j), 0);
    it->second.second += 1;
  }
  return ranges;
}

}  // namespace

std::map<int, Vector> class_centroids(const FeatureMatrix& x) {
  const auto& labels = labels_of(x);
  std::map<int, Vector> sums;
  std::map<int, Eigen::Index> counts;
  for (Eigen::Index j = 0; j < x.samples(); ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    auto [it, inserted] = sums.try_emplace(y, Vector::Zero(x.dimension()));
    it->second += x.data().col(j);
    counts[y] += 1;
  }
  for (auto& [y, s] : sums) s /= static_cast<double>(counts[y]);
  return sums;
}

CovarianceMatrix pooled_within_covariance(const FeatureMatrix& x, double shrinkage) {
  require(shrinkage >= 0.0 && shrinkage < 1.0, "pooled covariance: shrinkage must lie in [0, 1)");
  const auto& labels = labels_of(x);
  const auto centroids = class_centroids(x);
  const Eigen::Index k = x.samples();
  const auto num_classes = static_cast<Eigen::Index>(centroids.size());
  if (k <= num_classes && shrinkage == 0.0) {
    fail(ErrorKind::SingularCovariance,
         "pooled covariance: need more samples (" + std::to_string(k) + ") than classes (" +
             std::to_string(num_classes) + ") without shrinkage");
  }

  Matrix resid(x.dimension(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    resid.col(j) = x.data().col(j) - centroids.at(labels[static_cast<std::size_t>(j)]);
  }
  Matrix sigma = (resid * resid.transpose()) / static_cast<double>(k);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  if (shrinkage > 0.0) {
    const double target = sigma.trace() / static_cast<double>(x.dimension());
    sigma *= (1.0 - shrinkage);
    sigma.diagonal().array() += shrinkage * target;
  }
  return {std::move(sigma), k};
}

ClassGeometryReport inter_intra_ratio(const FeatureMatrix& x, double shrinkage) {
  GeometryOptions opts;
  opts.shrinkage = shrinkage;
  return inter_intra_ratio(x, opts);
}

ClassGeometryReport inter_intra_ratio(const FeatureMatrix& x, const GeometryOptions& opts) {
  require(x.has_labels(), "inter_intra_ratio: labels are required");
  require(x.samples() >= 2, "inter_intra_ratio: need at least 2 samples");
  const FeatureMatrix canon = canonicalize(x);
  const auto& labels = *canon.labels();
  const auto ranges = class_ranges(labels);
  require(ranges.size() >= 2, "inter_intra_ratio: need at least 2 classes");

  ClassGeometryReport report;
  report.shrinkage_used = opts.shrinkage;
  report.centroids = class_centroids(canon);

  const CovarianceMatrix within = pooled_within_covariance(canon, opts.shrinkage);
  Eigen::LLT<Matrix> llt(within.sigma);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::SingularCovariance, "inter_intra_ratio: within-class covariance is singular");
  }
  // Whitening: with Sigma = L L^T, Mahalanobis distance is Euclidean after L^{-1}.
  const Matrix white = llt.matrixL().solve(canon.data());
  if (!white.allFinite()) {
    fail(ErrorKind::SingularCovariance, "inter_intra_ratio: within-class covariance is singular");
  }

  auto dist = [&](Eigen::Index a, Eigen::Index b) { return (white.col(a) - white.col(b)).norm(); };

  double intra_sum = 0.0;
  std::size_t intra_classes = 0;
  for (const auto& [y, range] : ranges) {
    const auto [start, count] = range;
    if (count < 2) continue;  // singleton classes have no pairs
    const auto total_pairs = static_cast<std::size_t>(count) * static_cast<std::size_t>(count - 1) / 2;
    double class_sum = 0.0;
    std::size_t used = 0;
    if (total_pairs <= opts.max_pairs_per_class) {
      for (Eigen::Index a = 0; a < count; ++a) {
        for (Eigen::Index b = a + 1; b < count; ++b) class_sum += dist(start + a, start + b);
      }
      used = total_pairs;
    } else {
      std::seed_seq seq{static_cast<std::uint32_t>(opts.pair_seed),
                        static_cast<std::uint32_t>(opts.pair_seed >> 32),
                        static_cast<std::uint32_t>(y)};
      std::mt19937_64 rng(seq);
      std::uniform_int_distribution<Eigen::Index> pick(0, count - 1);
      while (used < opts.max_pairs_per_class) {
        const Eigen::Index a = pick(rng);
        const Eigen::Index b = pick(rng);
        if (a == b) continue;
        class_sum += dist(start + a, start + b);
        ++used;
      }
    }
    intra_sum += class_sum / static_cast<double>(used);
    ++intra_classes;
  }
  report.intra = intra_classes > 0 ? intra_sum / static_cast<double>(intra_classes) : 0.0;

  std::vector<Vector> white_centroids;
  white_centroids.reserve(report.centroids.size());
  for (const auto& [y, c] : report.centroids) white_centroids.push_back(llt.matrixL().solve(c));
  double inter_sum = 0.0;
  std::size_t inter_pairs = 0;
  for (std::size_t a = 0; a < white_centroids.size(); ++a) {
    for (std::size_t b = a + 1; b < white_centroids.size(); ++b) {
      inter_sum += (white_centroids[a] - white_centroids[b]).norm();
      ++inter_pairs;
    }
  }
  report.inter = inter_sum / static_cast<double>(inter_pairs);
  report.ratio = report.intra > 0.0 ? report.inter / report.intra
                                    : std::numeric_limits<double>::infinity();
  return report;
}

}  // namespace isocl
