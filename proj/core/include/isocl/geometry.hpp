#pragma once

#include <cstdint>
#include <map>

#include "isocl/spectral.hpp"

namespace isocl {

struct GeometryOptions {
  double shrinkage = 0.05;
  std::size_t max_pairs_per_class = 10'000;
  std::uint64_t pair_seed = 0x5eed'1a55'c0de'0001ULL;
};

struct ClassGeometryReport {
  std::map<int, Vector> centroids;
  double intra = 0.0;
  double inter = 0.0;
  double ratio = 0.0;  // +inf when intra == 0
  double shrinkage_used = 0.0;
};

std::map<int, Vector> class_centroids(const FeatureMatrix& x);

/// Pooled within-class scatter divided by K, shrunk toward (trace / D) I.
CovarianceMatrix pooled_within_covariance(const FeatureMatrix& x, double shrinkage);

/// Average inter-centroid over average intra-class Mahalanobis distance.
///
/// Distances use the inverse of pooled_within_covariance. Intra-class distance
/// is the mean pairwise distance within each class (pairs above the cap are
/// subsampled with a fixed seed), averaged over classes. Samples are put in a
/// canonical order first so the result does not depend on input order.
ClassGeometryReport inter_intra_ratio(const FeatureMatrix& x, const GeometryOptions& opts = {});
ClassGeometryReport inter_intra_ratio(const FeatureMatrix& x, double shrinkage);

}  // namespace isocl
