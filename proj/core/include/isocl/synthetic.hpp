#pragma once

#include <cstdint>
#include <vector>

#include "isocl/spectral.hpp"

namespace isocl {

/// Gaussian mixture with M clusters centred at alpha * u_m (u_m uniform on the
/// unit sphere). Within a cluster coordinates are independent with variance
/// sigma * (1 + rho) on the first k dimensions and sigma elsewhere.
struct ClusterSpec {
  int num_clusters = 10;
  int dimension = 128;
  double alpha = 5.0;
  double sigma = 1.0;
  double rho = 0.0;
  int scaled_dims = 32;
  int samples_per_cluster = 500;
  std::uint64_t seed = 0;

  /// Reference-curve defaults for a given latent dimension (k = ceil(D / 4)).
  static ClusterSpec reference(int dimension = 128, int clusters = 10);

  void validate() const;
};

struct SweepRecord {
  double rho = 0.0;
  double iso_entropy = 0.0;
  double iso_score = 0.0;
  std::uint64_t seed = 0;
};

struct SweepMean {
  double rho = 0.0;
  double iso_entropy_mean = 0.0;
  double iso_score_mean = 0.0;
  std::size_t n_seeds = 0;
};

/// M * n labeled samples as a D x (M n) matrix; cluster m occupies columns
/// [m n, (m + 1) n) and carries label m. Deterministic in spec.seed.
///
/// The random draws depend only on the seed, not on rho, so a sweep over rho
/// with a fixed seed rescales the same underlying noise.
FeatureMatrix sample_clusters(const ClusterSpec& spec);

/// One record per (rho, seed) pair, rho-major.
std::vector<SweepRecord> anisotropy_sweep(const ClusterSpec& spec, const std::vector<double>& rhos,
                                          const std::vector<std::uint64_t>& seeds);

/// Seed-averaged records, one per distinct rho in first-appearance order.
std::vector<SweepMean> average_sweep(const std::vector<SweepRecord>& records);

}  // namespace isocl
