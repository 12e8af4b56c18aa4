#include "isocl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <string>

#include "isocl/error.hpp"
#include "isocl/isotropy.hpp"

namespace isocl {

ClusterSpec ClusterSpec::reference(int dimension, int clusters) {
  ClusterSpec spec;
  spec.dimension = dimension;
  spec.num_clusters = clusters;
  spec.scaled_dims = (dimension + 3) / 4;
  return spec;
}

void ClusterSpec::validate() const {
  require(num_clusters >= 1, "cluster spec: num_clusters must be >= 1");
  require(dimension >= 2, "cluster spec: dimension must be >= 2");
  require(std::isfinite(alpha) && alpha >= 0.0, "cluster spec: alpha must be finite and >= 0");
  require(std::isfinite(sigma) && sigma > 0.0, "cluster spec: sigma must be finite and > 0");
  require(std::isfinite(rho) && rho >= 0.0, "cluster spec: rho must be finite and >= 0");
  require(scaled_dims >= 0 && scaled_dims <= dimension,
          "cluster spec: k must lie in [0, D], got " + std::to_string(scaled_dims));
  require(samples_per_cluster >= 2, "cluster spec: samples_per_cluster must be >= 2");
}

FeatureMatrix sample_clusters(const ClusterSpec& spec) {
  spec.validate();
  const Eigen::Index d = spec.dimension;
  const Eigen::Index n = spec.samples_per_cluster;
  const Eigen::Index m_count = spec.num_clusters;

  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                    static_cast<std::uint32_t>(spec.seed >> 32), 0x6b5e7u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix centers(d, m_count);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    Vector u(d);
    do {
      for (Eigen::Index i = 0; i < d; ++i) u[i] = normal(rng);
    } while (u.norm() == 0.0);
    centers.col(m) = spec.alpha * u / u.norm();
  }

  Vector stddev = Vector::Constant(d, std::sqrt(spec.sigma));
  stddev.head(spec.scaled_dims).setConstant(std::sqrt(spec.sigma * (1.0 + spec.rho)));

  Matrix data(d, m_count * n);
  std::vector<int> labels(static_cast<std::size_t>(m_count * n));
  for (Eigen::Index m = 0; m < m_count; ++m) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index col = m * n + j;
      for (Eigen::Index i = 0; i < d; ++i) data(i, col) = centers(i, m) + stddev[i] * normal(rng);
      labels[static_cast<std::size_t>(col)] = static_cast<int>(m);
    }
  }
  return FeatureMatrix(std::move(data), std::move(labels));
}

std::vector<SweepRecord> anisotropy_sweep(const ClusterSpec& spec, const std::vector<double>& rhos,
                                          const std::vector<std::uint64_t>& seeds) {
  require(!rhos.empty(), "anisotropy_sweep: rho list is empty");
  require(!seeds.empty(), "anisotropy_sweep: seed list is empty");
  std::vector<SweepRecord> out;
  out.reserve(rhos.size() * seeds.size());
  for (double rho : rhos) {
    for (std::uint64_t seed : seeds) {
      ClusterSpec point = spec;
      point.rho = rho;
      point.seed = seed;
      const IsotropyReport rep = isotropy_report(sample_clusters(point));
      out.push_back({rho, rep.iso_entropy, rep.iso_score, seed});
    }
  }
  return out;
}

std::vector<SweepMean> average_sweep(const std::vector<SweepRecord>& records) {
  std::vector<SweepMean> out;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SweepMean& m) { return m.rho == r.rho; });
    if (it == out.end()) {
      out.push_back({r.rho, 0.0, 0.0, 0});
      it = std::prev(out.end());
    }
    it->iso_entropy_mean += r.iso_entropy;
    it->iso_score_mean += r.iso_score;
    it->n_seeds += 1;
  }
  for (auto& m : out) {
    m.iso_entropy_mean /= static_cast<double>(m.n_seeds);
    m.iso_score_mean /= static_cast<double>(m.n_seeds);
  }
  return out;
}

}  // namespace isocl
