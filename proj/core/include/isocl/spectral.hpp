#pragma once

// Dense covariance and eigen-spectrum kernels shared by every metric.
//
// Convention used throughout the library: samples are COLUMNS. A feature
// matrix with dimension D and K samples is stored as a D x K Eigen matrix.

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace isocl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// D x K feature matrix with optional per-sample class labels.
///
/// Construction validates that every entry is finite and that labels, if
/// given, are non-negative and match the sample count.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix data, std::optional<std::vector<int>> labels = std::nullopt);

  const Matrix& data() const noexcept { return data_; }
  const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }
  bool has_labels() const noexcept { return labels_.has_value(); }

  Eigen::Index dimension() const noexcept { return data_.rows(); }
  Eigen::Index samples() const noexcept { return data_.cols(); }

  /// Distinct labels in ascending order. Empty when unlabeled.
  std::vector<int> classes() const;

 private:
  Matrix data_;
  std::optional<std::vector<int>> labels_;
};

struct CovarianceMatrix {
  Matrix sigma;
  Eigen::Index sample_count = 0;
};

struct EigenSpectrum {
  Vector gammas;  // descending, clamped non-negative
  double trace = 0.0;

  Eigen::Index dimension() const noexcept { return gammas.size(); }
};

/// Spectrum together with the orthonormal eigenvectors (columns, same order).
struct EigenDecomposition {
  EigenSpectrum spectrum;
  Matrix vectors;
};

/// Eigenvalues below this fraction of the trace are clamped to exactly zero.
inline constexpr double kSpectrumClampTolerance = 1e-10;

FeatureMatrix center(const FeatureMatrix& x);

/// Population covariance (divides by K).
CovarianceMatrix covariance(const FeatureMatrix& x);
CovarianceMatrix covariance(const Matrix& x);

EigenSpectrum eig_spectrum(const CovarianceMatrix& sigma);
EigenDecomposition eig_decompose(const CovarianceMatrix& sigma);

/// Symmetric eigendecomposition of an arbitrary symmetric matrix, descending
/// order, without clamping. Used where the input is not a covariance.
EigenDecomposition symmetric_eigen(const Matrix& m);

/// (u - v)^T P (u - v).
double mahalanobis_sq(const Vector& u, const Vector& v, const Matrix& precision);

}  // namespace isocl
