#include "isocl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>

#include "isocl/error.hpp"

namespace isocl {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::InvalidBatch: return "InvalidBatch";
    case ErrorKind::TrainingDiverged: return "TrainingDiverged";
  }
  return "Unknown";
}

FeatureMatrix::FeatureMatrix(Matrix data, std::optional<std::vector<int>> labels)
    : data_(std::move(data)), labels_(std::move(labels)) {
  require(data_.allFinite(), "feature matrix contains non-finite entries");
  if (labels_) {
    require(static_cast<Eigen::Index>(labels_->size()) == data_.cols(),
            "label count " + std::to_string(labels_->size()) + " does not match sample count " +
                std::to_string(data_.cols()));
    for (int y : *labels_) require(y >= 0, "labels must be non-negative");
  }
}

std::vector<int> FeatureMatrix::classes() const {
  if (!labels_) return {};
  std::set<int> seen(labels_->begin(), labels_->end());
  return {seen.begin(), seen.end()};
}

FeatureMatrix center(const FeatureMatrix& x) {
  require(x.samples() >= 1 && x.dimension() >= 1, "center: empty feature matrix");
  const Vector mean = x.data().rowwise().mean();
  Matrix centered = x.data().colwise() - mean;
  return FeatureMatrix(std::move(centered), x.labels());
}

CovarianceMatrix covariance(const Matrix& x) {
  require(x.cols() >= 2, "covariance: need at least 2 samples, got " + std::to_string(x.cols()));
  require(x.rows() >= 1, "covariance: empty feature dimension");
  require(x.allFinite(), "covariance: non-finite entries");
  const Vector mean = x.rowwise().mean();
  const Matrix centered = x.colwise() - mean;
  Matrix sigma = (centered * centered.transpose()) / static_cast<double>(x.cols());
  // The GEMM result is not guaranteed to be bitwise symmetric.
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  return {std::move(sigma), x.cols()};
}

CovarianceMatrix covariance(const FeatureMatrix& x) { return covariance(x.data()); }

namespace {

void check_symmetric(const Matrix& m) {
  require(m.rows() == m.cols() && m.rows() >= 1, "eigen: matrix must be square and non-empty");
  require(m.allFinite(), "eigen: non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * scale, "eigen: matrix is not symmetric (max asymmetry " +
                                     std::to_string(asym) + ")");
}

EigenDecomposition solve_descending(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) fail(ErrorKind::InvalidInput, "eigen: solver did not converge");
  // Eigen returns ascending order; reverse to descending.
  EigenDecomposition out;
  out.spectrum.gammas = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  out.spectrum.trace = out.spectrum.gammas.sum();
  return out;
}

void clamp_spectrum(EigenSpectrum& s, double source_trace) {
  const double tol = kSpectrumClampTolerance * std::abs(source_trace);
  for (Eigen::Index i = 0; i < s.gammas.size(); ++i) {
    double& g = s.gammas[i];
    if (g < -tol) {
      fail(ErrorKind::InvalidInput,
           "eigen: covariance is not positive semidefinite (eigenvalue " + std::to_string(g) + ")");
    }
    if (g < tol || g < 0.0) g = 0.0;
  }
  s.trace = s.gammas.sum();
}

}  // namespace

EigenDecomposition symmetric_eigen(const Matrix& m) {
  check_symmetric(m);
  return solve_descending(m);
}

EigenDecomposition eig_decompose(const CovarianceMatrix& sigma) {
  check_symmetric(sigma.sigma);
  EigenDecomposition out = solve_descending(sigma.sigma);
  clamp_spectrum(out.spectrum, sigma.sigma.trace());
  return out;
}

EigenSpectrum eig_spectrum(const CovarianceMatrix& sigma) {
  check_symmetric(sigma.sigma);
  const Matrix sym = 0.5 * (sigma.sigma + sigma.sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorKind::InvalidInput, "eigen: solver did not converge");
  EigenSpectrum s;
  s.gammas = solver.eigenvalues().reverse();
  clamp_spectrum(s, sigma.sigma.trace());
  return s;
}

double mahalanobis_sq(const Vector& u, const Vector& v, const Matrix& precision) {
  require(u.size() == v.size(), "mahalanobis: vector dimensions differ");
  require(precision.rows() == u.size() && precision.cols() == u.size(),
          "mahalanobis: precision matrix dimension mismatch");
  const Vector d = u - v;
  return std::max(0.0, d.dot(precision * d));
}

}  // namespace isocl
