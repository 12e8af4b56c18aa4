#include "isocl/isotropy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isocl/error.hpp"

namespace isocl {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_nondegenerate(const EigenSpectrum& s) {
  require(s.dimension() >= 1, "isotropy: empty spectrum");
  if (!(s.gammas.maxCoeff() > 0.0)) {
    fail(ErrorKind::DegenerateSpectrum, "isotropy: all eigenvalues are zero");
  }
}

}  // namespace

double isotropy_defect(const EigenSpectrum& spectrum) {
  require_nondegenerate(spectrum);
  const auto d = static_cast<double>(spectrum.dimension());
  if (spectrum.dimension() == 1) return 0.0;
  const double root_d = std::sqrt(d);
  const Vector scaled = root_d * spectrum.gammas / spectrum.gammas.norm();
  const double dist = (scaled - Vector::Ones(spectrum.dimension())).norm();
  return clamp01(dist / std::sqrt(2.0 * (d - root_d)));
}

double iso_score(const EigenSpectrum& spectrum) {
  require(spectrum.dimension() >= 2, "iso_score: dimension must be at least 2");
  const double delta = isotropy_defect(spectrum);
  const auto d = static_cast<double>(spectrum.dimension());
  const double inner = d - delta * delta * (d - std::sqrt(d));
  return clamp01((inner * inner - d) / (d * (d - 1.0)));
}

double iso_entropy(const EigenSpectrum& spectrum) {
  require(spectrum.dimension() >= 2, "iso_entropy: dimension must be at least 2");
  require_nondegenerate(spectrum);
  const double total = spectrum.gammas.sum();
  double h = 0.0;
  for (double g : spectrum.gammas) {
    if (g <= 0.0) continue;  // 0 log 0 = 0
    const double p = g / total;
    h -= p * std::log(p);
  }
  return clamp01(h / std::log(static_cast<double>(spectrum.dimension())));
}

IsotropyReport isotropy_report(const FeatureMatrix& x) {
  require(x.dimension() >= 2, "isotropy: feature dimension must be at least 2");
  IsotropyReport r;
  r.spectrum = eig_spectrum(covariance(x));
  r.defect = isotropy_defect(r.spectrum);
  r.iso_score = iso_score(r.spectrum);
  r.iso_entropy = iso_entropy(r.spectrum);
  r.dimension = x.dimension();
  r.sample_count = x.samples();
  return r;
}

double iso_score(const FeatureMatrix& x) {
  require(x.dimension() >= 2, "iso_score: feature dimension must be at least 2");
  return iso_score(eig_spectrum(covariance(x)));
}

double iso_entropy(const FeatureMatrix& x) {
  require(x.dimension() >= 2, "iso_entropy: feature dimension must be at least 2");
  return iso_entropy(eig_spectrum(covariance(x)));
}

IsoStarResult iso_score_star(const Matrix& z, const IsoStarConfig& cfg) {
  require(z.cols() >= 2, "iso_score_star: batch size must be at least 2");
  require(z.rows() >= 2, "iso_score_star: dimension must be at least 2");
  require(cfg.zeta >= 0.0 && cfg.zeta < 1.0, "iso_score_star: zeta must lie in [0, 1)");
  require(cfg.epsilon > 0.0, "iso_score_star: epsilon must be positive");

  const Eigen::Index dim = z.rows();
  const auto d = static_cast<double>(dim);
  const auto b = static_cast<double>(z.cols());

  const Vector mean = z.rowwise().mean();
  const Matrix centered = z.colwise() - mean;
  Matrix cov = (centered * centered.transpose()) / b;
  cov = 0.5 * (cov + cov.transpose()).eval();

  const EigenDecomposition eig = symmetric_eigen(cov);
  const double tr = cov.trace();

  // Diagonal of the shrunk covariance in the (fixed) eigenbasis.
  Vector lambda = (1.0 - cfg.zeta) * eig.spectrum.gammas.array() + cfg.zeta * tr / d;
  lambda = lambda.cwiseMax(0.0);

  IsoStarResult out;
  out.grad = Matrix::Zero(z.rows(), z.cols());
  const double s = lambda.sum();
  const double q = lambda.squaredNorm();
  if (q < cfg.epsilon * cfg.epsilon || s <= 0.0) return out;

  // IsoScore rewritten in terms of the spectrum: (||l||_1^2 / ||l||_2^2 - 1) / (D - 1).
  const double raw = (s * s / q - 1.0) / (d - 1.0);
  out.value = std::clamp(raw, 0.0, 1.0);
  if (raw <= 0.0 || raw >= 1.0) return out;  // clamped: zero gradient

  // d value / d lambda_i
  const Vector a = ((2.0 * s / q) - (2.0 * s * s / (q * q)) * lambda.array()) / (d - 1.0);
  // d value / d Cov = (1 - zeta) V diag(a) V^T + (zeta / D) sum(a) I
  Matrix g = (1.0 - cfg.zeta) * eig.vectors * a.asDiagonal() * eig.vectors.transpose();
  g.diagonal().array() += cfg.zeta * a.sum() / d;
  out.grad = (2.0 / b) * g * centered;
  return out;
}

}  // namespace isocl
