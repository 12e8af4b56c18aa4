#pragma once

#include "isocl/spectral.hpp"

namespace isocl {

struct IsotropyReport {
  double iso_score = 0.0;
  double iso_entropy = 0.0;
  double defect = 0.0;
  EigenSpectrum spectrum;
  Eigen::Index dimension = 0;
  Eigen::Index sample_count = 0;
};

/// Settings for the differentiable IsoScore surrogate.
struct IsoStarConfig {
  double zeta = 0.2;     // covariance shrinkage toward (trace / D) * I, in [0, 1)
  double epsilon = 1e-8; // spectra with squared norm below this are treated as degenerate
};

struct IsoStarResult {
  double value = 0.0;
  Matrix grad;  // same shape as the input batch
};

/// Normalized distance of the spectrum from a uniform one, in [0, 1].
double isotropy_defect(const EigenSpectrum& spectrum);

double iso_score(const EigenSpectrum& spectrum);
double iso_entropy(const EigenSpectrum& spectrum);

double iso_score(const FeatureMatrix& x);
double iso_entropy(const FeatureMatrix& x);

/// Both metrics from a single eigendecomposition.
IsotropyReport isotropy_report(const FeatureMatrix& x);

/// Differentiable IsoScore of a D x B batch (samples are columns).
///
/// The score is evaluated on the diagonal of the shrunk covariance
///   C_z = (1 - zeta) Cov(Z) + zeta (tr Cov(Z) / D) I
/// expressed in the eigenbasis of Cov(Z); that basis is held fixed when
/// differentiating. With zeta = 0 the value coincides with iso_score(Z).
IsoStarResult iso_score_star(const Matrix& z, const IsoStarConfig& cfg = {});

}  // namespace isocl
