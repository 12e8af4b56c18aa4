#pragma once

#include "isocl/spectral.hpp"

namespace isocl {

struct ProbeOptions {
  int epochs = 100;
  // Fraction of the largest stable step 1/L, with L the curvature bound of
  // the softmax cross-entropy on the standardized features.
  double step_scale = 1.0;
  bool standardize = true;
};

/// Multinomial logistic regression trained by full-batch gradient descent on
/// `train`, returning top-1 accuracy on `eval`. Features are z-scored with the
/// training statistics before fitting.
double linear_probe(const FeatureMatrix& train, const FeatureMatrix& eval,
                    const ProbeOptions& opts = {});

}  // namespace isocl
