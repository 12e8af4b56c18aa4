#include "isocl/probe.hpp"

#include <algorithm>
#include <map>
#include <string>

#include <Eigen/Eigenvalues>

#include "isocl/error.hpp"

namespace isocl {

double linear_probe(const FeatureMatrix& train, const FeatureMatrix& eval, const ProbeOptions& opts) {
  require(train.has_labels() && eval.has_labels(), "linear_probe: labeled data required");
  require(train.dimension() == eval.dimension(), "linear_probe: feature dimensions differ");
  require(train.samples() >= 1 && eval.samples() >= 1, "linear_probe: empty data");
  require(opts.epochs >= 0, "linear_probe: epochs must be non-negative");

  const auto classes = train.classes();
  std::map<int, Eigen::Index> index;
  for (std::size_t c = 0; c < classes.size(); ++c) index[classes[c]] = static_cast<Eigen::Index>(c);
  for (int y : *eval.labels()) {
    require(index.count(y) > 0,
            "linear_probe: eval label " + std::to_string(y) + " does not occur in training data");
  }

  const Eigen::Index d = train.dimension();
  const Eigen::Index n = train.samples();
  const auto num_classes = static_cast<Eigen::Index>(classes.size());

  Vector mean = Vector::Zero(d);
  Vector scale = Vector::Ones(d);
  if (opts.standardize) {
    mean = train.data().rowwise().mean();
    const Matrix c = train.data().colwise() - mean;
    for (Eigen::Index r = 0; r < d; ++r) {
      const double sd = std::sqrt(c.row(r).squaredNorm() / static_cast<double>(n));
      scale[r] = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
  }
  // Augmented inputs with a constant bias row.
  auto prepare = [&](const Matrix& raw) {
    Matrix x(d + 1, raw.cols());
    x.topRows(d) = scale.asDiagonal() * (raw.colwise() - mean);
    x.row(d).setOnes();
    return x;
  };
  const Matrix x = prepare(train.data());

  Matrix onehot = Matrix::Zero(num_classes, n);
  for (Eigen::Index j = 0; j < n; ++j) onehot(index.at((*train.labels())[static_cast<std::size_t>(j)]), j) = 1.0;

  // Softmax cross-entropy has Hessian bounded by 0.5 * E[x x^T] (Kronecker I).
  const Matrix second = (x * x.transpose()) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(second, Eigen::EigenvaluesOnly);
  const double lipschitz = 0.5 * std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const double step = opts.step_scale / lipschitz;

  Matrix w = Matrix::Zero(num_classes, d + 1);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    Matrix logits = w * x;
    const Eigen::RowVectorXd mx = logits.colwise().maxCoeff();
    logits.rowwise() -= mx;
    Matrix p = logits.array().exp();
    p.array().rowwise() /= p.colwise().sum().array();
    w -= step * ((p - onehot) * x.transpose()) / static_cast<double>(n);
  }

  const Matrix scores = w * prepare(eval.data());
  Eigen::Index correct = 0;
  for (Eigen::Index j = 0; j < eval.samples(); ++j) {
    Eigen::Index best = 0;
    scores.col(j).maxCoeff(&best);
    if (classes[static_cast<std::size_t>(best)] == (*eval.labels())[static_cast<std::size_t>(j)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(eval.samples());
}

}  // namespace isocl
