#include "isocl/objectives.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "isocl/error.hpp"

namespace isocl {

namespace {

void require_tau(double tau, const char* who) {
  require(std::isfinite(tau) && tau > 0.0, std::string(who) + ": temperature must be positive");
}

// Shared kernel of both SupCon forms. Anchors with anchor[i] == false are
// skipped. Returns the summed loss and the gradient w.r.t. z.
LossOutput supcon_impl(const EmbeddingBatch& batch, double tau, const std::vector<bool>& anchor,
                       const char* who) {
  batch.validate();
  require_tau(tau, who);
  const Eigen::Index b = batch.size();
  const Matrix logits = (batch.z.transpose() * batch.z) / tau;  // symmetric
  // Column i of `coef` holds d loss / d logit(i, k) / tau for anchor i.
  Matrix coef = Matrix::Zero(b, b);
  double total = 0.0;

  for (Eigen::Index i = 0; i < b; ++i) {
    if (!anchor[static_cast<std::size_t>(i)]) continue;
    const int yi = batch.labels[static_cast<std::size_t>(i)];
    const auto col = logits.col(i);
    Eigen::Index positives = 0;
    double max_logit = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < b; ++k) {
      if (k == i) continue;
      max_logit = std::max(max_logit, col[k]);
      if (batch.labels[static_cast<std::size_t>(k)] == yi) ++positives;
    }
    if (positives == 0) {
      fail(ErrorKind::InvalidBatch,
           std::string(who) + ": anchor " + std::to_string(i) + " (label " + std::to_string(yi) +
               ") has no positive in the batch");
    }
    auto out = coef.col(i);
    double denom = 0.0;
    for (Eigen::Index k = 0; k < b; ++k) {
      if (k == i) continue;
      out[k] = std::exp(col[k] - max_logit);
      denom += out[k];
    }
    const double lse = max_logit + std::log(denom);
    const double inv_p = 1.0 / static_cast<double>(positives);
    double pos_sum = 0.0;
    for (Eigen::Index k = 0; k < b; ++k) {
      if (k == i) continue;
      const bool pos = batch.labels[static_cast<std::size_t>(k)] == yi;
      if (pos) pos_sum += col[k];
      out[k] = (out[k] / denom - (pos ? inv_p : 0.0)) / tau;
    }
    total += lse - inv_p * pos_sum;
  }

  LossOutput out;
  out.value = total;
  out.grad_z = batch.z * (coef + coef.transpose());
  return out;
}

// Column-wise softmax: column i is a distribution over the rows, optionally
// excluding row i. Excluded entries are zero in both outputs.
struct ColumnSoftmax {
  Matrix log_p;
  Matrix p;
};

ColumnSoftmax column_softmax(const Matrix& logits, bool exclude_diagonal) {
  const Eigen::Index rows = logits.rows();
  ColumnSoftmax out{Matrix::Zero(rows, logits.cols()), Matrix::Zero(rows, logits.cols())};
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    const auto col = logits.col(i);
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < rows; ++j) {
      if (!(exclude_diagonal && i == j)) m = std::max(m, col[j]);
    }
    auto p = out.p.col(i);
    double denom = 0.0;
    for (Eigen::Index j = 0; j < rows; ++j) {
      if (exclude_diagonal && i == j) continue;
      p[j] = std::exp(col[j] - m);
      denom += p[j];
    }
    const double lse = m + std::log(denom);
    auto lp = out.log_p.col(i);
    for (Eigen::Index j = 0; j < rows; ++j) {
      if (exclude_diagonal && i == j) continue;
      p[j] /= denom;
      lp[j] = col[j] - lse;
    }
  }
  return out;
}

Matrix prototype_matrix(const PrototypeSet& protos, Eigen::Index dim, std::vector<int>& keys) {
  Matrix c(dim, static_cast<Eigen::Index>(protos.prototypes.size()));
  keys.clear();
  Eigen::Index j = 0;
  for (const auto& [y, v] : protos.prototypes) {
    require(v.size() == dim, "prototype dimension does not match embeddings");
    c.col(j++) = v;
    keys.push_back(y);
  }
  return c;
}

}  // namespace

EmbeddingBatch EmbeddingBatch::normalized(Matrix raw, std::vector<int> labels,
                                          std::vector<bool> current,
                                          std::optional<std::vector<int>> view_of) {
  for (Eigen::Index i = 0; i < raw.cols(); ++i) {
    const double n = raw.col(i).norm();
    require(n > 0.0, "embedding " + std::to_string(i) + " has zero norm");
    raw.col(i) /= n;
  }
  EmbeddingBatch batch{std::move(raw), std::move(labels), std::move(current), std::move(view_of)};
  batch.validate();
  return batch;
}

void EmbeddingBatch::validate() const {
  const auto b = static_cast<std::size_t>(z.cols());
  require(z.cols() >= 2, "embedding batch: need at least 2 embeddings");
  require(z.rows() >= 1, "embedding batch: empty embedding dimension");
  require(labels.size() == b, "embedding batch: label count mismatch");
  require(current.size() == b, "embedding batch: current-mask length mismatch");
  if (view_of) require(view_of->size() == b, "embedding batch: view pairing length mismatch");
  require(z.allFinite(), "embedding batch: non-finite embeddings");
}

bool EmbeddingBatch::is_normalized(double tol) const {
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    if (std::abs(z.col(i).norm() - 1.0) > tol) return false;
  }
  return true;
}

PrototypeSet PrototypeSet::from_embeddings(const Matrix& z, const std::vector<int>& labels,
                                           int source_epoch) {
  require(static_cast<Eigen::Index>(labels.size()) == z.cols(), "prototypes: label count mismatch");
  std::map<int, Vector> sums;
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    auto [it, inserted] = sums.try_emplace(labels[static_cast<std::size_t>(i)], Vector::Zero(z.rows()));
    it->second += z.col(i);
  }
  PrototypeSet out;
  out.source_epoch = source_epoch;
  for (auto& [y, s] : sums) {
    const double n = s.norm();
    require(n > 0.0, "prototypes: class " + std::to_string(y) + " has a zero mean embedding");
    out.prototypes.emplace(y, s / n);
  }
  return out;
}

void LossConfig::validate() const {
  require_tau(tau, "loss config");
  require_tau(tau_ird_past, "loss config (IRD past)");
  require_tau(tau_ird_current, "loss config (IRD current)");
  require(lambda_ird >= 0.0 && lambda_pird >= 0.0 && lambda_iso >= 0.0,
          "loss config: weights must be non-negative");
  require(iso_cfg.zeta >= 0.0 && iso_cfg.zeta < 1.0, "loss config: iso zeta must lie in [0, 1)");
  require(iso_cfg.epsilon > 0.0, "loss config: iso epsilon must be positive");
}

std::string_view to_string(LossVariant v) noexcept {
  switch (v) {
    case LossVariant::SupCon: return "supcon";
    case LossVariant::SupCP: return "supcp";
    case LossVariant::Co2L: return "co2l";
    case LossVariant::NCI: return "nci";
    case LossVariant::Co2LIso: return "co2l+iso";
  }
  return "unknown";
}

LossVariant parse_loss_variant(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "supcon") return LossVariant::SupCon;
  if (lower == "supcp") return LossVariant::SupCP;
  if (lower == "co2l") return LossVariant::Co2L;
  if (lower == "nci") return LossVariant::NCI;
  if (lower == "co2l+iso" || lower == "co2l_iso" || lower == "co2liso") return LossVariant::Co2LIso;
  fail(ErrorKind::InvalidInput, "unknown loss variant '" + std::string(name) + "'");
}

LossOutput supcon_asym(const EmbeddingBatch& batch, double tau) {
  batch.validate();
  return supcon_impl(batch, tau, batch.current, "supcon_asym");
}

LossOutput supcon(const EmbeddingBatch& batch, double tau) {
  batch.validate();
  return supcon_impl(batch, tau, std::vector<bool>(static_cast<std::size_t>(batch.size()), true),
                     "supcon");
}

LossOutput sup_proto(const EmbeddingBatch& batch, const PrototypeSet& protos, double tau) {
  batch.validate();
  require_tau(tau, "sup_proto");
  require(protos.prototypes.size() >= 2, "sup_proto: need at least two prototypes");
  std::vector<int> keys;
  const Matrix c = prototype_matrix(protos, batch.z.rows(), keys);
  const Eigen::Index np = c.cols();
  const Matrix logits = (batch.z.transpose() * c) / tau;  // B x P

  LossOutput out;
  out.grad_z = Matrix::Zero(batch.z.rows(), batch.z.cols());
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    const int yi = batch.labels[static_cast<std::size_t>(i)];
    const auto it = std::find(keys.begin(), keys.end(), yi);
    if (it == keys.end()) {
      fail(ErrorKind::InvalidInput, "sup_proto: no prototype for label " + std::to_string(yi));
    }
    const auto target = static_cast<Eigen::Index>(it - keys.begin());
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < np; ++k) {
      if (k != target) m = std::max(m, logits(i, k));
    }
    double denom = 0.0;
    for (Eigen::Index k = 0; k < np; ++k) {
      if (k != target) denom += std::exp(logits(i, k) - m);
    }
    const double lse = m + std::log(denom);
    out.value += lse - logits(i, target);
    Vector g = -c.col(target);
    for (Eigen::Index k = 0; k < np; ++k) {
      if (k != target) g += std::exp(logits(i, k) - lse) * c.col(k);
    }
    out.grad_z.col(i) = g / tau;
  }
  return out;
}

Matrix similarity_distribution(const Matrix& z, double tau) {
  require(z.cols() >= 2, "similarity_distribution: need at least 2 embeddings");
  require_tau(tau, "similarity_distribution");
  // The logits are symmetric, so column i is row i of the result.
  return column_softmax((z.transpose() * z) / tau, true).p.transpose();
}

LossOutput ird(const EmbeddingBatch& current, const Matrix& past_z, const LossConfig& cfg) {
  current.validate();
  require(past_z.rows() == current.z.rows() && past_z.cols() == current.z.cols(),
          "ird: past and current embeddings differ in shape");
  require(past_z.allFinite(), "ird: non-finite past embeddings");
  require_tau(cfg.tau_ird_past, "ird");
  require_tau(cfg.tau_ird_current, "ird");

  // Column i is the distribution of anchor i.
  const Matrix target = column_softmax((past_z.transpose() * past_z) / cfg.tau_ird_past, true).p;
  const ColumnSoftmax cur =
      column_softmax((current.z.transpose() * current.z) / cfg.tau_ird_current, true);

  LossOutput out;
  out.value = -(target.array() * cur.log_p.array()).sum();
  // Each target column sums to one, so d/d logit = p - target.
  const Matrix coef = (cur.p - target) / cfg.tau_ird_current;
  out.grad_z = current.z * (coef + coef.transpose());
  return out;
}

LossOutput pird(const EmbeddingBatch& current, const PrototypeSet& past_protos,
                const Matrix& past_z, const LossConfig& cfg) {
  current.validate();
  require(!past_protos.empty(), "pird: past prototype set is empty");
  require(past_z.rows() == current.z.rows() && past_z.cols() == current.z.cols(),
          "pird: past and current embeddings differ in shape");
  require(past_z.allFinite(), "pird: non-finite past embeddings");
  require_tau(cfg.tau_ird_past, "pird");
  require_tau(cfg.tau_ird_current, "pird");

  std::vector<int> keys;
  const Matrix c = prototype_matrix(past_protos, current.z.rows(), keys);
  // P x B: column i is the distribution of sample i over the prototypes.
  const Matrix target = column_softmax((c.transpose() * past_z) / cfg.tau_ird_past, false).p;
  const ColumnSoftmax cur = column_softmax((c.transpose() * current.z) / cfg.tau_ird_current, false);

  LossOutput out;
  out.value = -(target.array() * cur.log_p.array()).sum();
  out.grad_z = c * ((cur.p - target) / cfg.tau_ird_current);
  return out;
}

namespace {

void accumulate(LossOutput& total, const LossOutput& term, double weight, const std::string& name) {
  total.value += weight * term.value;
  total.grad_z += weight * term.grad_z;
  total.components[name] = weight * term.value;
}

double count_anchors(const std::vector<bool>& mask) {
  return static_cast<double>(std::count(mask.begin(), mask.end(), true));
}

}  // namespace

LossOutput composite(const EmbeddingBatch& batch, const CompositeInputs& inputs,
                     const LossConfig& cfg, LossVariant variant) {
  batch.validate();
  cfg.validate();
  const bool mean = cfg.reduction == Reduction::Mean;
  const double per_sample = mean ? 1.0 / static_cast<double>(batch.size()) : 1.0;

  LossOutput total;
  total.grad_z = Matrix::Zero(batch.z.rows(), batch.z.cols());

  const bool asymmetric = variant == LossVariant::Co2L || variant == LossVariant::NCI ||
                          variant == LossVariant::Co2LIso;
  if (asymmetric) {
    const double anchors = count_anchors(batch.current);
    require(anchors > 0, "composite: batch has no current-experience anchors");
    accumulate(total, supcon_asym(batch, cfg.tau), mean ? 1.0 / anchors : 1.0, "supcon_asym");
  } else {
    accumulate(total, supcon(batch, cfg.tau), per_sample, "supcon");
  }

  if (variant == LossVariant::SupCP || variant == LossVariant::NCI) {
    require(inputs.protos != nullptr, "composite: variant requires class prototypes");
    accumulate(total, sup_proto(batch, *inputs.protos, cfg.tau), per_sample, "sup_proto");
  }

  if (asymmetric && cfg.lambda_ird > 0.0) {
    require(inputs.past_z != nullptr, "composite: lambda_ird > 0 requires past embeddings");
    accumulate(total, ird(batch, *inputs.past_z, cfg), cfg.lambda_ird * per_sample, "ird");
  }

  if (variant == LossVariant::NCI && cfg.lambda_pird > 0.0) {
    require(inputs.past_z != nullptr, "composite: lambda_pird > 0 requires past embeddings");
    require(inputs.past_protos != nullptr, "composite: lambda_pird > 0 requires past prototypes");
    accumulate(total, pird(batch, *inputs.past_protos, *inputs.past_z, cfg),
               cfg.lambda_pird * per_sample, "pird");
  }

  if (variant == LossVariant::Co2LIso && cfg.lambda_iso > 0.0) {
    const IsoStarResult iso = iso_score_star(batch.z, cfg.iso_cfg);
    LossOutput term;
    term.value = 1.0 - iso.value;
    term.grad_z = -iso.grad;
    accumulate(total, term, cfg.lambda_iso, "iso");
  }
  return total;
}

}  // namespace isocl
