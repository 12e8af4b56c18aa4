#pragma once

// Supervised contrastive, prototype and distillation losses with analytic
// gradients with respect to the embeddings. Embeddings are the columns of a
// D x B matrix. Every loss is a plain sum over its anchors unless a composite
// is evaluated with Reduction::Mean.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isocl/isotropy.hpp"
#include "isocl/spectral.hpp"

namespace isocl {

struct EmbeddingBatch {
  Matrix z;                 // D x B
  std::vector<int> labels;  // length B
  std::vector<bool> current;  // membership in the current experience
  std::optional<std::vector<int>> view_of;  // source sample of each view

  Eigen::Index size() const noexcept { return z.cols(); }

  /// Builds a batch with every column L2-normalized.
  static EmbeddingBatch normalized(Matrix raw, std::vector<int> labels, std::vector<bool> current,
                                   std::optional<std::vector<int>> view_of = std::nullopt);

  /// Shape and finiteness checks shared by every loss.
  void validate() const;
  bool is_normalized(double tol = 1e-9) const;
};

struct PrototypeSet {
  std::map<int, Vector> prototypes;  // unit vectors
  int source_epoch = 0;

  bool empty() const noexcept { return prototypes.empty(); }

  /// Normalized per-class means of the columns of z.
  static PrototypeSet from_embeddings(const Matrix& z, const std::vector<int>& labels,
                                      int source_epoch = 0);
};

struct LossOutput {
  double value = 0.0;
  Matrix grad_z;
  std::map<std::string, double> components;
};

enum class Reduction { Sum, Mean };

struct LossConfig {
  double tau = 0.5;
  double tau_ird_past = 0.5;
  double tau_ird_current = 0.5;
  double lambda_ird = 1.0;
  double lambda_pird = 1.0;
  double lambda_iso = 0.0;
  IsoStarConfig iso_cfg;
  Reduction reduction = Reduction::Sum;

  void validate() const;
};

enum class LossVariant { SupCon, SupCP, Co2L, NCI, Co2LIso };

std::string_view to_string(LossVariant v) noexcept;
LossVariant parse_loss_variant(std::string_view name);

/// Supervised contrastive loss with anchors restricted to current samples.
/// Positives of an anchor are all other batch members with the same label.
LossOutput supcon_asym(const EmbeddingBatch& batch, double tau);

/// Same as supcon_asym with every batch member acting as an anchor.
LossOutput supcon(const EmbeddingBatch& batch, double tau);

/// Prototype loss; the denominator runs over the non-matching prototypes only,
/// so values can be negative. Prototypes are constants.
LossOutput sup_proto(const EmbeddingBatch& batch, const PrototypeSet& protos, double tau);

/// Row-stochastic matrix of softmax similarities over k != i, zero diagonal.
Matrix similarity_distribution(const Matrix& z, double tau);

/// Instance-wise relation distillation: cross-entropy between the past and
/// current similarity distributions. Gradient flows through `current` only.
LossOutput ird(const EmbeddingBatch& current, const Matrix& past_z, const LossConfig& cfg);

/// Distillation of the sample-to-prototype distributions over the frozen
/// past prototypes.
LossOutput pird(const EmbeddingBatch& current, const PrototypeSet& past_protos,
                const Matrix& past_z, const LossConfig& cfg);

struct CompositeInputs {
  const Matrix* past_z = nullptr;
  const PrototypeSet* protos = nullptr;
  const PrototypeSet* past_protos = nullptr;
};

/// Weighted sum of the terms each variant needs:
///   SupCon   = supcon
///   SupCP    = supcon + sup_proto
///   Co2L     = supcon_asym + lambda_ird ird
///   NCI      = Co2L + sup_proto + lambda_pird pird
///   Co2L+iso = Co2L + lambda_iso (1 - IsoScore*)
/// Terms whose weight is zero are skipped, so their inputs may be absent.
/// `components` holds the weighted contribution of each term.
LossOutput composite(const EmbeddingBatch& batch, const CompositeInputs& inputs,
                     const LossConfig& cfg, LossVariant variant);

}  // namespace isocl
