#pragma once

#include <cstdint>
#include <vector>

#include "isocl/spectral.hpp"

namespace isocl {

/// Fully connected encoder: rectifier on hidden layers, linear last layer,
/// optional L2 normalization of the output. Inputs and outputs are columns.
class Encoder {
 public:
  struct Layer {
    Matrix weight;  // out x in
    Vector bias;
  };

  struct ForwardCache {
    std::vector<Matrix> activations;  // input of each layer, then pre-normalization output
    std::vector<Matrix> pre_relu;     // hidden pre-activations
    Vector output_norms;
    Matrix output;
  };

  using Gradients = std::vector<Layer>;

  Encoder() = default;
  /// layer_sizes = {input, hidden..., latent}. He-normal weights, zero biases.
  Encoder(std::vector<int> layer_sizes, std::uint64_t seed, bool normalize_output = true);

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, ForwardCache& cache) const;

  /// Parameter gradients given d loss / d output.
  Gradients backward(const ForwardCache& cache, const Matrix& grad_output) const;

  /// Plain gradient step: p <- p - lr * g.
  void apply(const Gradients& grads, double lr);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  int input_dim() const noexcept { return sizes_.front(); }
  int latent_dim() const noexcept { return sizes_.back(); }
  bool normalizes_output() const noexcept { return normalize_; }

  Eigen::Index parameter_count() const;
  Vector parameters() const;
  void set_parameters(const Vector& flat);
  static Vector flatten(const Gradients& grads);

  bool all_finite() const;
  friend bool operator==(const Encoder& a, const Encoder& b);

 private:
  std::vector<int> sizes_;
  std::vector<Layer> layers_;
  bool normalize_ = true;
};

}  // namespace isocl
