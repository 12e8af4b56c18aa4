#include "isocl/encoder.hpp"

#include <cmath>
#include <random>
#include <string>

#include "isocl/error.hpp"

namespace isocl {

Encoder::Encoder(std::vector<int> layer_sizes, std::uint64_t seed, bool normalize_output)
    : sizes_(std::move(layer_sizes)), normalize_(normalize_output) {
  require(sizes_.size() >= 2, "encoder: need at least input and output sizes");
  for (int s : sizes_) require(s >= 1, "encoder: layer sizes must be positive");

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xe4c0u};
  std::mt19937_64 rng(seq);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / in));
    Layer layer{Matrix(out, in), Vector::Zero(out)};
    for (Eigen::Index c = 0; c < in; ++c) {
      for (Eigen::Index r = 0; r < out; ++r) layer.weight(r, c) = init(rng);
    }
    layers_.push_back(std::move(layer));
  }
}

Matrix Encoder::forward(const Matrix& x) const {
  ForwardCache cache;
  return forward(x, cache);
}

Matrix Encoder::forward(const Matrix& x, ForwardCache& cache) const {
  require(x.rows() == input_dim(), "encoder: input has " + std::to_string(x.rows()) +
                                       " features, expected " + std::to_string(input_dim()));
  cache.activations.clear();
  cache.pre_relu.clear();
  Matrix h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    cache.activations.push_back(h);
    Matrix pre = (layers_[l].weight * h).colwise() + layers_[l].bias;
    if (l + 1 < layers_.size()) {
      cache.pre_relu.push_back(pre);
      h = pre.cwiseMax(0.0);
    } else {
      h = std::move(pre);
    }
  }
  cache.activations.push_back(h);
  if (normalize_) {
    cache.output_norms = h.colwise().norm().transpose();
    for (Eigen::Index i = 0; i < h.cols(); ++i) {
      const double n = cache.output_norms[i];
      if (n > 0.0) h.col(i) /= n;
    }
  }
  cache.output = h;
  return h;
}

Encoder::Gradients Encoder::backward(const ForwardCache& cache, const Matrix& grad_output) const {
  require(grad_output.rows() == cache.output.rows() && grad_output.cols() == cache.output.cols(),
          "encoder: gradient shape does not match output");
  Matrix g = grad_output;
  if (normalize_) {
    // z = h / |h|  =>  dL/dh = (g - z (z . g)) / |h|
    for (Eigen::Index i = 0; i < g.cols(); ++i) {
      const double n = cache.output_norms[i];
      if (n <= 0.0) {
        g.col(i).setZero();
        continue;
      }
      const auto z = cache.output.col(i);
      g.col(i) = (g.col(i) - z * z.dot(g.col(i))) / n;
    }
  }
  Gradients grads(layers_.size());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Matrix& input = cache.activations[l];
    grads[l].weight = g * input.transpose();
    grads[l].bias = g.rowwise().sum();
    if (l > 0) {
      g = layers_[l].weight.transpose() * g;
      g = (cache.pre_relu[l - 1].array() > 0.0).select(g, 0.0);
    }
  }
  return grads;
}

void Encoder::apply(const Gradients& grads, double lr) {
  require(grads.size() == layers_.size(), "encoder: gradient layer count mismatch");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weight -= lr * grads[l].weight;
    layers_[l].bias -= lr * grads[l].bias;
  }
}

Eigen::Index Encoder::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Vector Encoder::flatten(const Gradients& grads) {
  Eigen::Index n = 0;
  for (const auto& l : grads) n += l.weight.size() + l.bias.size();
  Vector flat(n);
  Eigen::Index off = 0;
  for (const auto& l : grads) {
    flat.segment(off, l.weight.size()) = l.weight.reshaped();
    off += l.weight.size();
    flat.segment(off, l.bias.size()) = l.bias;
    off += l.bias.size();
  }
  return flat;
}

Vector Encoder::parameters() const { return flatten(layers_); }

void Encoder::set_parameters(const Vector& flat) {
  require(flat.size() == parameter_count(), "encoder: parameter vector has wrong length");
  Eigen::Index off = 0;
  for (auto& l : layers_) {
    l.weight.reshaped() = flat.segment(off, l.weight.size());
    off += l.weight.size();
    l.bias = flat.segment(off, l.bias.size());
    off += l.bias.size();
  }
}

bool Encoder::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool operator==(const Encoder& a, const Encoder& b) {
  if (a.sizes_ != b.sizes_ || a.normalize_ != b.normalize_) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (a.layers_[l].weight != b.layers_[l].weight || a.layers_[l].bias != b.layers_[l].bias) {
      return false;
    }
  }
  return true;
}

}  // namespace isocl
