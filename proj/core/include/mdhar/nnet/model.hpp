#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdhar/activity.hpp"
#include "mdhar/nnet/layers.hpp"

namespace mdhar::nnet {

/// Three identical convolutional branches (conv 3x3 "same" + ReLU + 2x2
/// max-pool, repeated), concatenated into a ReLU dense layer and a softmax
/// output layer.
struct Architecture {
  std::size_t branches = 3;
  std::size_t input_size = 128;
  std::size_t channels = 3;
  std::size_t filters = 16;
  std::size_t conv_layers = 3;
  std::size_t hidden = 64;
  std::size_t classes = kNumClasses;

  std::size_t feature_size() const { return input_size >> conv_layers; }
  std::size_t branch_features() const { return filters * feature_size() * feature_size(); }
  std::size_t input_elements() const { return channels * input_size * input_size; }

  void validate() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

template <typename T>
struct Parameter {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T> value;
};

/// One gradient (or moment) buffer per model parameter, same order.
template <typename T>
using ParamBuffers = std::vector<std::vector<T>>;

/// Labelled triple of branch images (broadside, +30, -30), each
/// channels x size x size. `id` gives a canonical ordering for training.
template <typename T>
struct Sample {
  std::string id;
  std::vector<std::vector<T>> branches;
  std::size_t label = 0;

  std::vector<T> one_hot(std::size_t classes = kNumClasses) const {
    std::vector<T> v(classes, T(0));
    v.at(label) = T(1);
    return v;
  }
};

using LabeledExample = Sample<float>;

template <typename T>
class CnnModel {
 public:
  /// All parameters zero.
  explicit CnnModel(Architecture arch = {});

  /// He-style uniform weights U(-sqrt(6/fan_in), +sqrt(6/fan_in)), zero biases.
  static CnnModel random(Architecture arch, std::uint64_t seed);

  const Architecture& arch() const { return arch_; }
  std::vector<Parameter<T>>& params() { return params_; }
  const std::vector<Parameter<T>>& params() const { return params_; }
  std::size_t parameter_count() const;

  // Parameter indices: per branch per layer a weight then a bias, then the
  // hidden and output layers.
  std::size_t conv_weight_index(std::size_t branch, std::size_t layer) const {
    return 2 * (branch * arch_.conv_layers + layer);
  }
  std::size_t hidden_weight_index() const { return 2 * arch_.branches * arch_.conv_layers; }
  std::size_t output_weight_index() const { return hidden_weight_index() + 2; }

  ParamBuffers<T> zero_buffers() const;

  template <typename U>
  CnnModel<U> cast() const {
    CnnModel<U> out(arch_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      out.params()[i].value.assign(params_[i].value.begin(), params_[i].value.end());
    }
    return out;
  }

 private:
  Architecture arch_;
  std::vector<Parameter<T>> params_;
};

/// Softmax class probabilities. Throws std::invalid_argument on shape mismatch.
template <typename T>
std::vector<T> forward(const CnnModel<T>& model, std::span<const std::vector<T>> branches);

template <typename T>
std::vector<T> forward(const CnnModel<T>& model, const Sample<T>& example) {
  return forward(model, std::span<const std::vector<T>>(example.branches));
}

/// Mean categorical cross-entropy over the batch; `grads` receives the mean
/// gradient for every parameter (resized as needed).
template <typename T>
T loss_and_grad(const CnnModel<T>& model, std::span<const Sample<T>> batch,
                ParamBuffers<T>& grads);

/// Gradient of the mean loss with respect to each branch input, used by
/// the input-level finite-difference check.
template <typename T>
std::vector<std::vector<T>> input_gradient(const CnnModel<T>& model, const Sample<T>& example);

std::size_t argmax(std::span<const float> v);
std::size_t argmax(std::span<const double> v);

}  // namespace mdhar::nnet
