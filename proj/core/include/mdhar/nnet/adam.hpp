#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mdhar/nnet/model.hpp"

namespace mdhar::nnet {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  ParamBuffers<T> first_moment;
  ParamBuffers<T> second_moment;
  std::uint64_t step = 0;

  static AdamState for_model(const CnnModel<T>& model) {
    return {model.zero_buffers(), model.zero_buffers(), 0};
  }
};

/// One bias-corrected Adam update of every parameter tensor in place.
template <typename T>
void adam_step(AdamState<T>& state, std::vector<Parameter<T>>& params,
               const ParamBuffers<T>& grads, const AdamConfig& cfg);

}  // namespace mdhar::nnet
