#include "mdhar/nnet/adam.hpp"

#include <cmath>

namespace mdhar::nnet {

template <typename T>
void adam_step(AdamState<T>& state, std::vector<Parameter<T>>& params,
               const ParamBuffers<T>& grads, const AdamConfig& cfg) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(cfg.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(cfg.beta2, t));
  const T lr = static_cast<T>(cfg.learning_rate);
  const T eps = static_cast<T>(cfg.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].value;
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto& g = grads[i];
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
      throw std::invalid_argument("adam_step: shape mismatch for " + params[i].name);
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (T(1) - b1) * g[k];
      v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
      const T mhat = m[k] / c1;
      const T vhat = v[k] / c2;
      p[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

template void adam_step(AdamState<float>&, std::vector<Parameter<float>>&,
                        const ParamBuffers<float>&, const AdamConfig&);
template void adam_step(AdamState<double>&, std::vector<Parameter<double>>&,
                        const ParamBuffers<double>&, const AdamConfig&);

}  // namespace mdhar::nnet
