#include "mdhar/nnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace mdhar::nnet {

void Architecture::validate() const {
  if (branches == 0 || channels == 0 || filters == 0 || hidden == 0 || classes < 2) {
    throw std::invalid_argument("architecture: all layer sizes must be positive");
  }
  if (conv_layers == 0 || feature_size() == 0) {
    throw std::invalid_argument("architecture: input " + std::to_string(input_size) +
                                " too small for " + std::to_string(conv_layers) +
                                " pooling stages");
  }
}

template <typename T>
CnnModel<T>::CnnModel(Architecture arch) : arch_(arch) {
  arch_.validate();
  for (std::size_t b = 0; b < arch_.branches; ++b) {
    for (std::size_t l = 0; l < arch_.conv_layers; ++l) {
      const std::size_t cin = l == 0 ? arch_.channels : arch_.filters;
      const std::string tag = "branch" + std::to_string(b) + ".conv" + std::to_string(l);
      params_.push_back({tag + ".weight", {arch_.filters, cin, 3, 3},
                         std::vector<T>(arch_.filters * cin * 9, T(0))});
      params_.push_back({tag + ".bias", {arch_.filters}, std::vector<T>(arch_.filters, T(0))});
    }
  }
  const std::size_t concat = arch_.branches * arch_.branch_features();
  params_.push_back({"hidden.weight", {arch_.hidden, concat},
                     std::vector<T>(arch_.hidden * concat, T(0))});
  params_.push_back({"hidden.bias", {arch_.hidden}, std::vector<T>(arch_.hidden, T(0))});
  params_.push_back({"output.weight", {arch_.classes, arch_.hidden},
                     std::vector<T>(arch_.classes * arch_.hidden, T(0))});
  params_.push_back({"output.bias", {arch_.classes}, std::vector<T>(arch_.classes, T(0))});
}

template <typename T>
CnnModel<T> CnnModel<T>::random(Architecture arch, std::uint64_t seed) {
  CnnModel<T> model(arch);
  std::mt19937_64 rng(seed);
  for (auto& p : model.params_) {
    if (p.shape.size() < 2) continue;  // biases stay zero
    std::size_t fan_in = 1;
    for (std::size_t i = 1; i < p.shape.size(); ++i) fan_in *= p.shape[i];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : p.value) v = static_cast<T>(dist(rng));
  }
  return model;
}

template <typename T>
std::size_t CnnModel<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
ParamBuffers<T> CnnModel<T>::zero_buffers() const {
  ParamBuffers<T> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.emplace_back(p.value.size(), T(0));
  return out;
}

namespace {

template <typename T>
struct BranchCache {
  std::vector<std::vector<T>> act;     // post-ReLU conv output per layer
  std::vector<std::vector<T>> pooled;  // per layer
  std::vector<std::vector<std::uint32_t>> argmax;
  std::vector<std::vector<T>> dact;
  std::vector<std::vector<T>> dpooled;
};

template <typename T>
struct Workspace {
  std::vector<BranchCache<T>> branches;
  std::vector<T> concat, dconcat, hidden, dhidden, logits, probs;
  std::vector<std::vector<T>> dinput;

  explicit Workspace(const Architecture& a) : branches(a.branches) {
    for (auto& bc : branches) {
      std::size_t s = a.input_size;
      for (std::size_t l = 0; l < a.conv_layers; ++l) {
        bc.act.emplace_back(a.filters * s * s);
        bc.dact.emplace_back(a.filters * s * s);
        s /= 2;
        bc.pooled.emplace_back(a.filters * s * s);
        bc.dpooled.emplace_back(a.filters * s * s);
        bc.argmax.emplace_back(a.filters * s * s);
      }
    }
    concat.resize(a.branches * a.branch_features());
    dconcat.resize(concat.size());
    hidden.resize(a.hidden);
    dhidden.resize(a.hidden);
    logits.resize(a.classes);
    probs.resize(a.classes);
    dinput.assign(a.branches, std::vector<T>(a.input_elements()));
  }
};

template <typename T>
void check_inputs(const Architecture& a, std::span<const std::vector<T>> branches) {
  if (branches.size() != a.branches) {
    throw std::invalid_argument("forward: expected " + std::to_string(a.branches) +
                                " branch inputs, got " + std::to_string(branches.size()));
  }
  for (const auto& b : branches) {
    if (b.size() != a.input_elements()) {
      throw std::invalid_argument("forward: branch input has " + std::to_string(b.size()) +
                                  " values, expected " + std::to_string(a.input_elements()));
    }
  }
}

template <typename T>
void run_forward(const CnnModel<T>& model, std::span<const std::vector<T>> inputs,
                 Workspace<T>& ws) {
  const auto& a = model.arch();
  const auto& params = model.params();
  const std::size_t feat = a.branch_features();
  for (std::size_t b = 0; b < a.branches; ++b) {
    auto& bc = ws.branches[b];
    const T* x = inputs[b].data();
    PlaneShape shape{a.channels, a.input_size, a.input_size};
    for (std::size_t l = 0; l < a.conv_layers; ++l) {
      const std::size_t wi = model.conv_weight_index(b, l);
      conv3x3_forward(x, shape, params[wi].value.data(), params[wi + 1].value.data(), a.filters,
                      bc.act[l].data());
      relu_forward(std::span<T>(bc.act[l]));
      const PlaneShape out_shape{a.filters, shape.height, shape.width};
      maxpool2_forward(bc.act[l].data(), out_shape, bc.pooled[l].data(), bc.argmax[l].data());
      x = bc.pooled[l].data();
      shape = {a.filters, shape.height / 2, shape.width / 2};
    }
    std::copy(bc.pooled.back().begin(), bc.pooled.back().end(),
              ws.concat.begin() + static_cast<std::ptrdiff_t>(b * feat));
  }
  const auto& hw = params[model.hidden_weight_index()];
  const auto& hb = params[model.hidden_weight_index() + 1];
  dense_forward<T>(ws.concat, hw.value.data(), hb.value.data(), ws.hidden);
  relu_forward(std::span<T>(ws.hidden));
  const auto& ow = params[model.output_weight_index()];
  const auto& ob = params[model.output_weight_index() + 1];
  dense_forward<T>(ws.hidden, ow.value.data(), ob.value.data(), ws.logits);
}

// Backpropagates d loss / d logits (already in ws.logits' companion buffer).
template <typename T>
void run_backward(const CnnModel<T>& model, std::span<const std::vector<T>> inputs,
                  std::span<const T> dlogits, Workspace<T>& ws, ParamBuffers<T>& grads,
                  bool want_input_grad) {
  const auto& a = model.arch();
  const auto& params = model.params();
  const std::size_t oi = model.output_weight_index();
  const std::size_t hi = model.hidden_weight_index();
  dense_backward<T>(ws.hidden, params[oi].value.data(), dlogits, grads[oi].data(),
                    grads[oi + 1].data(), ws.dhidden);
  relu_backward<T>(ws.hidden, ws.dhidden);
  dense_backward<T>(ws.concat, params[hi].value.data(), ws.dhidden, grads[hi].data(),
                    grads[hi + 1].data(), ws.dconcat);

  const std::size_t feat = a.branch_features();
  for (std::size_t b = 0; b < a.branches; ++b) {
    auto& bc = ws.branches[b];
    std::copy(ws.dconcat.begin() + static_cast<std::ptrdiff_t>(b * feat),
              ws.dconcat.begin() + static_cast<std::ptrdiff_t>((b + 1) * feat),
              bc.dpooled.back().begin());
    for (std::size_t l = a.conv_layers; l-- > 0;) {
      const std::size_t size = a.input_size >> l;
      const PlaneShape act_shape{a.filters, size, size};
      maxpool2_backward(act_shape, bc.dpooled[l].data(), bc.argmax[l].data(), bc.dact[l].data());
      relu_backward<T>(bc.act[l], bc.dact[l]);
      const T* x = l == 0 ? inputs[b].data() : bc.pooled[l - 1].data();
      const PlaneShape in_shape{l == 0 ? a.channels : a.filters, size, size};
      T* din = nullptr;
      if (l > 0) {
        din = bc.dpooled[l - 1].data();
      } else if (want_input_grad) {
        din = ws.dinput[b].data();
      }
      const std::size_t wi = model.conv_weight_index(b, l);
      conv3x3_backward(x, in_shape, params[wi].value.data(), a.filters, bc.dact[l].data(),
                       grads[wi].data(), grads[wi + 1].data(), din);
    }
  }
}

}  // namespace

template <typename T>
std::vector<T> forward(const CnnModel<T>& model, std::span<const std::vector<T>> branches) {
  check_inputs(model.arch(), branches);
  Workspace<T> ws(model.arch());
  run_forward(model, branches, ws);
  std::vector<T> probs(model.arch().classes);
  softmax<T>(ws.logits, probs);
  return probs;
}

template <typename T>
T loss_and_grad(const CnnModel<T>& model, std::span<const Sample<T>> batch,
                ParamBuffers<T>& grads) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  grads = model.zero_buffers();
  Workspace<T> ws(model.arch());
  std::vector<T> dlogits(model.arch().classes);
  T total = 0;
  for (const auto& ex : batch) {
    check_inputs(model.arch(), std::span<const std::vector<T>>(ex.branches));
    if (ex.label >= model.arch().classes) {
      throw std::invalid_argument("loss_and_grad: label out of range");
    }
    run_forward(model, std::span<const std::vector<T>>(ex.branches), ws);
    total += softmax_xent<T>(ws.logits, ex.label, dlogits);
    run_backward<T>(model, ex.branches, dlogits, ws, grads, false);
  }
  const T scale = T(1) / static_cast<T>(batch.size());
  for (auto& g : grads) {
    for (auto& v : g) v *= scale;
  }
  return total * scale;
}

template <typename T>
std::vector<std::vector<T>> input_gradient(const CnnModel<T>& model, const Sample<T>& example) {
  check_inputs(model.arch(), std::span<const std::vector<T>>(example.branches));
  auto grads = model.zero_buffers();
  Workspace<T> ws(model.arch());
  std::vector<T> dlogits(model.arch().classes);
  run_forward(model, std::span<const std::vector<T>>(example.branches), ws);
  softmax_xent<T>(ws.logits, example.label, dlogits);
  run_backward<T>(model, example.branches, dlogits, ws, grads, true);
  return ws.dinput;
}

std::size_t argmax(std::span<const float> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}
std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

template class CnnModel<float>;
template class CnnModel<double>;
template std::vector<float> forward(const CnnModel<float>&, std::span<const std::vector<float>>);
template std::vector<double> forward(const CnnModel<double>&, std::span<const std::vector<double>>);
template float loss_and_grad(const CnnModel<float>&, std::span<const Sample<float>>,
                             ParamBuffers<float>&);
template double loss_and_grad(const CnnModel<double>&, std::span<const Sample<double>>,
                              ParamBuffers<double>&);
template std::vector<std::vector<float>> input_gradient(const CnnModel<float>&,
                                                        const Sample<float>&);
template std::vector<std::vector<double>> input_gradient(const CnnModel<double>&,
                                                         const Sample<double>&);

}  // namespace mdhar::nnet
