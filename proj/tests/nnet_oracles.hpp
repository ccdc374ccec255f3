#pragma once

// Naive reference network and finite-difference gradient checks, shared by
// the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mdhar/nnet/layers.hpp"
#include "mdhar/nnet/model.hpp"

namespace mdhar::test {

using nnet::Architecture;
using nnet::CnnModel;
using nnet::PlaneShape;
using nnet::Sample;

/// Direct nested-loop "same" convolution.
inline std::vector<double> naive_conv(const std::vector<double>& in, PlaneShape s,
                                      const std::vector<double>& w,
                                      const std::vector<double>& b, std::size_t filters) {
  const long H = static_cast<long>(s.height), W = static_cast<long>(s.width);
  std::vector<double> out(filters * s.plane());
  for (std::size_t f = 0; f < filters; ++f) {
    for (long y = 0; y < H; ++y) {
      for (long x = 0; x < W; ++x) {
        double acc = b[f];
        for (std::size_t c = 0; c < s.channels; ++c) {
          for (long dy = -1; dy <= 1; ++dy) {
            for (long dx = -1; dx <= 1; ++dx) {
              const long yy = y + dy, xx = x + dx;
              if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
              acc += w[((f * s.channels + c) * 3 + static_cast<std::size_t>(dy + 1)) * 3 +
                       static_cast<std::size_t>(dx + 1)] *
                     in[(c * s.height + static_cast<std::size_t>(yy)) * s.width +
                        static_cast<std::size_t>(xx)];
            }
          }
        }
        out[(f * s.height + static_cast<std::size_t>(y)) * s.width + static_cast<std::size_t>(x)] = acc;
      }
    }
  }
  return out;
}

inline std::vector<double> naive_pool(const std::vector<double>& in, PlaneShape s) {
  const std::size_t OH = s.height / 2, OW = s.width / 2;
  std::vector<double> out(s.channels * OH * OW);
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t y = 0; y < OH; ++y) {
      for (std::size_t x = 0; x < OW; ++x) {
        double m = -INFINITY;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            m = std::max(m, in[(c * s.height + 2 * y + dy) * s.width + 2 * x + dx]);
          }
        }
        out[(c * OH + y) * OW + x] = m;
      }
    }
  }
  return out;
}

inline std::vector<double> naive_dense(const std::vector<double>& in, const std::vector<double>& w,
                                       const std::vector<double>& b) {
  std::vector<double> out(b.size());
  for (std::size_t o = 0; o < out.size(); ++o) {
    double acc = b[o];
    for (std::size_t i = 0; i < in.size(); ++i) acc += w[o * in.size() + i] * in[i];
    out[o] = acc;
  }
  return out;
}

/// Softmax probabilities of the whole network, recomputed from scratch.
inline std::vector<double> naive_forward(const CnnModel<double>& model,
                                         const std::vector<std::vector<double>>& inputs) {
  const Architecture& a = model.arch();
  const auto& p = model.params();
  std::vector<double> concat;
  for (std::size_t b = 0; b < a.branches; ++b) {
    std::vector<double> x = inputs[b];
    PlaneShape s{a.channels, a.input_size, a.input_size};
    for (std::size_t l = 0; l < a.conv_layers; ++l) {
      const std::size_t wi = 2 * (b * a.conv_layers + l);
      auto y = naive_conv(x, s, p[wi].value, p[wi + 1].value, a.filters);
      for (auto& v : y) v = std::max(v, 0.0);
      x = naive_pool(y, {a.filters, s.height, s.width});
      s = {a.filters, s.height / 2, s.width / 2};
    }
    concat.insert(concat.end(), x.begin(), x.end());
  }
  const std::size_t hi = 2 * a.branches * a.conv_layers;
  auto h = naive_dense(concat, p[hi].value, p[hi + 1].value);
  for (auto& v : h) v = std::max(v, 0.0);
  const auto logits = naive_dense(h, p[hi + 2].value, p[hi + 3].value);
  double m = -INFINITY;
  for (double v : logits) m = std::max(m, v);
  std::vector<double> probs(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += probs[i] = std::exp(logits[i] - m);
  for (auto& v : probs) v /= sum;
  return probs;
}

inline Architecture small_architecture(std::size_t conv_layers = 2) {
  Architecture a;
  a.input_size = 8;
  a.filters = 2;
  a.conv_layers = conv_layers;
  a.hidden = 5;
  return a;
}

inline Sample<double> random_sample(const Architecture& a, std::size_t label, std::mt19937_64& rng,
                                    const std::string& id = "s") {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sample<double> s;
  s.id = id;
  s.label = label;
  for (std::size_t b = 0; b < a.branches; ++b) {
    std::vector<double> x(a.input_elements());
    for (auto& v : x) v = u(rng);
    s.branches.push_back(std::move(x));
  }
  return s;
}

/// Random model with small positive biases so ReLUs are mostly active.
inline CnnModel<double> random_double_model(const Architecture& a, std::uint64_t seed) {
  auto m = CnnModel<double>::random(a, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (auto& p : m.params()) {
    if (p.shape.size() == 1) {
      for (auto& v : p.value) v = u(rng);
    }
  }
  return m;
}

/// |a - n| / max(|a|, |n|, floor): floor absorbs cancellation noise on
/// gradients that are themselves at the round-off level.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central difference of `f` with respect to each entry of `x`; returns the
/// worst relative error against `analytic`.
inline double max_fd_error(std::vector<double>& x, const std::vector<double>& analytic,
                           const std::function<double()>& f, double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f();
    x[i] = keep - h;
    const double down = f();
    x[i] = keep;
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

struct LayerCheck {
  std::string layer;
  double max_rel_error = 0.0;
};

/// Finite-difference checks of every layer kernel and of the full network
/// (all parameters plus inputs) in double precision.
inline std::vector<LayerCheck> gradient_checks(std::uint64_t seed) {
  using namespace nnet;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto fill = [&](std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
  };
  std::vector<LayerCheck> out;

  {  // conv3x3: loss = <r, conv(x)>
    const PlaneShape s{2, 8, 8};
    const std::size_t F = 3;
    auto x = fill(s.size()), w = fill(F * s.channels * 9), b = fill(F), r = fill(F * s.plane());
    std::vector<double> y(F * s.plane()), dw(w.size(), 0.0), db(F, 0.0), dx(x.size());
    conv3x3_backward(x.data(), s, w.data(), F, r.data(), dw.data(), db.data(), dx.data());
    auto loss = [&] {
      conv3x3_forward(x.data(), s, w.data(), b.data(), F, y.data());
      double acc = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) acc += r[i] * y[i];
      return acc;
    };
    const double e = std::max({max_fd_error(x, dx, loss), max_fd_error(w, dw, loss),
                               max_fd_error(b, db, loss)});
    out.push_back({"conv3x3", e});
  }
  {  // relu
    auto x = fill(64), r = fill(64);
    for (auto& v : x) {
      if (std::abs(v) < 1e-3) v = 0.5;
    }
    std::vector<double> y = x;
    relu_forward(std::span<double>(y));
    std::vector<double> g = r;
    relu_backward<double>(y, g);
    auto loss = [&] {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) acc += r[i] * std::max(x[i], 0.0);
      return acc;
    };
    out.push_back({"relu", max_fd_error(x, g, loss)});
  }
  {  // max-pool
    const PlaneShape s{2, 8, 8};
    auto x = fill(s.size()), r = fill(s.size() / 4);
    std::vector<double> y(s.size() / 4), dx(s.size());
    std::vector<std::uint32_t> am(y.size());
    maxpool2_forward(x.data(), s, y.data(), am.data());
    maxpool2_backward(s, r.data(), am.data(), dx.data());
    auto loss = [&] {
      maxpool2_forward(x.data(), s, y.data(), am.data());
      double acc = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) acc += r[i] * y[i];
      return acc;
    };
    out.push_back({"maxpool2", max_fd_error(x, dx, loss)});
  }
  {  // dense
    const std::size_t n = 12, m = 7;
    auto x = fill(n), w = fill(n * m), b = fill(m), r = fill(m);
    std::vector<double> y(m), dw(w.size(), 0.0), db(m, 0.0), dx(n);
    dense_backward<double>(x, w.data(), r, dw.data(), db.data(), dx);
    auto loss = [&] {
      dense_forward<double>(x, w.data(), b.data(), y);
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += r[i] * y[i];
      return acc;
    };
    const double e = std::max({max_fd_error(x, dx, loss), max_fd_error(w, dw, loss),
                               max_fd_error(b, db, loss)});
    out.push_back({"dense", e});
  }
  {  // softmax cross-entropy
    auto z = fill(9);
    std::vector<double> d(9), scratch(9);
    softmax_xent<double>(z, 4, d);
    auto loss = [&] { return softmax_xent<double>(z, 4, scratch); };
    out.push_back({"softmax_xent", max_fd_error(z, d, loss)});
  }
  {  // whole network: every parameter and every input pixel
    const Architecture a = small_architecture(2);
    auto model = random_double_model(a, seed + 7);
    std::vector<Sample<double>> batch;
    for (std::size_t i = 0; i < 3; ++i) batch.push_back(random_sample(a, (i * 4) % 9, rng));
    ParamBuffers<double> grads;
    loss_and_grad<double>(model, batch, grads);
    ParamBuffers<double> scratch;
    auto loss = [&] { return loss_and_grad<double>(model, batch, scratch); };
    double e = 0.0;
    for (std::size_t i = 0; i < model.params().size(); ++i) {
      e = std::max(e, max_fd_error(model.params()[i].value, grads[i], loss));
    }
    out.push_back({"network.parameters", e});

    Sample<double> one = batch[0];
    const auto gin = input_gradient(model, one);
    double ei = 0.0;
    for (std::size_t b = 0; b < a.branches; ++b) {
      auto single = [&] {
        ParamBuffers<double> g;
        return loss_and_grad<double>(model, std::span<const Sample<double>>(&one, 1), g);
      };
      ei = std::max(ei, max_fd_error(one.branches[b], gin[b], single));
    }
    out.push_back({"network.inputs", ei});
  }
  return out;
}

}  // namespace mdhar::test
