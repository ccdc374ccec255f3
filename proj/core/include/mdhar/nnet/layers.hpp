#pragma once

// Raw layer kernels shared by the model and by the gradient checks.
// Tensors are dense channel-major planes: index (c * H + y) * W + x.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace mdhar::nnet {

struct PlaneShape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t plane() const { return height * width; }
  std::size_t size() const { return channels * height * width; }
};

/// 3x3 convolution, stride 1, zero "same" padding.
/// w is [F][C][3][3]; out is F planes of the input size.
template <typename T>
void conv3x3_forward(const T* in, PlaneShape s, const T* w, const T* bias, std::size_t filters,
                     T* out) {
  const std::size_t H = s.height, W = s.width, C = s.channels;
  for (std::size_t f = 0; f < filters; ++f) {
    T* of = out + f * H * W;
    std::fill(of, of + H * W, bias[f]);
    for (std::size_t c = 0; c < C; ++c) {
      const T* ic = in + c * H * W;
      const T* wk = w + (f * C + c) * 9;
      for (std::size_t y = 0; y < H; ++y) {
        T* orow = of + y * W;
        for (std::size_t ky = 0; ky < 3; ++ky) {
          if ((y == 0 && ky == 0) || (y + 1 == H && ky == 2)) continue;
          const T* irow = ic + (y + ky - 1) * W;
          const T w0 = wk[ky * 3 + 0], w1 = wk[ky * 3 + 1], w2 = wk[ky * 3 + 2];
          if (W == 1) {
            orow[0] += w1 * irow[0];
            continue;
          }
          orow[0] += w1 * irow[0] + w2 * irow[1];
          for (std::size_t x = 1; x + 1 < W; ++x) {
            orow[x] += w0 * irow[x - 1] + w1 * irow[x] + w2 * irow[x + 1];
          }
          orow[W - 1] += w0 * irow[W - 2] + w1 * irow[W - 1];
        }
      }
    }
  }
}

/// Accumulates dw and db; writes din (overwrites) unless it is null.
template <typename T>
void conv3x3_backward(const T* in, PlaneShape s, const T* w, std::size_t filters, const T* dout,
                      T* dw, T* db, T* din) {
  const std::size_t H = s.height, W = s.width, C = s.channels;
  if (din) std::fill(din, din + s.size(), T(0));
  for (std::size_t f = 0; f < filters; ++f) {
    const T* gf = dout + f * H * W;
    T bsum = 0;
#pragma omp simd reduction(+ : bsum)
    for (std::size_t i = 0; i < H * W; ++i) bsum += gf[i];
    db[f] += bsum;
    for (std::size_t c = 0; c < C; ++c) {
      const T* ic = in + c * H * W;
      const T* wk = w + (f * C + c) * 9;
      T* dwk = dw + (f * C + c) * 9;
      T* dc = din ? din + c * H * W : nullptr;
      for (std::size_t ky = 0; ky < 3; ++ky) {
        const std::size_t y_lo = ky == 0 ? 1 : 0;
        const std::size_t y_hi = ky == 2 ? H - 1 : H;
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const std::size_t x_lo = kx == 0 ? 1 : 0;
          const std::size_t x_hi = kx == 2 ? W - 1 : W;
          const T wv = wk[ky * 3 + kx];
          T acc = 0;
          for (std::size_t y = y_lo; y < y_hi; ++y) {
            const T* grow = gf + y * W;
            const T* irow = ic + (y + ky - 1) * W;
#pragma omp simd reduction(+ : acc)
            for (std::size_t x = x_lo; x < x_hi; ++x) acc += grow[x] * irow[x + kx - 1];
            if (dc) {
              T* drow = dc + (y + ky - 1) * W;
#pragma omp simd
              for (std::size_t x = x_lo; x < x_hi; ++x) drow[x + kx - 1] += wv * grow[x];
            }
          }
          dwk[ky * 3 + kx] += acc;
        }
      }
    }
  }
}

template <typename T>
void relu_forward(std::span<T> x) {
  for (auto& v : x) v = v > T(0) ? v : T(0);
}

/// Zeroes gradient where the forward output was not positive.
template <typename T>
void relu_backward(std::span<const T> out, std::span<T> grad) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > T(0))) grad[i] = T(0);
  }
}

/// 2x2 max-pool, stride 2, floor on odd sizes. `argmax` receives the flat
/// input index chosen for each output; ties keep the first in scan order.
template <typename T>
void maxpool2_forward(const T* in, PlaneShape s, T* out, std::uint32_t* argmax) {
  const std::size_t OH = s.height / 2, OW = s.width / 2;
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        std::size_t best = (c * s.height + 2 * oy) * s.width + 2 * ox;
        T v = in[best];
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = (c * s.height + 2 * oy + dy) * s.width + 2 * ox + dx;
            if (in[idx] > v) {
              v = in[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (c * OH + oy) * OW + ox;
        out[o] = v;
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

/// Routes each output gradient to its argmax input; din is overwritten.
template <typename T>
void maxpool2_backward(PlaneShape s, const T* dout, const std::uint32_t* argmax, T* din) {
  std::fill(din, din + s.size(), T(0));
  const std::size_t n = s.channels * (s.height / 2) * (s.width / 2);
  for (std::size_t o = 0; o < n; ++o) din[argmax[o]] += dout[o];
}

/// out = W in + b with W [out][in].
template <typename T>
void dense_forward(std::span<const T> in, const T* w, const T* bias, std::span<T> out) {
  const std::size_t n = in.size();
  for (std::size_t o = 0; o < out.size(); ++o) {
    const T* wr = w + o * n;
    T acc = 0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < n; ++i) acc += wr[i] * in[i];
    out[o] = acc + bias[o];
  }
}

/// Accumulates dw, db; overwrites din unless empty.
template <typename T>
void dense_backward(std::span<const T> in, const T* w, std::span<const T> dout, T* dw, T* db,
                    std::span<T> din) {
  const std::size_t n = in.size();
  if (!din.empty()) std::fill(din.begin(), din.end(), T(0));
  for (std::size_t o = 0; o < dout.size(); ++o) {
    const T g = dout[o];
    db[o] += g;
    T* dwr = dw + o * n;
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) dwr[i] += g * in[i];
    if (!din.empty()) {
      const T* wr = w + o * n;
#pragma omp simd
      for (std::size_t i = 0; i < n; ++i) din[i] += g * wr[i];
    }
  }
}

/// Numerically stable softmax (max subtraction).
template <typename T>
void softmax(std::span<const T> logits, std::span<T> probs) {
  T peak = -std::numeric_limits<T>::infinity();
  for (T v : logits) peak = std::max(peak, v);
  T sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - peak);
    sum += probs[i];
  }
  for (auto& p : probs) p /= sum;
}

/// Cross-entropy of a one-hot label against softmax(logits); writes
/// d loss / d logits = p - onehot.
template <typename T>
T softmax_xent(std::span<const T> logits, std::size_t label, std::span<T> dlogits) {
  softmax<T>(logits, dlogits);
  const T p = std::max(dlogits[label], std::numeric_limits<T>::min());
  dlogits[label] -= T(1);
  return -std::log(p);
}

}  // namespace mdhar::nnet
