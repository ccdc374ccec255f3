#include "mdhar/tfproc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mdhar/fft.hpp"

namespace mdhar {

PulseMatrix::PulseMatrix(std::size_t pulse_len, std::vector<std::complex<double>> samples)
    : pulse_len_(pulse_len), data_(std::move(samples)) {
  if (pulse_len_ == 0 || data_.size() % pulse_len_ != 0) {
    throw std::invalid_argument("PulseMatrix: length " + std::to_string(data_.size()) +
                                " is not a multiple of P = " + std::to_string(pulse_len_));
  }
}

PulseMatrix reshape_pulses(std::span<const std::complex<double>> x, std::size_t pulse_len) {
  return PulseMatrix(pulse_len, std::vector<std::complex<double>>(x.begin(), x.end()));
}

RangeMap range_map(const PulseMatrix& pm) {
  RangeMap rm{pm, 0.0};
  if (pm.fast_time() == 0) return rm;
  const FftPlan plan(pm.fast_time());
  for (std::size_t q = 0; q < rm.values.slow_time(); ++q) plan.forward(rm.values.column(q));
  return rm;
}

RangeMap range_map(const PulseMatrix& pm, const RadarParams& params) {
  RangeMap rm = range_map(pm);
  rm.bin_resolution = params.range_bin_resolution();
  return rm;
}

SlowTimeSignal collapse_range(const RangeMap& rm, std::size_t r_lower, std::size_t r_upper) {
  const std::size_t P = rm.values.fast_time();
  if (r_lower > r_upper || r_upper >= P) {
    throw std::invalid_argument("collapse_range: need 0 <= r_l <= r_u < P, got [" +
                                std::to_string(r_lower) + ", " + std::to_string(r_upper) +
                                "] with P = " + std::to_string(P));
  }
  SlowTimeSignal v;
  v.r_lower = r_lower;
  v.r_upper = r_upper;
  v.values.resize(rm.values.slow_time());
  for (std::size_t q = 0; q < v.values.size(); ++q) {
    const auto col = rm.values.column(q);
    std::complex<double> acc{};
    for (std::size_t l = r_lower; l <= r_upper; ++l) acc += col[l];
    v.values[q] = acc;
  }
  return v;
}

std::pair<std::size_t, std::size_t> range_bins_for(const RadarParams& params, double min_m,
                                                   double max_m) {
  if (!(min_m >= 0.0) || !(max_m >= min_m)) {
    throw std::invalid_argument("range_bins_for: need 0 <= min <= max");
  }
  const double res = params.range_bin_resolution();
  const double top = static_cast<double>(params.samples_per_pulse - 1);
  const double lo = std::min(std::ceil(min_m / res), top);
  const double hi = std::clamp(std::floor(max_m / res), lo, top);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                static_cast<double>(length));
  }
  return w;
}

std::size_t frame_count(std::size_t len, std::size_t window_len, std::size_t hop) {
  if (hop == 0 || window_len == 0 || window_len > len) return 0;
  return (len - window_len) / hop + 1;
}

std::size_t hop_for_frames(std::size_t len, std::size_t window_len, std::size_t frames) {
  if (frames == 0 || window_len > len) return 0;
  if (frames == 1) return len - window_len + 1;
  // Largest hop first: frames are spread over as much of the signal as possible.
  for (std::size_t hop = (len - window_len) / (frames - 1); hop >= 1; --hop) {
    if (frame_count(len, window_len, hop) == frames) return hop;
    if (frame_count(len, window_len, hop) > frames) break;
  }
  return 0;
}

void fftshift_rows(Matrix<double>& m) {
  const std::size_t K = m.rows();
  if (K < 2) return;
  Matrix<double> out(K, m.cols());
  for (std::size_t r = 0; r < K; ++r) {
    const std::size_t src = (r + K - K / 2) % K;
    std::copy(m.row(src).begin(), m.row(src).end(), out.row(r).begin());
  }
  m = std::move(out);
}

Spectrogram spectrogram(const SlowTimeSignal& v, std::span<const double> window, std::size_t hop,
                        double slow_time_rate) {
  const std::size_t H = window.size();
  if (H == 0 || H > v.values.size()) {
    throw std::invalid_argument("spectrogram: window length " + std::to_string(H) +
                                " exceeds signal length " + std::to_string(v.values.size()));
  }
  if (hop == 0) throw std::invalid_argument("spectrogram: hop must be >= 1");

  const std::size_t T = frame_count(v.values.size(), H, hop);
  Spectrogram s;
  s.window.assign(window.begin(), window.end());
  s.hop = hop;
  s.power = Matrix<double>(H, T);
  s.frame_times.resize(T);
  s.freq_axis.resize(H);

  const FftPlan plan(H);
  std::vector<std::complex<double>> buf(H);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t off = t * hop;
    for (std::size_t m = 0; m < H; ++m) buf[m] = window[m] * v.values[off + m];
    plan.forward(buf);
    for (std::size_t k = 0; k < H; ++k) {
      const std::size_t row = (k + H / 2) % H;
      s.power(row, t) = std::norm(buf[k]);
    }
    if (slow_time_rate > 0.0) {
      s.frame_times[t] = (static_cast<double>(off) + 0.5 * static_cast<double>(H)) / slow_time_rate;
    }
  }
  if (slow_time_rate > 0.0) {
    for (std::size_t r = 0; r < H; ++r) {
      s.freq_axis[r] = (static_cast<double>(r) - static_cast<double>(H / 2)) * slow_time_rate /
                       static_cast<double>(H);
    }
  }
  return s;
}

Matrix<double> to_image(const Spectrogram& spec, double dynamic_range_db) {
  if (!(dynamic_range_db > 0.0)) {
    throw std::invalid_argument("to_image: dynamic range must be positive");
  }
  Matrix<double> img(spec.power.rows(), spec.power.cols(), 0.0);
  const auto& p = spec.power.data();
  const double peak = p.empty() ? 0.0 : *std::max_element(p.begin(), p.end());
  if (!(peak > 0.0)) return img;
  auto& out = img.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0)) continue;
    const double db = std::max(10.0 * std::log10(p[i] / peak), -dynamic_range_db);
    out[i] = std::min(1.0, (db + dynamic_range_db) / dynamic_range_db);
  }
  return img;
}

}  // namespace mdhar
