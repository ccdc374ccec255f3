#include "mdhar/segment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mdhar {
namespace {

// Smallest row whose ascending cumulative sum reaches `fraction` of the total.
std::size_t ascending_crossing(const Matrix<double>& power, std::size_t frame, double fraction,
                               double total) {
  const double threshold = fraction * total;
  double acc = 0.0;
  const std::size_t K = power.rows();
  for (std::size_t k = 0; k < K; ++k) {
    acc += power(k, frame);
    if (acc >= threshold) return k;
  }
  return K - 1;
}

// Largest row whose descending cumulative sum reaches `fraction` of the total.
std::size_t descending_crossing(const Matrix<double>& power, std::size_t frame, double fraction) {
  const std::size_t K = power.rows();
  double total = 0.0;
  for (std::size_t k = K; k-- > 0;) total += power(k, frame);
  const double threshold = fraction * total;
  double acc = 0.0;
  for (std::size_t k = K; k-- > 0;) {
    acc += power(k, frame);
    if (acc >= threshold) return k;
  }
  return 0;
}

}  // namespace

EnvelopeSet envelopes(const Spectrogram& spec) {
  const std::size_t T = spec.frames();
  const auto center = static_cast<double>(spec.center_row());
  EnvelopeSet env;
  env.upper.resize(T);
  env.central.resize(T);
  env.lower.resize(T);
  env.intensity.resize(T);
  for (std::size_t n = 0; n < T; ++n) {
    double total = 0.0;
    for (std::size_t k = 0; k < spec.freq_bins(); ++k) total += spec.power(k, n);
    env.intensity[n] = total;
    if (!(total > 0.0)) {
      env.upper[n] = env.central[n] = env.lower[n] = center;
      continue;
    }
    env.lower[n] = static_cast<double>(ascending_crossing(spec.power, n, kLowerPercentile, total));
    env.central[n] = static_cast<double>(ascending_crossing(spec.power, n, kCentralPercentile, total));
    env.upper[n] = static_cast<double>(ascending_crossing(spec.power, n, kUpperPercentile, total));
  }
  return env;
}

std::vector<double> central_envelope_avg(const Spectrogram& spec) {
  const std::size_t T = spec.frames();
  const auto center = static_cast<double>(spec.center_row());
  std::vector<double> out(T);
  for (std::size_t n = 0; n < T; ++n) {
    double total = 0.0;
    for (std::size_t k = 0; k < spec.freq_bins(); ++k) total += spec.power(k, n);
    if (!(total > 0.0)) {
      out[n] = center;
      continue;
    }
    const auto fwd = static_cast<double>(ascending_crossing(spec.power, n, kCentralPercentile, total));
    const auto bwd = static_cast<double>(descending_crossing(spec.power, n, kCentralPercentile));
    out[n] = 0.5 * (fwd + bwd);
  }
  return out;
}

std::vector<double> trigger_signal(std::span<const double> central, double center_row) {
  std::vector<double> sig(central.size());
  std::transform(central.begin(), central.end(), sig.begin(),
                 [center_row](double c) { return std::abs(c - center_row); });
  return sig;
}

void TriggerConfig::validate() const {
  if (n1 == 0 || n1 >= n2) throw std::invalid_argument("trigger: need 0 < N1 < N2");
  if (!(sigma1 > sigma3) || !(sigma3 > 0.0)) {
    throw std::invalid_argument("trigger: need sigma1 > sigma3 > 0");
  }
  if (!(sigma2 > 1.0)) throw std::invalid_argument("trigger: need sigma2 > 1");
  if (!(guard > 0.0)) throw std::invalid_argument("trigger: guard must be positive");
  if (!(sigma3_floor >= 0.0) || !(sigma1_floor >= sigma3_floor)) {
    throw std::invalid_argument("trigger: need sigma1_floor >= sigma3_floor >= 0");
  }
}

StaLta sta_lta(std::span<const double> signal, std::size_t n1, std::size_t n2, double guard) {
  const std::size_t T = signal.size();
  if (n1 == 0 || n2 == 0 || n1 + n2 + 1 > T) {
    throw std::invalid_argument("sta_lta: need N1 + N2 + 1 <= T (N1=" + std::to_string(n1) +
                                ", N2=" + std::to_string(n2) + ", T=" + std::to_string(T) + ")");
  }
  StaLta out;
  out.sta.assign(T, 0.0);
  out.lta.assign(T, 0.0);
  out.ratio.assign(T, 0.0);
  out.first = n2;
  out.last = T - n1 - 1;
  for (std::size_t n = out.first; n <= out.last; ++n) {
    double s = 0.0;
    for (std::size_t j = n + 1; j <= n + n1; ++j) s += signal[j];
    double l = 0.0;
    for (std::size_t j = n + 1 - n2; j <= n; ++j) l += signal[j];
    out.sta[n] = s / static_cast<double>(n1);
    out.lta[n] = l / static_cast<double>(n2);
    out.ratio[n] = out.sta[n] / (out.lta[n] + guard);
  }
  return out;
}

std::vector<EventInterval> merge_events(std::vector<EventInterval> events) {
  std::vector<EventInterval> merged;
  for (const auto& e : events) {
    if (!merged.empty() && e.start < merged.back().end) {
      auto& last = merged.back();
      last.end = std::max(last.end, e.end);
      last.raw_end = std::max(last.raw_end, e.raw_end);
      last.raw_start = std::min(last.raw_start, e.raw_start);
      last.start = std::min(last.start, e.start);
    } else {
      merged.push_back(e);
    }
  }
  return merged;
}

std::vector<EventInterval> detect_events(std::span<const double> signal,
                                         const TriggerConfig& cfg) {
  cfg.validate();
  const std::size_t T = signal.size();
  if (cfg.n1 + cfg.n2 + 1 > T) return {};
  const StaLta sl = sta_lta(signal, cfg.n1, cfg.n2, cfg.guard);

  std::vector<EventInterval> raw;
  bool active = false;
  std::size_t onset = 0;
  for (std::size_t n = sl.first; n <= sl.last; ++n) {
    if (!active) {
      if (sl.sta[n] > cfg.sigma1 && sl.ratio[n] > cfg.sigma2) {
        active = true;
        onset = n;
      }
    } else if (sl.sta[n] < cfg.sigma3 && sl.ratio[n] < cfg.sigma2) {
      raw.push_back({0, 0, onset, n});
      active = false;
    }
  }
  if (active) raw.push_back({0, 0, onset, T});

  for (auto& e : raw) {
    const std::size_t len = e.raw_end - e.raw_start;
    const std::size_t pem = cfg.pem.value_or(len / 20);
    const std::size_t pet = cfg.pet.value_or(len / 20);
    e.start = e.raw_start >= pem ? e.raw_start - pem : 0;
    e.end = std::min(e.raw_end + pet, T);
  }
  return merge_events(std::move(raw));
}

TriggerConfig calibrate_thresholds(std::span<const double> noise_signal, TriggerConfig base) {
  if (noise_signal.size() < 2) {
    throw std::invalid_argument("calibrate_thresholds: need at least two noise frames");
  }
  const double n = static_cast<double>(noise_signal.size());
  const double mean = std::accumulate(noise_signal.begin(), noise_signal.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : noise_signal) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  base.sigma1 = std::max(mean + 3.0 * sd, base.sigma1_floor);
  base.sigma3 = std::max(mean + 2.0 * sd, base.sigma3_floor);
  // A perfectly flat calibration signal with zero floors would collapse sigma1 onto sigma3.
  if (!(base.sigma3 > 0.0)) base.sigma3 = 1e-6;
  if (!(base.sigma1 > base.sigma3)) base.sigma1 = base.sigma3 * 1.5;
  return base;
}

std::vector<double> PaddedImage::to_tensor() const {
  std::vector<double> out;
  out.reserve(channels * resized.size());
  for (std::size_t c = 0; c < channels; ++c) {
    out.insert(out.end(), resized.data().begin(), resized.data().end());
  }
  return out;
}

Matrix<double> pad_to_canvas(const Matrix<double>& crop, std::size_t size) {
  if (crop.rows() > size || crop.cols() > size) {
    throw std::invalid_argument("crop of " + std::to_string(crop.rows()) + "x" +
                                std::to_string(crop.cols()) + " does not fit a " +
                                std::to_string(size) + "x" + std::to_string(size) + " canvas");
  }
  Matrix<double> canvas(size, size, 0.0);
  const std::size_t top = (size - crop.rows()) / 2;
  const std::size_t left = (size - crop.cols()) / 2;
  for (std::size_t r = 0; r < crop.rows(); ++r) {
    std::copy(crop.row(r).begin(), crop.row(r).end(), canvas.row(top + r).begin() + left);
  }
  return canvas;
}

Matrix<double> resize_bilinear(const Matrix<double>& src, std::size_t rows, std::size_t cols) {
  if (src.empty() || rows == 0 || cols == 0) {
    throw std::invalid_argument("resize_bilinear: empty source or target");
  }
  Matrix<double> out(rows, cols);
  const double sy = static_cast<double>(src.rows()) / static_cast<double>(rows);
  const double sx = static_cast<double>(src.cols()) / static_cast<double>(cols);
  const double ymax = static_cast<double>(src.rows() - 1);
  const double xmax = static_cast<double>(src.cols() - 1);
  for (std::size_t y = 0; y < rows; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, ymax);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src.rows() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < cols; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, xmax);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src.cols() - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = src(y0, x0) + wx * (src(y0, x1) - src(y0, x0));
      const double bottom = src(y1, x0) + wx * (src(y1, x1) - src(y1, x0));
      out(y, x) = top + wy * (bottom - top);
    }
  }
  return out;
}

PaddedImage crop_pad_resize(const Matrix<double>& image, const EventInterval& interval) {
  if (interval.start >= interval.end || interval.end > image.cols()) {
    throw std::invalid_argument("interval [" + std::to_string(interval.start) + ", " +
                                std::to_string(interval.end) + ") outside image of " +
                                std::to_string(image.cols()) + " frames");
  }
  const std::size_t width = interval.end - interval.start;
  if (width > kCanvasSize || image.rows() > kCanvasSize) {
    throw std::invalid_argument("event [" + std::to_string(interval.start) + ", " +
                                std::to_string(interval.end) + ") crop of " +
                                std::to_string(image.rows()) + "x" + std::to_string(width) +
                                " exceeds the " + std::to_string(kCanvasSize) + " canvas");
  }
  Matrix<double> crop(image.rows(), width);
  for (std::size_t r = 0; r < image.rows(); ++r) {
    const auto src = image.row(r);
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(interval.start),
              src.begin() + static_cast<std::ptrdiff_t>(interval.end), crop.row(r).begin());
  }
  PaddedImage out;
  out.interval = interval;
  out.top = (kCanvasSize - crop.rows()) / 2;
  out.left = (kCanvasSize - crop.cols()) / 2;
  out.canvas = pad_to_canvas(crop);
  out.resized = resize_bilinear(out.canvas, kNetworkSize, kNetworkSize);
  return out;
}

}  // namespace mdhar
