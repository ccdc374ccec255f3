#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mdhar/matrix.hpp"
#include "mdhar/tfproc.hpp"

namespace mdhar {

/// Percentile envelopes of a spectrogram, one value per frame, expressed as
/// row indices into the fftshifted frequency axis.
struct EnvelopeSet {
  std::vector<double> upper;
  std::vector<double> central;
  std::vector<double> lower;
  std::vector<double> intensity;
};

inline constexpr double kLowerPercentile = 0.03;
inline constexpr double kCentralPercentile = 0.50;
inline constexpr double kUpperPercentile = 0.97;

/// Smallest row k whose ascending cumulative power reaches fraction*I(n).
/// Frames with zero intensity map to the centre row.
EnvelopeSet envelopes(const Spectrogram& spec);

/// Per frame, the mean of the 50% crossings accumulated from the bottom
/// and from the top of the frequency axis.
std::vector<double> central_envelope_avg(const Spectrogram& spec);

/// Doppler-offset magnitude |c[n] - centre| fed to the trigger.
std::vector<double> trigger_signal(std::span<const double> central, double center_row);

struct TriggerConfig {
  std::size_t n1 = 8;    // STA window, frames
  std::size_t n2 = 16;   // LTA window, frames
  double sigma1 = 1.0;   // STA start threshold
  double sigma2 = 2.0;   // STA/LTA ratio threshold
  double sigma3 = 0.5;   // STA end threshold
  double guard = 1e-9;   // added to LTA before dividing
  // Lower bounds applied by calibrate_thresholds, in frequency bins.
  double sigma1_floor = 2.0;
  double sigma3_floor = 1.0;
  // Fixed margins in frames; unset means floor(event length / 20).
  std::optional<std::size_t> pem;
  std::optional<std::size_t> pet;

  void validate() const;
};

/// STA(n) averages sig over (n, n + N1], LTA(n) over (n - N2, n];
/// both are zero outside [first, last].
struct StaLta {
  std::vector<double> sta;
  std::vector<double> lta;
  std::vector<double> ratio;
  std::size_t first = 0;
  std::size_t last = 0;
};

StaLta sta_lta(std::span<const double> signal, std::size_t n1, std::size_t n2,
               double guard = 1e-9);

struct EventInterval {
  std::size_t start = 0;      // PEM-extended, inclusive
  std::size_t end = 0;        // PET-extended, exclusive
  std::size_t raw_start = 0;  // trigger frame
  std::size_t raw_end = 0;    // detrigger frame

  friend bool operator==(const EventInterval&, const EventInterval&) = default;
};

/// Merge extended intervals that overlap; input sorted by start.
std::vector<EventInterval> merge_events(std::vector<EventInterval> events);

std::vector<EventInterval> detect_events(std::span<const double> signal,
                                         const TriggerConfig& cfg);

/// Mean and sample standard deviation of a non-motion trigger signal turned
/// into start/end thresholds: sigma1 = max(mu + 3s, sigma1_floor) and
/// sigma3 = max(mu + 2s, sigma3_floor).
TriggerConfig calibrate_thresholds(std::span<const double> noise_signal, TriggerConfig base = {});

inline constexpr std::size_t kCanvasSize = 600;
inline constexpr std::size_t kNetworkSize = 128;
inline constexpr std::size_t kNetworkChannels = 3;

/// Crop centred on a zero canvas then bilinearly resized.
struct PaddedImage {
  Matrix<double> canvas;   // kCanvasSize x kCanvasSize
  Matrix<double> resized;  // kNetworkSize x kNetworkSize, every channel
  std::size_t channels = kNetworkChannels;
  EventInterval interval;
  std::size_t top = 0;   // crop placement on the canvas
  std::size_t left = 0;

  /// Channel-major planes, all identical.
  std::vector<double> to_tensor() const;
};

/// Centre `crop` on a zero canvas; throws if it does not fit.
Matrix<double> pad_to_canvas(const Matrix<double>& crop, std::size_t size = kCanvasSize);

/// Half-pixel-centre bilinear interpolation with edge clamping.
Matrix<double> resize_bilinear(const Matrix<double>& src, std::size_t rows, std::size_t cols);

PaddedImage crop_pad_resize(const Matrix<double>& image, const EventInterval& interval);

}  // namespace mdhar
