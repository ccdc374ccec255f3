#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mdhar/matrix.hpp"
#include "mdhar/radar_params.hpp"

namespace mdhar {

/// Fast time by slow time. Column q holds samples [qP, (q+1)P) of the
/// beamformed vector; storage is column-major so it aliases that vector.
class PulseMatrix {
 public:
  PulseMatrix() = default;
  PulseMatrix(std::size_t pulse_len, std::vector<std::complex<double>> samples);

  std::size_t fast_time() const { return pulse_len_; }
  std::size_t slow_time() const { return pulse_len_ ? data_.size() / pulse_len_ : 0; }

  std::complex<double>& operator()(std::size_t p, std::size_t q) { return data_[q * pulse_len_ + p]; }
  const std::complex<double>& operator()(std::size_t p, std::size_t q) const {
    return data_[q * pulse_len_ + p];
  }
  std::span<std::complex<double>> column(std::size_t q) { return {data_.data() + q * pulse_len_, pulse_len_}; }
  std::span<const std::complex<double>> column(std::size_t q) const {
    return {data_.data() + q * pulse_len_, pulse_len_};
  }
  const std::vector<std::complex<double>>& flatten() const { return data_; }

 private:
  std::size_t pulse_len_ = 0;
  std::vector<std::complex<double>> data_;
};

/// Per-pulse DFT; row l of column q is range bin l of pulse q.
struct RangeMap {
  PulseMatrix values;
  double bin_resolution = 0.0;  // m per bin, 0 when unknown
};

struct SlowTimeSignal {
  std::vector<std::complex<double>> values;
  std::size_t r_lower = 0;
  std::size_t r_upper = 0;
};

/// Power spectrogram, frequency rows by frame columns. Rows are fftshifted:
/// row K/2 is zero Doppler and row K/2 + k is DFT bin k.
struct Spectrogram {
  Matrix<double> power;
  std::vector<double> window;
  std::size_t hop = 1;
  std::vector<double> frame_times;   // s, centre of each frame
  std::vector<double> freq_axis;     // Hz per row (0 when the slow-time rate is unknown)

  std::size_t freq_bins() const { return power.rows(); }
  std::size_t frames() const { return power.cols(); }
  std::size_t center_row() const { return power.rows() / 2; }
};

/// Throws std::invalid_argument when x.size() is not a multiple of P.
PulseMatrix reshape_pulses(std::span<const std::complex<double>> x, std::size_t pulse_len);

RangeMap range_map(const PulseMatrix& pm);
RangeMap range_map(const PulseMatrix& pm, const RadarParams& params);

/// v[q] = sum_{l = r_l}^{r_u} r(l, q).
SlowTimeSignal collapse_range(const RangeMap& rm, std::size_t r_lower, std::size_t r_upper);

/// Bin span covering [min_m, max_m] of range, clamped to [0, P).
std::pair<std::size_t, std::size_t> range_bins_for(const RadarParams& params, double min_m,
                                                   double max_m);

/// Periodic Hann window.
std::vector<double> hann_window(std::size_t length);

/// Number of frames for a signal of `len` samples.
std::size_t frame_count(std::size_t len, std::size_t window_len, std::size_t hop);

/// Hop that yields exactly `frames` frames for `len` samples, or 0 if none does.
std::size_t hop_for_frames(std::size_t len, std::size_t window_len, std::size_t frames);

/// |DFT(window * v[t*hop, t*hop + H))|^2 per frame, fftshifted.
/// `slow_time_rate` (Hz) only fills the axes.
Spectrogram spectrogram(const SlowTimeSignal& v, std::span<const double> window, std::size_t hop,
                        double slow_time_rate = 0.0);

/// Swap the two halves of each column; an involution for even row counts.
void fftshift_rows(Matrix<double>& m);

/// 10 log10(power / max) clipped to [-dynamic_range_db, 0] and mapped to [0, 1].
Matrix<double> to_image(const Spectrogram& spec, double dynamic_range_db);

}  // namespace mdhar
