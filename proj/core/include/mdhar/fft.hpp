#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace mdhar {

/// In-place forward DFT of a fixed length, X[k] = sum_n x[n] e^{-j 2 pi k n / N}.
/// Backed by FFTW; plans are created under a global lock and a plan may be
/// executed concurrently on distinct buffers.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const { return n_; }
  void forward(std::span<std::complex<double>> data) const;

 private:
  struct Impl;
  std::size_t n_ = 0;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mdhar
