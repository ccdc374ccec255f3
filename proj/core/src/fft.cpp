#include "mdhar/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <vector>

namespace mdhar {
namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct FftPlan::Impl {
  fftw_plan plan = nullptr;
};

FftPlan::FftPlan(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n == 0) throw std::invalid_argument("FftPlan: length must be positive");
  std::vector<std::complex<double>> scratch(n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  impl_->plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (impl_->plan == nullptr) throw std::runtime_error("FftPlan: FFTW planning failed");
}

FftPlan::~FftPlan() {
  if (impl_ && impl_->plan) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(impl_->plan);
  }
}

FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&& other) noexcept {
  if (this != &other) {
    if (impl_ && impl_->plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(impl_->plan);
    }
    n_ = other.n_;
    impl_ = std::move(other.impl_);
  }
  return *this;
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("FftPlan: buffer length mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(impl_->plan, buf, buf);
}

}  // namespace mdhar
