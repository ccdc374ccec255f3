#include "mdhar/radar_params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mdhar {

void RadarParams::validate() const {
  if (!(carrier_freq > 0.0) || !(bandwidth > 0.0) || !(pri > 0.0) || !(adc_rate > 0.0)) {
    throw std::invalid_argument("radar rates and frequencies must be positive");
  }
  if (samples_per_pulse == 0 || num_pulses == 0 || num_elements == 0) {
    throw std::invalid_argument("P, Q and M must be at least 1");
  }
  if (!(element_spacing > 0.0)) {
    throw std::invalid_argument("element spacing must be positive");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw std::invalid_argument("noise variance must be finite and non-negative");
  }
  const double expected = adc_rate * pri;
  if (std::abs(expected - samples_per_pulse) > 1e-6 * expected) {
    throw std::invalid_argument("samples_per_pulse (" + std::to_string(samples_per_pulse) +
                                ") must equal adc_rate * pri (" + std::to_string(expected) + ")");
  }
}

RadarParams RadarParams::with_half_wavelength_spacing() const {
  RadarParams out = *this;
  out.element_spacing = wavelength() / 2.0;
  return out;
}

}  // namespace mdhar
