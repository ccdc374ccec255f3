#pragma once

#include <cstddef>
#include <cstdint>

namespace mdhar {

inline constexpr double kSpeedOfLight = 299792458.0;

/// FMCW radar and receive-array configuration.
///
/// Defaults describe a 77 GHz, 4 GHz-bandwidth sensor with a 1 ms PRI,
/// 512 ksps ADC and a four-element half-wavelength uniform linear array
/// observing 12 s of slow time.
struct RadarParams {
  double carrier_freq = 7.7e10;   // Hz
  double bandwidth = 4e9;         // Hz
  double pri = 1e-3;              // s
  double adc_rate = 5.12e5;       // samples/s
  std::uint32_t samples_per_pulse = 512;  // P
  std::uint32_t num_pulses = 12000;       // Q
  std::uint32_t num_elements = 4;         // M
  double element_spacing = kSpeedOfLight / 7.7e10 / 2.0;  // m, lambda/2
  double noise_variance = 1.0;    // linear power per complex sample

  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  std::size_t num_samples() const {
    return static_cast<std::size_t>(samples_per_pulse) * num_pulses;
  }
  /// Range spanned by one fast-time DFT bin, c/(2B) scaled by adc_rate*pri/P.
  double range_bin_resolution() const {
    return kSpeedOfLight / (2.0 * bandwidth) * (adc_rate * pri / samples_per_pulse);
  }

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// Same parameters with element spacing reset to half the wavelength.
  RadarParams with_half_wavelength_spacing() const;
};

}  // namespace mdhar
