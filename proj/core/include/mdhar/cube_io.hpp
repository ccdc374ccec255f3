#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <complex>
#include <string>
#include <vector>

#include "mdhar/scene_synth.hpp"

namespace mdhar {

/// Cube file: "MDC1", u32 P, u32 Q, u32 M, f64 carrier, bandwidth, pri,
/// adc_rate, element spacing, noise variance, then (n, m) row-major
/// complex64 samples. Little-endian throughout.
void write_cube(const RawDataCube& cube, const std::filesystem::path& path);

/// Reads samples and parameters; ground truth is left empty.
RawDataCube read_cube(const std::filesystem::path& path);

/// JSON sidecar with persons, azimuths, class labels and event boundaries
/// (slow-time pulses).
void write_ground_truth(const RawDataCube& cube, const std::filesystem::path& path,
                        const std::string& cube_file, std::uint64_t seed);
std::vector<PersonTruth> read_ground_truth(const std::filesystem::path& path);

/// Scene description: {"persons": [...]} in the sidecar's person format.
std::vector<PersonMotion> read_scene(const std::filesystem::path& path);
void write_scene(const std::vector<PersonMotion>& persons, const std::filesystem::path& path);

/// Beamformed vector: "MBF1", u32 P, u32 Q, f64 look angle (broadside
/// offset, degrees), complex64 samples.
void write_beamformed(std::span<const std::complex<double>> x, std::uint32_t pulse_len,
                      double look_offset_deg, const std::filesystem::path& path);
std::vector<std::complex<double>> read_beamformed(const std::filesystem::path& path,
                                                  std::uint32_t* pulse_len = nullptr,
                                                  double* look_offset_deg = nullptr);

}  // namespace mdhar
