#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdhar/activity.hpp"
#include "mdhar/segment.hpp"
#include "mdhar/tfproc.hpp"

namespace mdhar {

/// Spectrogram file: "MDS1", u32 K, u32 T, u32 hop, f64 slow-time rate,
/// f64 look offset, K window taps (f64), then K*T f64 power row-major.
void write_spectrogram(const Spectrogram& spec, double slow_time_rate, double look_offset_deg,
                       const std::filesystem::path& path);

struct SpectrogramFile {
  Spectrogram spec;
  double slow_time_rate = 0.0;
  double look_offset_deg = 0.0;
};

SpectrogramFile read_spectrogram(const std::filesystem::path& path);

/// One row of an events CSV.
struct EventRow {
  std::string spectrogram_id;
  double look_offset_deg = 0.0;
  EventInterval interval;
  std::optional<ActivityClass> label;  // empty when no ground truth overlaps
};

/// Header: spectrogram_id,look_angle,raw_start,raw_end,start,end,label
void write_events_csv(const std::vector<EventRow>& rows, const std::filesystem::path& path);
std::vector<EventRow> read_events_csv(const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> files;  // sorted by path

  const ManifestEntry* find(const std::string& path) const;
};

inline constexpr const char* kManifestName = "manifest.json";

/// Hashes every regular file below `root` except the manifest itself.
Manifest build_manifest(const std::filesystem::path& root);
void write_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace mdhar
