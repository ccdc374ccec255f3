#include "mdhar/artifacts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "json_codec.hpp"
#include "mdhar/error.hpp"
#include "mdhar/hash.hpp"

namespace mdhar {

namespace fs = std::filesystem;

void write_spectrogram(const Spectrogram& spec, double slow_time_rate, double look_offset_deg,
                       const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write spectrogram " + path.string());
  io::put_magic(os, "MDS1");
  io::put_u32(os, static_cast<std::uint32_t>(spec.freq_bins()));
  io::put_u32(os, static_cast<std::uint32_t>(spec.frames()));
  io::put_u32(os, static_cast<std::uint32_t>(spec.hop));
  io::put_f64(os, slow_time_rate);
  io::put_f64(os, look_offset_deg);
  for (std::size_t k = 0; k < spec.freq_bins(); ++k) {
    io::put_f64(os, k < spec.window.size() ? spec.window[k] : 0.0);
  }
  for (double v : spec.power.data()) io::put_f64(os, v);
  if (!os) throw DataError("failed writing spectrogram " + path.string());
}

SpectrogramFile read_spectrogram(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open spectrogram " + path.string());
  const std::string what = "spectrogram " + path.string();
  io::expect_magic(is, "MDS1", what);
  const std::uint32_t K = io::get_u32(is, what);
  const std::uint32_t T = io::get_u32(is, what);
  const std::uint32_t hop = io::get_u32(is, what);
  SpectrogramFile f;
  f.slow_time_rate = io::get_f64(is, what);
  f.look_offset_deg = io::get_f64(is, what);
  if (K == 0 || K > (1u << 16) || T > (1u << 24) || hop == 0) throw DataError("implausible header in " + what);
  Spectrogram& s = f.spec;
  s.hop = hop;
  s.window.resize(K);
  for (auto& w : s.window) w = io::get_f64(is, what);
  s.power = Matrix<double>(K, T);
  for (auto& v : s.power.data()) v = io::get_f64(is, what);
  s.frame_times.assign(T, 0.0);
  s.freq_axis.assign(K, 0.0);
  if (f.slow_time_rate > 0.0) {
    for (std::size_t t = 0; t < T; ++t) {
      s.frame_times[t] = (static_cast<double>(t * hop) + 0.5 * static_cast<double>(K)) / f.slow_time_rate;
    }
    for (std::size_t r = 0; r < K; ++r) {
      s.freq_axis[r] = (static_cast<double>(r) - static_cast<double>(K / 2)) * f.slow_time_rate /
                       static_cast<double>(K);
    }
  }
  return f;
}

void write_events_csv(const std::vector<EventRow>& rows, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write events " + path.string());
  os << "spectrogram_id,look_angle,raw_start,raw_end,start,end,label\n";
  for (const auto& r : rows) {
    os << r.spectrogram_id << ',' << r.look_offset_deg << ',' << r.interval.raw_start << ','
       << r.interval.raw_end << ',' << r.interval.start << ',' << r.interval.end << ','
       << (r.label ? class_name(*r.label) : std::string_view{}) << '\n';
  }
  if (!os) throw DataError("failed writing events " + path.string());
}

std::vector<EventRow> read_events_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open events " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.rfind("spectrogram_id,", 0) != 0) {
    throw DataError("missing events header in " + path.string());
  }
  std::vector<EventRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    const auto bad = [&] { return DataError(path.string() + ":" + std::to_string(lineno) + ": malformed event row"); };
    if (cells.size() != 7) throw bad();
    EventRow r;
    try {
      r.spectrogram_id = cells[0];
      r.look_offset_deg = std::stod(cells[1]);
      r.interval.raw_start = std::stoul(cells[2]);
      r.interval.raw_end = std::stoul(cells[3]);
      r.interval.start = std::stoul(cells[4]);
      r.interval.end = std::stoul(cells[5]);
    } catch (const std::logic_error&) {
      throw bad();
    }
    if (!cells[6].empty()) {
      r.label = parse_class(cells[6]);
      if (!r.label) throw bad();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

const ManifestEntry* Manifest::find(const std::string& path) const {
  const auto it = std::lower_bound(files.begin(), files.end(), path,
                                   [](const ManifestEntry& e, const std::string& p) { return e.path < p; });
  return it != files.end() && it->path == path ? &*it : nullptr;
}

Manifest build_manifest(const fs::path& root) {
  Manifest m;
  if (!fs::is_directory(root)) throw DataError("not a directory: " + root.string());
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), root).generic_string();
    if (rel == kManifestName) continue;
    m.files.push_back({rel, sha256_file(entry.path()), entry.file_size()});
  }
  std::sort(m.files.begin(), m.files.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  return m;
}

void write_manifest(const Manifest& m, const fs::path& path) {
  Json files = Json::array();
  for (const auto& e : m.files) files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  write_json_file(Json{{"files", files}}, path);
}

Manifest read_manifest(const fs::path& path) {
  const Json j = read_json_file(path);
  Manifest m;
  try {
    for (const auto& e : j.at("files")) {
      m.files.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>(),
                         e.at("bytes").get<std::uintmax_t>()});
    }
  } catch (const Json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
  std::sort(m.files.begin(), m.files.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  return m;
}

}  // namespace mdhar
