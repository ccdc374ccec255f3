#include "mdhar/cube_io.hpp"

#include <fstream>
#include <vector>

#include "binary_io.hpp"
#include "json_codec.hpp"
#include "mdhar/error.hpp"

namespace mdhar {
namespace {

constexpr std::size_t kChunk = 1 << 16;

void write_complex64(std::ostream& os, std::span<const std::complex<double>> samples) {
  std::vector<float> buf;
  buf.reserve(2 * kChunk);
  for (std::size_t off = 0; off < samples.size(); off += kChunk) {
    const std::size_t end = std::min(off + kChunk, samples.size());
    buf.clear();
    for (std::size_t i = off; i < end; ++i) {
      buf.push_back(static_cast<float>(samples[i].real()));
      buf.push_back(static_cast<float>(samples[i].imag()));
    }
    if constexpr (std::endian::native == std::endian::little) {
      os.write(reinterpret_cast<const char*>(buf.data()),
               static_cast<std::streamsize>(buf.size() * sizeof(float)));
    } else {
      for (float f : buf) io::put_f32(os, f);
    }
  }
}

void read_complex64(std::istream& is, std::span<std::complex<double>> out, const std::string& what) {
  std::vector<float> buf(2 * kChunk);
  for (std::size_t off = 0; off < out.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, out.size() - off);
    if constexpr (std::endian::native == std::endian::little) {
      is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * n * sizeof(float)));
      io::need(is, what);
    } else {
      for (std::size_t i = 0; i < 2 * n; ++i) buf[i] = io::get_f32(is, what);
    }
    for (std::size_t i = 0; i < n; ++i) out[off + i] = {buf[2 * i], buf[2 * i + 1]};
  }
}

}  // namespace

void write_cube(const RawDataCube& cube, const std::filesystem::path& path) {
  const auto& p = cube.params;
  if (cube.samples.rows() != p.num_samples() || cube.samples.cols() != p.num_elements) {
    throw std::invalid_argument("write_cube: sample matrix does not match parameters");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write cube " + path.string());
  io::put_magic(os, "MDC1");
  io::put_u32(os, p.samples_per_pulse);
  io::put_u32(os, p.num_pulses);
  io::put_u32(os, p.num_elements);
  for (double v : {p.carrier_freq, p.bandwidth, p.pri, p.adc_rate, p.element_spacing, p.noise_variance}) {
    io::put_f64(os, v);
  }
  write_complex64(os, cube.samples.data());
  if (!os) throw DataError("failed writing cube " + path.string());
}

RawDataCube read_cube(const std::filesystem::path& path) {
  const std::string what = "cube " + path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + what);
  io::expect_magic(is, "MDC1", what);
  RawDataCube cube;
  auto& p = cube.params;
  p.samples_per_pulse = io::get_u32(is, what);
  p.num_pulses = io::get_u32(is, what);
  p.num_elements = io::get_u32(is, what);
  p.carrier_freq = io::get_f64(is, what);
  p.bandwidth = io::get_f64(is, what);
  p.pri = io::get_f64(is, what);
  p.adc_rate = io::get_f64(is, what);
  p.element_spacing = io::get_f64(is, what);
  p.noise_variance = io::get_f64(is, what);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(what + ": " + e.what());
  }
  const std::uintmax_t expected = 4 + 3 * 4 + 6 * 8 + p.num_samples() * p.num_elements * 8ULL;
  if (std::filesystem::file_size(path) != expected) {
    throw DataError(what + ": size does not match its header");
  }
  cube.samples = Matrix<std::complex<double>>(p.num_samples(), p.num_elements);
  read_complex64(is, cube.samples.data(), what);
  return cube;
}

void write_ground_truth(const RawDataCube& cube, const std::filesystem::path& path,
                        const std::string& cube_file, std::uint64_t seed) {
  Json persons = Json::array();
  for (const auto& gt : cube.ground_truth) {
    Json pj = to_json(gt.person);
    Json events = Json::array();
    for (std::size_t i = 0; i < gt.events.size(); ++i) {
      events.push_back({{"activity", std::string(class_name(gt.person.schedule.at(i).activity))},
                        {"begin_pulse", gt.events[i].first},
                        {"end_pulse", gt.events[i].second}});
    }
    pj["events"] = events;
    persons.push_back(pj);
  }
  write_json_file(Json{{"cube", cube_file}, {"seed", seed}, {"radar", to_json(cube.params)},
                       {"persons", persons}},
                  path);
}

std::vector<PersonTruth> read_ground_truth(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  std::vector<PersonTruth> out;
  try {
    for (const auto& pj : j.at("persons")) {
      PersonTruth gt;
      gt.person = person_from_json(pj);
      for (const auto& e : pj.at("events")) {
        gt.events.emplace_back(e.at("begin_pulse").get<std::uint32_t>(),
                               e.at("end_pulse").get<std::uint32_t>());
      }
      out.push_back(std::move(gt));
    }
  } catch (const Json::exception& e) {
    throw DataError("malformed ground truth " + path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError("malformed ground truth " + path.string() + ": " + e.what());
  }
  return out;
}

std::vector<PersonMotion> read_scene(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  std::vector<PersonMotion> persons;
  try {
    for (const auto& pj : j.at("persons")) persons.push_back(person_from_json(pj));
  } catch (const Json::exception& e) {
    throw ConfigError("malformed scene " + path.string() + ": " + e.what());
  }
  return persons;
}

void write_scene(const std::vector<PersonMotion>& persons, const std::filesystem::path& path) {
  Json arr = Json::array();
  for (const auto& p : persons) arr.push_back(to_json(p));
  write_json_file(Json{{"persons", arr}}, path);
}

void write_beamformed(std::span<const std::complex<double>> x, std::uint32_t pulse_len,
                      double look_offset_deg, const std::filesystem::path& path) {
  if (pulse_len == 0 || x.size() % pulse_len != 0) {
    throw std::invalid_argument("write_beamformed: length is not a multiple of P");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  io::put_magic(os, "MBF1");
  io::put_u32(os, pulse_len);
  io::put_u32(os, static_cast<std::uint32_t>(x.size() / pulse_len));
  io::put_f64(os, look_offset_deg);
  write_complex64(os, x);
  if (!os) throw DataError("failed writing " + path.string());
}

std::vector<std::complex<double>> read_beamformed(const std::filesystem::path& path,
                                                  std::uint32_t* pulse_len,
                                                  double* look_offset_deg) {
  const std::string what = "beamformed vector " + path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + what);
  io::expect_magic(is, "MBF1", what);
  const std::uint32_t P = io::get_u32(is, what);
  const std::uint32_t Q = io::get_u32(is, what);
  const double look = io::get_f64(is, what);
  if (std::filesystem::file_size(path) != 4 + 8 + 8 + std::uintmax_t{P} * Q * 8) {
    throw DataError(what + ": size does not match its header");
  }
  std::vector<std::complex<double>> x(std::size_t{P} * Q);
  read_complex64(is, x, what);
  if (pulse_len) *pulse_len = P;
  if (look_offset_deg) *look_offset_deg = look;
  return x;
}

}  // namespace mdhar
