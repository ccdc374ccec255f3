#include "mdhar/beamform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mdhar {
namespace {

void check_angle(double angle_deg) {
  if (!(angle_deg > 0.0 && angle_deg < 180.0)) {
    throw std::invalid_argument("angle must lie in (0, 180) degrees, got " +
                                std::to_string(angle_deg));
  }
}

}  // namespace

double cos_deg(double angle_deg) {
  if (angle_deg == 90.0) return 0.0;
  if (angle_deg == 60.0) return 0.5;
  if (angle_deg == 120.0) return -0.5;
  return std::cos(angle_deg * std::numbers::pi / 180.0);
}

SteeringVector steering_vector(double angle_deg, const RadarParams& params) {
  check_angle(angle_deg);
  const double step =
      2.0 * std::numbers::pi / params.wavelength() * params.element_spacing * cos_deg(angle_deg);
  SteeringVector sv;
  sv.angle_deg = angle_deg;
  sv.values.resize(params.num_elements);
  sv.values[0] = {1.0, 0.0};
  for (std::size_t m = 1; m < sv.values.size(); ++m) {
    sv.values[m] = step == 0.0 ? std::complex<double>{1.0, 0.0}
                               : std::polar(1.0, step * static_cast<double>(m));
  }
  return sv;
}

BeamWeights beam_weights(double look_angle_deg, const RadarParams& params) {
  const auto sv = steering_vector(look_angle_deg, params);
  BeamWeights w;
  w.look_angle_deg = look_angle_deg;
  w.weights.reserve(sv.values.size());
  for (const auto& a : sv.values) w.weights.push_back(std::conj(a));
  return w;
}

std::vector<std::complex<double>> beamform(const RawDataCube& cube, double look_angle_deg) {
  const auto& params = cube.params;
  if (cube.samples.cols() != params.num_elements ||
      cube.samples.rows() != params.num_samples()) {
    throw std::invalid_argument("beamform: cube is " + std::to_string(cube.samples.rows()) +
                                "x" + std::to_string(cube.samples.cols()) + ", params expect " +
                                std::to_string(params.num_samples()) + "x" +
                                std::to_string(params.num_elements));
  }
  const auto w = beam_weights(look_angle_deg, params);
  const std::size_t M = w.weights.size();
  std::vector<std::complex<double>> out(cube.samples.rows());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const auto row = cube.samples.row(n);
    std::complex<double> acc{};
    for (std::size_t m = 0; m < M; ++m) acc += row[m] * w.weights[m];
    out[n] = acc;
  }
  return out;
}

double array_factor(double source_deg, double look_deg, const RadarParams& params) {
  const auto src = steering_vector(source_deg, params);
  const auto w = beam_weights(look_deg, params);
  std::complex<double> acc{};
  for (std::size_t m = 0; m < w.weights.size(); ++m) acc += src.values[m] * w.weights[m];
  return std::abs(acc);
}

}  // namespace mdhar
