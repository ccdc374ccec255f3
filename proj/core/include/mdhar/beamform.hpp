#pragma once

#include <complex>
#include <vector>

#include "mdhar/radar_params.hpp"
#include "mdhar/scene_synth.hpp"

namespace mdhar {

/// a(theta) = [1, e^{j k d cos(theta)}, ..., e^{j k d (M-1) cos(theta)}].
struct SteeringVector {
  double angle_deg = 90.0;
  std::vector<std::complex<double>> values;
};

/// Delay-and-sum weights, the element-wise conjugate of a(theta_k).
struct BeamWeights {
  double look_angle_deg = 90.0;
  std::vector<std::complex<double>> weights;
};

/// cos() of an angle in degrees, exact at 60, 90 and 120 degrees.
double cos_deg(double angle_deg);

/// Throws std::invalid_argument unless 0 < theta < 180.
SteeringVector steering_vector(double angle_deg, const RadarParams& params);

BeamWeights beam_weights(double look_angle_deg, const RadarParams& params);

/// y[n] = sum_m s(n, m) * conj(a_m(theta_k)). No 1/M normalisation.
std::vector<std::complex<double>> beamform(const RawDataCube& cube, double look_angle_deg);

/// |sum_m e^{j k d m (cos(source) - cos(look))}|: residual gain of a unit
/// source at `source_deg` when steering to `look_deg`.
double array_factor(double source_deg, double look_deg, const RadarParams& params);

}  // namespace mdhar
