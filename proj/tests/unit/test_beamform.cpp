#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "mdhar/beamform.hpp"
#include "mdhar/scene_synth.hpp"

using namespace mdhar;
using cd = std::complex<double>;

namespace {

RadarParams noiseless(std::uint32_t pulses) {
  RadarParams p;
  p.num_pulses = pulses;
  p.noise_variance = 0.0;
  return p;
}

PersonMotion point_source(double azimuth, double range) {
  PersonMotion pm;
  pm.azimuth_deg = azimuth;
  pm.initial_range = range;
  pm.limb_amplitude = 0.0;
  return pm;
}

// Direct summation of the array factor, independent of the library.
double brute_array_factor(double source_deg, double look_deg, const RadarParams& p) {
  const double k = 2.0 * std::numbers::pi / p.wavelength();
  const double ds = std::cos(source_deg * std::numbers::pi / 180.0);
  const double dl = std::cos(look_deg * std::numbers::pi / 180.0);
  cd acc{};
  for (std::uint32_t m = 0; m < p.num_elements; ++m) {
    acc += std::exp(cd(0.0, k * p.element_spacing * m * (ds - dl)));
  }
  return std::abs(acc);
}

}  // namespace

TEST(SteeringVector, BroadsideIsAllOnes) {
  const auto a = steering_vector(90.0, RadarParams{});
  ASSERT_EQ(a.values.size(), 4u);
  for (const auto& v : a.values) EXPECT_EQ(v, cd(1.0, 0.0));
}

TEST(SteeringVector, SixtyDegreesQuarterTurns) {
  const auto a = steering_vector(60.0, RadarParams{});
  const cd expected[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (std::size_t m = 0; m < 4; ++m) EXPECT_LT(std::abs(a.values[m] - expected[m]), 1e-12) << m;
}

TEST(SteeringVector, ThirtyDegreesMatchesPerElementExponential) {
  const RadarParams p;
  const auto a = steering_vector(30.0, p);
  EXPECT_EQ(a.values[0], cd(1.0, 0.0));
  for (std::size_t m = 0; m < 4; ++m) {
    const double phase = static_cast<double>(m) * std::numbers::pi * std::sqrt(3.0) / 2.0;
    const cd ref(std::cos(phase), std::sin(phase));
    EXPECT_LT(std::abs(a.values[m] - ref), 1e-12) << m;
    EXPECT_NEAR(std::abs(a.values[m]), 1.0, 1e-12);
  }
}

TEST(SteeringVector, RejectsOutOfRangeAngles) {
  for (double deg : {0.0, 180.0, -5.0, 181.0, std::nan("")}) {
    EXPECT_THROW(steering_vector(deg, RadarParams{}), std::invalid_argument) << deg;
  }
  EXPECT_NO_THROW(steering_vector(179.999, RadarParams{}));
}

TEST(BeamWeights, AreConjugateSteering) {
  const RadarParams p;
  for (double deg : {30.0, 60.0, 90.0, 120.0, 151.0}) {
    const auto a = steering_vector(deg, p);
    const auto w = beam_weights(deg, p);
    for (std::size_t m = 0; m < 4; ++m) EXPECT_EQ(w.weights[m], std::conj(a.values[m]));
  }
}

TEST(Beamform, ZeroCubeGivesZero) {
  const auto cube = synthesize_cube({}, noiseless(4), 1);
  const auto y = beamform(cube, 60.0);
  ASSERT_EQ(y.size(), cube.samples.rows());
  for (const auto& v : y) EXPECT_EQ(v, cd{});
}

TEST(Beamform, CoherentGainAtLookAngle) {
  const RadarParams p = noiseless(6);
  for (double deg : {60.0, 90.0, 120.0, 75.0}) {
    const auto cube = synthesize_cube({point_source(deg, 2.1)}, p, 1);
    const auto y = beamform(cube, deg);
    // Element 0 carries the bare source signal since a_0 = 1.
    for (std::size_t n = 0; n < y.size(); ++n) {
      const double src = std::abs(cube.samples(n, 0));
      ASSERT_LT(std::abs(std::abs(y[n]) - 4.0 * src), 1e-12 * 4.0 * src) << deg << " n=" << n;
    }
  }
}

TEST(Beamform, OffBeamResidualIsArrayFactor) {
  const RadarParams p = noiseless(4);
  const std::pair<double, double> cases[] = {{120.0, 60.0}, {100.0, 70.0}, {45.0, 90.0}, {90.0, 60.0}};
  for (auto [source, look] : cases) {
    const auto cube = synthesize_cube({point_source(source, 1.7)}, p, 1);
    const auto y = beamform(cube, look);
    const double af = brute_array_factor(source, look, p);
    EXPECT_NEAR(array_factor(source, look, p), af, 1e-12);
    for (std::size_t n = 0; n < y.size(); ++n) {
      const double expected = af * std::abs(cube.samples(n, 0));
      ASSERT_NEAR(std::abs(y[n]), expected, 1e-9 * std::max(expected, std::abs(cube.samples(n, 0))))
          << source << "->" << look;
    }
  }
}

TEST(Beamform, SixtyAndOneTwentyAreMutuallyNulled) {
  const RadarParams p = noiseless(4);
  EXPECT_LT(array_factor(120.0, 60.0, p), 1e-12);
  EXPECT_LT(array_factor(60.0, 120.0, p), 1e-12);
  EXPECT_LT(array_factor(90.0, 60.0, p), 1e-12);
}

TEST(Beamform, SuppressionIsSymmetric) {
  const RadarParams p;
  for (double s = 20.0; s < 170.0; s += 17.0) {
    for (double l = 25.0; l < 170.0; l += 23.0) {
      EXPECT_NEAR(array_factor(s, l, p), array_factor(l, s, p), 1e-12);
    }
  }
}

TEST(Beamform, LinearInCube) {
  RadarParams p = noiseless(5);
  const auto a = synthesize_cube({point_source(60.0, 2.0)}, p, 1);
  const auto b = synthesize_cube({point_source(107.0, 2.6)}, p, 1);
  RawDataCube sum = a;
  for (std::size_t i = 0; i < sum.samples.size(); ++i) sum.samples.data()[i] += b.samples.data()[i];
  const auto ya = beamform(a, 80.0);
  const auto yb = beamform(b, 80.0);
  const auto ys = beamform(sum, 80.0);
  for (std::size_t n = 0; n < ys.size(); ++n) {
    const cd ref = ya[n] + yb[n];
    ASSERT_LE(std::abs(ys[n] - ref), 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Beamform, SingleElementIsIdentity) {
  RadarParams p = noiseless(3);
  p.num_elements = 1;
  p.noise_variance = 1.0;
  const auto cube = synthesize_cube({point_source(60.0, 2.0)}, p, 9);
  const auto y = beamform(cube, 120.0);
  for (std::size_t n = 0; n < y.size(); ++n) EXPECT_EQ(y[n], cube.samples(n, 0));
}

TEST(Beamform, RejectsMismatchedDimensions) {
  auto cube = synthesize_cube({}, noiseless(4), 1);
  cube.params.num_pulses = 5;
  EXPECT_THROW(beamform(cube, 90.0), std::invalid_argument);
  cube = synthesize_cube({}, noiseless(4), 1);
  cube.params.num_elements = 3;
  EXPECT_THROW(beamform(cube, 90.0), std::invalid_argument);
  cube = synthesize_cube({}, noiseless(4), 1);
  EXPECT_THROW(beamform(cube, 0.0), std::invalid_argument);
}

TEST(AngleConvention, OffsetsMapToSteeringAngles) {
  EXPECT_EQ(offset_to_azimuth(0.0), 90.0);
  EXPECT_EQ(offset_to_azimuth(30.0), 60.0);
  EXPECT_EQ(offset_to_azimuth(-30.0), 120.0);
  EXPECT_EQ(azimuth_to_offset(120.0), -30.0);
}
