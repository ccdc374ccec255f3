#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "mdhar/activity.hpp"
#include "mdhar/matrix.hpp"
#include "mdhar/radar_params.hpp"

namespace mdhar {

/// Kinematic knobs of the synthetic body model. Defaults keep every
/// scatterer below the 1 ms PRI unambiguous velocity at 77 GHz (~0.97 m/s).
struct MotionStyle {
  double walk_speed = 0.4;          // m/s, torso
  double gait_freq = 1.0;           // Hz, limb swing
  double limb_swing_velocity = 0.3; // m/s, peak limb velocity relative to torso
  double torso_bounce = 0.15;       // fractional torso speed modulation at 2x gait
  double posture_excursion = 0.18;  // m, peak torso displacement for in-place moves
  double limb_gain = 1.8;           // limb displacement relative to torso, in-place moves
};

/// Sampled range trajectory of one point scatterer.
struct ScattererTrajectory {
  double dt = 0.0;
  std::vector<double> range;     // m, range[i] at t = i*dt
  std::vector<double> velocity;  // m/s, dr/dt; negative means approaching
};

inline constexpr std::size_t kTorso = 0;
inline constexpr std::size_t kLimb = 1;

/// Torso and limb trajectories for one activity starting at `initial_range`.
/// Samples cover t = 0, dt, ..., duration (inclusive).
///
/// Walking: torso moves at a strictly signed speed with a gait bounce; the
/// limb oscillates about the torso at the gait frequency. Bending, sitting
/// and standing displace the torso and return it to the starting range.
std::vector<ScattererTrajectory> activity_profile(ActivityClass activity,
                                                  double duration, double dt,
                                                  double initial_range = 2.0,
                                                  const MotionStyle& style = {});

/// One scheduled activity of a person inside a scene.
struct ActivitySegment {
  ActivityClass activity = ActivityClass::WalkForward0;
  double start = 0.0;     // s
  double duration = 0.0;  // s
};

/// A person in the scene: a torso and a limb scatterer at a fixed azimuth
/// performing a schedule of activities, static in between.
struct PersonMotion {
  double azimuth_deg = 90.0;  // broadside = 90
  double initial_range = 2.0;
  std::complex<double> torso_amplitude{1.0, 0.0};
  std::complex<double> limb_amplitude{0.5, 0.0};
  MotionStyle style{};
  std::vector<ActivitySegment> schedule;

  void validate() const;

  /// Scatterer ranges sampled once per pulse over the whole observation.
  std::vector<std::vector<double>> pulse_ranges(const RadarParams& params) const;

  /// Ground-truth activity boundaries in slow-time pulses, [begin, end).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> event_pulses(
      const RadarParams& params) const;
};

/// Broadside-offset convention (0, +30, -30) to the steering-vector
/// convention where broadside is 90 degrees.
inline double offset_to_azimuth(double offset_deg) { return 90.0 - offset_deg; }
inline double azimuth_to_offset(double azimuth_deg) { return 90.0 - azimuth_deg; }

struct PersonTruth {
  PersonMotion person;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> events;  // pulses
};

/// Complex samples, (P*Q) rows by M element columns.
struct RawDataCube {
  Matrix<std::complex<double>> samples;
  RadarParams params;
  std::vector<PersonTruth> ground_truth;
};

/// Dechirped FMCW point-target returns on an M-element ULA plus circular
/// complex Gaussian noise. Deterministic in (persons, params, seed).
RawDataCube synthesize_cube(const std::vector<PersonMotion>& persons,
                            const RadarParams& params, std::uint64_t seed);

}  // namespace mdhar
