#include "mdhar/scene_synth.hpp"

#include "mdhar/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace mdhar {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Peak of s^2 (1-s)^3 on [0, 1], attained at s = 0.4.
constexpr double kPostureNorm = 0.16 * 0.216;

struct Displacement {
  double torso = 0.0;
  double limb = 0.0;
  double torso_velocity = 0.0;
  double limb_velocity = 0.0;
};

// Asymmetric bump g(s) = s^2 (1-s)^3 / norm and its derivative in s.
std::pair<double, double> early_bump(double s) {
  const double u = 1.0 - s;
  const double g = s * s * u * u * u / kPostureNorm;
  const double dg = (2.0 * s * u * u * u - 3.0 * s * s * u * u) / kPostureNorm;
  return {g, dg};
}

// Displacement of both scatterers `tau` seconds into an activity, relative
// to where each scatterer stood when the activity began.
Displacement displacement_at(ActivityClass activity, double tau, double duration,
                             const MotionStyle& st) {
  Displacement d;
  const MotionKind kind = motion_kind(activity);
  if (kind == MotionKind::WalkForward || kind == MotionKind::WalkBack) {
    const double sign = kind == MotionKind::WalkForward ? -1.0 : 1.0;
    const double w2 = 2.0 * kTwoPi * st.gait_freq;
    const double w = kTwoPi * st.gait_freq;
    d.torso = sign * st.walk_speed * (tau - st.torso_bounce / w2 * (std::cos(w2 * tau) - 1.0));
    d.torso_velocity = sign * st.walk_speed * (1.0 + st.torso_bounce * std::sin(w2 * tau));
    const double swing = st.limb_swing_velocity / w;
    d.limb = d.torso + swing * std::sin(w * tau);
    d.limb_velocity = d.torso_velocity + st.limb_swing_velocity * std::cos(w * tau);
    return d;
  }

  const double s = std::clamp(tau / duration, 0.0, 1.0);
  double g = 0.0;
  double dg = 0.0;
  double excursion = st.posture_excursion;
  switch (kind) {
    case MotionKind::BendDown:
      // Lean toward the sensor and come back up.
      g = std::sin(std::numbers::pi * s) * std::sin(std::numbers::pi * s);
      dg = std::numbers::pi * std::sin(kTwoPi * s);
      excursion = -excursion;
      break;
    case MotionKind::SitDown:
      // Fast drop away from the sensor, slow settle back.
      std::tie(g, dg) = early_bump(s);
      break;
    case MotionKind::StandUp: {
      // Time mirror of sitting: slow recoil, fast rise toward the sensor.
      auto [gm, dgm] = early_bump(1.0 - s);
      g = gm;
      dg = -dgm;
      break;
    }
    default:
      break;
  }
  d.torso = excursion * g;
  d.torso_velocity = excursion * dg / duration;
  d.limb = st.limb_gain * d.torso;
  d.limb_velocity = st.limb_gain * d.torso_velocity;
  return d;
}

void check_style(const MotionStyle& st) {
  if (!(st.walk_speed > 0.0) || !(st.gait_freq > 0.0) || !(st.limb_swing_velocity > 0.0)) {
    throw std::invalid_argument("motion style speeds and gait frequency must be positive");
  }
  if (!(st.torso_bounce >= 0.0 && st.torso_bounce < 1.0)) {
    throw std::invalid_argument("torso bounce must lie in [0, 1)");
  }
}

}  // namespace

std::vector<ScattererTrajectory> activity_profile(ActivityClass activity, double duration,
                                                  double dt, double initial_range,
                                                  const MotionStyle& style) {
  if (!(duration > 0.0) || !(dt > 0.0)) {
    throw std::invalid_argument("activity_profile: duration and dt must be positive");
  }
  const double steps = duration / dt;
  const double rounded = std::round(steps);
  if (rounded < 1.0 || std::abs(steps - rounded) > 1e-6 * std::max(1.0, steps)) {
    throw std::invalid_argument("activity_profile: dt must divide duration");
  }
  check_style(style);

  const auto count = static_cast<std::size_t>(rounded) + 1;
  std::vector<ScattererTrajectory> out(2);
  for (auto& tr : out) {
    tr.dt = dt;
    tr.range.resize(count);
    tr.velocity.resize(count);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double tau = static_cast<double>(i) * dt;
    const Displacement d = displacement_at(activity, tau, duration, style);
    out[kTorso].range[i] = initial_range + d.torso;
    out[kTorso].velocity[i] = d.torso_velocity;
    out[kLimb].range[i] = initial_range + d.limb;
    out[kLimb].velocity[i] = d.limb_velocity;
  }
  return out;
}

void PersonMotion::validate() const {
  if (!(azimuth_deg > 0.0 && azimuth_deg < 180.0)) {
    throw std::invalid_argument("person azimuth must lie in (0, 180) degrees, got " +
                                std::to_string(azimuth_deg));
  }
  if (!(initial_range > 0.0)) {
    throw std::invalid_argument("person initial range must be positive");
  }
  check_style(style);
  double last_end = 0.0;
  for (const auto& seg : schedule) {
    if (!(seg.duration > 0.0) || !(seg.start >= 0.0)) {
      throw std::invalid_argument("activity segments need start >= 0 and duration > 0");
    }
    if (seg.start < last_end) {
      throw std::invalid_argument("activity segments must be sorted and non-overlapping");
    }
    last_end = seg.start + seg.duration;
  }
}

std::vector<std::vector<double>> PersonMotion::pulse_ranges(const RadarParams& params) const {
  const std::size_t q_count = params.num_pulses;
  std::vector<std::vector<double>> ranges(2, std::vector<double>(q_count));
  double torso = initial_range;
  double limb = initial_range;
  std::size_t seg = 0;
  for (std::size_t q = 0; q < q_count; ++q) {
    const double t = static_cast<double>(q) * params.pri;
    // Commit the end state of activities that finished before t.
    while (seg < schedule.size() && t > schedule[seg].start + schedule[seg].duration) {
      const auto& s = schedule[seg];
      const Displacement d = displacement_at(s.activity, s.duration, s.duration, style);
      torso += d.torso;
      limb += d.limb;
      ++seg;
    }
    if (seg < schedule.size() && t >= schedule[seg].start) {
      const auto& s = schedule[seg];
      const Displacement d = displacement_at(s.activity, t - s.start, s.duration, style);
      ranges[kTorso][q] = torso + d.torso;
      ranges[kLimb][q] = limb + d.limb;
    } else {
      ranges[kTorso][q] = torso;
      ranges[kLimb][q] = limb;
    }
  }
  return ranges;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> PersonMotion::event_pulses(
    const RadarParams& params) const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  const double q_max = params.num_pulses;
  for (const auto& s : schedule) {
    const double b = std::min(std::round(s.start / params.pri), q_max);
    const double e = std::min(std::round((s.start + s.duration) / params.pri), q_max);
    if (e > b) out.emplace_back(static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(e));
  }
  return out;
}

RawDataCube synthesize_cube(const std::vector<PersonMotion>& persons, const RadarParams& params,
                            std::uint64_t seed) {
  params.validate();
  for (const auto& p : persons) p.validate();

  const std::size_t P = params.samples_per_pulse;
  const std::size_t Q = params.num_pulses;
  const std::size_t M = params.num_elements;
  const double lambda = params.wavelength();

  RawDataCube cube;
  cube.params = params;
  cube.samples = Matrix<std::complex<double>>(P * Q, M);

  std::vector<std::complex<double>> pulse(P);
  for (const auto& person : persons) {
    const auto steering = steering_vector(person.azimuth_deg, params).values;
    const auto ranges = person.pulse_ranges(params);
    const std::complex<double> amplitudes[2] = {person.torso_amplitude, person.limb_amplitude};

    for (std::size_t q = 0; q < Q; ++q) {
      std::fill(pulse.begin(), pulse.end(), std::complex<double>{});
      for (std::size_t i = 0; i < 2; ++i) {
        if (amplitudes[i] == std::complex<double>{}) continue;
        const double r = ranges[i][q];
        // Beat frequency 2*B*r/(c*PRI), expressed in radians per ADC sample.
        const double beat = 2.0 * params.bandwidth * r / (kSpeedOfLight * params.pri);
        const std::complex<double> step = std::polar(1.0, kTwoPi * beat / params.adc_rate);
        std::complex<double> phasor =
            amplitudes[i] * std::polar(1.0, -2.0 * kTwoPi * r / lambda);
        for (std::size_t p = 0; p < P; ++p) {
          pulse[p] += phasor;
          phasor *= step;
        }
      }
      for (std::size_t p = 0; p < P; ++p) {
        auto row = cube.samples.row(q * P + p);
        for (std::size_t m = 0; m < M; ++m) row[m] += pulse[p] * steering[m];
      }
    }
    cube.ground_truth.push_back({person, person.event_pulses(params)});
  }

  if (params.noise_variance > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(params.noise_variance / 2.0));
    for (auto& s : cube.samples.data()) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      s += std::complex<double>(re, im);
    }
  }
  return cube;
}

}  // namespace mdhar
