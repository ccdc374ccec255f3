#include "json_codec.hpp"

#include <fstream>

#include "mdhar/error.hpp"

namespace mdhar {
namespace {

Json complex_json(std::complex<double> z) { return Json::array({z.real(), z.imag()}); }

std::complex<double> complex_from(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

template <typename T>
void maybe(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Json to_json(const RadarParams& p) {
  return Json{{"carrier_freq", p.carrier_freq},       {"bandwidth", p.bandwidth},
              {"pri", p.pri},                         {"adc_rate", p.adc_rate},
              {"samples_per_pulse", p.samples_per_pulse}, {"num_pulses", p.num_pulses},
              {"num_elements", p.num_elements},       {"element_spacing", p.element_spacing},
              {"noise_variance", p.noise_variance}};
}

RadarParams radar_from_json(const Json& j, RadarParams base) {
  maybe(j, "carrier_freq", base.carrier_freq);
  maybe(j, "bandwidth", base.bandwidth);
  maybe(j, "pri", base.pri);
  maybe(j, "adc_rate", base.adc_rate);
  maybe(j, "samples_per_pulse", base.samples_per_pulse);
  maybe(j, "num_pulses", base.num_pulses);
  maybe(j, "num_elements", base.num_elements);
  maybe(j, "noise_variance", base.noise_variance);
  if (j.contains("element_spacing")) {
    base.element_spacing = j.at("element_spacing").get<double>();
  } else {
    base.element_spacing = base.wavelength() / 2.0;
  }
  return base;
}

Json to_json(const MotionStyle& s) {
  return Json{{"walk_speed", s.walk_speed},
              {"gait_freq", s.gait_freq},
              {"limb_swing_velocity", s.limb_swing_velocity},
              {"torso_bounce", s.torso_bounce},
              {"posture_excursion", s.posture_excursion},
              {"limb_gain", s.limb_gain}};
}

MotionStyle style_from_json(const Json& j) {
  MotionStyle s;
  maybe(j, "walk_speed", s.walk_speed);
  maybe(j, "gait_freq", s.gait_freq);
  maybe(j, "limb_swing_velocity", s.limb_swing_velocity);
  maybe(j, "torso_bounce", s.torso_bounce);
  maybe(j, "posture_excursion", s.posture_excursion);
  maybe(j, "limb_gain", s.limb_gain);
  return s;
}

Json to_json(const PersonMotion& p) {
  Json schedule = Json::array();
  for (const auto& s : p.schedule) {
    schedule.push_back({{"activity", std::string(class_name(s.activity))},
                        {"start_s", s.start},
                        {"duration_s", s.duration}});
  }
  return Json{{"azimuth_deg", p.azimuth_deg},
              {"offset_deg", azimuth_to_offset(p.azimuth_deg)},
              {"initial_range_m", p.initial_range},
              {"torso_amplitude", complex_json(p.torso_amplitude)},
              {"limb_amplitude", complex_json(p.limb_amplitude)},
              {"style", to_json(p.style)},
              {"schedule", schedule}};
}

PersonMotion person_from_json(const Json& j) {
  PersonMotion p;
  if (j.contains("azimuth_deg")) {
    p.azimuth_deg = j.at("azimuth_deg").get<double>();
  } else if (j.contains("offset_deg")) {
    p.azimuth_deg = offset_to_azimuth(j.at("offset_deg").get<double>());
  }
  maybe(j, "initial_range_m", p.initial_range);
  if (j.contains("torso_amplitude")) p.torso_amplitude = complex_from(j.at("torso_amplitude"));
  if (j.contains("limb_amplitude")) p.limb_amplitude = complex_from(j.at("limb_amplitude"));
  if (j.contains("style")) p.style = style_from_json(j.at("style"));
  if (j.contains("schedule")) {
    for (const auto& s : j.at("schedule")) {
      const auto name = s.at("activity").get<std::string>();
      const auto cls = parse_class(name);
      if (!cls) throw ConfigError("unknown activity class '" + name + "'");
      p.schedule.push_back({*cls, s.at("start_s").get<double>(), s.at("duration_s").get<double>()});
    }
  }
  return p;
}

Json to_json(const TriggerConfig& t) {
  Json j{{"n1", t.n1},         {"n2", t.n2},         {"sigma1", t.sigma1},
         {"sigma2", t.sigma2}, {"sigma3", t.sigma3}, {"guard", t.guard},
         {"sigma1_floor", t.sigma1_floor}, {"sigma3_floor", t.sigma3_floor}};
  if (t.pem) j["pem"] = *t.pem;
  if (t.pet) j["pet"] = *t.pet;
  return j;
}

TriggerConfig trigger_from_json(const Json& j, TriggerConfig base) {
  maybe(j, "n1", base.n1);
  maybe(j, "n2", base.n2);
  maybe(j, "sigma1", base.sigma1);
  maybe(j, "sigma2", base.sigma2);
  maybe(j, "sigma3", base.sigma3);
  maybe(j, "guard", base.guard);
  maybe(j, "sigma1_floor", base.sigma1_floor);
  maybe(j, "sigma3_floor", base.sigma3_floor);
  if (j.contains("pem")) base.pem = j.at("pem").get<std::size_t>();
  if (j.contains("pet")) base.pet = j.at("pet").get<std::size_t>();
  return base;
}

Json to_json(const nnet::TrainConfig& t) {
  return Json{{"learning_rate", t.learning_rate},
              {"epochs", t.epochs},
              {"beta1", t.beta1},
              {"beta2", t.beta2},
              {"epsilon", t.epsilon},
              {"batch_size", t.batch_size},
              {"split_fraction", t.split_fraction},
              {"seed", t.seed},
              {"architecture",
               {{"branches", t.arch.branches},
                {"input_size", t.arch.input_size},
                {"channels", t.arch.channels},
                {"filters", t.arch.filters},
                {"conv_layers", t.arch.conv_layers},
                {"hidden", t.arch.hidden},
                {"classes", t.arch.classes}}}};
}

nnet::TrainConfig train_from_json(const Json& j, nnet::TrainConfig base) {
  maybe(j, "learning_rate", base.learning_rate);
  maybe(j, "epochs", base.epochs);
  maybe(j, "beta1", base.beta1);
  maybe(j, "beta2", base.beta2);
  maybe(j, "epsilon", base.epsilon);
  maybe(j, "batch_size", base.batch_size);
  maybe(j, "split_fraction", base.split_fraction);
  maybe(j, "seed", base.seed);
  if (j.contains("architecture")) {
    const auto& a = j.at("architecture");
    maybe(a, "branches", base.arch.branches);
    maybe(a, "input_size", base.arch.input_size);
    maybe(a, "channels", base.arch.channels);
    maybe(a, "filters", base.arch.filters);
    maybe(a, "conv_layers", base.arch.conv_layers);
    maybe(a, "hidden", base.arch.hidden);
    maybe(a, "classes", base.arch.classes);
  }
  return base;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(is);
  } catch (const Json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << j.dump(2) << '\n';
  if (!os) throw DataError("failed writing " + path.string());
}

}  // namespace mdhar
