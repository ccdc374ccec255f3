#include "mdhar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json_codec.hpp"
#include "mdhar/beamform.hpp"
#include "mdhar/cube_io.hpp"
#include "mdhar/error.hpp"
#include "mdhar/nnet/checkpoint.hpp"

namespace mdhar {

namespace fs = std::filesystem;

namespace {

// Recorded trials in class-index order.
constexpr std::array<double, kNumClasses> kRecordedTrials = {
    120.0,  // BendDown0
    131.0,  // SitDown0
    71.0,   // StandUp0
    498.0,  // WalkBack0
    40.0,   // WalkBackM30
    31.0,   // WalkBackP30
    771.0,  // WalkForward0
    13.0,   // WalkForwardP30
    41.0,   // WalkForwardM30
};

constexpr double kMinRange = 0.8;
constexpr double kMaxRange = 3.7;
constexpr double kWalkMin = 1.7, kWalkMax = 2.1;
constexpr double kInPlaceMin = 1.9, kInPlaceMax = 2.2;
constexpr double kGapMin = 0.9, kGapMax = 1.0;
constexpr double kStartJitter = 0.2;
constexpr std::size_t kActivitiesPerScene = 3;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 1));
}

bool is_walk(ActivityClass c) {
  const auto k = motion_kind(c);
  return k == MotionKind::WalkBack || k == MotionKind::WalkForward;
}

double walk_direction(ActivityClass c) {
  switch (motion_kind(c)) {
    case MotionKind::WalkForward: return -1.0;
    case MotionKind::WalkBack: return 1.0;
    default: return 0.0;
  }
}

std::string beam_tag(double offset) {
  if (offset == 0.0) return "p00";
  const long v = std::lround(std::abs(offset));
  return (offset > 0 ? "p" : "m") + std::to_string(v);
}

std::string spectrogram_id(const std::string& scene, double offset) {
  return scene + "_" + beam_tag(offset);
}

// Lead-in and tail, in seconds, needed by the trigger windows.
double lead_time(const PipelineConfig& cfg) {
  const double frame_dt = static_cast<double>(cfg.spectrogram.hop_for(cfg.radar)) * cfg.radar.pri;
  return 0.5 * static_cast<double>(cfg.spectrogram.window) * cfg.radar.pri +
         static_cast<double>(cfg.trigger.n2 + 6) * frame_dt;
}

double tail_time(const PipelineConfig& cfg) {
  const double frame_dt = static_cast<double>(cfg.spectrogram.hop_for(cfg.radar)) * cfg.radar.pri;
  return 0.5 * static_cast<double>(cfg.spectrogram.window) * cfg.radar.pri +
         static_cast<double>(cfg.trigger.n1 + 3) * frame_dt;
}

std::size_t scene_capacity(const PipelineConfig& cfg) {
  const double obs = static_cast<double>(cfg.radar.num_pulses) * cfg.radar.pri;
  const double fixed = lead_time(cfg) + kStartJitter + tail_time(cfg);
  std::size_t k = 0;
  while (k < kActivitiesPerScene) {
    const double need = fixed + static_cast<double>(k + 1) * kInPlaceMax +
                        static_cast<double>(k) * kGapMax;
    if (need > obs) break;
    ++k;
  }
  return k;
}

std::vector<ActivityClass> round_robin(const std::vector<ActivityClass>& classes,
                                       const std::array<std::size_t, kNumClasses>& counts) {
  std::vector<std::size_t> left;
  for (auto c : classes) left.push_back(counts[class_index(c)]);
  std::vector<ActivityClass> out;
  bool any = true;
  while (any) {
    any = false;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (left[i] == 0) continue;
      out.push_back(classes[i]);
      --left[i];
      any = true;
    }
  }
  return out;
}

PersonMotion make_person(double offset_deg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto between = [&](double a, double b) { return a + (b - a) * u(rng); };
  PersonMotion p;
  p.azimuth_deg = offset_to_azimuth(offset_deg);
  p.style.walk_speed = between(0.35, 0.45);
  p.style.gait_freq = between(0.9, 1.1);
  p.style.limb_swing_velocity = between(0.25, 0.35);
  p.style.posture_excursion = between(0.15, 0.2);
  const double gain = between(0.8, 1.2);
  p.torso_amplitude = std::polar(gain, between(-std::numbers::pi, std::numbers::pi));
  p.limb_amplitude = std::polar(0.5 * gain, between(-std::numbers::pi, std::numbers::pi));
  return p;
}

// Starting range keeping the torso inside [kMinRange, kMaxRange].
void place_person(PersonMotion& p, std::mt19937_64& rng) {
  double pos = 0.0, lo = 0.0, hi = 0.0;
  for (const auto& s : p.schedule) {
    pos += walk_direction(s.activity) * p.style.walk_speed * (1.0 + p.style.torso_bounce) * s.duration;
    lo = std::min(lo, pos);
    hi = std::max(hi, pos);
  }
  const double a = kMinRange - lo, b = kMaxRange - hi;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  p.initial_range = a <= b ? a + (b - a) * u(rng) : 0.5 * (kMinRange + kMaxRange) - 0.5 * (lo + hi);
}

// Fills start/duration along the shared timeline of a scene.
void schedule_scene(std::vector<std::pair<PersonMotion*, ActivityClass>>& slots,
                    const PipelineConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double t = lead_time(cfg) + kStartJitter * u(rng);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto [person, activity] = slots[i];
    const double d = is_walk(activity) ? kWalkMin + (kWalkMax - kWalkMin) * u(rng)
                                       : kInPlaceMin + (kInPlaceMax - kInPlaceMin) * u(rng);
    person->schedule.push_back({activity, t, d});
    t += d + kGapMin + (kGapMax - kGapMin) * u(rng);
  }
}

Matrix<double> quantised_image(const Spectrogram& spec, double dr) {
  auto img = to_image(spec, dr);
  for (auto& v : img.data()) v = to_gray8(v) / 255.0;
  return img;
}

void quantise_to_file_precision(RawDataCube& cube) {
  for (auto& s : cube.samples.data()) {
    s = {static_cast<double>(static_cast<float>(s.real())),
         static_cast<double>(static_cast<float>(s.imag()))};
  }
}

// Row percentages in tenths, largest remainder so a non-empty row totals 1000.
std::vector<std::vector<long>> rounded_tenths(const Matrix<std::size_t>& counts) {
  std::vector<std::vector<long>> out(counts.rows(), std::vector<long>(counts.cols(), 0));
  for (std::size_t i = 0; i < counts.rows(); ++i) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < counts.cols(); ++j) n += counts(i, j);
    if (n == 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> rem;  // (remainder, column)
    long total = 0;
    for (std::size_t j = 0; j < counts.cols(); ++j) {
      const std::size_t scaled = counts(i, j) * 1000;
      out[i][j] = static_cast<long>(scaled / n);
      total += out[i][j];
      rem.emplace_back(scaled % n, j);
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first; });
    for (std::size_t k = 0; total < 1000; ++k, ++total) ++out[i][rem[k].second];
  }
  return out;
}

std::string tenths_text(long v) {
  return std::to_string(v / 10) + "." + std::to_string(v % 10);
}

template <typename F>
auto config_guard(const char* section, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: bad ") + section + ": " + e.what());
  }
}

void reject_unknown(const Json& j, const Json& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("config: unknown key '" + key + "' in " + where);
  }
}

struct Layout {
  fs::path root;
  fs::path config() const { return root / "config.json"; }
  fs::path scenes() const { return root / "scenes"; }
  fs::path truth() const { return root / "truth"; }
  fs::path cubes() const { return root / "cubes"; }
  fs::path calibration() const { return root / "calibration"; }
  fs::path spectrograms() const { return root / "spectrograms"; }
  fs::path events() const { return root / "events"; }
  fs::path examples() const { return root / "examples"; }
  fs::path model() const { return root / "model"; }
  fs::path report() const { return root / "report"; }
  fs::path plots() const { return root / "plots"; }
};

void reset_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create directory " + dir.string());
}

void say(const RunOptions& opts, const std::string& msg) {
  if (opts.log) *opts.log << msg << std::endl;
}

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw DataError("cannot write " + path.string());
}

// Writes the three beam spectrograms of one cube.
void write_beams(const RawDataCube& cube, const std::string& id, const fs::path& dir,
                 const PipelineConfig& cfg, bool png) {
  for (double offset : kLookOffsets) {
    const auto spec = beam_spectrogram(cube, offset, cfg.spectrogram);
    const auto sid = spectrogram_id(id, offset);
    write_spectrogram(spec, 1.0 / cfg.radar.pri, offset, dir / (sid + ".mds"));
    if (png) write_png_gray(to_image(spec, cfg.spectrogram.dynamic_range_db), dir / (sid + ".png"));
  }
}

void stage_synth(const PipelineConfig& cfg, const Layout& L, const std::vector<ScenePlan>& plans,
                 const RunOptions& opts) {
  for (const auto& d : {L.scenes(), L.truth(), L.cubes(), L.calibration(), L.spectrograms()}) reset_dir(d);
  std::vector<ScenePlan> all = plans;
  all.push_back(calibration_scene(cfg));
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& plan = all[i];
    const bool calib = i + 1 == all.size();
    say(opts, "synth " + plan.id + " (" + std::to_string(i + 1) + "/" + std::to_string(all.size()) + ")");
    write_scene(plan.persons, L.scenes() / (plan.id + ".json"));
    auto cube = synthesize_cube(plan.persons, cfg.radar, plan.seed);
    quantise_to_file_precision(cube);
    const std::string cube_rel = "cubes/" + plan.id + ".mdc";
    if (cfg.keep_cubes) write_cube(cube, L.cubes() / (plan.id + ".mdc"));
    write_ground_truth(cube, L.truth() / (plan.id + ".json"), cfg.keep_cubes ? cube_rel : "", plan.seed);
    write_beams(cube, plan.id, calib ? L.calibration() : L.spectrograms(), cfg, !calib);
  }
}

void stage_spectrograms(const PipelineConfig& cfg, const Layout& L,
                        const std::vector<ScenePlan>& plans, const RunOptions& opts) {
  std::vector<std::string> ids;
  for (const auto& p : plans) ids.push_back(p.id);
  ids.push_back(calibration_scene(cfg).id);
  for (const auto& id : ids) {
    if (!fs::exists(L.cubes() / (id + ".mdc"))) {
      throw DataError("missing cube " + (L.cubes() / (id + ".mdc")).string() +
                      " (re-run from synth with keep_cubes enabled)");
    }
  }
  reset_dir(L.calibration());
  reset_dir(L.spectrograms());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    say(opts, "spectrograms " + ids[i]);
    auto cube = read_cube(L.cubes() / (ids[i] + ".mdc"));
    if (cube.params.num_pulses != cfg.radar.num_pulses ||
        cube.params.samples_per_pulse != cfg.radar.samples_per_pulse ||
        cube.params.num_elements != cfg.radar.num_elements) {
      throw DataError("cube " + ids[i] + " does not match the configured radar");
    }
    cube.params = cfg.radar;
    const bool calib = i + 1 == ids.size();
    write_beams(cube, ids[i], calib ? L.calibration() : L.spectrograms(), cfg, !calib);
  }
}

TriggerConfig thresholds(const PipelineConfig& cfg, const Layout& L) {
  if (!cfg.calibrate) return cfg.trigger;
  std::vector<double> sig;
  const auto id = calibration_scene(cfg).id;
  for (double offset : kLookOffsets) {
    const auto f = read_spectrogram(L.calibration() / (spectrogram_id(id, offset) + ".mds"));
    const auto s = spectrogram_trigger_signal(f.spec);
    sig.insert(sig.end(), s.begin(), s.end());
  }
  return calibrate_thresholds(sig, cfg.trigger);
}

void stage_segment(const PipelineConfig& cfg, const Layout& L, const std::vector<ScenePlan>& plans,
                   const RunOptions& opts) {
  const TriggerConfig trig = thresholds(cfg, L);
  reset_dir(L.events());
  reset_dir(L.examples());
  write_json_file(Json{{"calibrated", cfg.calibrate}, {"trigger", to_json(trig)}},
                  L.events() / "thresholds.json");
  std::vector<EventRow> rows;
  std::size_t kept = 0;
  for (const auto& plan : plans) {
    const auto truth = read_ground_truth(L.truth() / (plan.id + ".json"));
    std::vector<SpectrogramFile> specs;
    std::vector<Matrix<double>> images;
    for (double offset : kLookOffsets) {
      specs.push_back(read_spectrogram(L.spectrograms() / (spectrogram_id(plan.id, offset) + ".mds")));
      images.push_back(quantised_image(specs.back().spec, cfg.spectrogram.dynamic_range_db));
    }
    for (std::size_t b = 0; b < specs.size(); ++b) {
      const auto& spec = specs[b].spec;
      const double offset = kLookOffsets[b];
      const auto sid = spectrogram_id(plan.id, offset);
      const auto events = detect_events(spectrogram_trigger_signal(spec), trig);
      for (std::size_t e = 0; e < events.size(); ++e) {
        EventRow row{sid, offset, events[e],
                     label_event(events[e], truth, offset, spec.window.size(), spec.hop)};
        rows.push_back(row);
        if (!row.label) continue;
        const std::string eid = sid + "_e" + std::to_string(e);
        Json files = Json::array();
        for (std::size_t k = 0; k < images.size(); ++k) {
          const auto name = eid + "_b" + std::to_string(k) + ".png";
          write_png_gray(crop_pad_resize(images[k], events[e]).resized, L.examples() / name);
          files.push_back(name);
        }
        write_json_file(Json{{"id", eid},
                             {"label", std::string(class_name(*row.label))},
                             {"label_index", class_index(*row.label)},
                             {"spectrogram", sid},
                             {"look_angle", offset},
                             {"start", events[e].start},
                             {"end", events[e].end},
                             {"raw_start", events[e].raw_start},
                             {"raw_end", events[e].raw_end},
                             {"branch_angles", kLookOffsets},
                             {"images", files}},
                        L.examples() / (eid + ".json"));
        ++kept;
      }
    }
  }
  write_events_csv(rows, L.events() / "events.csv");
  say(opts, "segment: " + std::to_string(rows.size()) + " events, " + std::to_string(kept) + " labelled");
}

}  // namespace

void train_stage(const fs::path& examples_dir, const fs::path& model_dir,
                 const nnet::TrainConfig& cfg, const RunOptions& opts) {
  const auto data = load_examples(examples_dir);
  reset_dir(model_dir);
  say(opts, "train: " + std::to_string(data.size()) + " examples");
  nnet::TrainResult result = [&] {
    try {
      return nnet::train(data, cfg);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("training data: ") + e.what());
    }
  }();
  nnet::save_checkpoint(result.model, model_dir / "checkpoint.mdn");
  Json train_ids = Json::array(), test_ids = Json::array();
  for (auto i : result.split.train) train_ids.push_back(data[i].id);
  for (auto i : result.split.test) test_ids.push_back(data[i].id);
  write_json_file(Json{{"loss_history", result.loss_history},
                       {"train_ids", train_ids},
                       {"test_ids", test_ids},
                       {"config", to_json(cfg)}},
                  model_dir / "training.json");
}

namespace {

Json eval_json(const nnet::EvalReport& r, std::span<const nnet::LabeledExample> set) {
  Json counts = Json::array(), pct = Json::array();
  const auto tenths = rounded_tenths(r.counts);
  for (std::size_t i = 0; i < r.counts.rows(); ++i) {
    Json crow = Json::array(), prow = Json::array();
    for (std::size_t j = 0; j < r.counts.cols(); ++j) {
      crow.push_back(r.counts(i, j));
      prow.push_back(static_cast<double>(tenths[i][j]) / 10.0);
    }
    counts.push_back(crow);
    pct.push_back(prow);
  }
  Json preds = Json::array();
  for (std::size_t k = 0; k < set.size(); ++k) {
    preds.push_back({{"id", set[k].id},
                     {"label", std::string(class_name(class_from_index(set[k].label)))},
                     {"predicted", std::string(class_name(class_from_index(r.predicted[k])))}});
  }
  return Json{{"accuracy", r.accuracy},
              {"examples", set.size()},
              {"counts", counts},
              {"confusion_percent", pct},
              {"predictions", preds}};
}

}  // namespace

RadarParams pipeline_radar() {
  RadarParams r;
  r.noise_variance = 0.01;
  return r;
}

nnet::TrainConfig pipeline_train() {
  nnet::TrainConfig t;
  t.batch_size = 8;
  return t;
}

std::array<std::size_t, kNumClasses> trial_counts(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("trial_scale must be positive");
  std::array<std::size_t, kNumClasses> out{};
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    out[i] = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(kRecordedTrials[i] * scale)));
  }
  return out;
}

std::size_t SpectrogramConfig::hop_for(const RadarParams& radar) const {
  return hop ? hop : hop_for_frames(radar.num_pulses, window, frames);
}

void SpectrogramConfig::validate(const RadarParams& radar) const {
  if (window < 2) throw ConfigError("spectrogram: window must be at least 2");
  if (window > radar.num_pulses) throw ConfigError("spectrogram: window longer than the observation");
  if (hop_for(radar) == 0) {
    throw ConfigError("spectrogram: no hop yields " + std::to_string(frames) + " frames of " +
                      std::to_string(window) + " from " + std::to_string(radar.num_pulses) + " pulses");
  }
  if (!(dynamic_range_db > 0.0)) throw ConfigError("spectrogram: dynamic range must be positive");
  if (!(min_range_m >= 0.0) || !(max_range_m > min_range_m)) {
    throw ConfigError("spectrogram: need 0 <= min_range_m < max_range_m");
  }
  const std::size_t T = frame_count(radar.num_pulses, window, hop_for(radar));
  if (T > kCanvasSize) throw ConfigError("spectrogram: more frames than the padding canvas");
  if (window > kCanvasSize) throw ConfigError("spectrogram: window larger than the padding canvas");
}

void PipelineConfig::validate() const {
  try {
    radar.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("radar: ") + e.what());
  }
  spectrogram.validate(radar);
  try {
    trigger.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto& a = train.arch;
  if (a.classes != kNumClasses || a.branches != kLookOffsets.size() ||
      a.channels != kNetworkChannels || a.input_size != kNetworkSize) {
    throw ConfigError("train.architecture: the pipeline needs 9 classes, 3 branches and 3x128x128 inputs");
  }
  const std::size_t T = frame_count(radar.num_pulses, spectrogram.window, spectrogram.hop_for(radar));
  if (T < trigger.n1 + trigger.n2 + 1) {
    throw ConfigError("trigger: " + std::to_string(T) + " frames cannot hold N1 + N2 + 1");
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (class_counts[i] == 1) {
      throw ConfigError("scenes: class " + std::string(class_name(class_from_index(i))) +
                        " needs a count of 0 or at least 2");
    }
    total += class_counts[i];
  }
  if (total == 0) throw ConfigError("scenes: every class count is zero");
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
  if (scene_capacity(*this) == 0) throw ConfigError("radar: observation too short for one activity");
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig cfg;
  reject_unknown(j, Json{{"seed", 0}, {"output_dir", 0}, {"radar", 0}, {"scenes", 0},
                         {"spectrogram", 0}, {"trigger", 0}, {"calibrate", 0}, {"train", 0},
                         {"keep_cubes", 0}},
                 "config");
  config_guard("top-level value", [&] {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("calibrate")) cfg.calibrate = j.at("calibrate").get<bool>();
    if (j.contains("keep_cubes")) cfg.keep_cubes = j.at("keep_cubes").get<bool>();
    return 0;
  });
  if (j.contains("radar")) {
    reject_unknown(j.at("radar"), to_json(RadarParams{}), "radar");
    cfg.radar = config_guard("radar", [&] { return radar_from_json(j.at("radar")); });
  }
  if (j.contains("trigger")) {
    Json allowed = to_json(TriggerConfig{});
    allowed["pem"] = 0;
    allowed["pet"] = 0;
    reject_unknown(j.at("trigger"), allowed, "trigger");
    cfg.trigger = config_guard("trigger", [&] { return trigger_from_json(j.at("trigger")); });
  }
  if (j.contains("train")) {
    const Json allowed = to_json(nnet::TrainConfig{});
    reject_unknown(j.at("train"), allowed, "train");
    if (j.at("train").contains("architecture")) {
      reject_unknown(j.at("train").at("architecture"), allowed.at("architecture"), "train.architecture");
    }
    cfg.train = config_guard("train", [&] { return train_from_json(j.at("train")); });
  }
  if (j.contains("spectrogram")) {
    const Json& s = j.at("spectrogram");
    reject_unknown(s, Json{{"window", 0}, {"hop", 0}, {"frames", 0}, {"dynamic_range_db", 0},
                           {"min_range_m", 0}, {"max_range_m", 0}},
                   "spectrogram");
    config_guard("spectrogram", [&] {
      auto& c = cfg.spectrogram;
      if (s.contains("window")) c.window = s.at("window").get<std::size_t>();
      if (s.contains("hop")) c.hop = s.at("hop").get<std::size_t>();
      if (s.contains("frames")) c.frames = s.at("frames").get<std::size_t>();
      if (s.contains("dynamic_range_db")) c.dynamic_range_db = s.at("dynamic_range_db").get<double>();
      if (s.contains("min_range_m")) c.min_range_m = s.at("min_range_m").get<double>();
      if (s.contains("max_range_m")) c.max_range_m = s.at("max_range_m").get<double>();
      return 0;
    });
  }
  if (j.contains("scenes")) {
    const Json& s = j.at("scenes");
    reject_unknown(s, Json{{"class_counts", 0}, {"trial_scale", 0}}, "scenes");
    if (s.contains("class_counts") == s.contains("trial_scale")) {
      throw ConfigError("scenes: give exactly one of class_counts or trial_scale");
    }
    if (s.contains("trial_scale")) {
      cfg.class_counts = trial_counts(config_guard("scenes", [&] { return s.at("trial_scale").get<double>(); }));
    } else {
      const Json& cc = s.at("class_counts");
      if (!cc.is_object()) throw ConfigError("scenes.class_counts must be an object");
      cfg.class_counts.fill(0);
      for (const auto& [name, value] : cc.items()) {
        const auto c = parse_class(name);
        if (!c) throw ConfigError("scenes.class_counts: unknown class '" + name + "'");
        cfg.class_counts[class_index(*c)] = config_guard("scenes", [&] { return value.get<std::size_t>(); });
      }
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_pipeline_config(ss.str());
}

std::string pipeline_config_json(const PipelineConfig& cfg, bool with_output_dir) {
  Json counts = Json::object();
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    counts[std::string(class_name(class_from_index(i)))] = cfg.class_counts[i];
  }
  const auto& s = cfg.spectrogram;
  Json j{{"seed", cfg.seed},
               {"radar", to_json(cfg.radar)},
               {"scenes", {{"class_counts", counts}}},
               {"spectrogram",
                {{"window", s.window},
                 {"hop", s.hop},
                 {"frames", s.frames},
                 {"dynamic_range_db", s.dynamic_range_db},
                 {"min_range_m", s.min_range_m},
                 {"max_range_m", s.max_range_m}}},
               {"trigger", to_json(cfg.trigger)},
               {"calibrate", cfg.calibrate},
               {"train", to_json(cfg.train)},
               {"keep_cubes", cfg.keep_cubes}};
  if (with_output_dir) j["output_dir"] = cfg.output_dir.generic_string();
  return j.dump(2) + "\n";
}

fs::path resolve_output_dir(const fs::path& dir) {
  const char* root = std::getenv("MDHAR_OUTPUT_ROOT");
  if (root && *root && dir.is_relative()) return fs::path(root) / dir;
  return dir;
}

std::vector<ScenePlan> plan_scenes(const PipelineConfig& cfg) {
  std::mt19937_64 rng(derive_seed(cfg.seed, 0));
  const std::size_t cap = scene_capacity(cfg);
  std::vector<ScenePlan> plans;
  const auto next_id = [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%03zu", plans.size());
    return std::string(buf);
  };

  const auto solo = round_robin({ActivityClass::BendDown0, ActivityClass::SitDown0,
                                 ActivityClass::StandUp0, ActivityClass::WalkBack0,
                                 ActivityClass::WalkForward0},
                                cfg.class_counts);
  for (std::size_t i = 0; i < solo.size(); i += cap) {
    ScenePlan plan;
    plan.id = next_id();
    plan.persons.push_back(make_person(0.0, rng));
    std::vector<std::pair<PersonMotion*, ActivityClass>> slots;
    for (std::size_t k = i; k < std::min(solo.size(), i + cap); ++k) slots.emplace_back(&plan.persons[0], solo[k]);
    schedule_scene(slots, cfg, rng);
    place_person(plan.persons[0], rng);
    plans.push_back(std::move(plan));
  }

  auto plus = round_robin({ActivityClass::WalkBackP30, ActivityClass::WalkForwardP30}, cfg.class_counts);
  auto minus = round_robin({ActivityClass::WalkBackM30, ActivityClass::WalkForwardM30}, cfg.class_counts);
  std::reverse(plus.begin(), plus.end());
  std::reverse(minus.begin(), minus.end());
  bool minus_first = false;
  while (!plus.empty() || !minus.empty()) {
    ScenePlan plan;
    plan.id = next_id();
    plan.persons.push_back(make_person(+30.0, rng));
    plan.persons.push_back(make_person(-30.0, rng));
    std::vector<std::pair<PersonMotion*, ActivityClass>> slots;
    for (std::size_t k = 0; k < cap && (!plus.empty() || !minus.empty()); ++k) {
      bool use_minus = (k % 2 == 1) != minus_first;
      if (use_minus && minus.empty()) use_minus = false;
      if (!use_minus && plus.empty()) use_minus = true;
      auto& src = use_minus ? minus : plus;
      slots.emplace_back(&plan.persons[use_minus ? 1 : 0], src.back());
      src.pop_back();
    }
    schedule_scene(slots, cfg, rng);
    for (auto& p : plan.persons) place_person(p, rng);
    plans.push_back(std::move(plan));
    minus_first = !minus_first;
  }
  for (std::size_t i = 0; i < plans.size(); ++i) plans[i].seed = derive_seed(cfg.seed, i + 1);
  return plans;
}

ScenePlan calibration_scene(const PipelineConfig& cfg) {
  std::mt19937_64 rng(derive_seed(cfg.seed, 0xCA11B));
  ScenePlan plan;
  plan.id = "calibration";
  plan.seed = derive_seed(cfg.seed, 0xCA11B + 1);
  for (double offset : kLookOffsets) {
    auto p = make_person(offset, rng);
    p.initial_range = 0.5 * (kMinRange + kMaxRange);
    plan.persons.push_back(p);
  }
  return plan;
}

Spectrogram beam_spectrogram(const RawDataCube& cube, double look_offset_deg,
                             const SpectrogramConfig& cfg) {
  const auto& p = cube.params;
  const auto y = beamform(cube, offset_to_azimuth(look_offset_deg));
  const auto rm = range_map(reshape_pulses(y, p.samples_per_pulse), p);
  const auto [lo, hi] = range_bins_for(p, cfg.min_range_m, cfg.max_range_m);
  const auto v = collapse_range(rm, lo, hi);
  return spectrogram(v, hann_window(cfg.window), cfg.hop_for(p), 1.0 / p.pri);
}

std::pair<std::size_t, std::size_t> pulses_to_frames(std::uint32_t begin, std::uint32_t end,
                                                     std::size_t window, std::size_t hop) {
  const std::size_t half = window / 2;
  const auto first_at_or_after = [&](std::size_t pulse) -> std::size_t {
    return pulse <= half ? 0 : (pulse - half + hop - 1) / hop;
  };
  return {first_at_or_after(begin), first_at_or_after(end)};
}

std::optional<ActivityClass> label_event(const EventInterval& event,
                                         const std::vector<PersonTruth>& truth,
                                         double look_offset_deg, std::size_t window,
                                         std::size_t hop) {
  const double az = offset_to_azimuth(look_offset_deg);
  std::optional<ActivityClass> best;
  std::size_t best_overlap = 0;
  for (const auto& gt : truth) {
    if (std::abs(gt.person.azimuth_deg - az) > 1e-9) continue;
    for (std::size_t i = 0; i < gt.events.size(); ++i) {
      const auto [s, e] = pulses_to_frames(gt.events[i].first, gt.events[i].second, window, hop);
      const std::size_t lo = std::max(s, event.start), hi = std::min(e, event.end);
      const std::size_t overlap = hi > lo ? hi - lo : 0;
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = gt.person.schedule.at(i).activity;
      }
    }
  }
  return best;
}

std::vector<double> spectrogram_trigger_signal(const Spectrogram& spec) {
  return trigger_signal(central_envelope_avg(spec), static_cast<double>(spec.center_row()));
}

nnet::LabeledExample load_example(const fs::path& sidecar) {
  const Json j = read_json_file(sidecar);
  nnet::LabeledExample ex;
  try {
    ex.id = j.at("id").get<std::string>();
    const auto c = parse_class(j.at("label").get<std::string>());
    if (!c) throw DataError("unknown label in " + sidecar.string());
    ex.label = class_index(*c);
    for (const auto& name : j.at("images")) {
      const auto img = read_png_gray(sidecar.parent_path() / name.get<std::string>());
      if (img.rows() != kNetworkSize || img.cols() != kNetworkSize) {
        throw DataError("example image " + name.get<std::string>() + " is not 128x128");
      }
      std::vector<float> x;
      x.reserve(kNetworkChannels * img.size());
      for (std::size_t c = 0; c < kNetworkChannels; ++c) {
        for (double v : img.data()) x.push_back(static_cast<float>(v));
      }
      ex.branches.push_back(std::move(x));
    }
  } catch (const Json::exception& e) {
    throw DataError("malformed example " + sidecar.string() + ": " + e.what());
  }
  if (ex.branches.size() != kLookOffsets.size()) {
    throw DataError("example " + sidecar.string() + " needs three images");
  }
  return ex;
}

std::vector<nnet::LabeledExample> load_examples(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("no examples directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::vector<nnet::LabeledExample> out;
  for (const auto& f : files) out.push_back(load_example(f));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::string confusion_csv(const nnet::EvalReport& report) {
  const auto tenths = rounded_tenths(report.counts);
  std::ostringstream os;
  os << "true\\predicted";
  for (std::size_t j = 0; j < report.counts.cols(); ++j) os << ',' << class_label(class_from_index(j));
  os << '\n';
  for (std::size_t i = 0; i < report.counts.rows(); ++i) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < report.counts.cols(); ++j) n += report.counts(i, j);
    if (n == 0) continue;
    os << class_label(class_from_index(i));
    for (std::size_t j = 0; j < report.counts.cols(); ++j) os << ',' << tenths_text(tenths[i][j]);
    os << '\n';
  }
  return os.str();
}

void eval_stage(const fs::path& model_dir, const fs::path& examples_dir, const fs::path& report_dir,
                const RunOptions& opts) {
  const auto model = nnet::load_checkpoint(model_dir / "checkpoint.mdn");
  const auto data = load_examples(examples_dir);
  const Json tj = read_json_file(model_dir / "training.json");
  std::map<std::string, const nnet::LabeledExample*> by_id;
  for (const auto& ex : data) by_id[ex.id] = &ex;
  const auto pick = [&](const char* key) {
    std::vector<nnet::LabeledExample> out;
    try {
      for (const auto& id : tj.at(key)) {
        const auto it = by_id.find(id.get<std::string>());
        if (it == by_id.end()) throw DataError("training split names unknown example " + id.dump());
        out.push_back(*it->second);
      }
    } catch (const Json::exception& e) {
      throw DataError(std::string("malformed training.json: ") + e.what());
    }
    return out;
  };
  const auto train_set = pick("train_ids");
  const auto test_set = pick("test_ids");
  if (test_set.empty()) throw DataError("empty held-out set");
  reset_dir(report_dir);
  const auto tr = nnet::evaluate(model, train_set);
  const auto te = nnet::evaluate(model, test_set);
  Json classes = Json::array();
  for (auto c : kAllClasses) classes.push_back(class_label(c));
  write_json_file(Json{{"classes", classes}, {"train", eval_json(tr, train_set)},
                       {"test", eval_json(te, test_set)}},
                  report_dir / "report.json");
  write_text(confusion_csv(te), report_dir / "confusion.csv");
  std::ostringstream msg;
  msg << "eval: train accuracy " << tr.accuracy << ", held-out accuracy " << te.accuracy;
  say(opts, msg.str());
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : {Stage::Synth, Stage::Spectrograms, Stage::Segment, Stage::Train, Stage::Eval}) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Synth: return "synth";
    case Stage::Spectrograms: return "spectrograms";
    case Stage::Segment: return "segment";
    case Stage::Train: return "train";
    case Stage::Eval: return "eval";
  }
  return "?";
}

Manifest run_pipeline(const PipelineConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const Layout L{resolve_output_dir(cfg.output_dir)};
  std::error_code ec;
  fs::create_directories(L.root, ec);
  if (ec || !fs::is_directory(L.root)) {
    throw ConfigError("cannot create output directory " + L.root.string());
  }
  {
    std::ofstream probe(L.config());
    if (!probe) throw ConfigError("output directory " + L.root.string() + " is not writable");
  }
  write_text(pipeline_config_json(cfg, false), L.config());

  const auto plans = plan_scenes(cfg);
  say(opts, std::to_string(plans.size()) + " scenes planned");
  if (opts.from <= Stage::Synth) stage_synth(cfg, L, plans, opts);
  if (opts.from <= Stage::Spectrograms && opts.from > Stage::Synth) stage_spectrograms(cfg, L, plans, opts);
  if (opts.from <= Stage::Segment) stage_segment(cfg, L, plans, opts);
  if (opts.from <= Stage::Train) train_stage(L.examples(), L.model(), cfg.train, opts);
  eval_stage(L.model(), L.examples(), L.report(), opts);

  reset_dir(L.plots());
  const fs::path manifest_path = L.root / kManifestName;
  write_manifest(build_manifest(L.root), manifest_path);
  const auto plots = emit_plots(manifest_path);
  for (const auto& m : plots.missing) say(opts, "plots: missing " + m);
  auto manifest = build_manifest(L.root);
  write_manifest(manifest, manifest_path);
  return manifest;
}

Matrix<Rgb> render_overlay(const Spectrogram& spec, const std::vector<EventInterval>& events,
                           double dynamic_range_db) {
  const auto img = to_image(spec, dynamic_range_db);
  Matrix<Rgb> out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto g = to_gray8(img.data()[i]);
    out.data()[i] = {g, g, g};
  }
  const auto env = envelopes(spec);
  const auto central = central_envelope_avg(spec);
  const auto plot = [&](const std::vector<double>& rows, Rgb colour) {
    for (std::size_t t = 0; t < rows.size() && t < out.cols(); ++t) {
      const long r = std::lround(rows[t]);
      if (r >= 0 && static_cast<std::size_t>(r) < out.rows()) out(static_cast<std::size_t>(r), t) = colour;
    }
  };
  plot(env.lower, kLowerColour);
  plot(central, kCentralColour);
  plot(env.upper, kUpperColour);
  const auto column = [&](std::size_t c, Rgb colour) {
    if (c >= out.cols()) return;
    for (std::size_t r = 0; r < out.rows(); ++r) out(r, c) = colour;
  };
  for (const auto& e : events) {
    if (e.end > e.start) column(e.end - 1, kEndColour);
    column(e.start, kStartColour);
  }
  return out;
}

Matrix<Rgb> render_confusion(const Matrix<double>& percent, std::size_t cell) {
  Matrix<Rgb> out(percent.rows() * cell, percent.cols() * cell, Rgb{255, 255, 255});
  const auto mix = [](double t, double hi, double lo) {
    return static_cast<std::uint8_t>(std::lround(hi + (lo - hi) * t));
  };
  for (std::size_t i = 0; i < percent.rows(); ++i) {
    for (std::size_t j = 0; j < percent.cols(); ++j) {
      const double t = std::clamp(percent(i, j) / 100.0, 0.0, 1.0);
      const Rgb c{mix(t, 255, 8), mix(t, 255, 48), mix(t, 255, 107)};
      for (std::size_t y = 1; y < cell; ++y) {
        for (std::size_t x = 1; x < cell; ++x) out(i * cell + y, j * cell + x) = c;
      }
    }
  }
  return out;
}

PlotResult emit_plots(const fs::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  const fs::path root = manifest_path.parent_path();
  const Layout L{root};
  PlotResult res;
  std::error_code ec;
  fs::create_directories(L.plots(), ec);

  double dr = SpectrogramConfig{}.dynamic_range_db;
  if (m.find("config.json")) {
    try {
      dr = load_pipeline_config(L.config()).spectrogram.dynamic_range_db;
    } catch (const std::exception&) {
      res.missing.push_back("config.json");
    }
  }

  std::map<std::string, std::vector<EventInterval>> events;
  if (m.find("events/events.csv")) {
    try {
      for (const auto& r : read_events_csv(L.events() / "events.csv")) {
        events[r.spectrogram_id].push_back(r.interval);
      }
    } catch (const DataError&) {
      res.missing.push_back("events/events.csv");
    }
  } else {
    res.missing.push_back("events/events.csv");
  }

  for (const auto& entry : m.files) {
    const fs::path rel(entry.path);
    if (rel.parent_path() != "spectrograms" || rel.extension() != ".mds") continue;
    const std::string id = rel.stem().string();
    try {
      const auto f = read_spectrogram(root / rel);
      const fs::path out = L.plots() / (id + "_overlay.png");
      write_png_rgb(render_overlay(f.spec, events[id], dr), out);
      res.written.push_back(out);
    } catch (const DataError&) {
      res.missing.push_back(entry.path);
    }
  }

  if (m.find("report/report.json")) {
    try {
      const Json j = read_json_file(L.report() / "report.json");
      const Json& pct = j.at("test").at("confusion_percent");
      Matrix<double> p(pct.size(), pct.empty() ? 0 : pct.at(0).size());
      for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t k = 0; k < p.cols(); ++k) p(i, k) = pct.at(i).at(k).get<double>();
      }
      const fs::path out = L.plots() / "confusion.png";
      write_png_rgb(render_confusion(p), out);
      res.written.push_back(out);
    } catch (const std::exception&) {
      res.missing.push_back("report/report.json");
    }
  } else {
    res.missing.push_back("report/report.json");
  }
  return res;
}

}  // namespace mdhar
