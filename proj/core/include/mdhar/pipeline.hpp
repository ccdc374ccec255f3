#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdhar/activity.hpp"
#include "mdhar/artifacts.hpp"
#include "mdhar/image_io.hpp"
#include "mdhar/nnet/train.hpp"
#include "mdhar/radar_params.hpp"
#include "mdhar/scene_synth.hpp"
#include "mdhar/segment.hpp"
#include "mdhar/tfproc.hpp"

namespace mdhar {

/// Look angles processed for every cube, as broadside offsets: the
/// broadside beam followed by the +30 and -30 degree beams.
inline constexpr std::array<double, 3> kLookOffsets = {0.0, 30.0, -30.0};

/// Per-class example counts proportional to the recorded trial counts
/// (forward 771, backward 498, bending 120, standing 71, sitting 131,
/// forward +30 13, forward -30 41, backward +30 31, backward -30 40),
/// scaled and rounded, never below two.
std::array<std::size_t, kNumClasses> trial_counts(double scale);

struct SpectrogramConfig {
  std::size_t window = 128;
  std::size_t hop = 0;          // 0: choose the hop that yields `frames` frames
  std::size_t frames = 128;
  double dynamic_range_db = 60.0;
  double min_range_m = 0.5;
  double max_range_m = 4.0;

  std::size_t hop_for(const RadarParams& radar) const;
  void validate(const RadarParams& radar) const;  // throws ConfigError
};

/// Radar defaults for synthetic scenes, noise variance 0.01.
RadarParams pipeline_radar();
/// Training defaults for the synthetic run, mini-batches of eight.
nnet::TrainConfig pipeline_train();

struct PipelineConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "mdhar_run";
  RadarParams radar = pipeline_radar();
  std::array<std::size_t, kNumClasses> class_counts = trial_counts(0.05);
  SpectrogramConfig spectrogram{};
  TriggerConfig trigger{};
  bool calibrate = true;  // derive thresholds from a non-motion observation
  nnet::TrainConfig train = pipeline_train();
  bool keep_cubes = true;

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
};

/// Parses a config document. Unknown keys and bad values raise ConfigError.
/// `scenes` accepts either {"class_counts": {name: n}} or {"trial_scale": s}.
PipelineConfig parse_pipeline_config(std::string_view json_text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
/// The run's own copy leaves out output_dir so the artifacts do not depend on
/// where they are written.
std::string pipeline_config_json(const PipelineConfig& cfg, bool with_output_dir = true);

/// Relative output directories resolve under $MDHAR_OUTPUT_ROOT when set.
std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

struct ScenePlan {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<PersonMotion> persons;
};

/// Scenes realising the per-class counts. Broadside classes become
/// single-person scenes of up to three activities; the angled classes become
/// two-person scenes at +30 and -30 degrees taking turns. Trajectories stay
/// inside the collapsed range window.
std::vector<ScenePlan> plan_scenes(const PipelineConfig& cfg);

/// Every person static at 0, +30 and -30 degrees.
ScenePlan calibration_scene(const PipelineConfig& cfg);

/// Beamform at `look_offset_deg`, range-FFT, collapse the configured range
/// window and form the power spectrogram.
Spectrogram beam_spectrogram(const RawDataCube& cube, double look_offset_deg,
                             const SpectrogramConfig& cfg);

/// Ground-truth pulse interval to the frames whose centre falls inside it.
std::pair<std::size_t, std::size_t> pulses_to_frames(std::uint32_t begin, std::uint32_t end,
                                                     std::size_t window, std::size_t hop);

/// Class of the ground-truth activity overlapping `event` the most, among
/// persons standing at the beam's look angle.
std::optional<ActivityClass> label_event(const EventInterval& event,
                                         const std::vector<PersonTruth>& truth,
                                         double look_offset_deg, std::size_t window,
                                         std::size_t hop);

/// Trigger signal of a spectrogram: Doppler offset of the dual central envelope.
std::vector<double> spectrogram_trigger_signal(const Spectrogram& spec);

/// Three-branch example from `<dir>/<id>.json` and its PNG planes.
nnet::LabeledExample load_example(const std::filesystem::path& sidecar);
/// All examples below `dir`, ordered by id.
std::vector<nnet::LabeledExample> load_examples(const std::filesystem::path& dir);

/// Confusion matrix CSV with one decimal, rows rounded by largest remainder
/// so every non-empty row sums to exactly 100.0. Empty rows are omitted.
std::string confusion_csv(const nnet::EvalReport& report);

enum class Stage { Synth, Spectrograms, Segment, Train, Eval };

std::optional<Stage> parse_stage(std::string_view name);
std::string_view stage_name(Stage s);

struct RunOptions {
  Stage from = Stage::Synth;
  std::ostream* log = nullptr;
};

/// Trains on every example in `examples_dir`; writes checkpoint.mdn and
/// training.json (loss history and the split by id) to `model_dir`.
void train_stage(const std::filesystem::path& examples_dir, const std::filesystem::path& model_dir,
                 const nnet::TrainConfig& cfg, const RunOptions& opts = {});

/// Evaluates a trained model on its recorded split; writes report.json and
/// confusion.csv (held-out set) to `report_dir`.
void eval_stage(const std::filesystem::path& model_dir, const std::filesystem::path& examples_dir,
                const std::filesystem::path& report_dir, const RunOptions& opts = {});

/// Runs the stages from `opts.from` onwards, writes the plots and the
/// manifest, and returns the manifest. Earlier stages' artifacts are read
/// from the output directory.
Manifest run_pipeline(const PipelineConfig& cfg, const RunOptions& opts = {});

struct PlotResult {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> missing;  // artifacts a plot needed but could not read
};

/// Envelope overlay per spectrogram and a confusion heatmap, written under
/// `plots/` next to the manifest. Missing inputs are reported, not thrown.
PlotResult emit_plots(const std::filesystem::path& manifest_path);

inline constexpr Rgb kStartColour{0, 255, 0};
inline constexpr Rgb kEndColour{255, 0, 0};
inline constexpr Rgb kUpperColour{255, 255, 0};
inline constexpr Rgb kCentralColour{0, 255, 255};
inline constexpr Rgb kLowerColour{255, 0, 255};

/// Grayscale spectrogram image at one pixel per bin and frame, envelopes
/// drawn over it, then each interval's start column and end-1 column.
Matrix<Rgb> render_overlay(const Spectrogram& spec, const std::vector<EventInterval>& events,
                           double dynamic_range_db);

/// White-to-blue heatmap of row percentages, `cell` pixels per entry.
Matrix<Rgb> render_confusion(const Matrix<double>& percent, std::size_t cell = 24);

}  // namespace mdhar
