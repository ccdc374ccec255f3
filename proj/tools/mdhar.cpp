#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mdhar/artifacts.hpp"
#include "mdhar/beamform.hpp"
#include "mdhar/cube_io.hpp"
#include "mdhar/error.hpp"
#include "mdhar/image_io.hpp"
#include "mdhar/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mdhar;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  PipelineConfig load() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_pipeline_config(config);
    if (seed) cfg.seed = *seed;
    return cfg;
  }
  std::ostream* log() const { return quiet ? nullptr : &std::cerr; }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Override the config seed");
  app->add_flag("-q,--quiet", c.quiet, "No progress output");
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Micro-Doppler activity recognition: synthesis, beamforming, segmentation, CNN"};
  app.require_subcommand(1);
  Common common;

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesise a raw data cube from a scene description");
  add_common(synth, common);
  std::string scene_file, cube_out, truth_out;
  std::optional<std::uint32_t> pulses;
  synth->add_option("--scene", scene_file, "Scene JSON {\"persons\": [...]}")->required()->check(CLI::ExistingFile);
  synth->add_option("-o,--out", cube_out, "Cube file (.mdc)")->required();
  synth->add_option("--truth", truth_out, "Ground-truth sidecar (default: <out>.json)");
  synth->add_option("--pulses", pulses, "Override the number of pulses");

  // beamform
  auto* bf = app.add_subcommand("beamform", "Delay-and-sum a cube towards a broadside offset");
  add_common(bf, common);
  std::string bf_cube, bf_out;
  double bf_angle = 0.0;
  bf->add_option("--cube", bf_cube, "Cube file")->required()->check(CLI::ExistingFile);
  bf->add_option("--angle", bf_angle, "Look angle as broadside offset, degrees (0, 30, -30)");
  bf->add_option("-o,--out", bf_out, "Beamformed vector (.mbf)")->required();

  // spectrogram
  auto* sp = app.add_subcommand("spectrogram", "Range-collapse a beamformed vector and form its spectrogram");
  add_common(sp, common);
  std::string sp_in, sp_out, sp_png;
  sp->add_option("--beam", sp_in, "Beamformed vector (.mbf)")->required()->check(CLI::ExistingFile);
  sp->add_option("-o,--out", sp_out, "Spectrogram file (.mds)")->required();
  sp->add_option("--png", sp_png, "Also write the normalised image");

  // segment
  auto* sg = app.add_subcommand("segment", "Detect activity events in spectrograms");
  add_common(sg, common);
  std::vector<std::string> sg_specs, sg_calib;
  std::string sg_out, sg_plots;
  sg->add_option("--spec", sg_specs, "Spectrogram files (.mds)")->required()->check(CLI::ExistingFile);
  sg->add_option("--calib", sg_calib, "Non-motion spectrograms for threshold calibration")
      ->check(CLI::ExistingFile);
  sg->add_option("-o,--out", sg_out, "Events CSV")->required();
  sg->add_option("--plots", sg_plots, "Directory for envelope overlays");

  // train
  auto* tr = app.add_subcommand("train", "Train the three-branch CNN on segmented examples");
  add_common(tr, common);
  std::string tr_examples, tr_model;
  tr->add_option("--examples", tr_examples, "Examples directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("-o,--out", tr_model, "Model directory")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a trained model on its held-out split");
  add_common(ev, common);
  std::string ev_model, ev_examples, ev_out;
  ev->add_option("--model", ev_model, "Model directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--examples", ev_examples, "Examples directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("-o,--out", ev_out, "Report directory")->required();

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "Run the full chain and write a manifest");
  add_common(pl, common);
  std::string pl_out, pl_from = "synth";
  std::optional<bool> pl_keep;
  bool pl_print = false;
  pl->add_option("-o,--out", pl_out, "Output directory (overrides config and MDHAR_OUTPUT_ROOT)");
  pl->add_option("--from", pl_from, "First stage to run: synth, spectrograms, segment, train, eval")
      ->check(CLI::IsMember({"synth", "spectrograms", "segment", "train", "eval"}));
  pl->add_option("--keep-cubes", pl_keep, "Keep raw cubes on disk (true/false)");
  pl->add_flag("--print-config", pl_print, "Print the resolved config and exit");

  // plots
  auto* pt = app.add_subcommand("plots", "Render overlays and the confusion heatmap for a manifest");
  std::string pt_manifest;
  pt->add_option("manifest", pt_manifest, "manifest.json")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) {
      auto cfg = common.load();
      if (pulses) cfg.radar.num_pulses = *pulses;
      cfg.radar.validate();
      const auto persons = read_scene(scene_file);
      for (const auto& p : persons) p.validate();
      const auto cube = synthesize_cube(persons, cfg.radar, cfg.seed);
      ensure_parent(cube_out);
      write_cube(cube, cube_out);
      const fs::path truth = truth_out.empty() ? fs::path(cube_out).replace_extension(".json") : fs::path(truth_out);
      write_ground_truth(cube, truth, fs::path(cube_out).filename().string(), cfg.seed);
    } else if (*bf) {
      const auto cube = read_cube(bf_cube);
      const auto y = beamform(cube, offset_to_azimuth(bf_angle));
      ensure_parent(bf_out);
      write_beamformed(y, cube.params.samples_per_pulse, bf_angle, bf_out);
    } else if (*sp) {
      const auto cfg = common.load();
      std::uint32_t P = 0;
      double look = 0.0;
      const auto y = read_beamformed(sp_in, &P, &look);
      RadarParams radar = cfg.radar;
      radar.samples_per_pulse = P;
      radar.num_pulses = static_cast<std::uint32_t>(y.size() / P);
      cfg.spectrogram.validate(radar);
      const auto rm = range_map(reshape_pulses(y, P), radar);
      const auto [lo, hi] = range_bins_for(radar, cfg.spectrogram.min_range_m, cfg.spectrogram.max_range_m);
      const auto spec = spectrogram(collapse_range(rm, lo, hi), hann_window(cfg.spectrogram.window),
                                    cfg.spectrogram.hop_for(radar), 1.0 / radar.pri);
      ensure_parent(sp_out);
      write_spectrogram(spec, 1.0 / radar.pri, look, sp_out);
      if (!sp_png.empty()) write_png_gray(to_image(spec, cfg.spectrogram.dynamic_range_db), sp_png);
    } else if (*sg) {
      const auto cfg = common.load();
      TriggerConfig trig = cfg.trigger;
      if (!sg_calib.empty()) {
        std::vector<double> sig;
        for (const auto& c : sg_calib) {
          const auto s = spectrogram_trigger_signal(read_spectrogram(c).spec);
          sig.insert(sig.end(), s.begin(), s.end());
        }
        trig = calibrate_thresholds(sig, trig);
        if (common.log()) {
          *common.log() << "calibrated sigma1 " << trig.sigma1 << ", sigma3 " << trig.sigma3 << "\n";
        }
      }
      std::vector<EventRow> rows;
      if (!sg_plots.empty()) fs::create_directories(sg_plots);
      for (const auto& path : sg_specs) {
        const auto f = read_spectrogram(path);
        const auto events = detect_events(spectrogram_trigger_signal(f.spec), trig);
        const std::string id = fs::path(path).stem().string();
        for (const auto& e : events) rows.push_back({id, f.look_offset_deg, e, std::nullopt});
        if (!sg_plots.empty()) {
          write_png_rgb(render_overlay(f.spec, events, cfg.spectrogram.dynamic_range_db),
                        fs::path(sg_plots) / (id + "_overlay.png"));
        }
      }
      ensure_parent(sg_out);
      write_events_csv(rows, sg_out);
    } else if (*tr) {
      const auto cfg = common.load();
      train_stage(tr_examples, tr_model, cfg.train, {Stage::Train, common.log()});
    } else if (*ev) {
      eval_stage(ev_model, ev_examples, ev_out, {Stage::Eval, common.log()});
    } else if (*pl) {
      auto cfg = common.load();
      if (!pl_out.empty()) cfg.output_dir = fs::absolute(pl_out);
      if (pl_keep) cfg.keep_cubes = *pl_keep;
      cfg.validate();
      if (pl_print) {
        std::cout << pipeline_config_json(cfg);
        return 0;
      }
      const auto manifest = run_pipeline(cfg, {*parse_stage(pl_from), common.log()});
      std::cout << (resolve_output_dir(cfg.output_dir) / kManifestName).string() << " ("
                << manifest.files.size() << " files)\n";
    } else if (*pt) {
      const auto res = emit_plots(pt_manifest);
      for (const auto& p : res.written) std::cout << p.string() << "\n";
      for (const auto& m : res.missing) std::cerr << "missing: " << m << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
