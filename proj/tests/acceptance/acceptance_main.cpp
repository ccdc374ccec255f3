#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdhar/beamform.hpp"
#include "mdhar/nnet/adam.hpp"
#include "mdhar/pipeline.hpp"
#include "mdhar/scene_synth.hpp"
#include "mdhar/segment.hpp"
#include "mdhar/tfproc.hpp"
#include "nnet_oracles.hpp"
#include "oracles.hpp"
#include "json.hpp"

using namespace mdhar;
using cd = std::complex<double>;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PersonMotion point_source(double azimuth, double range) {
  PersonMotion pm;
  pm.azimuth_deg = azimuth;
  pm.initial_range = range;
  pm.limb_amplitude = 0.0;
  return pm;
}

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

Outcome beamformer_gain() {
  const auto t0 = std::chrono::steady_clock::now();
  RadarParams p;
  p.num_pulses = 8;
  p.noise_variance = 0.0;
  double gain_err = 0.0;
  for (double deg : {60.0, 90.0, 120.0}) {
    const auto cube = synthesize_cube({point_source(deg, 2.1)}, p, 1);
    const auto y = beamform(cube, deg);
    for (std::size_t n = 0; n < y.size(); ++n) {
      const double src = std::abs(cube.samples(n, 0));
      if (src > 0.0) gain_err = std::max(gain_err, std::abs(std::abs(y[n]) - 4.0 * src) / (4.0 * src));
    }
  }
  double af_err = 0.0;
  const std::pair<double, double> pairs[] = {{120.0, 60.0}, {100.0, 70.0}, {45.0, 90.0}, {75.0, 110.0}};
  for (auto [source, look] : pairs) {
    const auto cube = synthesize_cube({point_source(source, 1.7)}, p, 1);
    const auto y = beamform(cube, look);
    const double af = brute_array_factor(source, look, p);
    for (std::size_t n = 0; n < y.size(); ++n) {
      const double src = std::abs(cube.samples(n, 0));
      if (src == 0.0) continue;
      const double expected = af * src;
      af_err = std::max(af_err, std::abs(std::abs(y[n]) - expected) / std::max(expected, src));
    }
  }
  const double secs = seconds_since(t0);
  return {gain_err < 1e-12 && af_err < 1e-9 && secs < 1.0,
          fmt("gain rel err %.2e, array factor rel err %.2e, %.3f s", gain_err, af_err, secs)};
}

Outcome transform_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const std::size_t P = 512, Q = 20;
  const auto x = test::random_complex(P * Q, rng);
  const auto rm = range_map(reshape_pulses(x, P));
  double range_err = 0.0, parseval_err = 0.0;
  for (std::size_t q = 0; q < Q; ++q) {
    const std::vector<cd> col(x.begin() + static_cast<long>(q * P), x.begin() + static_cast<long>((q + 1) * P));
    const auto ref = test::direct_dft(col);
    double err = 0.0, norm = 0.0, te = 0.0, fe = 0.0;
    for (std::size_t l = 0; l < P; ++l) {
      err = std::max(err, std::abs(rm.values(l, q) - ref[l]));
      norm = std::max(norm, std::abs(ref[l]));
      te += std::norm(col[l]);
      fe += std::norm(rm.values(l, q));
    }
    range_err = std::max(range_err, err / norm);
    parseval_err = std::max(parseval_err, std::abs(fe - P * te) / (P * te));
  }

  const std::size_t H = 128, hop = 93;
  const auto w = hann_window(H);
  double spec_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    SlowTimeSignal v{test::random_complex(H + hop * 4, rng), 0, 0};
    const auto s = spectrogram(v, w, hop);
    for (std::size_t t = 0; t < s.frames(); ++t) {
      std::vector<cd> seg(H);
      for (std::size_t i = 0; i < H; ++i) seg[i] = w[i] * v.values[t * hop + i];
      const auto X = test::direct_dft(seg);
      double peak = 0.0, err = 0.0;
      for (std::size_t k = 0; k < H; ++k) peak = std::max(peak, std::norm(X[k]));
      for (std::size_t k = 0; k < H; ++k) {
        err = std::max(err, std::abs(s.power((k + H / 2) % H, t) - std::norm(X[k])));
      }
      spec_err = std::max(spec_err, err / peak);
    }
  }
  const double secs = seconds_since(t0);
  return {range_err < 1e-6 && spec_err < 1e-6 && parseval_err < 1e-9 && secs < 10.0,
          fmt("range rel err %.2e, spectrogram rel err %.2e, Parseval %.2e, %.2f s", range_err,
              spec_err, parseval_err, secs)};
}

std::size_t crossing_up(const std::vector<double>& col, double fraction) {
  double total = 0.0;
  for (double x : col) total += x;
  double acc = 0.0;
  for (std::size_t k = 0; k < col.size(); ++k) {
    acc += col[k];
    if (acc >= fraction * total) return k;
  }
  return col.size() - 1;
}

Matrix<double> random_power(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution sparse(0.3);
  Matrix<double> m(rows, cols);
  for (auto& x : m.data()) x = sparse(rng) ? e(rng) : 0.0;
  for (std::size_t c = 0; c < cols; ++c) m(rows / 3, c) += 1e-3;  // no silent frames
  return m;
}

Outcome envelope_oracle() {
  std::mt19937_64 rng(202);
  Spectrogram s;
  s.power = random_power(128, 100, rng);
  const auto env = envelopes(s);
  std::size_t mismatches = 0;
  for (std::size_t n = 0; n < 100; ++n) {
    std::vector<double> col(128);
    for (std::size_t r = 0; r < 128; ++r) col[r] = s.power(r, n);
    mismatches += env.lower[n] != static_cast<double>(crossing_up(col, 0.03));
    mismatches += env.central[n] != static_cast<double>(crossing_up(col, 0.50));
    mismatches += env.upper[n] != static_cast<double>(crossing_up(col, 0.97));
  }
  Spectrogram fuzz;
  fuzz.power = random_power(128, 10000, rng);
  const auto fe = envelopes(fuzz);
  std::size_t disordered = 0;
  for (std::size_t n = 0; n < 10000; ++n) {
    disordered += !(fe.lower[n] <= fe.central[n] && fe.central[n] <= fe.upper[n]);
  }
  return {mismatches == 0 && disordered == 0,
          fmt("%zu oracle mismatches on 100 frames, %zu ordering violations on 10000", mismatches,
              disordered)};
}

double iou(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
  const double inter = std::max(0.0, static_cast<double>(std::min(a1, b1)) -
                                         static_cast<double>(std::max(a0, b0)));
  return inter / static_cast<double>(std::max(a1, b1) - std::min(a0, b0));
}

Outcome sta_lta_boundaries() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::size_t> count(1, 3), len(60, 120), gap(40, 70);
  std::uniform_real_distribution<double> noise(0.0, 1.0), amp(5.0, 8.0);
  TriggerConfig cfg;
  cfg.sigma1 = 2.0;
  cfg.sigma3 = 1.5;
  std::size_t wrong_count = 0;
  double worst_iou = 1.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::size_t, std::size_t>> truth;
    std::size_t t = 30;
    const std::size_t k = count(rng);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t L = len(rng);
      truth.emplace_back(t, t + L);
      t += L + gap(rng);
    }
    std::vector<double> sig(t);
    for (auto& x : sig) x = noise(rng);
    for (auto [b, e] : truth) {
      const double a = amp(rng);
      for (std::size_t i = b; i < e; ++i) sig[i] += a;
    }
    const auto ev = detect_events(sig, cfg);
    if (ev.size() != truth.size()) {
      ++wrong_count;
      continue;
    }
    for (std::size_t i = 0; i < ev.size(); ++i) {
      worst_iou = std::min(worst_iou, iou(ev[i].start, ev[i].end, truth[i].first, truth[i].second));
    }
  }
  const double secs = seconds_since(t0);
  return {wrong_count == 0 && worst_iou >= 0.8 && secs < 5.0,
          fmt("%zu/50 wrong event counts, worst IoU %.3f, %.3f s", wrong_count, worst_iou, secs)};
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto checks = test::gradient_checks(505);
  double worst = 0.0;
  std::string worst_layer;
  for (const auto& c : checks) {
    if (c.max_rel_error >= worst) {
      worst = c.max_rel_error;
      worst_layer = c.layer;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60.0,
          fmt("%zu checks, worst %.2e (%s), %.2f s", checks.size(), worst, worst_layer.c_str(), secs)};
}

Outcome adam_oracle() {
  using namespace nnet;
  std::mt19937_64 rng(606);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Parameter<double>> params = {{"w", {40}, std::vector<double>(40)}};
  for (auto& v : params[0].value) v = n(rng);
  const auto initial = params[0].value;
  AdamConfig cfg;
  cfg.learning_rate = 1e-2;
  AdamState<double> state{{std::vector<double>(40)}, {std::vector<double>(40)}, 0};
  std::vector<std::vector<double>> grads;
  double worst = 0.0;
  for (int t = 1; t <= 10; ++t) {
    ParamBuffers<double> g = {std::vector<double>(40)};
    for (auto& e : g[0]) e = n(rng);
    grads.push_back(g[0]);
    adam_step(state, params, g, cfg);
    for (std::size_t k = 0; k < 40; ++k) {
      double theta = initial[k], m = 0.0, v = 0.0;
      for (int s = 1; s <= t; ++s) {
        const double gk = grads[static_cast<std::size_t>(s - 1)][k];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * gk;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * gk * gk;
        theta -= cfg.learning_rate * (m / (1.0 - std::pow(cfg.beta1, s))) /
                 (std::sqrt(v / (1.0 - std::pow(cfg.beta2, s))) + cfg.epsilon);
      }
      worst = std::max(worst, std::abs(params[0].value[k] - theta));
    }
  }
  return {worst <= 1e-12, fmt("worst trajectory deviation %.2e over 10 steps", worst)};
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig end_to_end_config(const fs::path& out) {
  PipelineConfig cfg;
  cfg.seed = 7;
  cfg.output_dir = out;
  cfg.class_counts.fill(20);
  cfg.keep_cubes = false;
  return cfg;
}

double row_sum_error(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  double worst = 0.0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    double sum = 0.0;
    while (std::getline(ss, cell, ',')) sum += std::stod(cell);
    worst = std::max(worst, std::abs(sum - 100.0));
    ++rows;
  }
  return rows ? worst : INFINITY;
}

Outcome end_to_end(const fs::path& out, double& secs) {
  const auto t0 = std::chrono::steady_clock::now();
  run_pipeline(end_to_end_config(out));
  secs = seconds_since(t0);
  const auto report = nlohmann::json::parse(read_text(out / "report" / "report.json"));
  const double train_acc = report["train"]["accuracy"].get<double>();
  const double test_acc = report["test"]["accuracy"].get<double>();
  const double row_err = row_sum_error(out / "report" / "confusion.csv");
  return {test_acc >= 0.8 && train_acc >= 0.95 && secs < 900.0 && row_err <= 0.1,
          fmt("held-out %.1f%%, train %.1f%%, %.0f s, worst confusion row |sum-100| %.2f",
              100.0 * test_acc, 100.0 * train_acc, secs, row_err)};
}

Outcome two_person_separation() {
  const PipelineConfig cfg;
  PersonMotion fwd, back;
  fwd.azimuth_deg = offset_to_azimuth(30.0);
  fwd.initial_range = 3.2;
  fwd.schedule = {{ActivityClass::WalkForwardP30, 3.0, 2.0}, {ActivityClass::WalkForwardP30, 7.0, 2.0}};
  back.azimuth_deg = offset_to_azimuth(-30.0);
  back.initial_range = 1.2;
  back.schedule = {{ActivityClass::WalkBackM30, 3.5, 2.0}, {ActivityClass::WalkBackM30, 7.5, 2.0}};
  const auto cube = synthesize_cube({fwd, back}, cfg.radar, 808);
  auto mean_doppler = [&](double look) {
    const auto s = beam_spectrogram(cube, look, cfg.spectrogram);
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < s.freq_bins(); ++r) {
      for (std::size_t t = 0; t < s.frames(); ++t) {
        num += s.power(r, t) * s.freq_axis[r];
        den += s.power(r, t);
      }
    }
    return num / den;
  };
  const double plus = mean_doppler(30.0), minus = mean_doppler(-30.0);
  return {plus > 0.0 && minus < 0.0,
          fmt("mean Doppler %+.2f Hz at +30, %+.2f Hz at -30", plus, minus)};
}

Outcome determinism(const fs::path& first, const fs::path& second) {
  run_pipeline(end_to_end_config(second));
  const auto a = read_text(first / kManifestName);
  const auto b = read_text(second / kManifestName);
  const auto files = read_manifest(first / kManifestName).files.size();
  return {!a.empty() && a == b, fmt("%zu files, manifests %s", files, a == b ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  fs::path work = fs::temp_directory_path() / "mdhar_acceptance";
  app.add_option("--work-dir", work, "Scratch directory for the end-to-end runs");
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(work);
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %d %s: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "beamformer coherent gain", beamformer_gain);
  report(2, "DFT/STFT oracle equivalence", transform_oracles);
  report(3, "envelope oracle", envelope_oracle);
  report(4, "STA/LTA boundary accuracy", sta_lta_boundaries);
  report(5, "gradient correctness", gradient_correctness);
  report(6, "Adam oracle", adam_oracle);
  double secs = 0.0;
  report(7, "end-to-end synthetic run", [&] { return end_to_end(work / "run_a", secs); });
  report(8, "two-person separation", two_person_separation);
  report(9, "determinism", [&] { return determinism(work / "run_a", work / "run_b"); });

  fs::remove_all(work);
  return failures == 0 ? 0 : 1;
}
