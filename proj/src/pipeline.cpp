// Copyright 2026 The roomtone Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "roomtone/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "roomtone/dsp.hpp"
#include "roomtone/wav.hpp"

namespace roomtone::pipeline {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << text;
  if (!f) throw IoError("short write: " + path);
}

std::string decay_to_json(const sweep::DecayModel& model) {
  json j;
  j["t0"] = model.t0;
  j["bands"] = json::array();
  for (const auto& b : model.bands)
    j["bands"].push_back(
        {{"center_hz", b.center_hz}, {"A", b.amplitude}, {"gamma", b.rate}});
  return j.dump(2);
}

sweep::DecayModel decay_from_json(const std::string& text) {
  sweep::DecayModel model;
  try {
    const json j = json::parse(text);
    model.t0 = j.at("t0").get<double>();
    for (const auto& jb : j.at("bands"))
      model.bands.push_back({jb.at("center_hz").get<double>(),
                             jb.at("A").get<double>(),
                             jb.at("gamma").get<double>()});
  } catch (const json::exception& e) {
    throw InputError(std::string("decay json parse failure: ") + e.what());
  }
  return model;
}

std::string materials_to_json(const std::vector<Material>& materials,
                              const matopt::OptReport* report,
                              const std::vector<double>& band_centers) {
  json j;
  j["band_centers"] = band_centers;
  j["materials"] = json::array();
  for (const auto& m : materials)
    j["materials"].push_back({{"name", m.name}, {"reflectance", m.reflectance}});
  if (report) {
    json bands = json::array();
    for (std::size_t b = 0; b < report->bands.size(); ++b) {
      const auto& r = report->bands[b];
      bands.push_back({{"center_hz", band_centers.at(b)},
                       {"j_initial", r.j_initial},
                       {"j_final", r.j_final},
                       {"iterations", r.iterations},
                       {"gradient_norm", r.gradient_norm}});
    }
    j["report"] = {{"bands", bands}};
  }
  return j.dump(2);
}

std::vector<Material> materials_from_json(const std::string& text) {
  std::vector<Material> out;
  try {
    const json j = json::parse(text);
    for (const auto& jm : j.at("materials")) {
      Material m;
      m.name = jm.value("name", "");
      m.reflectance = jm.at("reflectance").get<std::vector<double>>();
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("materials json parse failure: ") + e.what());
  }
  return out;
}

std::string er_to_json(const erdur::ErResult& result, double window,
                       double threshold) {
  json j;
  j["t_er"] = result.t_er;
  j["pass_window_index"] = result.pass_window_index;
  j["window"] = window;
  j["threshold"] = threshold;
  j["windows"] = json::array();
  for (const auto& w : result.windows)
    j["windows"].push_back({{"start", w.start},
                            {"d_zenith", w.d_zenith},
                            {"d_azimuth", w.d_azimuth},
                            {"samples", w.sample_count}});
  return j.dump(2);
}

double er_from_json(const std::string& text) {
  try {
    return json::parse(text).at("t_er").get<double>();
  } catch (const json::exception& e) {
    throw InputError(std::string("er json parse failure: ") + e.what());
  }
}

std::string modulation_to_json(const irsynth::ModulationCurve& curve) {
  json j;
  j["rate"] = curve.rate;
  j["ratio"] = curve.ratio;
  return j.dump(2);
}

irsynth::ModulationCurve modulation_from_json(const std::string& text) {
  irsynth::ModulationCurve curve;
  try {
    const json j = json::parse(text);
    curve.rate = j.at("rate").get<double>();
    curve.ratio = j.at("ratio").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw InputError(std::string("modulation json parse failure: ") + e.what());
  }
  return curve;
}

ImpulseResponse load_impulse_response(const std::string& path) {
  const Signal s = wav::read_wav_mono(path);
  ImpulseResponse ir;
  ir.rate = s.rate;
  ir.samples = s.samples;
  double peak = 0.0;
  for (double v : ir.samples) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0) throw InputError("impulse response is silent: " + path);
  const double onset = 0.1 * peak;  // -20 dB of peak
  for (std::size_t i = 0; i < ir.samples.size(); ++i)
    if (std::abs(ir.samples[i]) >= onset) {
      ir.first_arrival = static_cast<double>(i) / ir.rate;
      break;
    }
  return ir;
}

namespace {

class StageRunner {
 public:
  explicit StageRunner(PipelineReport& report) : report_(report) {}

  template <typename Fn>
  void run(const std::string& name, Fn&& fn) {
    StageReport stage;
    stage.name = name;
    const auto start = std::chrono::steady_clock::now();
    std::exception_ptr failure;
    try {
      fn();
      stage.ok = true;
    } catch (const std::exception& e) {
      stage.error = e.what();
      failure = std::current_exception();
    }
    stage.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    report_.stages.push_back(stage);
    if (!failure) return;
    // Re-throw in the original category with the stage named.
    const std::string msg = "stage '" + name + "' failed: " + stage.error;
    try {
      std::rethrow_exception(failure);
    } catch (const InputError&) {
      throw InputError(msg);
    } catch (const IoError&) {
      throw IoError(msg);
    } catch (...) {
      throw NumericError(msg);
    }
  }

 private:
  PipelineReport& report_;
};

std::string report_to_json(const PipelineReport& r) {
  json j;
  j["ok"] = r.ok;
  j["scale"] = r.scale;
  j["t_er"] = r.t_er;
  j["j_per_band"] = r.j_per_band;
  j["stages"] = json::array();
  for (const auto& s : r.stages) {
    json js = {{"name", s.name}, {"wall_ms", s.wall_ms}, {"ok", s.ok}};
    if (!s.error.empty()) js["error"] = s.error;
    j["stages"].push_back(js);
  }
  j["artifacts"] = json::array();
  for (const auto& [path, written] : r.artifacts)
    j["artifacts"].push_back({{"path", path}, {"written", written}});
  return j.dump(2);
}

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& config) {
  PipelineReport report;
  StageRunner runner(report);

  const std::string out_wav = config.out_dir + "/out.wav";
  const std::string out_meta = config.out_dir + "/out.json";
  const std::string out_materials = config.out_dir + "/materials.json";
  const std::string out_er = config.out_dir + "/er.json";
  const std::string out_report = config.out_dir + "/report.json";

  auto mark = [&](const std::string& path) {
    report.artifacts.emplace_back(path, true);
  };

  Scene scene;
  ImpulseResponse measured;
  Signal dry;
  Trajectory trajectory;
  sweep::DecayModel decay;
  PathSet paths;
  matopt::OptReport fit;
  erdur::ErResult er;
  irsynth::ModulationCurve modulation;
  Vec3 source = config.source;
  Vec3 mic;

  TraceOptions trace_opts;
  trace_opts.receiver_radius = config.receiver_radius;
  trace_opts.threads = config.threads;

  try {
    runner.run("scene", [&] {
      scene = load_scene(config.scene_path);
      trajectory = load_trajectory(config.trajectory_path);
      if (trajectory.samples.empty())
        throw InputError("trajectory has no samples");
      dry = wav::read_wav_mono(config.dry_path);
    });

    runner.run("ir-analysis", [&] {
      measured = load_impulse_response(config.ir_path);
      // Everything downstream runs at the internal rate.
      if (measured.rate != kDefaultRate) {
        Signal s;
        s.rate = measured.rate;
        s.samples = measured.samples;
        s = dsp::resample(s, kDefaultRate);
        ImpulseResponse r;
        r.rate = kDefaultRate;
        r.samples = std::move(s.samples);
        double peak = 0.0;
        for (double v : r.samples) peak = std::max(peak, std::abs(v));
        if (peak <= 0.0) throw InputError("impulse response is silent");
        for (std::size_t i = 0; i < r.samples.size(); ++i)
          if (std::abs(r.samples[i]) >= 0.1 * peak) {
            r.first_arrival = static_cast<double>(i) / r.rate;
            break;
          }
        measured = std::move(r);
      }
      if (dry.rate != kDefaultRate) dry = dsp::resample(dry, kDefaultRate);
      decay = sweep::fit_decay_model(measured, scene.band_centers);
    });

    runner.run("calibrate", [&] {
      mic = config.mic.value_or(trajectory.samples.front().position);
      const auto cal =
          calibrate_scale(scene, source, mic, measured.first_arrival);
      scene = cal.scene;
      source = cal.source;
      mic = cal.listener;
      for (auto& s : trajectory.samples) s.position = s.position * cal.scale;
      report.scale = cal.scale;
    });

    runner.run("trace", [&] {
      double max_time = config.trace_max_time;
      if (max_time <= 0.0) {
        const double ir_len =
            static_cast<double>(measured.samples.size()) / measured.rate;
        max_time = std::clamp(0.8 * ir_len, 0.1, 1.0);
      }
      paths = tracer::trace_paths(scene, source, mic, config.ray_budget,
                                  max_time, config.seed, trace_opts);
      if (paths.paths.empty())
        throw NumericError("no paths reached the measurement mic");
    });

    runner.run("fit-materials", [&] {
      auto problem = matopt::make_problem(
          paths, decay, static_cast<int>(scene.materials.size()));
      matopt::OptimizeOptions opts;
      opts.threads = config.threads;
      fit = matopt::optimize_materials(problem, opts);
      const auto table = fit.reflectance_table();
      for (std::size_t m = 0; m < scene.materials.size(); ++m)
        scene.materials[m].reflectance = table[m];
      for (const auto& b : fit.bands) report.j_per_band.push_back(b.j_final);
      write_text_file(out_materials,
                      materials_to_json(scene.materials, &fit,
                                        scene.band_centers));
      mark(out_materials);
    });

    runner.run("er-duration", [&] {
      const auto result = erdur::find_er_duration(
          paths, config.er_window, config.er_threshold, /*horizon=*/1.0);
      if (!result)
        throw NumericError("no window passed the isotropy test");
      er = *result;
      report.t_er = er.t_er;
      write_text_file(out_er,
                      er_to_json(er, config.er_window, config.er_threshold));
      mark(out_er);
    });

    runner.run("modulation", [&] {
      const auto simulated = matopt::simulate_ir_from_paths(
          paths, scene.reflectance_table(), measured.rate,
          scene.band_centers);
      modulation =
          irsynth::compute_modulation(measured, simulated, decay.t0);
    });

    runner.run("synth", [&] {
      ambi::RenderOptions opts;
      opts.source = source;
      opts.ray_budget = config.ray_budget;
      opts.seed = config.seed;
      opts.order = config.order;
      opts.trace = trace_opts;
      opts.modulation = modulation;
      auto buffer = ambi::render_trajectory(dry, trajectory, scene, measured,
                                            er.t_er, opts);
      if (config.sn3d) ambi::to_sn3d(buffer);
      const double gain = ambi::limit_peak(buffer);

      wav::WavSpec spec;
      spec.channels = buffer.channel_count();
      spec.rate = buffer.rate;
      spec.format = wav::SampleFormat::float32;
      wav::write_wav(out_wav, buffer.channels, spec);
      mark(out_wav);

      json meta;
      meta["order"] = buffer.order;
      meta["normalization"] = config.sn3d ? "sn3d" : "paper";
      meta["channel_order"] = "ACN";
      meta["gain"] = gain;
      meta["trajectory_meta"] = json::parse(write_trajectory(trajectory));
      write_text_file(out_meta, meta.dump(2));
      mark(out_meta);
    });

    report.ok = true;
  } catch (...) {
    report.ok = false;
    write_text_file(out_report, report_to_json(report));
    report.artifacts.emplace_back(out_report, true);
    throw;
  }

  write_text_file(out_report, report_to_json(report));
  report.artifacts.emplace_back(out_report, true);
  return report;
}

}  // namespace roomtone::pipeline
