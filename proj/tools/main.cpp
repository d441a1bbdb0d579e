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

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "roomtone/ambi.hpp"
#include "roomtone/dsp.hpp"
#include "roomtone/erdur.hpp"
#include "roomtone/matopt.hpp"
#include "roomtone/pipeline.hpp"
#include "roomtone/serialize.hpp"
#include "roomtone/sweep.hpp"
#include "roomtone/wav.hpp"

namespace {

using namespace roomtone;

Vec3 parse_vec3(const std::string& s) {
  Vec3 v;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &v.x, &v.y, &v.z) != 3)
    throw InputError("expected x,y,z triple, got '" + s + "'");
  return v;
}

Scene scene_with_materials(const std::string& scene_path,
                           const std::string& materials_path) {
  Scene scene = load_scene(scene_path);
  if (!materials_path.empty()) {
    const auto mats = pipeline::materials_from_json(
        pipeline::read_text_file(materials_path));
    if (mats.size() != scene.materials.size())
      throw InputError("materials file has " + std::to_string(mats.size()) +
                       " entries, scene has " +
                       std::to_string(scene.materials.size()));
    for (std::size_t i = 0; i < mats.size(); ++i)
      scene.materials[i].reflectance = mats[i].reflectance;
    validate_scene(scene);
  }
  return scene;
}

// Mono early IR (sum of ray kernels) from src to dst; used for door samples.
Signal mono_er_ir(const Scene& scene, const Vec3& src, const Vec3& dst,
                  uint64_t rays, double max_time, uint64_t seed, double rate,
                  const TraceOptions& trace) {
  const auto paths =
      tracer::trace_paths(scene, src, dst, rays, max_time, seed, trace);
  const filters::KernelBank bank(scene.band_centers, rate);
  Signal out;
  out.rate = rate;
  for (const auto& p : paths.paths) {
    const Signal k = irsynth::er_ray_ir(p, bank);
    if (k.samples.size() > out.samples.size())
      out.samples.resize(k.samples.size(), 0.0);
    for (std::size_t i = 0; i < k.samples.size(); ++i)
      out.samples[i] += k.samples[i];
  }
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"roomtone: scene-aware ambisonic room audio synthesis"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap worker threads (0 = all cores)");

  // ---- sweep gen / sweep deconvolve ----
  auto* sweep_cmd = app.add_subcommand("sweep", "sine sweep tools");
  sweep_cmd->require_subcommand(1);

  auto* gen = sweep_cmd->add_subcommand("gen", "generate exponential sweep");
  double g_f1 = 20.0, g_f2 = 20000.0, g_dur = 48.0, g_rate = 48000.0;
  std::string g_out;
  gen->add_option("--f1", g_f1, "start frequency (Hz)");
  gen->add_option("--f2", g_f2, "end frequency (Hz)");
  gen->add_option("--duration", g_dur, "sweep length (seconds)");
  gen->add_option("--rate", g_rate, "sample rate (Hz)");
  gen->add_option("-o,--output", g_out, "output WAV")->required();
  gen->callback([&] {
    wav::write_wav_mono(g_out, sweep::gen_sweep(g_f1, g_f2, g_dur, g_rate));
  });

  auto* dec = sweep_cmd->add_subcommand(
      "deconvolve", "recover an impulse response from a recorded sweep");
  std::string d_rec, d_sweep, d_out;
  dec->add_option("--recording", d_rec, "recorded sweep WAV")->required();
  dec->add_option("--sweep", d_sweep, "played sweep WAV")->required();
  dec->add_option("-o,--output", d_out, "output IR WAV")->required();
  dec->callback([&] {
    const auto ir = sweep::deconvolve_ir(wav::read_wav_mono(d_rec),
                                         wav::read_wav_mono(d_sweep));
    Signal s;
    s.rate = ir.rate;
    s.samples = ir.samples;
    wav::write_wav_mono(d_out, s);
    std::printf("first arrival: %.6f s\n", ir.first_arrival);
  });

  // ---- analyze decay ----
  auto* analyze = app.add_subcommand("analyze", "impulse response analysis");
  analyze->require_subcommand(1);
  auto* decay_cmd =
      analyze->add_subcommand("decay", "fit per-band exponential decay");
  std::string a_ir, a_out;
  double a_floor = -60.0;
  decay_cmd->add_option("--ir", a_ir, "measured IR WAV")->required();
  decay_cmd->add_option("--noise-floor-db", a_floor,
                        "fit gate below band peak (dB)");
  decay_cmd->add_option("-o,--output", a_out, "output decay JSON")->required();
  decay_cmd->callback([&] {
    const auto ir = pipeline::load_impulse_response(a_ir);
    const auto model =
        sweep::fit_decay_model(ir, default_band_centers(), a_floor);
    pipeline::write_text_file(a_out, pipeline::decay_to_json(model));
  });

  // ---- trace ----
  auto* trace_cmd = app.add_subcommand("trace", "stochastic path tracing");
  std::string t_scene, t_out, t_src, t_lst;
  uint64_t t_rays = 20000, t_seed = 0;
  double t_max = 0.5, t_radius = 0.25;
  trace_cmd->add_option("--scene", t_scene, "scene JSON")->required();
  trace_cmd->add_option("--source", t_src, "source position x,y,z (m)")
      ->required();
  trace_cmd->add_option("--listener", t_lst, "listener position x,y,z (m)")
      ->required();
  trace_cmd->add_option("--rays", t_rays, "ray budget");
  trace_cmd->add_option("--max-time", t_max, "path time cutoff (s)");
  trace_cmd->add_option("--seed", t_seed, "random seed");
  trace_cmd->add_option("--receiver-radius", t_radius,
                        "receiver sphere radius (m)");
  trace_cmd->add_option("-o,--output", t_out, "output paths.bin")->required();
  trace_cmd->callback([&] {
    const Scene scene = load_scene(t_scene);
    TraceOptions opts;
    opts.receiver_radius = t_radius;
    opts.threads = threads;
    const auto set =
        tracer::trace_paths(scene, parse_vec3(t_src), parse_vec3(t_lst),
                            t_rays, t_max, t_seed, opts);
    if (set.paths.empty())
      std::fprintf(stderr, "warning: zero paths found\n");
    serialize::write_pathset(set, t_out);
    std::printf("%zu paths\n", set.paths.size());
  });

  // ---- fit-materials ----
  auto* fit_cmd =
      app.add_subcommand("fit-materials", "inverse material estimation");
  std::string f_scene, f_paths, f_decay, f_out;
  double f_init = 0.5;
  fit_cmd->add_option("--scene", f_scene, "scene JSON")->required();
  fit_cmd->add_option("--paths", f_paths, "traced paths.bin")->required();
  fit_cmd->add_option("--decay", f_decay, "decay JSON")->required();
  fit_cmd->add_option("--init", f_init, "initial reflectance");
  fit_cmd->add_option("-o,--output", f_out, "output materials JSON")
      ->required();
  fit_cmd->callback([&] {
    Scene scene = load_scene(f_scene);
    const auto paths = serialize::read_pathset(f_paths);
    const auto decay =
        pipeline::decay_from_json(pipeline::read_text_file(f_decay));
    auto problem = matopt::make_problem(
        paths, decay, static_cast<int>(scene.materials.size()));
    matopt::OptimizeOptions opts;
    opts.init = f_init;
    opts.threads = threads;
    const auto report = matopt::optimize_materials(problem, opts);
    const auto table = report.reflectance_table();
    for (std::size_t m = 0; m < scene.materials.size(); ++m)
      scene.materials[m].reflectance = table[m];
    pipeline::write_text_file(
        f_out, pipeline::materials_to_json(scene.materials, &report,
                                           scene.band_centers));
  });

  // ---- er-duration ----
  auto* er_cmd =
      app.add_subcommand("er-duration", "find the ER/LR transition time");
  std::string e_paths, e_out;
  double e_window_ms = 10.0, e_threshold = 0.15, e_horizon = 1.0;
  er_cmd->add_option("--paths", e_paths, "traced paths.bin")->required();
  er_cmd->add_option("--window-ms", e_window_ms, "window length (ms)");
  er_cmd->add_option("--threshold", e_threshold, "KS pass threshold");
  er_cmd->add_option("--horizon", e_horizon, "search limit (s)");
  er_cmd->add_option("-o,--output", e_out, "output er JSON")->required();
  er_cmd->callback([&] {
    const auto paths = serialize::read_pathset(e_paths);
    const auto result = erdur::find_er_duration(
        paths, e_window_ms / 1000.0, e_threshold, e_horizon);
    if (!result)
      throw NumericError("no window passed the isotropy test within horizon");
    pipeline::write_text_file(
        e_out, pipeline::er_to_json(*result, e_window_ms / 1000.0,
                                    e_threshold));
    std::printf("t_er: %.4f s\n", result->t_er);
  });

  // ---- synth-ir ----
  auto* sir = app.add_subcommand(
      "synth-ir", "directional IR at one listener position");
  std::string si_scene, si_mats, si_ir, si_er, si_src, si_lst, si_out, si_mod;
  uint64_t si_rays = 20000, si_seed = 0;
  sir->add_option("--scene", si_scene, "scene JSON")->required();
  sir->add_option("--materials", si_mats, "fitted materials JSON");
  sir->add_option("--ir", si_ir, "measured IR WAV")->required();
  sir->add_option("--t-er", si_er, "er JSON from er-duration")->required();
  sir->add_option("--source", si_src, "source x,y,z (m)")->required();
  sir->add_option("--listener", si_lst, "listener x,y,z (m)")->required();
  sir->add_option("--modulation", si_mod, "modulation JSON");
  sir->add_option("--rays", si_rays, "ray budget");
  sir->add_option("--seed", si_seed, "random seed");
  sir->add_option("-o,--output", si_out, "output dir_ir.bin")->required();
  sir->callback([&] {
    const Scene scene = scene_with_materials(si_scene, si_mats);
    const auto measured = pipeline::load_impulse_response(si_ir);
    const double t_er =
        pipeline::er_from_json(pipeline::read_text_file(si_er));
    irsynth::SynthesisOptions opts;
    opts.ray_budget = si_rays;
    opts.seed = si_seed;
    opts.rate = measured.rate;
    opts.trace.threads = threads;
    if (!si_mod.empty())
      opts.modulation = pipeline::modulation_from_json(
          pipeline::read_text_file(si_mod));
    const auto ir = irsynth::synthesize_directional_ir(
        scene, parse_vec3(si_src), parse_vec3(si_lst), measured, t_er, opts);
    serialize::write_directional_ir(ir, measured.rate, si_out);
    std::printf("%zu early rays, t_er %.4f s\n", ir.entries.size(), ir.t_er);
  });

  // ---- synth ----
  auto* synth = app.add_subcommand(
      "synth", "render a moving-listener ambisonic track");
  std::string sy_scene, sy_mats, sy_ir, sy_er, sy_src, sy_traj, sy_dry,
      sy_out, sy_mod;
  uint64_t sy_rays = 20000, sy_seed = 0;
  int sy_order = 1;
  bool sy_sn3d = false;
  synth->add_option("--scene", sy_scene, "scene JSON")->required();
  synth->add_option("--materials", sy_mats, "fitted materials JSON");
  synth->add_option("--ir", sy_ir, "measured IR WAV")->required();
  synth->add_option("--t-er", sy_er, "er JSON from er-duration")->required();
  synth->add_option("--source", sy_src, "source x,y,z (m)")->required();
  synth->add_option("--trajectory", sy_traj, "trajectory JSON")->required();
  synth->add_option("--dry", sy_dry, "dry audio WAV")->required();
  synth->add_option("--order", sy_order, "ambisonic order (>=1)");
  synth->add_option("--modulation", sy_mod, "modulation JSON");
  synth->add_option("--rays", sy_rays, "ray budget per position");
  synth->add_option("--seed", sy_seed, "random seed");
  synth->add_flag("--sn3d", sy_sn3d, "write SN3D/AmbiX W normalization");
  synth->add_option("-o,--output", sy_out, "output multichannel WAV")
      ->required();
  synth->callback([&] {
    const Scene scene = scene_with_materials(sy_scene, sy_mats);
    const auto measured = pipeline::load_impulse_response(sy_ir);
    const double t_er =
        pipeline::er_from_json(pipeline::read_text_file(sy_er));
    const auto trajectory = load_trajectory(sy_traj);
    Signal dry = wav::read_wav_mono(sy_dry);
    if (dry.rate != measured.rate) dry = dsp::resample(dry, measured.rate);

    ambi::RenderOptions opts;
    opts.source = parse_vec3(sy_src);
    opts.ray_budget = sy_rays;
    opts.seed = sy_seed;
    opts.order = sy_order;
    opts.trace.threads = threads;
    if (!sy_mod.empty())
      opts.modulation = pipeline::modulation_from_json(
          pipeline::read_text_file(sy_mod));
    auto buffer =
        ambi::render_trajectory(dry, trajectory, scene, measured, t_er, opts);
    if (sy_sn3d) ambi::to_sn3d(buffer);
    const double gain = ambi::limit_peak(buffer);

    wav::WavSpec spec;
    spec.channels = buffer.channel_count();
    spec.rate = buffer.rate;
    wav::write_wav(sy_out, buffer.channels, spec);

    nlohmann::json meta;
    meta["order"] = buffer.order;
    meta["normalization"] = sy_sn3d ? "sn3d" : "paper";
    meta["channel_order"] = "ACN";
    meta["gain"] = gain;
    meta["trajectory_meta"] = nlohmann::json::parse(
        write_trajectory(trajectory));
    pipeline::write_text_file(sy_out + ".json", meta.dump(2));
  });

  // ---- crossroom ----
  auto* cross = app.add_subcommand(
      "crossroom", "late tail propagated between two rooms through a door");
  std::string c_scene1, c_mats1, c_ir1, c_er1;
  std::string c_scene2, c_mats2, c_ir2, c_er2;
  std::string c_src, c_lst, c_door_origin, c_door_u, c_door_v, c_out;
  double c_pitch = 0.25;
  uint64_t c_rays = 20000, c_seed = 0;
  cross->add_option("--scene1", c_scene1, "room 1 scene JSON")->required();
  cross->add_option("--materials1", c_mats1, "room 1 materials JSON");
  cross->add_option("--ir1", c_ir1, "room 1 measured IR WAV")->required();
  cross->add_option("--t-er1", c_er1, "room 1 er JSON")->required();
  cross->add_option("--scene2", c_scene2, "room 2 scene JSON")->required();
  cross->add_option("--materials2", c_mats2, "room 2 materials JSON");
  cross->add_option("--ir2", c_ir2, "room 2 measured IR WAV")->required();
  cross->add_option("--t-er2", c_er2, "room 2 er JSON")->required();
  cross->add_option("--source", c_src, "source in room 1, x,y,z (m)")
      ->required();
  cross->add_option("--listener", c_lst, "listener in room 2, x,y,z (m)")
      ->required();
  cross->add_option("--door-origin", c_door_origin, "door corner x,y,z (m)")
      ->required();
  cross->add_option("--door-u", c_door_u, "door edge vector x,y,z (m)")
      ->required();
  cross->add_option("--door-v", c_door_v, "second edge vector x,y,z (m)")
      ->required();
  cross->add_option("--pitch", c_pitch, "door sample spacing (m)");
  cross->add_option("--rays", c_rays, "ray budget per door sample");
  cross->add_option("--seed", c_seed, "random seed");
  cross->add_option("-o,--output", c_out, "output WAV of the cross-room tail")
      ->required();
  cross->callback([&] {
    const Scene scene1 = scene_with_materials(c_scene1, c_mats1);
    const Scene scene2 = scene_with_materials(c_scene2, c_mats2);
    const auto ir1 = pipeline::load_impulse_response(c_ir1);
    const auto ir2 = pipeline::load_impulse_response(c_ir2);
    if (ir1.rate != ir2.rate) throw InputError("IR sample rates differ");
    const double t_er1 =
        pipeline::er_from_json(pipeline::read_text_file(c_er1));
    const double t_er2 =
        pipeline::er_from_json(pipeline::read_text_file(c_er2));
    const Vec3 source = parse_vec3(c_src);
    const Vec3 listener = parse_vec3(c_lst);
    const Vec3 origin = parse_vec3(c_door_origin);
    const Vec3 u = parse_vec3(c_door_u);
    const Vec3 v = parse_vec3(c_door_v);

    const int nu = std::max(1, static_cast<int>(norm(u) / c_pitch));
    const int nv = std::max(1, static_cast<int>(norm(v) / c_pitch));
    const double area = (norm(u) / nu) * (norm(v) / nv);

    TraceOptions trace;
    trace.threads = threads;
    std::vector<Signal> er_s, er_d;
    std::vector<Vec3> samples;
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j)
        samples.push_back(origin + u * ((i + 0.5) / nu) +
                          v * ((j + 0.5) / nv));
    uint64_t seed = c_seed;
    for (const auto& p : samples) {
      er_s.push_back(
          mono_er_ir(scene1, source, p, c_rays, t_er1, seed++, ir1.rate,
                     trace));
      er_d.push_back(
          mono_er_ir(scene2, listener, p, c_rays, t_er2, seed++, ir2.rate,
                     trace));
    }

    // Tail scales come from the first door sample's traces.
    const auto paths1 = tracer::trace_paths(scene1, source, samples.front(),
                                            c_rays, t_er1, c_seed, trace);
    const auto paths2 = tracer::trace_paths(scene2, listener, samples.front(),
                                            c_rays, t_er2, c_seed, trace);
    const Signal lr1 = irsynth::lr_tail(ir1, t_er1, paths1);
    const Signal lr2 = irsynth::lr_tail(ir2, t_er2, paths2);

    const Signal out = irsynth::crossroom_lrir(lr1, lr2, er_s, er_d, area);
    wav::write_wav_mono(c_out, out);
    std::printf("%zu door samples, area %.4f m^2\n", samples.size(), area);
  });

  // ---- run (one-shot pipeline) ----
  auto* run = app.add_subcommand("run", "end-to-end pipeline");
  pipeline::PipelineConfig cfg;
  std::string r_src, r_mic;
  run->add_option("--scene", cfg.scene_path, "scene JSON")->required();
  run->add_option("--ir", cfg.ir_path, "measured IR WAV")->required();
  run->add_option("--dry", cfg.dry_path, "dry audio WAV")->required();
  run->add_option("--trajectory", cfg.trajectory_path, "trajectory JSON")
      ->required();
  run->add_option("--source", r_src, "source x,y,z (m)")->required();
  run->add_option("--mic", r_mic,
                  "measurement mic x,y,z (m); default first trajectory pos");
  run->add_option("--rays", cfg.ray_budget, "ray budget");
  run->add_option("--seed", cfg.seed, "random seed");
  run->add_option("--order", cfg.order, "ambisonic order");
  run->add_option("--receiver-radius", cfg.receiver_radius,
                  "receiver sphere radius (m)");
  run->add_flag("--sn3d", cfg.sn3d, "write SN3D/AmbiX W normalization");
  run->add_option("--out-dir", cfg.out_dir, "output directory");
  run->callback([&] {
    cfg.source = parse_vec3(r_src);
    if (!r_mic.empty()) cfg.mic = parse_vec3(r_mic);
    cfg.threads = threads;
    const auto report = pipeline::run_pipeline(cfg);
    for (const auto& s : report.stages)
      std::printf("%-14s %8.1f ms  %s\n", s.name.c_str(), s.wall_ms,
                  s.ok ? "ok" : "FAILED");
    std::printf("scale %.4f, t_er %.4f s\n", report.scale, report.t_er);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const roomtone::InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const roomtone::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const roomtone::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
