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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roomtone/ambi.hpp"
#include "roomtone/erdur.hpp"
#include "roomtone/matopt.hpp"

namespace roomtone::pipeline {

// JSON artifact schemas shared by the pipeline and the CLI subcommands.

std::string decay_to_json(const sweep::DecayModel& model);
sweep::DecayModel decay_from_json(const std::string& text);

std::string materials_to_json(const std::vector<Material>& materials,
                              const matopt::OptReport* report,
                              const std::vector<double>& band_centers);
std::vector<Material> materials_from_json(const std::string& text);

std::string er_to_json(const erdur::ErResult& result, double window,
                       double threshold);
double er_from_json(const std::string& text);

std::string modulation_to_json(const irsynth::ModulationCurve& curve);
irsynth::ModulationCurve modulation_from_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Detects the first sample above -20 dB of peak as the first arrival.
ImpulseResponse load_impulse_response(const std::string& path);

struct PipelineConfig {
  std::string scene_path;
  std::string ir_path;
  std::string dry_path;
  std::string trajectory_path;
  Vec3 source;
  std::optional<Vec3> mic;  // measurement mic; default: first trajectory pos
  uint64_t ray_budget = 20000;
  uint64_t seed = 0;
  int order = 1;
  double er_window = 0.010;
  double er_threshold = 0.15;
  double trace_max_time = 0.0;  // 0 = derive from the measured IR length
  double receiver_radius = 0.25;
  int threads = 0;
  bool sn3d = false;
  std::string out_dir = ".";
};

struct StageReport {
  std::string name;
  double wall_ms = 0.0;
  bool ok = false;
  std::string error;
};

struct PipelineReport {
  std::vector<StageReport> stages;
  double scale = 0.0;
  double t_er = 0.0;
  std::vector<double> j_per_band;
  std::vector<std::pair<std::string, bool>> artifacts;  // path, written
  bool ok = false;
};

/// trace -> fit-materials -> er-duration -> modulation -> synth, writing
/// out.wav, out.json, materials.json, er.json and report.json into out_dir.
/// Throws after writing report.json if any stage fails; the report flags
/// partial artifacts.
PipelineReport run_pipeline(const PipelineConfig& config);

}  // namespace roomtone::pipeline
