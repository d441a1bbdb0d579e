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

#include <string>

#include "roomtone/irsynth.hpp"
#include "roomtone/tracer.hpp"

namespace roomtone::serialize {

// Little-endian binary containers:
//   "PSET" v1: band count, path count, endpoints, seed, ray budget, then
//   packed records (f64 time, 3xf64 direction, Bxf64 energy, u32 bounce
//   count, bounce x u32 material indices, Bxf64 air factor).
//   "DIRR" v1: rate, t_er, per-ray direction + kernel, then the tail.

void write_pathset(const PathSet& set, const std::string& path);
PathSet read_pathset(const std::string& path);

void write_directional_ir(const irsynth::DirectionalIr& ir, double rate,
                          const std::string& path);
irsynth::DirectionalIr read_directional_ir(const std::string& path,
                                           double* rate_out = nullptr);

}  // namespace roomtone::serialize
