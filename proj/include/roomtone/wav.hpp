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
#include <vector>

#include "roomtone/core.hpp"

namespace roomtone::wav {

enum class SampleFormat { pcm16, float32 };

struct WavSpec {
  int channels = 1;
  double rate = kDefaultRate;
  SampleFormat format = SampleFormat::float32;
};

struct WavData {
  WavSpec spec;
  std::vector<std::vector<double>> channels;  // deinterleaved
};

/// Reads RIFF/WAVE PCM16 or IEEE float32. Anything else is rejected.
WavData read_wav(const std::string& path);

void write_wav(const std::string& path,
               const std::vector<std::vector<double>>& channels,
               const WavSpec& spec);

/// Mono conveniences.
Signal read_wav_mono(const std::string& path);
void write_wav_mono(const std::string& path, const Signal& s,
                    SampleFormat format = SampleFormat::float32);

}  // namespace roomtone::wav
