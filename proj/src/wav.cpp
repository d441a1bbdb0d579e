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

#include "roomtone/wav.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace roomtone::wav {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw InputError("malformed WAV header: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_off = 0, data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t len = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size())
      throw InputError("truncated WAV chunk: " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw InputError("short fmt chunk: " + path);
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format == kFormatExtensible && len >= 40)
        format = read_u16(bytes.data() + body + 24);  // subformat GUID prefix
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_off == 0)
    throw InputError("WAV missing fmt or data chunk: " + path);
  if (channels < 1 || rate == 0)
    throw InputError("invalid WAV fmt fields: " + path);

  WavData out;
  out.spec.channels = channels;
  out.spec.rate = static_cast<double>(rate);
  out.channels.assign(channels, {});

  if (format == kFormatPcm && bits == 16) {
    out.spec.format = SampleFormat::pcm16;
    const std::size_t frames = data_len / (2u * channels);
    for (auto& c : out.channels) c.resize(frames);
    const unsigned char* p = bytes.data() + data_off;
    for (std::size_t i = 0; i < frames; ++i)
      for (int c = 0; c < channels; ++c) {
        int16_t v;
        std::memcpy(&v, p + (i * channels + c) * 2, 2);
        out.channels[c][i] = static_cast<double>(v) / 32768.0;
      }
  } else if (format == kFormatFloat && bits == 32) {
    out.spec.format = SampleFormat::float32;
    const std::size_t frames = data_len / (4u * channels);
    for (auto& c : out.channels) c.resize(frames);
    const unsigned char* p = bytes.data() + data_off;
    for (std::size_t i = 0; i < frames; ++i)
      for (int c = 0; c < channels; ++c) {
        float v;
        std::memcpy(&v, p + (i * channels + c) * 4, 4);
        out.channels[c][i] = static_cast<double>(v);
      }
  } else {
    throw InputError("unsupported WAV codec (only PCM16 and float32): " +
                     path);
  }
  return out;
}

void write_wav(const std::string& path,
               const std::vector<std::vector<double>>& channels,
               const WavSpec& spec) {
  if (channels.empty()) throw InputError("write_wav: no channels");
  const std::size_t frames = channels[0].size();
  for (const auto& c : channels)
    if (c.size() != frames)
      throw InputError("write_wav: channel lengths differ");

  const int nch = static_cast<int>(channels.size());
  const int bytes_per = spec.format == SampleFormat::pcm16 ? 2 : 4;
  const uint32_t data_len =
      static_cast<uint32_t>(frames * nch * static_cast<std::size_t>(bytes_per));
  const uint16_t fmt_tag =
      spec.format == SampleFormat::pcm16 ? kFormatPcm : kFormatFloat;
  const bool with_fact = spec.format == SampleFormat::float32;

  std::string out;
  out.reserve(64 + data_len);
  out.append("RIFF");
  const uint32_t riff_len = 4 + (8 + 16) + (with_fact ? 12 : 0) + 8 + data_len;
  put_u32(out, riff_len);
  out.append("WAVE");

  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, fmt_tag);
  put_u16(out, static_cast<uint16_t>(nch));
  put_u32(out, static_cast<uint32_t>(spec.rate));
  put_u32(out, static_cast<uint32_t>(spec.rate) * nch * bytes_per);
  put_u16(out, static_cast<uint16_t>(nch * bytes_per));
  put_u16(out, static_cast<uint16_t>(bytes_per * 8));

  if (with_fact) {
    out.append("fact");
    put_u32(out, 4);
    put_u32(out, static_cast<uint32_t>(frames));
  }

  out.append("data");
  put_u32(out, data_len);
  if (spec.format == SampleFormat::pcm16) {
    for (std::size_t i = 0; i < frames; ++i)
      for (int c = 0; c < nch; ++c) {
        double v = std::clamp(channels[c][i], -1.0, 1.0);
        auto s = static_cast<int16_t>(std::lrint(v * 32767.0));
        out.push_back(static_cast<char>(s & 0xff));
        out.push_back(static_cast<char>((s >> 8) & 0xff));
      }
  } else {
    for (std::size_t i = 0; i < frames; ++i)
      for (int c = 0; c < nch; ++c) {
        float v = static_cast<float>(channels[c][i]);
        char b[4];
        std::memcpy(b, &v, 4);
        out.append(b, 4);
      }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open WAV for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write: " + path);
}

Signal read_wav_mono(const std::string& path) {
  WavData d = read_wav(path);
  Signal s;
  s.rate = d.spec.rate;
  if (d.spec.channels == 1) {
    s.samples = std::move(d.channels[0]);
  } else {
    // Downmix by averaging.
    const std::size_t n = d.channels[0].size();
    s.samples.assign(n, 0.0);
    for (const auto& c : d.channels)
      for (std::size_t i = 0; i < n; ++i) s.samples[i] += c[i];
    for (auto& v : s.samples) v /= d.spec.channels;
  }
  return s;
}

void write_wav_mono(const std::string& path, const Signal& s,
                    SampleFormat format) {
  WavSpec spec;
  spec.channels = 1;
  spec.rate = s.rate;
  spec.format = format;
  write_wav(path, {s.samples}, spec);
}

}  // namespace roomtone::wav
