// Copyright (c) 2026 The prosim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "prosim/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "prosim/common.hpp"

namespace prosim {

namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatIeeeFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

[[noreturn]] void Fail(const std::string& path, const std::string& cause) {
  throw Error("wav: " + path + ": " + cause);
}

uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
};

}  // namespace

AudioBuffer LoadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(path, "cannot open file");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 12) Fail(path, "truncated RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    Fail(path, "not a RIFF/WAVE container");
  }

  FmtChunk fmt;
  bool have_fmt = false;
  const uint8_t* data = nullptr;
  size_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    char id[5] = {0};
    std::memcpy(id, bytes.data() + pos, 4);
    uint32_t size = ReadU32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + size > bytes.size()) Fail(path, "truncated chunk " + std::string(id));
    if (std::strcmp(id, "fmt ") == 0) {
      if (size < 16) Fail(path, "fmt chunk too small");
      const uint8_t* p = bytes.data() + pos;
      fmt.format = ReadU16(p);
      fmt.channels = ReadU16(p + 2);
      fmt.sample_rate = ReadU32(p + 4);
      fmt.bits_per_sample = ReadU16(p + 14);
      if (fmt.format == kFormatExtensible) {
        // Resolve the actual codec from the SubFormat GUID prefix.
        if (size < 40) Fail(path, "extensible fmt chunk too small");
        fmt.format = ReadU16(p + 24);
      }
      have_fmt = true;
    } else if (std::strcmp(id, "data") == 0) {
      data = bytes.data() + pos;
      data_size = size;
    }
    pos += size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) Fail(path, "missing fmt chunk");
  if (data == nullptr) Fail(path, "missing data chunk");
  if (fmt.sample_rate == 0) Fail(path, "zero sample rate");
  if (fmt.channels == 0 || fmt.channels > 2) {
    Fail(path, "unsupported channel count " + std::to_string(fmt.channels));
  }

  bool pcm16 = fmt.format == kFormatPcm && fmt.bits_per_sample == 16;
  bool float32 = fmt.format == kFormatIeeeFloat && fmt.bits_per_sample == 32;
  if (!pcm16 && !float32) {
    Fail(path, "unsupported codec: format tag " + std::to_string(fmt.format) +
                   ", " + std::to_string(fmt.bits_per_sample) + " bits");
  }

  size_t bytes_per_sample = fmt.bits_per_sample / 8;
  size_t frame_bytes = bytes_per_sample * fmt.channels;
  size_t n_frames = data_size / frame_bytes;
  if (n_frames == 0) Fail(path, "zero-length audio");

  AudioBuffer buf;
  buf.sample_rate = static_cast<int>(fmt.sample_rate);
  buf.source_path = path;
  buf.samples.resize(n_frames);

  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (unsigned c = 0; c < fmt.channels; ++c) {
      const uint8_t* p = data + i * frame_bytes + c * bytes_per_sample;
      double v;
      if (pcm16) {
        int16_t raw;
        std::memcpy(&raw, p, 2);
        v = static_cast<double>(raw) / 32768.0;
      } else {
        float raw;
        std::memcpy(&raw, p, 4);
        if (!std::isfinite(raw)) Fail(path, "non-finite float sample");
        v = static_cast<double>(raw);
      }
      acc += v;
    }
    buf.samples[i] = std::clamp(acc / fmt.channels, -1.0, 1.0);
  }
  return buf;
}

void WriteWav(const std::string& path,
              const std::vector<std::vector<double>>& channels,
              int sample_rate, WavFormat format) {
  if (channels.empty() || channels[0].empty()) {
    Fail(path, "refusing to write zero-length audio");
  }
  size_t n = channels[0].size();
  for (const auto& ch : channels) {
    if (ch.size() != n) Fail(path, "channel length mismatch");
  }
  uint16_t n_ch = static_cast<uint16_t>(channels.size());
  uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  uint16_t tag = format == WavFormat::kPcm16 ? kFormatPcm : kFormatIeeeFloat;
  uint16_t block = static_cast<uint16_t>(n_ch * bits / 8);
  uint32_t data_size = static_cast<uint32_t>(n * block);

  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(path, "cannot open file for writing");

  auto put16 = [&](uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    out.write(b, 2);
  };
  auto put32 = [&](uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff),
                 static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
  };

  out.write("RIFF", 4);
  put32(36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put32(16);
  put16(tag);
  put16(n_ch);
  put32(static_cast<uint32_t>(sample_rate));
  put32(static_cast<uint32_t>(sample_rate) * block);
  put16(block);
  put16(bits);
  out.write("data", 4);
  put32(data_size);

  for (size_t i = 0; i < n; ++i) {
    for (const auto& ch : channels) {
      if (format == WavFormat::kPcm16) {
        double scaled = std::round(ch[i] * 32768.0);
        int16_t v = static_cast<int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        char b[2];
        std::memcpy(b, &v, 2);
        out.write(b, 2);
      } else {
        float v = static_cast<float>(ch[i]);
        char b[4];
        std::memcpy(b, &v, 4);
        out.write(b, 4);
      }
    }
  }
  if (!out) Fail(path, "write failed");
}

void WriteWavMono(const std::string& path, const std::vector<double>& samples,
                  int sample_rate, WavFormat format) {
  WriteWav(path, {samples}, sample_rate, format);
}

AudioBuffer Resample(const AudioBuffer& buf, int target_rate) {
  if (target_rate <= 0) throw Error("resample: target rate must be positive");
  if (buf.sample_rate == target_rate) return buf;

  size_t n = buf.samples.size();
  size_t m = static_cast<size_t>(std::llround(
      static_cast<double>(n) * target_rate / buf.sample_rate));
  if (m == 0) m = 1;

  AudioBuffer out;
  out.sample_rate = target_rate;
  out.source_path = buf.source_path;
  out.samples.resize(m);
  double step = static_cast<double>(buf.sample_rate) / target_rate;
  for (size_t i = 0; i < m; ++i) {
    double pos = static_cast<double>(i) * step;
    size_t lo = static_cast<size_t>(pos);
    if (lo >= n - 1) {
      out.samples[i] = buf.samples[n - 1];
      continue;
    }
    double frac = pos - static_cast<double>(lo);
    out.samples[i] = buf.samples[lo] * (1.0 - frac) + buf.samples[lo + 1] * frac;
  }
  return out;
}

}  // namespace prosim
