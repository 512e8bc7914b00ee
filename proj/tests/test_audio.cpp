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

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "prosim/audio.hpp"
#include "prosim/common.hpp"
#include "support/synth.hpp"

namespace fs = std::filesystem;
using namespace prosim;

namespace {

fs::path TempDir() {
  fs::path dir = fs::temp_directory_path() / "prosim_audio_tests";
  fs::create_directories(dir);
  return dir;
}

// Naive DFT magnitude at one frequency; independent of the library FFT.
double GoertzelMagnitude(const std::vector<double>& x, double freq, int rate) {
  std::complex<double> acc(0.0, 0.0);
  for (size_t n = 0; n < x.size(); ++n) {
    double angle = -2.0 * M_PI * freq * n / rate;
    acc += x[n] * std::complex<double>(std::cos(angle), std::sin(angle));
  }
  return std::abs(acc);
}

}  // namespace

TEST_SUITE("audio") {

TEST_CASE("pcm16 silence loads as zeros") {
  fs::path path = TempDir() / "silence.wav";
  WriteWavMono(path.string(), synth::Silence(1.0, 16000), 16000,
               WavFormat::kPcm16);
  AudioBuffer buf = LoadWav(path.string());
  CHECK(buf.sample_rate == 16000);
  REQUIRE(buf.samples.size() == 16000);
  for (double v : buf.samples) CHECK(v == 0.0);
}

TEST_CASE("stereo downmix averages channels") {
  fs::path path = TempDir() / "stereo.wav";
  std::vector<double> left(800, 0.5), right(800, -0.5);
  WriteWav(path.string(), {left, right}, 16000, WavFormat::kFloat32);
  AudioBuffer buf = LoadWav(path.string());
  REQUIRE(buf.samples.size() == 800);
  for (double v : buf.samples) CHECK(v == 0.0);

  // Swapping channels yields the same mono output.
  fs::path swapped = TempDir() / "stereo_swapped.wav";
  std::vector<double> l2(800), r2(800);
  Rng rng(42);
  for (size_t i = 0; i < 800; ++i) {
    l2[i] = static_cast<float>(2.0 * rng.Real() - 1.0);
    r2[i] = static_cast<float>(2.0 * rng.Real() - 1.0);
  }
  fs::path a = TempDir() / "ab.wav", b = TempDir() / "ba.wav";
  WriteWav(a.string(), {l2, r2}, 16000, WavFormat::kFloat32);
  WriteWav(b.string(), {r2, l2}, 16000, WavFormat::kFloat32);
  AudioBuffer ab = LoadWav(a.string());
  AudioBuffer ba = LoadWav(b.string());
  REQUIRE(ab.samples.size() == ba.samples.size());
  for (size_t i = 0; i < ab.samples.size(); ++i) {
    CHECK(ab.samples[i] == ba.samples[i]);
  }
}

TEST_CASE("pcm16 full-scale square wave decodes to +-32767/32768") {
  // Write the file with known bytes, bypassing our writer.
  fs::path path = TempDir() / "square_bytes.wav";
  const int n = 64;
  {
    std::ofstream out(path, std::ios::binary);
    auto put16 = [&](uint16_t v) { out.put(v & 0xff).put(v >> 8); };
    auto put32 = [&](uint32_t v) {
      out.put(v & 0xff).put((v >> 8) & 0xff).put((v >> 16) & 0xff).put(v >> 24);
    };
    out.write("RIFF", 4);
    put32(36 + n * 2);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put32(16);
    put16(1);       // PCM
    put16(1);       // mono
    put32(16000);
    put32(32000);
    put16(2);
    put16(16);
    out.write("data", 4);
    put32(n * 2);
    for (int i = 0; i < n; ++i) {
      put16(static_cast<uint16_t>(i % 2 == 0 ? 32767 : -32767));
    }
  }
  AudioBuffer buf = LoadWav(path.string());
  REQUIRE(buf.samples.size() == n);
  for (int i = 0; i < n; ++i) {
    double want = (i % 2 == 0 ? 32767.0 : -32767.0) / 32768.0;
    CHECK(buf.samples[i] == doctest::Approx(want).epsilon(0));
  }
}

TEST_CASE("loader rejects broken inputs with path and cause") {
  fs::path dir = TempDir();
  CHECK_THROWS_WITH_AS(LoadWav((dir / "nope.wav").string()),
                       doctest::Contains("nope.wav"), Error);

  fs::path not_riff = dir / "not_riff.wav";
  { std::ofstream(not_riff) << "this is not audio at all........"; }
  CHECK_THROWS_WITH_AS(LoadWav(not_riff.string()),
                       doctest::Contains("RIFF"), Error);

  // Valid container, zero-length data chunk.
  fs::path empty = dir / "empty.wav";
  {
    std::ofstream out(empty, std::ios::binary);
    auto put16 = [&](uint16_t v) { out.put(v & 0xff).put(v >> 8); };
    auto put32 = [&](uint32_t v) {
      out.put(v & 0xff).put((v >> 8) & 0xff).put((v >> 16) & 0xff).put(v >> 24);
    };
    out.write("RIFF", 4);
    put32(36);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put32(16);
    put16(1);
    put16(1);
    put32(16000);
    put32(32000);
    put16(2);
    put16(16);
    out.write("data", 4);
    put32(0);
  }
  CHECK_THROWS_WITH_AS(LoadWav(empty.string()),
                       doctest::Contains("zero-length"), Error);

  // Unsupported codec (8-bit PCM).
  fs::path codec = dir / "pcm8.wav";
  {
    std::ofstream out(codec, std::ios::binary);
    auto put16 = [&](uint16_t v) { out.put(v & 0xff).put(v >> 8); };
    auto put32 = [&](uint32_t v) {
      out.put(v & 0xff).put((v >> 8) & 0xff).put((v >> 16) & 0xff).put(v >> 24);
    };
    out.write("RIFF", 4);
    put32(36 + 4);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put32(16);
    put16(1);
    put16(1);
    put32(16000);
    put32(16000);
    put16(1);
    put16(8);
    out.write("data", 4);
    put32(4);
    out.write("\x80\x80\x80\x80", 4);
  }
  CHECK_THROWS_WITH_AS(LoadWav(codec.string()),
                       doctest::Contains("unsupported codec"), Error);
}

TEST_CASE("float wav round-trip is lossless") {
  fs::path path = TempDir() / "float_rt.wav";
  Rng rng(7);
  std::vector<double> samples(4096);
  for (double& v : samples) {
    v = static_cast<double>(static_cast<float>(2.0 * rng.Real() - 1.0));
  }
  WriteWavMono(path.string(), samples, 22050, WavFormat::kFloat32);
  AudioBuffer buf = LoadWav(path.string());
  CHECK(buf.sample_rate == 22050);
  REQUIRE(buf.samples.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(buf.samples[i] == samples[i]);
  }
}

TEST_CASE("pcm16 round-trip is within one quantization step") {
  fs::path path = TempDir() / "pcm_rt.wav";
  Rng rng(9);
  std::vector<double> samples(4096);
  for (double& v : samples) v = 0.99 * (2.0 * rng.Real() - 1.0);
  WriteWavMono(path.string(), samples, 16000, WavFormat::kPcm16);
  AudioBuffer buf = LoadWav(path.string());
  REQUIRE(buf.samples.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(std::abs(buf.samples[i] - samples[i]) <= 1.0 / 32768.0);
  }
}

TEST_CASE("resample at equal rates is bit-identical") {
  AudioBuffer buf = synth::MakeBuffer(synth::Sine(100.0, 0.5, 16000), 16000);
  AudioBuffer out = Resample(buf, 16000);
  REQUIRE(out.samples.size() == buf.samples.size());
  for (size_t i = 0; i < buf.samples.size(); ++i) {
    CHECK(out.samples[i] == buf.samples[i]);
  }
}

TEST_CASE("resampled sine keeps its frequency (DFT oracle)") {
  AudioBuffer buf = synth::MakeBuffer(synth::Sine(100.0, 1.0, 48000), 48000);
  AudioBuffer out = Resample(buf, 16000);
  CHECK(out.sample_rate == 16000);
  CHECK(out.samples.size() ==
        static_cast<size_t>(std::llround(buf.samples.size() * 16000.0 / 48000.0)));
  // Dominant frequency on a coarse scan must be 100 Hz.
  double best_freq = 0.0, best_mag = -1.0;
  for (double f = 25.0; f <= 1000.0; f += 25.0) {
    double mag = GoertzelMagnitude(out.samples, f, 16000);
    if (mag > best_mag) {
      best_mag = mag;
      best_freq = f;
    }
  }
  CHECK(best_freq == doctest::Approx(100.0));
}

TEST_CASE("constant signal resamples to the same constant") {
  std::vector<double> constant(1000, 0.25);
  AudioBuffer buf = synth::MakeBuffer(constant, 44100);
  AudioBuffer out = Resample(buf, 16000);
  for (double v : out.samples) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

}  // TEST_SUITE
