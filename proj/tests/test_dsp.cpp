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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "prosim/dsp.hpp"
#include "prosim/common.hpp"
#include "support/synth.hpp"

using namespace prosim;

namespace {

// Fraction of voiced frames whose f0 is within tol of the target, ignoring
// the first/last few frames where the analysis window is clipped.
struct PitchAccuracy {
  size_t voiced = 0;
  size_t accurate = 0;
  double fraction() const {
    return voiced == 0 ? 0.0 : static_cast<double>(accurate) / voiced;
  }
};

PitchAccuracy MeasurePitch(double freq, double tol) {
  AudioBuffer buf = synth::MakeBuffer(synth::Sine(freq, 1.0, 16000), 16000);
  FrameGrid grid = MakeFrameGrid(buf, 32.0, 10.0);
  PitchTrack track = AutocorrPitch(buf, grid);
  PitchAccuracy acc;
  for (size_t i = 3; i + 3 < grid.n_frames; ++i) {
    if (!track.Voiced(i)) continue;
    ++acc.voiced;
    if (std::abs(track.f0_hz[i] - freq) <= tol) ++acc.accurate;
  }
  return acc;
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("frame grid arithmetic matches the closed form") {
  // Oracle: n_frames = floor((n_samples - frame_length)/hop) + 1.
  auto oracle = [](size_t n_samples, size_t frame, size_t hop) {
    return (n_samples - frame) / hop + 1;
  };

  AudioBuffer one_second = synth::MakeBuffer(synth::Silence(1.0, 16000), 16000);
  FrameGrid grid = MakeFrameGrid(one_second, 32.0, 10.0);
  CHECK(grid.frame_length == 512);
  CHECK(grid.hop == 160);
  CHECK(grid.n_frames == oracle(16000, 512, 160));
  CHECK(grid.n_frames == 97);

  AudioBuffer short_buf = synth::MakeBuffer(synth::Silence(0.4, 16000), 16000);
  FrameGrid short_grid = MakeFrameGrid(short_buf, 32.0, 10.0);
  CHECK(short_grid.n_frames == oracle(6400, 512, 160));
  CHECK(short_grid.n_frames == 37);

  AudioBuffer exact = synth::MakeBuffer(std::vector<double>(512, 0.0), 16000);
  CHECK(MakeFrameGrid(exact, 32.0, 10.0).n_frames == 1);

  AudioBuffer tiny = synth::MakeBuffer(std::vector<double>(511, 0.0), 16000);
  CHECK_THROWS_AS(MakeFrameGrid(tiny, 32.0, 10.0), Error);
}

TEST_CASE("magnitude spectrum of zeros is zero") {
  std::vector<double> frame(512, 0.0);
  for (double v : MagnitudeSpectrum(frame)) CHECK(v == 0.0);
}

TEST_CASE("1 kHz sine peaks at bin f*N/fs = 32") {
  std::vector<double> frame = synth::Sine(1000.0, 512.0 / 16000.0, 16000, 1.0);
  REQUIRE(frame.size() == 512);
  std::vector<double> mags = MagnitudeSpectrum(frame);
  REQUIRE(mags.size() == 257);
  size_t argmax =
      std::max_element(mags.begin(), mags.end()) - mags.begin();
  CHECK(argmax == 32);
}

TEST_CASE("impulse has a flat magnitude spectrum") {
  std::vector<double> frame(256, 0.0);
  frame[0] = 1.0;
  std::vector<double> mags = MagnitudeSpectrum(frame);
  for (double v : mags) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectrum is Parseval-consistent with frame energy") {
  Rng rng(21);
  std::vector<double> frame(512);
  for (double& v : frame) v = 2.0 * rng.Real() - 1.0;
  std::vector<double> mags = MagnitudeSpectrum(frame);

  double freq_energy = mags[0] * mags[0] + mags[256] * mags[256];
  for (size_t k = 1; k < 256; ++k) freq_energy += 2.0 * mags[k] * mags[k];
  double time_energy = 0.0;
  for (double v : frame) time_energy += v * v;
  CHECK(freq_energy / 512.0 ==
        doctest::Approx(time_energy).epsilon(1e-6));
}

TEST_CASE("log energy reference points") {
  std::vector<double> zeros(512, 0.0);
  CHECK(LogEnergy(zeros) == doctest::Approx(-100.0).epsilon(1e-9));

  std::vector<double> square(512);
  for (size_t i = 0; i < square.size(); ++i) square[i] = i % 2 ? 1.0 : -1.0;
  CHECK(LogEnergy(square) == doctest::Approx(0.0).epsilon(1e-9));

  // Full periods => mean square exactly 0.5 => -3.0103 dB.
  std::vector<double> sine = synth::Sine(1000.0, 512.0 / 16000.0, 16000, 1.0);
  CHECK(LogEnergy(sine) ==
        doctest::Approx(10.0 * std::log10(0.5)).epsilon(1e-6));
}

TEST_CASE("log energy gain property: +20*log10(a) per scale a") {
  Rng rng(3);
  std::vector<double> frame(512);
  for (double& v : frame) v = 0.4 * (2.0 * rng.Real() - 1.0);
  double base = LogEnergy(frame);
  for (double a : {2.0, 0.5, 1.7}) {
    std::vector<double> scaled(frame);
    for (double& v : scaled) v *= a;
    CHECK(LogEnergy(scaled) ==
          doctest::Approx(base + 20.0 * std::log10(a)).epsilon(1e-6));
  }
}

TEST_CASE("pure 200 Hz sine is voiced at 200 +- 2 Hz") {
  PitchAccuracy acc = MeasurePitch(200.0, 2.0);
  CHECK(acc.voiced > 50);
  CHECK(acc.fraction() >= 0.95);
}

TEST_CASE("tone battery at 100/150/220/330 Hz stays within 2 Hz") {
  for (double freq : {100.0, 150.0, 220.0, 330.0}) {
    PitchAccuracy acc = MeasurePitch(freq, 2.0);
    INFO("freq ", freq);
    CHECK(acc.voiced > 50);
    CHECK(acc.fraction() >= 0.95);
  }
}

TEST_CASE("white noise is mostly unvoiced") {
  AudioBuffer buf =
      synth::MakeBuffer(synth::WhiteNoise(1.0, 16000, 0.5, 99), 16000);
  FrameGrid grid = MakeFrameGrid(buf, 32.0, 10.0);
  PitchTrack track = AutocorrPitch(buf, grid);
  size_t unvoiced = 0;
  for (size_t i = 0; i < grid.n_frames; ++i) {
    if (!track.Voiced(i)) ++unvoiced;
  }
  CHECK(static_cast<double>(unvoiced) / grid.n_frames >= 0.9);
}

TEST_CASE("silence is entirely unvoiced") {
  AudioBuffer buf = synth::MakeBuffer(synth::Silence(0.5, 16000), 16000);
  FrameGrid grid = MakeFrameGrid(buf, 32.0, 10.0);
  PitchTrack track = AutocorrPitch(buf, grid);
  for (size_t i = 0; i < grid.n_frames; ++i) {
    CHECK_FALSE(track.Voiced(i));
    CHECK(track.voicing_strength[i] == 0.0);
  }
}

TEST_CASE("spectral flux of identical frames is zero") {
  std::vector<double> frame = synth::Sine(440.0, 512.0 / 16000.0, 16000, 0.7);
  std::vector<std::vector<double>> spectra(5, MagnitudeSpectrum(frame));
  std::vector<double> flux = SpectralFlux(spectra);
  for (double v : flux) CHECK(v == 0.0);
}

TEST_CASE("spectral flux of silence is zero") {
  std::vector<std::vector<double>> spectra(4, std::vector<double>(257, 0.0));
  for (double v : SpectralFlux(spectra)) CHECK(v == 0.0);
}

TEST_CASE("alternating tones produce strictly positive flux") {
  std::vector<double> a = synth::Sine(500.0, 512.0 / 16000.0, 16000, 0.7);
  std::vector<double> b = synth::Sine(2000.0, 512.0 / 16000.0, 16000, 0.7);
  std::vector<std::vector<double>> spectra;
  for (int i = 0; i < 6; ++i) {
    spectra.push_back(MagnitudeSpectrum(i % 2 ? b : a));
  }
  std::vector<double> flux = SpectralFlux(spectra);
  CHECK(flux[0] == 0.0);
  for (size_t i = 1; i < flux.size(); ++i) CHECK(flux[i] > 0.0);
}

TEST_CASE("spectral flux is gain invariant") {
  Rng rng(17);
  std::vector<std::vector<double>> spectra;
  for (int i = 0; i < 8; ++i) {
    std::vector<double> frame(512);
    for (double& v : frame) v = 0.3 * (2.0 * rng.Real() - 1.0);
    spectra.push_back(MagnitudeSpectrum(frame));
  }
  std::vector<double> base = SpectralFlux(spectra);
  for (double alpha : {2.0, 0.25, 10.0}) {
    std::vector<std::vector<double>> scaled = spectra;
    for (auto& s : scaled) {
      for (double& v : s) v *= alpha;
    }
    std::vector<double> flux = SpectralFlux(scaled);
    for (size_t i = 0; i < flux.size(); ++i) {
      CHECK(std::abs(flux[i] - base[i]) <= 1e-9);
    }
  }
}

TEST_CASE("pulse train has higher CPPS than white noise") {
  AudioBuffer pulses =
      synth::MakeBuffer(synth::PulseTrain(150.0, 1.0, 16000), 16000);
  AudioBuffer noise =
      synth::MakeBuffer(synth::WhiteNoise(1.0, 16000, 0.5, 5), 16000);
  FrameGrid pg = MakeFrameGrid(pulses, 32.0, 10.0);
  FrameGrid ng = MakeFrameGrid(noise, 32.0, 10.0);
  std::vector<double> pulse_cpps = Cpps(pulses, pg);
  std::vector<double> noise_cpps = Cpps(noise, ng);
  CHECK(Percentile(pulse_cpps, 50.0) > Percentile(noise_cpps, 50.0));
  // Interior frames individually beat the noise median.
  double noise_median = Percentile(noise_cpps, 50.0);
  size_t above = 0;
  for (size_t i = 5; i + 5 < pulse_cpps.size(); ++i) {
    if (pulse_cpps[i] > noise_median) ++above;
  }
  CHECK(static_cast<double>(above) / (pulse_cpps.size() - 10) > 0.9);
}

TEST_CASE("cpps is deterministic") {
  AudioBuffer buf =
      synth::MakeBuffer(synth::PulseTrain(150.0, 0.7, 16000), 16000);
  FrameGrid grid = MakeFrameGrid(buf, 32.0, 10.0);
  std::vector<double> a = Cpps(buf, grid);
  std::vector<double> b = Cpps(buf, grid);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("per-frame outputs are full length and finite") {
  AudioBuffer buf = synth::MakeBuffer(synth::Utterance({}, 16000), 16000);
  FrameGrid grid = MakeFrameGrid(buf, 32.0, 10.0);
  PitchTrack track = AutocorrPitch(buf, grid);
  std::vector<double> cpps = Cpps(buf, grid);
  CHECK(track.f0_hz.size() == grid.n_frames);
  CHECK(track.voicing_strength.size() == grid.n_frames);
  CHECK(cpps.size() == grid.n_frames);
  for (size_t i = 0; i < grid.n_frames; ++i) {
    CHECK(std::isfinite(track.f0_hz[i]));
    CHECK(std::isfinite(track.voicing_strength[i]));
    CHECK(std::isfinite(cpps[i]));
  }
}

}  // TEST_SUITE
