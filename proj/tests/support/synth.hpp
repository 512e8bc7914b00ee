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

#ifndef PROSIM_TESTS_SUPPORT_SYNTH_HPP_
#define PROSIM_TESTS_SUPPORT_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "prosim/audio.hpp"
#include "prosim/dataset.hpp"

namespace synth {

std::vector<double> Silence(double seconds, int rate);
std::vector<double> Sine(double freq_hz, double seconds, int rate,
                         double amp = 0.5, double phase = 0.0);
std::vector<double> WhiteNoise(double seconds, int rate, double amp,
                               uint64_t seed);
// Impulse every 1/f0 seconds; a maximally harmonic signal.
std::vector<double> PulseTrain(double f0_hz, double seconds, int rate,
                               double amp = 0.8);
// Harmonic complex with 1/k harmonic rolloff; speech-ish periodicity.
std::vector<double> HarmonicTone(double f0_hz, double seconds, int rate,
                                 double amp = 0.3, int n_harmonics = 4);
// Linear f0 glide, phase-continuous.
std::vector<double> Glide(double f0_start_hz, double f0_end_hz, double seconds,
                          int rate, double amp = 0.4);

prosim::AudioBuffer MakeBuffer(std::vector<double> samples, int rate,
                               const std::string& name = "synthetic");

// --- synthetic utterances for protocol-level experiments ---

// A voiced/gap alternation: harmonic "syllables" at syllable_rate_hz, pitch
// f0_hz, over a soft noise floor. Spectral-flux rate tracks syllable_rate;
// the pitch features track f0.
struct UtteranceParams {
  double syllable_rate_hz = 5.0;
  double f0_hz = 180.0;
  double duration_s = 1.2;
  uint64_t seed = 1;
};

std::vector<double> Utterance(const UtteranceParams& params, int rate);

// Track = noise floor lead-in, a fixed context passage (identical across
// tracks, so per-track normalization statistics are stable), then the
// utterance. The span marks the utterance portion.
struct TrackAudio {
  std::vector<double> samples;
  double utt_start_s = 0.0;
  double utt_end_s = 0.0;
};

TrackAudio MakeTrack(const UtteranceParams& params, int rate);

// --- full corpus with controlled rate/pitch manipulations ---

struct PairParams {
  UtteranceParams seed;
  UtteranceParams reenactment;
};

struct CorpusOptions {
  size_t n_pairs = 300;
  int rate = 16000;
  uint64_t param_seed = 7;
  uint64_t judgment_seed = 1;
  double judgment_noise_sd = 0.22;
};

struct Corpus {
  std::string manifest_path;
  std::vector<prosim::PairRecord> records;
  std::vector<PairParams> params;  // aligned with records
};

// Judgment: a noisy monotone function of the speaking-rate delta plus a
// weaker pitch-delta term, clamped to [1, 5].
double JudgmentFor(const PairParams& pair, double noise);
std::vector<double> MakeJudgments(const std::vector<PairParams>& params,
                                  uint64_t noise_seed, double noise_sd);

// Writes WAV tracks and a manifest under dir (created if needed).
Corpus BuildCorpus(const std::string& dir, const CorpusOptions& options);

}  // namespace synth

#endif  // PROSIM_TESTS_SUPPORT_SYNTH_HPP_
