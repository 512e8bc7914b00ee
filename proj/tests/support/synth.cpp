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

#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prosim/common.hpp"

namespace synth {

namespace fs = std::filesystem;
using prosim::Rng;

std::vector<double> Silence(double seconds, int rate) {
  return std::vector<double>(static_cast<size_t>(std::llround(seconds * rate)),
                             0.0);
}

std::vector<double> Sine(double freq_hz, double seconds, int rate, double amp,
                         double phase) {
  size_t n = static_cast<size_t>(std::llround(seconds * rate));
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = amp * std::sin(2.0 * M_PI * freq_hz * i / rate + phase);
  }
  return out;
}

std::vector<double> WhiteNoise(double seconds, int rate, double amp,
                               uint64_t seed) {
  size_t n = static_cast<size_t>(std::llround(seconds * rate));
  Rng rng(seed);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = amp * (2.0 * rng.Real() - 1.0);
  return out;
}

std::vector<double> PulseTrain(double f0_hz, double seconds, int rate,
                               double amp) {
  size_t n = static_cast<size_t>(std::llround(seconds * rate));
  std::vector<double> out(n, 0.0);
  double period = rate / f0_hz;
  for (double pos = 0.0; pos < static_cast<double>(n); pos += period) {
    out[static_cast<size_t>(pos)] = amp;
  }
  return out;
}

std::vector<double> HarmonicTone(double f0_hz, double seconds, int rate,
                                 double amp, int n_harmonics) {
  size_t n = static_cast<size_t>(std::llround(seconds * rate));
  std::vector<double> out(n, 0.0);
  for (int h = 1; h <= n_harmonics; ++h) {
    double f = f0_hz * h;
    if (f >= rate / 2.0) break;
    double a = amp / h;
    for (size_t i = 0; i < n; ++i) {
      out[i] += a * std::sin(2.0 * M_PI * f * i / rate);
    }
  }
  return out;
}

std::vector<double> Glide(double f0_start_hz, double f0_end_hz, double seconds,
                          int rate, double amp) {
  size_t n = static_cast<size_t>(std::llround(seconds * rate));
  std::vector<double> out(n);
  double phase = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double frac = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    double f = f0_start_hz + (f0_end_hz - f0_start_hz) * frac;
    phase += 2.0 * M_PI * f / rate;
    out[i] = amp * std::sin(phase);
  }
  return out;
}

prosim::AudioBuffer MakeBuffer(std::vector<double> samples, int rate,
                               const std::string& name) {
  prosim::AudioBuffer buf;
  buf.samples = std::move(samples);
  buf.sample_rate = rate;
  buf.source_path = name;
  return buf;
}

std::vector<double> Utterance(const UtteranceParams& params, int rate) {
  size_t n = static_cast<size_t>(std::llround(params.duration_s * rate));
  std::vector<double> out(n, 0.0);
  Rng rng(params.seed);

  // Soft noise floor keeps spectra from degenerating in the gaps.
  for (size_t i = 0; i < n; ++i) out[i] = 0.01 * (2.0 * rng.Real() - 1.0);

  double period_s = 1.0 / params.syllable_rate_hz;
  double tone_s = 0.55 * period_s;
  size_t ramp = static_cast<size_t>(0.005 * rate);

  for (double t0 = 0.0; t0 < params.duration_s; t0 += period_s) {
    size_t start = static_cast<size_t>(std::llround(t0 * rate));
    size_t len = static_cast<size_t>(std::llround(tone_s * rate));
    if (start >= n) break;
    len = std::min(len, n - start);
    double jitter = 1.0 + 0.02 * (2.0 * rng.Real() - 1.0);
    std::vector<double> tone =
        HarmonicTone(params.f0_hz * jitter, tone_s, rate, 0.3, 4);
    for (size_t i = 0; i < len && i < tone.size(); ++i) {
      double env = 1.0;
      if (i < ramp) env = static_cast<double>(i) / ramp;
      size_t from_end = len - 1 - i;
      if (from_end < ramp) env = std::min(env, static_cast<double>(from_end) / ramp);
      out[start + i] += env * tone[i];
    }
  }
  for (double& v : out) v = std::clamp(v, -1.0, 1.0);
  return out;
}

TrackAudio MakeTrack(const UtteranceParams& params, int rate) {
  const double lead_s = 0.15, gap_s = 0.15, tail_s = 0.15;
  UtteranceParams context;
  context.syllable_rate_hz = 5.0;
  context.f0_hz = 180.0;
  context.duration_s = 1.2;
  context.seed = 0xC0FFEE;  // identical context in every track

  std::vector<double> samples = WhiteNoise(lead_s, rate, 0.008, 11);
  std::vector<double> ctx = Utterance(context, rate);
  samples.insert(samples.end(), ctx.begin(), ctx.end());
  std::vector<double> gap = WhiteNoise(gap_s, rate, 0.008, 12);
  samples.insert(samples.end(), gap.begin(), gap.end());

  TrackAudio track;
  track.utt_start_s = static_cast<double>(samples.size()) / rate;
  std::vector<double> utt = Utterance(params, rate);
  samples.insert(samples.end(), utt.begin(), utt.end());
  track.utt_end_s = static_cast<double>(samples.size()) / rate;

  std::vector<double> tail = WhiteNoise(tail_s, rate, 0.008, 13);
  samples.insert(samples.end(), tail.begin(), tail.end());
  track.samples = std::move(samples);
  return track;
}

double JudgmentFor(const PairParams& pair, double noise) {
  double rate_delta = pair.seed.syllable_rate_hz - pair.reenactment.syllable_rate_hz;
  double pitch_delta = pair.seed.f0_hz - pair.reenactment.f0_hz;
  double j = 3.2 - 1.4 * std::tanh(1.1 * rate_delta) -
             0.4 * std::abs(std::tanh(pitch_delta / 60.0)) + noise;
  return std::clamp(j, 1.0, 5.0);
}

std::vector<double> MakeJudgments(const std::vector<PairParams>& params,
                                  uint64_t noise_seed, double noise_sd) {
  Rng rng(noise_seed);
  std::vector<double> out;
  out.reserve(params.size());
  for (const PairParams& p : params) {
    out.push_back(JudgmentFor(p, noise_sd * rng.Gaussian()));
  }
  return out;
}

Corpus BuildCorpus(const std::string& dir, const CorpusOptions& options) {
  fs::create_directories(dir);
  Corpus corpus;
  Rng rng(options.param_seed);

  auto clamp_rate = [](double r) { return std::clamp(r, 2.0, 8.0); };
  auto clamp_f0 = [](double f) { return std::clamp(f, 115.0, 285.0); };

  for (size_t i = 0; i < options.n_pairs; ++i) {
    PairParams pp;
    pp.seed.syllable_rate_hz = 2.5 + 5.0 * rng.Real();
    pp.seed.f0_hz = 130.0 + 140.0 * rng.Real();
    pp.seed.duration_s = 1.0 + 0.4 * rng.Real();
    pp.seed.seed = rng.Next();
    pp.reenactment.syllable_rate_hz =
        clamp_rate(pp.seed.syllable_rate_hz + 5.0 * (rng.Real() - 0.5));
    pp.reenactment.f0_hz = clamp_f0(pp.seed.f0_hz + 120.0 * (rng.Real() - 0.5));
    pp.reenactment.duration_s = 1.0 + 0.4 * rng.Real();
    pp.reenactment.seed = rng.Next();
    corpus.params.push_back(pp);
  }

  std::vector<double> judgments =
      MakeJudgments(corpus.params, options.judgment_seed,
                    options.judgment_noise_sd);

  std::ostringstream manifest;
  manifest << "pair_id,seed_wav,seed_start,seed_end,reen_wav,reen_start,"
              "reen_end,judgment,session,language\n";
  char id_buf[16];
  for (size_t i = 0; i < options.n_pairs; ++i) {
    snprintf(id_buf, sizeof(id_buf), "p%04zu", i);
    std::string pair_id(id_buf);
    std::string seed_path = dir + "/" + pair_id + "_seed.wav";
    std::string reen_path = dir + "/" + pair_id + "_reen.wav";

    TrackAudio seed_track = MakeTrack(corpus.params[i].seed, options.rate);
    TrackAudio reen_track =
        MakeTrack(corpus.params[i].reenactment, options.rate);
    prosim::WriteWavMono(seed_path, seed_track.samples, options.rate,
                         prosim::WavFormat::kFloat32);
    prosim::WriteWavMono(reen_path, reen_track.samples, options.rate,
                         prosim::WavFormat::kFloat32);

    prosim::PairRecord rec;
    rec.pair_id = pair_id;
    rec.seed = {seed_path, seed_track.utt_start_s, seed_track.utt_end_s};
    rec.reenactment = {reen_path, reen_track.utt_start_s,
                       reen_track.utt_end_s};
    rec.judgment = judgments[i];
    rec.session = i < options.n_pairs / 2 ? "s1" : "s2";
    rec.language = "en-US";
    corpus.records.push_back(rec);

    manifest << pair_id << "," << seed_path << ","
             << prosim::FormatDouble(rec.seed.start_s) << ","
             << prosim::FormatDouble(rec.seed.end_s) << "," << reen_path << ","
             << prosim::FormatDouble(rec.reenactment.start_s) << ","
             << prosim::FormatDouble(rec.reenactment.end_s) << ","
             << prosim::FormatDouble(rec.judgment) << "," << rec.session
             << "," << rec.language << "\n";
  }

  corpus.manifest_path = dir + "/manifest.csv";
  std::ofstream out(corpus.manifest_path, std::ios::binary);
  out << manifest.str();
  return corpus;
}

}  // namespace synth
