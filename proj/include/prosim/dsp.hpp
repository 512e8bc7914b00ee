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

#ifndef PROSIM_DSP_HPP_
#define PROSIM_DSP_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "prosim/audio.hpp"

namespace prosim {

// Frame i covers samples [i*hop, i*hop + frame_length).
struct FrameGrid {
  size_t frame_length = 0;
  size_t hop = 0;
  size_t n_frames = 0;
  int sample_rate = 0;

  size_t FrameStart(size_t i) const { return i * hop; }
  double FrameCenterSeconds(size_t i) const {
    return (static_cast<double>(i * hop) + 0.5 * frame_length) / sample_rate;
  }
  double HopSeconds() const {
    return static_cast<double>(hop) / sample_rate;
  }
};

// n_frames = floor((n_samples - frame_length)/hop) + 1. Throws if the buffer
// is shorter than one frame.
FrameGrid MakeFrameGrid(const AudioBuffer& buf, double frame_ms, double hop_ms);

std::vector<double> HannWindow(size_t n);

// |FFT| of the frame, zero-padded to the next power of two. Returns
// fft_size/2 + 1 non-negative magnitudes. The caller is expected to have
// applied any analysis window already.
std::vector<double> MagnitudeSpectrum(std::span<const double> frame);

// 10*log10(mean square + 1e-10); -100 dB for an all-zero frame.
double LogEnergy(std::span<const double> frame);

struct PitchOptions {
  double f0_min_hz = 50.0;
  double f0_max_hz = 500.0;
  double window_ms = 40.0;           // analysis window, centered on the frame
  double voicing_threshold = 0.45;   // on the normalized autocorrelation peak
  double octave_suppression = 0.9;   // see AutocorrPitch
};

struct PitchTrack {
  // 0 marks unvoiced frames; voiced values lie in [f0_min, f0_max].
  std::vector<double> f0_hz;
  std::vector<double> voicing_strength;  // peak autocorrelation, in [0, 1]
  // Raw candidate frequency from the best lag regardless of the voicing
  // decision; feeds the creakiness sub-60 Hz marker.
  std::vector<double> candidate_hz;

  size_t size() const { return f0_hz.size(); }
  bool Voiced(size_t i) const { return f0_hz[i] > 0.0; }
};

// Normalized-autocorrelation pitch over the lag range [fs/f0_max, fs/f0_min].
// One pass of octave-error suppression prefers the halved lag when its score
// is within `octave_suppression` of the best score, then the winning lag is
// refined by parabolic interpolation.
PitchTrack AutocorrPitch(const AudioBuffer& buf, const FrameGrid& grid,
                         const PitchOptions& options = {});

// flux[i] = sum_k max(0, s[i][k] - s[i-1][k]) over L2-normalized spectra;
// flux[0] = 0. Requires at least two spectra.
std::vector<double> SpectralFlux(const std::vector<std::vector<double>>& spectra);

struct CppsOptions {
  double quefrency_min_s = 1.0 / 300.0;
  double quefrency_max_s = 1.0 / 60.0;
  size_t time_smooth_frames = 10;
  size_t quefrency_smooth_bins = 10;
  double window_ms = 40.0;
};

// Smoothed cepstral peak prominence per frame, in dB: the peak of the
// time- and quefrency-smoothed real cepstrum within the quefrency range,
// minus a least-squares regression line evaluated at the peak.
std::vector<double> Cpps(const AudioBuffer& buf, const FrameGrid& grid,
                         const CppsOptions& options = {});

}  // namespace prosim

#endif  // PROSIM_DSP_HPP_
