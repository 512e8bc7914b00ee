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

#ifndef PROSIM_AUDIO_HPP_
#define PROSIM_AUDIO_HPP_

#include <string>
#include <vector>

namespace prosim {

// Mono audio in [-1, 1]. All analysis code assumes this canonical form.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;
  std::string source_path;

  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a RIFF/WAVE file holding PCM 16-bit or IEEE float 32-bit samples,
// mono or stereo. Stereo is downmixed by channel average; integer samples
// are scaled by 1/32768. Throws Error naming the path on unreadable files,
// unsupported codecs, and zero-length audio.
AudioBuffer LoadWav(const std::string& path);

enum class WavFormat { kPcm16, kFloat32 };

// Writes one channel per entry in `channels` (all must share a length).
// PCM16 samples are round(x * 32768) clamped to the int16 range.
void WriteWav(const std::string& path,
              const std::vector<std::vector<double>>& channels,
              int sample_rate, WavFormat format);

void WriteWavMono(const std::string& path, const std::vector<double>& samples,
                  int sample_rate, WavFormat format);

// Linear-interpolation resampling to round(n * target/source) samples.
// Returns the input unchanged when the rates already match.
AudioBuffer Resample(const AudioBuffer& buf, int target_rate);

}  // namespace prosim

#endif  // PROSIM_AUDIO_HPP_
