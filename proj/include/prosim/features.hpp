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

#ifndef PROSIM_FEATURES_HPP_
#define PROSIM_FEATURES_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "prosim/audio.hpp"
#include "prosim/dsp.hpp"

namespace prosim {

inline constexpr size_t kNumBaseFeatures = 10;
inline constexpr size_t kNumWindows = 10;
inline constexpr size_t kNumDims = kNumBaseFeatures * kNumWindows;

// Feature row order; also the dimension-block order of the tiled vector.
enum BaseFeature : size_t {
  kIntensity = 0,
  kLengthening = 1,
  kCreakiness = 2,
  kSpeakingRate = 3,
  kPeakDisalignment = 4,
  kCpps = 5,
  kPitchHighness = 6,
  kPitchLowness = 7,
  kPitchWideness = 8,
  kPitchNarrowness = 9,
};

const std::array<std::string, kNumBaseFeatures>& BaseFeatureNames();

// Window boundaries in percent of utterance duration: 0-5, 5-10, 10-20,
// 20-30, 30-50, 50-70, 70-80, 80-90, 90-95, 95-100.
const std::array<double, kNumWindows + 1>& WindowBoundariesPct();

// Everything tunable in the per-frame feature definitions. The defaults are
// what the rest of the toolkit (and its serialized caches) are calibrated to.
struct ExtractionConfig {
  int target_sample_rate = 16000;
  double frame_ms = 32.0;
  double hop_ms = 10.0;
  PitchOptions pitch;
  CppsOptions cpps;
  double rate_halfwindow_ms = 300.0;         // speaking-rate smoothing
  double lengthening_halfwindow_ms = 150.0;
  double flux_ref_percentile = 95.0;         // lengthening reference level
  double creak_halfwindow_ms = 100.0;
  double creak_f0_ratio = 0.6;               // vs the track median f0
  double creak_low_hz = 60.0;                // sub-60 Hz lag-peak marker
  double pitch_halfwindow_ms = 300.0;        // wideness/narrowness/peak windows
  double min_voiced_fraction = 0.5;
  double pitch_range_floor_hz = 1.0;         // percentile-span denominators
  double highness_clamp = 2.0;
  double speech_percentile = 30.0;           // intensity mask for normalization
  double norm_sd_floor = 1e-8;
  size_t min_tile_frames = 20;

  std::string ToJson() const;
  static ExtractionConfig FromJson(const std::string& json_text);
};

// Identifies the feature definitions a vector or model was produced with.
inline constexpr const char* kExtractorVersion = "prosim.features.v1";

// 10 rows x n_frames, aligned to `grid`. Rows are raw after
// ComputeBaseFeatures and z-scored after NormalizePerTrack.
struct BaseFeatureMatrix {
  FrameGrid grid;
  size_t n_samples = 0;  // of the analyzed track, for span validation
  std::array<std::vector<double>, kNumBaseFeatures> rows;

  size_t NumFrames() const { return grid.n_frames; }
  double TrackDurationSeconds() const {
    return static_cast<double>(n_samples) / grid.sample_rate;
  }
};

// The 100-dimensional tiled representation. values[f*10 + w] is base
// feature f averaged over percentage window w.
struct FeatureVector {
  std::array<double, kNumDims> values{};

  double& At(size_t feature, size_t window) {
    return values[feature * kNumWindows + window];
  }
  double At(size_t feature, size_t window) const {
    return values[feature * kNumWindows + window];
  }
};

// "intensity_w0" ... "pitch_narrowness_w9", in dimension order.
const std::array<std::string, kNumDims>& DimensionLabels();

// Per-frame base features for a canonical-rate buffer. Appends to *warnings
// (if given) when the track has no voiced frames, in which case the pitch
// percepts and peak disalignment are all zero.
BaseFeatureMatrix ComputeBaseFeatures(const AudioBuffer& buf,
                                      const ExtractionConfig& config,
                                      std::vector<std::string>* warnings = nullptr);

// Z-normalizes each row using mean/sd over speech frames (intensity above
// the track's speech_percentile). Rows with sd below norm_sd_floor become
// all zeros. Requires at least 10 frames.
BaseFeatureMatrix NormalizePerTrack(const BaseFeatureMatrix& m,
                                    const ExtractionConfig& config);

// Means over the ten percentage windows; a window without any frame center
// borrows the nearest in-span frame's value. The span must lie within the
// track and cover at least min_tile_frames frame centers.
FeatureVector TileUtterance(const BaseFeatureMatrix& normalized,
                            double start_s, double end_s,
                            const ExtractionConfig& config);

enum class DeltaMode { kSigned, kAbsolute };

const char* DeltaModeName(DeltaMode mode);
DeltaMode DeltaModeFromName(const std::string& name);

// Signed: seed - reenactment. Absolute: |seed - reenactment|.
FeatureVector DeltaVector(const FeatureVector& seed,
                          const FeatureVector& reenactment, DeltaMode mode);

// Load/resample/extract/normalize in one step.
BaseFeatureMatrix ExtractTrackFeatures(const AudioBuffer& buf,
                                       const ExtractionConfig& config,
                                       std::vector<std::string>* warnings = nullptr);

// Feature cache row format: frame_index,time_s,<10 feature names>.
std::string TrackFeaturesCsv(const BaseFeatureMatrix& m);

// Sidecar recording the constants a cache file was produced with.
std::string FeatureCacheMetadataJson(const ExtractionConfig& config,
                                     uint64_t audio_hash);

}  // namespace prosim

#endif  // PROSIM_FEATURES_HPP_
