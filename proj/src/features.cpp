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

#include "prosim/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "prosim/common.hpp"

namespace prosim {

namespace {

using nlohmann::json;

// Truncated moving average over [i-half, i+half].
std::vector<double> MovingAverage(const std::vector<double>& v, size_t half) {
  std::vector<double> out(v.size(), 0.0);
  if (v.empty()) return out;
  std::vector<double> prefix(v.size() + 1, 0.0);
  for (size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];
  for (size_t i = 0; i < v.size(); ++i) {
    size_t lo = i >= half ? i - half : 0;
    size_t hi = std::min(v.size(), i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

size_t HalfWindowFrames(double halfwindow_ms, double hop_ms) {
  return static_cast<size_t>(std::llround(halfwindow_ms / hop_ms));
}

}  // namespace

const std::array<std::string, kNumBaseFeatures>& BaseFeatureNames() {
  static const std::array<std::string, kNumBaseFeatures> names = {
      "intensity",         "lengthening",    "creakiness",
      "speaking_rate",     "peak_disalignment", "cpps",
      "pitch_highness",    "pitch_lowness",  "pitch_wideness",
      "pitch_narrowness"};
  return names;
}

const std::array<double, kNumWindows + 1>& WindowBoundariesPct() {
  static const std::array<double, kNumWindows + 1> bounds = {
      0.0, 5.0, 10.0, 20.0, 30.0, 50.0, 70.0, 80.0, 90.0, 95.0, 100.0};
  return bounds;
}

const std::array<std::string, kNumDims>& DimensionLabels() {
  static const std::array<std::string, kNumDims> labels = [] {
    std::array<std::string, kNumDims> out;
    for (size_t f = 0; f < kNumBaseFeatures; ++f) {
      for (size_t w = 0; w < kNumWindows; ++w) {
        out[f * kNumWindows + w] =
            BaseFeatureNames()[f] + "_w" + std::to_string(w);
      }
    }
    return out;
  }();
  return labels;
}

std::string ExtractionConfig::ToJson() const {
  json j;
  j["target_sample_rate"] = target_sample_rate;
  j["frame_ms"] = frame_ms;
  j["hop_ms"] = hop_ms;
  j["pitch"] = {{"f0_min_hz", pitch.f0_min_hz},
                {"f0_max_hz", pitch.f0_max_hz},
                {"window_ms", pitch.window_ms},
                {"voicing_threshold", pitch.voicing_threshold},
                {"octave_suppression", pitch.octave_suppression}};
  j["cpps"] = {{"quefrency_min_s", cpps.quefrency_min_s},
               {"quefrency_max_s", cpps.quefrency_max_s},
               {"time_smooth_frames", cpps.time_smooth_frames},
               {"quefrency_smooth_bins", cpps.quefrency_smooth_bins},
               {"window_ms", cpps.window_ms}};
  j["rate_halfwindow_ms"] = rate_halfwindow_ms;
  j["lengthening_halfwindow_ms"] = lengthening_halfwindow_ms;
  j["flux_ref_percentile"] = flux_ref_percentile;
  j["creak_halfwindow_ms"] = creak_halfwindow_ms;
  j["creak_f0_ratio"] = creak_f0_ratio;
  j["creak_low_hz"] = creak_low_hz;
  j["pitch_halfwindow_ms"] = pitch_halfwindow_ms;
  j["min_voiced_fraction"] = min_voiced_fraction;
  j["pitch_range_floor_hz"] = pitch_range_floor_hz;
  j["highness_clamp"] = highness_clamp;
  j["speech_percentile"] = speech_percentile;
  j["norm_sd_floor"] = norm_sd_floor;
  j["min_tile_frames"] = min_tile_frames;
  j["version"] = kExtractorVersion;
  return j.dump(2);
}

ExtractionConfig ExtractionConfig::FromJson(const std::string& json_text) {
  json j = json::parse(json_text);
  ExtractionConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("target_sample_rate", c.target_sample_rate);
  get("frame_ms", c.frame_ms);
  get("hop_ms", c.hop_ms);
  if (j.contains("pitch")) {
    const json& p = j.at("pitch");
    c.pitch.f0_min_hz = p.value("f0_min_hz", c.pitch.f0_min_hz);
    c.pitch.f0_max_hz = p.value("f0_max_hz", c.pitch.f0_max_hz);
    c.pitch.window_ms = p.value("window_ms", c.pitch.window_ms);
    c.pitch.voicing_threshold =
        p.value("voicing_threshold", c.pitch.voicing_threshold);
    c.pitch.octave_suppression =
        p.value("octave_suppression", c.pitch.octave_suppression);
  }
  if (j.contains("cpps")) {
    const json& p = j.at("cpps");
    c.cpps.quefrency_min_s = p.value("quefrency_min_s", c.cpps.quefrency_min_s);
    c.cpps.quefrency_max_s = p.value("quefrency_max_s", c.cpps.quefrency_max_s);
    c.cpps.time_smooth_frames =
        p.value("time_smooth_frames", c.cpps.time_smooth_frames);
    c.cpps.quefrency_smooth_bins =
        p.value("quefrency_smooth_bins", c.cpps.quefrency_smooth_bins);
    c.cpps.window_ms = p.value("window_ms", c.cpps.window_ms);
  }
  get("rate_halfwindow_ms", c.rate_halfwindow_ms);
  get("lengthening_halfwindow_ms", c.lengthening_halfwindow_ms);
  get("flux_ref_percentile", c.flux_ref_percentile);
  get("creak_halfwindow_ms", c.creak_halfwindow_ms);
  get("creak_f0_ratio", c.creak_f0_ratio);
  get("creak_low_hz", c.creak_low_hz);
  get("pitch_halfwindow_ms", c.pitch_halfwindow_ms);
  get("min_voiced_fraction", c.min_voiced_fraction);
  get("pitch_range_floor_hz", c.pitch_range_floor_hz);
  get("highness_clamp", c.highness_clamp);
  get("speech_percentile", c.speech_percentile);
  get("norm_sd_floor", c.norm_sd_floor);
  get("min_tile_frames", c.min_tile_frames);
  return c;
}

BaseFeatureMatrix ComputeBaseFeatures(const AudioBuffer& buf,
                                      const ExtractionConfig& config,
                                      std::vector<std::string>* warnings) {
  BaseFeatureMatrix m;
  m.grid = MakeFrameGrid(buf, config.frame_ms, config.hop_ms);
  m.n_samples = buf.samples.size();
  const size_t n = m.grid.n_frames;
  for (auto& row : m.rows) row.assign(n, 0.0);

  // Intensity and per-frame spectra.
  const std::vector<double> hann = HannWindow(m.grid.frame_length);
  std::vector<std::vector<double>> spectra(n);
  std::vector<double> windowed(m.grid.frame_length);
  for (size_t i = 0; i < n; ++i) {
    const double* frame = buf.samples.data() + m.grid.FrameStart(i);
    m.rows[kIntensity][i] =
        LogEnergy(std::span<const double>(frame, m.grid.frame_length));
    for (size_t t = 0; t < m.grid.frame_length; ++t) {
      windowed[t] = frame[t] * hann[t];
    }
    spectra[i] = MagnitudeSpectrum(windowed);
  }

  std::vector<double> flux(n, 0.0);
  if (n >= 2) flux = SpectralFlux(spectra);
  spectra.clear();
  spectra.shrink_to_fit();

  const PitchTrack pitch = AutocorrPitch(buf, m.grid, config.pitch);

  // Speaking rate: smoothed spectral flux.
  const size_t rate_half = HalfWindowFrames(config.rate_halfwindow_ms, config.hop_ms);
  m.rows[kSpeakingRate] = MovingAverage(flux, rate_half);

  // Lengthening: sustained voiced regions with little spectral change.
  {
    double flux_ref = Percentile(flux, config.flux_ref_percentile);
    std::vector<double> sustain(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
      sustain[i] =
          pitch.voicing_strength[i] * std::max(0.0, flux_ref - flux[i]);
    }
    m.rows[kLengthening] = MovingAverage(
        sustain, HalfWindowFrames(config.lengthening_halfwindow_ms, config.hop_ms));
  }

  m.rows[kCpps] = Cpps(buf, m.grid, config.cpps);

  // Voiced-frame f0 statistics drive creakiness and the pitch percepts.
  std::vector<double> voiced_f0;
  voiced_f0.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (pitch.Voiced(i)) voiced_f0.push_back(pitch.f0_hz[i]);
  }

  if (voiced_f0.empty()) {
    if (warnings != nullptr) {
      warnings->push_back("track has no voiced frames: pitch percepts and "
                          "peak disalignment set to zero (" +
                          buf.source_path + ")");
    }
    return m;
  }

  const double f0_p10 = Percentile(voiced_f0, 10.0);
  const double f0_p50 = Percentile(voiced_f0, 50.0);
  const double f0_p90 = Percentile(voiced_f0, 90.0);
  const double up_span = std::max(f0_p90 - f0_p50, config.pitch_range_floor_hz);
  const double down_span = std::max(f0_p50 - f0_p10, config.pitch_range_floor_hz);
  const double full_span = std::max(f0_p90 - f0_p10, config.pitch_range_floor_hz);

  // Creakiness: local share of low-pitched or sub-audio-rate periodicity.
  {
    std::vector<double> marker(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
      bool low_voiced = pitch.Voiced(i) &&
                        pitch.f0_hz[i] < config.creak_f0_ratio * f0_p50;
      bool low_lag = pitch.candidate_hz[i] > 0.0 &&
                     pitch.candidate_hz[i] < config.creak_low_hz;
      marker[i] = (low_voiced || low_lag) ? 1.0 : 0.0;
    }
    m.rows[kCreakiness] = MovingAverage(
        marker, HalfWindowFrames(config.creak_halfwindow_ms, config.hop_ms));
  }

  // Pitch percepts and peak disalignment over +-pitch_halfwindow_ms.
  const size_t ph = HalfWindowFrames(config.pitch_halfwindow_ms, config.hop_ms);
  for (size_t i = 0; i < n; ++i) {
    if (pitch.Voiced(i)) {
      double up = (pitch.f0_hz[i] - f0_p50) / up_span;
      double down = (f0_p50 - pitch.f0_hz[i]) / down_span;
      m.rows[kPitchHighness][i] =
          std::clamp(std::max(0.0, up), 0.0, config.highness_clamp);
      m.rows[kPitchLowness][i] =
          std::clamp(std::max(0.0, down), 0.0, config.highness_clamp);
    }

    size_t lo = i >= ph ? i - ph : 0;
    size_t hi = std::min(n, i + ph + 1);
    size_t n_window = hi - lo;
    size_t n_voiced = 0;
    double f0_lo = 0.0, f0_hi = 0.0;
    size_t f0_peak_idx = 0;
    bool have_voiced = false;
    for (size_t j = lo; j < hi; ++j) {
      if (!pitch.Voiced(j)) continue;
      ++n_voiced;
      double f = pitch.f0_hz[j];
      if (!have_voiced) {
        f0_lo = f0_hi = f;
        f0_peak_idx = j;
        have_voiced = true;
      } else {
        f0_lo = std::min(f0_lo, f);
        if (f > f0_hi) {
          f0_hi = f;
          f0_peak_idx = j;
        }
      }
    }

    if (have_voiced) {
      m.rows[kPitchWideness][i] = (f0_hi - f0_lo) / full_span;
    }

    bool enough_voicing =
        static_cast<double>(n_voiced) >=
        config.min_voiced_fraction * static_cast<double>(n_window);
    if (enough_voicing) {
      m.rows[kPitchNarrowness][i] =
          std::max(0.0, 1.0 - m.rows[kPitchWideness][i]);

      size_t intensity_peak_idx = lo;
      for (size_t j = lo + 1; j < hi; ++j) {
        if (m.rows[kIntensity][j] > m.rows[kIntensity][intensity_peak_idx]) {
          intensity_peak_idx = j;
        }
      }
      m.rows[kPeakDisalignment][i] =
          (static_cast<double>(f0_peak_idx) -
           static_cast<double>(intensity_peak_idx)) *
          m.grid.HopSeconds();
    }
  }

  return m;
}

BaseFeatureMatrix NormalizePerTrack(const BaseFeatureMatrix& m,
                                    const ExtractionConfig& config) {
  const size_t n = m.NumFrames();
  if (n < 10) throw Error("normalize: need at least 10 frames");

  // Speech mask: intensity strictly above the track percentile. Falls back
  // to all frames when the mask would be degenerate (e.g. pure silence).
  const std::vector<double>& intensity = m.rows[kIntensity];
  double threshold =
      Percentile(intensity, config.speech_percentile);
  std::vector<size_t> mask;
  mask.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (intensity[i] > threshold) mask.push_back(i);
  }
  if (mask.size() < 10) {
    mask.resize(n);
    for (size_t i = 0; i < n; ++i) mask[i] = i;
  }

  BaseFeatureMatrix out = m;
  for (size_t f = 0; f < kNumBaseFeatures; ++f) {
    const std::vector<double>& row = m.rows[f];
    double mean = 0.0;
    for (size_t i : mask) mean += row[i];
    mean /= static_cast<double>(mask.size());
    double var = 0.0;
    for (size_t i : mask) {
      double d = row[i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(mask.size());
    double sd = std::sqrt(var);
    if (sd < config.norm_sd_floor) {
      std::fill(out.rows[f].begin(), out.rows[f].end(), 0.0);
    } else {
      for (size_t i = 0; i < n; ++i) out.rows[f][i] = (row[i] - mean) / sd;
    }
  }
  return out;
}

FeatureVector TileUtterance(const BaseFeatureMatrix& normalized,
                            double start_s, double end_s,
                            const ExtractionConfig& config) {
  if (start_s < 0.0 || end_s <= start_s ||
      end_s > normalized.TrackDurationSeconds() + 1e-9) {
    throw Error("tile: span [" + FormatDouble(start_s) + ", " +
                FormatDouble(end_s) + "] outside track");
  }
  const double duration = end_s - start_s;
  const auto& bounds = WindowBoundariesPct();

  std::vector<size_t> in_span;
  std::vector<double> pct;
  for (size_t i = 0; i < normalized.NumFrames(); ++i) {
    double t = normalized.grid.FrameCenterSeconds(i);
    if (t >= start_s && t < end_s) {
      in_span.push_back(i);
      pct.push_back((t - start_s) / duration * 100.0);
    }
  }
  if (in_span.size() < config.min_tile_frames) {
    throw Error("tile: span too short, covers " +
                std::to_string(in_span.size()) + " frames, need " +
                std::to_string(config.min_tile_frames));
  }

  std::array<std::vector<size_t>, kNumWindows> members;
  for (size_t k = 0; k < in_span.size(); ++k) {
    size_t w = kNumWindows - 1;
    for (size_t j = 0; j < kNumWindows; ++j) {
      if (pct[k] >= bounds[j] && pct[k] < bounds[j + 1]) {
        w = j;
        break;
      }
    }
    members[w].push_back(k);
  }

  // Nearest in-span frame to each empty window's midpoint.
  std::array<size_t, kNumWindows> fallback{};
  for (size_t w = 0; w < kNumWindows; ++w) {
    if (!members[w].empty()) continue;
    double mid = 0.5 * (bounds[w] + bounds[w + 1]);
    size_t best = 0;
    for (size_t k = 1; k < in_span.size(); ++k) {
      if (std::abs(pct[k] - mid) < std::abs(pct[best] - mid)) best = k;
    }
    fallback[w] = best;
  }

  FeatureVector vec;
  for (size_t f = 0; f < kNumBaseFeatures; ++f) {
    const std::vector<double>& row = normalized.rows[f];
    for (size_t w = 0; w < kNumWindows; ++w) {
      if (members[w].empty()) {
        vec.At(f, w) = row[in_span[fallback[w]]];
        continue;
      }
      double s = 0.0;
      for (size_t k : members[w]) s += row[in_span[k]];
      vec.At(f, w) = s / static_cast<double>(members[w].size());
    }
  }
  return vec;
}

const char* DeltaModeName(DeltaMode mode) {
  return mode == DeltaMode::kSigned ? "signed" : "absolute";
}

DeltaMode DeltaModeFromName(const std::string& name) {
  if (name == "signed") return DeltaMode::kSigned;
  if (name == "absolute") return DeltaMode::kAbsolute;
  throw Error("unknown delta mode: " + name);
}

FeatureVector DeltaVector(const FeatureVector& seed,
                          const FeatureVector& reenactment, DeltaMode mode) {
  FeatureVector out;
  for (size_t i = 0; i < kNumDims; ++i) {
    double d = seed.values[i] - reenactment.values[i];
    out.values[i] = mode == DeltaMode::kSigned ? d : std::abs(d);
  }
  return out;
}

BaseFeatureMatrix ExtractTrackFeatures(const AudioBuffer& buf,
                                       const ExtractionConfig& config,
                                       std::vector<std::string>* warnings) {
  AudioBuffer canonical = Resample(buf, config.target_sample_rate);
  BaseFeatureMatrix raw = ComputeBaseFeatures(canonical, config, warnings);
  return NormalizePerTrack(raw, config);
}

std::string TrackFeaturesCsv(const BaseFeatureMatrix& m) {
  std::ostringstream out;
  out << "frame_index,time_s";
  for (const auto& name : BaseFeatureNames()) out << "," << name;
  out << "\n";
  for (size_t i = 0; i < m.NumFrames(); ++i) {
    out << i << "," << FormatDouble(m.grid.FrameCenterSeconds(i));
    for (size_t f = 0; f < kNumBaseFeatures; ++f) {
      out << "," << FormatDouble(m.rows[f][i]);
    }
    out << "\n";
  }
  return out.str();
}

std::string FeatureCacheMetadataJson(const ExtractionConfig& config,
                                     uint64_t audio_hash) {
  json j;
  j["version"] = kExtractorVersion;
  j["audio_hash"] = audio_hash;
  j["config"] = json::parse(config.ToJson());
  return j.dump(2);
}

}  // namespace prosim
