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

#ifndef PROSIM_PIPELINE_HPP_
#define PROSIM_PIPELINE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "prosim/dataset.hpp"
#include "prosim/importance.hpp"
#include "prosim/report.hpp"

namespace prosim {

// Resolved configuration of one experiment run; serialized as-is into the
// run's metadata so a run directory is self-describing.
struct RunConfig {
  std::string manifest_path;
  std::string output_dir;
  SplitKind split_kind = SplitKind::kSessionHoldout;
  size_t k = 10;
  uint64_t split_seed = 1;
  ForestConfig forest;
  double ridge_lambda = 1e-3;
  size_t knn_k = 50;
  DeltaMode delta_mode = DeltaMode::kSigned;
  ExtractionConfig extraction;
  std::string cache_dir;  // optional feature cache; inline extraction if empty
  unsigned jobs = 1;

  std::string ToJson() const;
  static RunConfig FromJson(const std::string& json_text);
};

struct PairVectors {
  PairRecord record;
  FeatureVector seed;
  FeatureVector reenactment;
};

// Feature extraction for every pair in the manifest. Each distinct track is
// decoded and analyzed once; tracks are independent, so jobs > 1 extracts
// them concurrently with identical results.
std::vector<PairVectors> ExtractPairVectors(
    const std::vector<PairRecord>& records, const ExtractionConfig& config,
    unsigned jobs, std::vector<std::string>* warnings = nullptr);

ModelDataset BuildDeltaDataset(const std::vector<PairVectors>& pairs,
                               DeltaMode mode);

// Utterance-vector export: pair_id,role,wav,start_s,end_s + 100 columns.
std::string VectorsCsv(const std::vector<PairVectors>& pairs);
std::vector<PairVectors> ParseVectorsCsv(const std::string& text,
                                         const std::vector<PairRecord>& records);

struct ExtractResult {
  size_t tracks_written = 0;
  size_t tracks_skipped = 0;  // up-to-date caches left untouched
  size_t vectors_written = 0;
  bool vectors_skipped = false;
  std::vector<std::string> errors;    // per-file failures, run continued
  std::vector<std::string> warnings;
};

// The `extract` command: per-track feature CSVs + sidecars under
// out_dir/tracks/, utterance vectors in out_dir/vectors.csv. Re-runs skip
// work whose inputs (audio bytes + config) are unchanged, by content hash.
ExtractResult RunExtract(const std::string& manifest_path,
                         const std::string& out_dir,
                         const ExtractionConfig& config, unsigned jobs);

struct ExperimentResult {
  ImportanceReport report;
  std::string output_dir;
  std::vector<std::string> warnings;
};

// The `experiment` command: extraction (inline or via cache), split, all
// four models, the importance battery, and the report directory.
ExperimentResult RunExperiment(const RunConfig& config);

struct ScoreResult {
  ModelKind kind = ModelKind::kEuclidean;
  double value = 0.0;  // judgment estimate, or distance for euclidean
};

// The `score` command: extracts both utterances, forms the delta in the
// model's recorded mode, and predicts. Refuses models whose extractor
// version or feature layout does not match this build.
ScoreResult RunScore(const std::string& model_path, const UtteranceSpan& seed,
                     const UtteranceSpan& reenactment,
                     const ExtractionConfig& config);

// FNV-1a over a file's bytes; content-hash for cache freshness checks.
uint64_t HashFile(const std::string& path);
uint64_t HashBytes(const void* data, size_t size, uint64_t seed = 1469598103934665603ULL);

}  // namespace prosim

#endif  // PROSIM_PIPELINE_HPP_
