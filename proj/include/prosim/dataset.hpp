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

#ifndef PROSIM_DATASET_HPP_
#define PROSIM_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace prosim {

struct UtteranceSpan {
  std::string track_path;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct PairRecord {
  std::string pair_id;
  UtteranceSpan seed;
  UtteranceSpan reenactment;
  double judgment = 0.0;  // mean human similarity, in [1, 5]
  std::string session;
  std::string language;
};

// Manifest CSV with header
// pair_id,seed_wav,seed_start,seed_end,reen_wav,reen_start,reen_end,judgment,session,language
// Rejects malformed rows (naming the line), out-of-range judgments,
// duplicate pair ids, and (unless check_audio_exists is false) references
// to audio files that do not exist.
std::vector<PairRecord> LoadManifest(const std::string& path,
                                     bool check_audio_exists = true);

enum class SplitKind { kSessionHoldout, kKFold };

const char* SplitKindName(SplitKind kind);
SplitKind SplitKindFromName(const std::string& name);

struct SplitFold {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

struct SplitPlan {
  SplitKind kind = SplitKind::kSessionHoldout;
  size_t k = 0;          // folds, for k-fold
  uint64_t seed = 0;     // shuffle seed, recorded for reproducibility
  std::vector<SplitFold> folds;

  std::string ToJson() const;
  static SplitPlan FromJson(const std::string& json_text);
};

// Session holdout trains on the lexicographically smallest session label and
// tests on the rest (one fold). K-fold shuffles pair ids (order-normalized
// first, so input order is irrelevant) and produces k near-equal test sets
// that partition all pairs.
SplitPlan MakeSplit(const std::vector<PairRecord>& records, SplitKind kind,
                    size_t k, uint64_t seed);

// Simple RFC4180-ish CSV reader shared by the manifest and cache formats.
std::vector<std::vector<std::string>> ParseCsv(const std::string& text);

}  // namespace prosim

#endif  // PROSIM_DATASET_HPP_
