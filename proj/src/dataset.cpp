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

#include "prosim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "prosim/common.hpp"

namespace prosim {

namespace {

using nlohmann::json;

const char* kManifestHeader =
    "pair_id,seed_wav,seed_start,seed_end,reen_wav,reen_start,reen_end,"
    "judgment,session,language";

double ParseNumber(const std::string& field, size_t line,
                   const std::string& what) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw Error("manifest line " + std::to_string(line) + ": bad " + what +
                " value '" + field + "'");
  }
  return value;
}

}  // namespace

std::vector<std::vector<std::string>> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;

  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      row_has_content = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_has_content = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        row_has_content = false;
      }
    } else {
      field.push_back(c);
    }
    ++i;
  }
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<PairRecord> LoadManifest(const std::string& path,
                                     bool check_audio_exists) {
  std::ifstream in(path);
  if (!in) throw Error("manifest: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  auto rows = ParseCsv(text);
  if (rows.empty()) throw Error("manifest: empty file " + path);

  // Header check, whitespace-insensitive per field.
  {
    std::string joined;
    for (size_t c = 0; c < rows[0].size(); ++c) {
      if (c > 0) joined += ",";
      std::string f = rows[0][c];
      f.erase(std::remove_if(f.begin(), f.end(),
                             [](char ch) { return ch == ' ' || ch == '\t'; }),
              f.end());
      joined += f;
    }
    if (joined != kManifestHeader) {
      throw Error("manifest: unexpected header '" + joined + "', want '" +
                  kManifestHeader + "'");
    }
  }

  std::vector<PairRecord> records;
  std::set<std::string> seen_ids;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    size_t line = r + 1;
    if (row.size() != 10) {
      throw Error("manifest line " + std::to_string(line) + ": expected 10 "
                  "fields, got " + std::to_string(row.size()));
    }
    PairRecord rec;
    rec.pair_id = row[0];
    rec.seed.track_path = row[1];
    rec.seed.start_s = ParseNumber(row[2], line, "seed_start");
    rec.seed.end_s = ParseNumber(row[3], line, "seed_end");
    rec.reenactment.track_path = row[4];
    rec.reenactment.start_s = ParseNumber(row[5], line, "reen_start");
    rec.reenactment.end_s = ParseNumber(row[6], line, "reen_end");
    rec.judgment = ParseNumber(row[7], line, "judgment");
    rec.session = row[8];
    rec.language = row[9];

    if (rec.pair_id.empty()) {
      throw Error("manifest line " + std::to_string(line) + ": empty pair_id");
    }
    if (!seen_ids.insert(rec.pair_id).second) {
      throw Error("manifest line " + std::to_string(line) +
                  ": duplicate pair_id '" + rec.pair_id + "'");
    }
    if (rec.judgment < 1.0 || rec.judgment > 5.0) {
      throw Error("manifest line " + std::to_string(line) + ": judgment " +
                  FormatDouble(rec.judgment) + " outside [1, 5] for pair '" +
                  rec.pair_id + "'");
    }
    for (const UtteranceSpan* span : {&rec.seed, &rec.reenactment}) {
      if (span->start_s < 0.0 || span->start_s >= span->end_s) {
        throw Error("manifest line " + std::to_string(line) +
                    ": invalid span [" + FormatDouble(span->start_s) + ", " +
                    FormatDouble(span->end_s) + "] for pair '" + rec.pair_id +
                    "'");
      }
      if (check_audio_exists && !std::filesystem::exists(span->track_path)) {
        throw Error("manifest line " + std::to_string(line) +
                    ": missing audio file '" + span->track_path +
                    "' for pair '" + rec.pair_id + "'");
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

const char* SplitKindName(SplitKind kind) {
  return kind == SplitKind::kSessionHoldout ? "session" : "kfold";
}

SplitKind SplitKindFromName(const std::string& name) {
  if (name == "session") return SplitKind::kSessionHoldout;
  if (name == "kfold") return SplitKind::kKFold;
  throw Error("unknown split kind: " + name);
}

SplitPlan MakeSplit(const std::vector<PairRecord>& records, SplitKind kind,
                    size_t k, uint64_t seed) {
  if (records.empty()) throw Error("split: no records");
  SplitPlan plan;
  plan.kind = kind;
  plan.seed = seed;

  // Order-normalize so the plan is a pure function of the record set.
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.pair_id);
  std::vector<size_t> perm(records.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(),
            [&](size_t a, size_t b) { return ids[a] < ids[b]; });

  if (kind == SplitKind::kSessionHoldout) {
    std::set<std::string> sessions;
    for (const auto& r : records) sessions.insert(r.session);
    if (sessions.size() < 2) {
      throw Error("split: session holdout needs >= 2 distinct session labels, "
                  "got " + std::to_string(sessions.size()));
    }
    const std::string& train_session = *sessions.begin();
    SplitFold fold;
    for (size_t i : perm) {
      if (records[i].session == train_session) {
        fold.train_ids.push_back(records[i].pair_id);
      } else {
        fold.test_ids.push_back(records[i].pair_id);
      }
    }
    plan.k = 1;
    plan.folds.push_back(std::move(fold));
    return plan;
  }

  if (k < 2) throw Error("split: k-fold needs k >= 2");
  if (k > records.size()) {
    throw Error("split: k (" + std::to_string(k) + ") exceeds record count (" +
                std::to_string(records.size()) + ")");
  }
  plan.k = k;

  std::vector<std::string> shuffled;
  shuffled.reserve(records.size());
  for (size_t i : perm) shuffled.push_back(records[i].pair_id);
  Rng rng(seed);
  rng.Shuffle(shuffled);

  size_t n = shuffled.size();
  size_t base = n / k;
  size_t extra = n % k;
  size_t pos = 0;
  std::vector<std::vector<std::string>> test_sets(k);
  for (size_t f = 0; f < k; ++f) {
    size_t size = base + (f < extra ? 1 : 0);
    test_sets[f].assign(shuffled.begin() + pos, shuffled.begin() + pos + size);
    pos += size;
    std::sort(test_sets[f].begin(), test_sets[f].end());
  }
  for (size_t f = 0; f < k; ++f) {
    SplitFold fold;
    fold.test_ids = test_sets[f];
    for (size_t g = 0; g < k; ++g) {
      if (g == f) continue;
      fold.train_ids.insert(fold.train_ids.end(), test_sets[g].begin(),
                            test_sets[g].end());
    }
    std::sort(fold.train_ids.begin(), fold.train_ids.end());
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

std::string SplitPlan::ToJson() const {
  json j;
  j["kind"] = SplitKindName(kind);
  j["k"] = k;
  j["seed"] = seed;
  json folds_json = json::array();
  for (const auto& fold : folds) {
    folds_json.push_back({{"train", fold.train_ids}, {"test", fold.test_ids}});
  }
  j["folds"] = std::move(folds_json);
  return j.dump(2);
}

SplitPlan SplitPlan::FromJson(const std::string& json_text) {
  json j = json::parse(json_text);
  SplitPlan plan;
  plan.kind = SplitKindFromName(j.at("kind").get<std::string>());
  plan.k = j.at("k").get<size_t>();
  plan.seed = j.at("seed").get<uint64_t>();
  for (const json& jf : j.at("folds")) {
    SplitFold fold;
    fold.train_ids = jf.at("train").get<std::vector<std::string>>();
    fold.test_ids = jf.at("test").get<std::vector<std::string>>();
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

}  // namespace prosim
