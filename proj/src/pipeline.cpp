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

#include "prosim/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "json.hpp"
#include "prosim/common.hpp"

namespace prosim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string ReadFileText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void WriteFileText(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<std::string> UniqueTrackPaths(const std::vector<PairRecord>& records) {
  std::vector<std::string> paths;
  for (const auto& r : records) {
    paths.push_back(r.seed.track_path);
    paths.push_back(r.reenactment.track_path);
  }
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  return paths;
}

std::string SanitizeStem(const std::string& path) {
  std::string stem = fs::path(path).stem().string();
  for (char& c : stem) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      c = '_';
    }
  }
  if (stem.empty()) stem = "track";
  return stem;
}

std::string HashHex(uint64_t h) {
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 8);  // first 8 hex chars are plenty here
}

double ParseDoubleField(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("bad numeric field '" + s + "'");
  }
  return v;
}

}  // namespace

uint64_t HashBytes(const void* data, size_t size, uint64_t seed) {
  const uint8_t* p = static_cast<const uint8_t*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t HashFile(const std::string& path) {
  std::string bytes = ReadFileText(path);
  return HashBytes(bytes.data(), bytes.size());
}

std::string RunConfig::ToJson() const {
  json j;
  j["manifest"] = manifest_path;
  j["output_dir"] = output_dir;
  j["split"] = {{"kind", SplitKindName(split_kind)},
                {"k", k},
                {"seed", split_seed}};
  j["forest"] = {{"n_trees", forest.n_trees},
                 {"max_depth", forest.max_depth},
                 {"min_leaf", forest.min_leaf},
                 {"features_per_split", forest.features_per_split},
                 {"rng_seed", forest.rng_seed}};
  j["ridge_lambda"] = ridge_lambda;
  j["knn_k"] = knn_k;
  j["delta_mode"] = DeltaModeName(delta_mode);
  j["extraction"] = json::parse(extraction.ToJson());
  j["cache_dir"] = cache_dir;
  j["jobs"] = jobs;
  return j.dump(2);
}

RunConfig RunConfig::FromJson(const std::string& json_text) {
  json j = json::parse(json_text);
  RunConfig c;
  c.manifest_path = j.value("manifest", "");
  c.output_dir = j.value("output_dir", "");
  if (j.contains("split")) {
    const json& s = j.at("split");
    c.split_kind = SplitKindFromName(s.value("kind", "session"));
    c.k = s.value("k", c.k);
    c.split_seed = s.value("seed", c.split_seed);
  }
  if (j.contains("forest")) {
    const json& f = j.at("forest");
    c.forest.n_trees = f.value("n_trees", c.forest.n_trees);
    c.forest.max_depth = f.value("max_depth", c.forest.max_depth);
    c.forest.min_leaf = f.value("min_leaf", c.forest.min_leaf);
    c.forest.features_per_split =
        f.value("features_per_split", c.forest.features_per_split);
    c.forest.rng_seed = f.value("rng_seed", c.forest.rng_seed);
  }
  c.ridge_lambda = j.value("ridge_lambda", c.ridge_lambda);
  c.knn_k = j.value("knn_k", c.knn_k);
  c.delta_mode = DeltaModeFromName(j.value("delta_mode", "signed"));
  if (j.contains("extraction")) {
    c.extraction = ExtractionConfig::FromJson(j.at("extraction").dump());
  }
  c.cache_dir = j.value("cache_dir", "");
  c.jobs = j.value("jobs", c.jobs);
  return c;
}

std::vector<PairVectors> ExtractPairVectors(
    const std::vector<PairRecord>& records, const ExtractionConfig& config,
    unsigned jobs, std::vector<std::string>* warnings) {
  std::vector<std::string> paths = UniqueTrackPaths(records);
  std::vector<BaseFeatureMatrix> features(paths.size());
  std::vector<std::vector<std::string>> track_warnings(paths.size());
  std::vector<std::string> track_errors(paths.size());

  ParallelFor(paths.size(), jobs, [&](size_t i) {
    try {
      AudioBuffer buf = LoadWav(paths[i]);
      features[i] = ExtractTrackFeatures(buf, config, &track_warnings[i]);
    } catch (const std::exception& e) {
      track_errors[i] = e.what();
    }
  });

  std::map<std::string, size_t> index_of;
  for (size_t i = 0; i < paths.size(); ++i) {
    if (!track_errors[i].empty()) throw Error(track_errors[i]);
    index_of[paths[i]] = i;
    if (warnings != nullptr) {
      warnings->insert(warnings->end(), track_warnings[i].begin(),
                       track_warnings[i].end());
    }
  }

  std::vector<PairVectors> out;
  out.reserve(records.size());
  for (const PairRecord& rec : records) {
    PairVectors pv;
    pv.record = rec;
    pv.seed = TileUtterance(features[index_of[rec.seed.track_path]],
                            rec.seed.start_s, rec.seed.end_s, config);
    pv.reenactment =
        TileUtterance(features[index_of[rec.reenactment.track_path]],
                      rec.reenactment.start_s, rec.reenactment.end_s, config);
    out.push_back(std::move(pv));
  }
  return out;
}

ModelDataset BuildDeltaDataset(const std::vector<PairVectors>& pairs,
                               DeltaMode mode) {
  ModelDataset data;
  data.dim = kNumDims;
  data.feature_labels.assign(DimensionLabels().begin(), DimensionLabels().end());
  for (const PairVectors& pv : pairs) {
    FeatureVector delta = DeltaVector(pv.seed, pv.reenactment, mode);
    data.AddRow(pv.record.pair_id,
                std::span<const double>(delta.values.data(), kNumDims),
                pv.record.judgment);
  }
  return data;
}

std::string VectorsCsv(const std::vector<PairVectors>& pairs) {
  std::ostringstream out;
  out << "pair_id,role,wav,start_s,end_s";
  for (const auto& label : DimensionLabels()) out << "," << label;
  out << "\n";
  auto row = [&](const std::string& id, const char* role,
                 const UtteranceSpan& span, const FeatureVector& vec) {
    out << id << "," << role << "," << span.track_path << ","
        << FormatDouble(span.start_s) << "," << FormatDouble(span.end_s);
    for (double v : vec.values) out << "," << FormatDouble(v);
    out << "\n";
  };
  for (const PairVectors& pv : pairs) {
    row(pv.record.pair_id, "seed", pv.record.seed, pv.seed);
    row(pv.record.pair_id, "reenactment", pv.record.reenactment,
        pv.reenactment);
  }
  return out.str();
}

std::vector<PairVectors> ParseVectorsCsv(
    const std::string& text, const std::vector<PairRecord>& records) {
  auto rows = ParseCsv(text);
  if (rows.empty()) throw Error("vectors csv: empty");
  if (rows[0].size() != 5 + kNumDims) {
    throw Error("vectors csv: expected " + std::to_string(5 + kNumDims) +
                " columns, got " + std::to_string(rows[0].size()));
  }
  struct Entry {
    FeatureVector seed;
    FeatureVector reen;
    bool have_seed = false;
    bool have_reen = false;
  };
  std::map<std::string, Entry> by_id;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 5 + kNumDims) {
      throw Error("vectors csv: malformed row " + std::to_string(r + 1));
    }
    FeatureVector vec;
    for (size_t d = 0; d < kNumDims; ++d) {
      vec.values[d] = ParseDoubleField(row[5 + d]);
    }
    Entry& e = by_id[row[0]];
    if (row[1] == "seed") {
      e.seed = vec;
      e.have_seed = true;
    } else if (row[1] == "reenactment") {
      e.reen = vec;
      e.have_reen = true;
    } else {
      throw Error("vectors csv: unknown role '" + row[1] + "'");
    }
  }
  std::vector<PairVectors> out;
  for (const PairRecord& rec : records) {
    auto it = by_id.find(rec.pair_id);
    if (it == by_id.end() || !it->second.have_seed || !it->second.have_reen) {
      throw Error("vectors csv: missing vectors for pair '" + rec.pair_id + "'");
    }
    PairVectors pv;
    pv.record = rec;
    pv.seed = it->second.seed;
    pv.reenactment = it->second.reen;
    out.push_back(std::move(pv));
  }
  return out;
}

ExtractResult RunExtract(const std::string& manifest_path,
                         const std::string& out_dir,
                         const ExtractionConfig& config, unsigned jobs) {
  ExtractResult result;
  std::vector<PairRecord> records =
      LoadManifest(manifest_path, /*check_audio_exists=*/false);

  fs::path base(out_dir);
  fs::path tracks_dir = base / "tracks";
  fs::create_directories(tracks_dir);

  const std::string config_json = config.ToJson();
  const uint64_t manifest_hash = HashFile(manifest_path);
  const uint64_t config_hash =
      HashBytes(config_json.data(), config_json.size());

  // Global freshness: if nothing feeding the run changed, rewrite nothing.
  fs::path global_meta_path = base / "extract_meta.json";
  json previous_meta;
  if (fs::exists(global_meta_path)) {
    try {
      previous_meta = json::parse(ReadFileText(global_meta_path.string()));
    } catch (const std::exception&) {
      previous_meta = json();
    }
  }

  std::vector<std::string> paths = UniqueTrackPaths(records);
  std::map<std::string, uint64_t> audio_hashes;
  bool all_audio_readable = true;
  for (const auto& path : paths) {
    try {
      audio_hashes[path] = HashFile(path);
    } catch (const std::exception& e) {
      result.errors.push_back(e.what());
      all_audio_readable = false;
    }
  }

  json current_inputs;
  current_inputs["manifest_hash"] = manifest_hash;
  current_inputs["config_hash"] = config_hash;
  {
    json tracks = json::object();
    for (const auto& [path, h] : audio_hashes) tracks[path] = h;
    current_inputs["audio_hashes"] = std::move(tracks);
  }

  if (all_audio_readable && previous_meta.is_object() &&
      previous_meta.value("inputs", json()) == current_inputs &&
      fs::exists(base / "vectors.csv")) {
    result.vectors_skipped = true;
    result.tracks_skipped = paths.size();
    return result;
  }

  // Per-track extraction with per-file failure collection.
  std::vector<BaseFeatureMatrix> features(paths.size());
  std::vector<std::string> track_errors(paths.size());
  std::vector<std::vector<std::string>> track_warnings(paths.size());
  std::vector<bool> ok(paths.size(), false);

  ParallelFor(paths.size(), jobs, [&](size_t i) {
    if (audio_hashes.find(paths[i]) == audio_hashes.end()) {
      track_errors[i] = "unreadable audio: " + paths[i];
      return;
    }
    try {
      AudioBuffer buf = LoadWav(paths[i]);
      features[i] = ExtractTrackFeatures(buf, config, &track_warnings[i]);
      ok[i] = true;
    } catch (const std::exception& e) {
      track_errors[i] = e.what();
    }
  });

  std::map<std::string, size_t> index_of;
  for (size_t i = 0; i < paths.size(); ++i) {
    index_of[paths[i]] = i;
    result.warnings.insert(result.warnings.end(), track_warnings[i].begin(),
                           track_warnings[i].end());
    if (!ok[i]) {
      if (!track_errors[i].empty()) result.errors.push_back(track_errors[i]);
      continue;
    }
    fs::path csv_path =
        tracks_dir / (SanitizeStem(paths[i]) + "__" +
                      HashHex(HashBytes(paths[i].data(), paths[i].size())) +
                      ".csv");
    fs::path meta_path = csv_path;
    meta_path += ".meta.json";

    uint64_t audio_hash = audio_hashes.at(paths[i]);
    bool fresh = false;
    if (fs::exists(meta_path) && fs::exists(csv_path)) {
      try {
        json meta = json::parse(ReadFileText(meta_path.string()));
        fresh = meta.value("audio_hash", uint64_t{0}) == audio_hash &&
                meta.value("config", json()) == json::parse(config_json);
      } catch (const std::exception&) {
        fresh = false;
      }
    }
    if (fresh) {
      ++result.tracks_skipped;
      continue;
    }
    WriteFileText(csv_path, TrackFeaturesCsv(features[i]));
    WriteFileText(meta_path, FeatureCacheMetadataJson(config, audio_hash));
    ++result.tracks_written;
  }

  // Utterance vectors for every pair whose tracks both extracted.
  std::vector<PairVectors> pairs;
  for (const PairRecord& rec : records) {
    size_t si = index_of[rec.seed.track_path];
    size_t ri = index_of[rec.reenactment.track_path];
    if (!ok[si] || !ok[ri]) {
      result.errors.push_back("pair '" + rec.pair_id +
                              "' skipped: track extraction failed");
      continue;
    }
    try {
      PairVectors pv;
      pv.record = rec;
      pv.seed = TileUtterance(features[si], rec.seed.start_s, rec.seed.end_s,
                              config);
      pv.reenactment = TileUtterance(features[ri], rec.reenactment.start_s,
                                     rec.reenactment.end_s, config);
      pairs.push_back(std::move(pv));
    } catch (const std::exception& e) {
      result.errors.push_back("pair '" + rec.pair_id + "': " + e.what());
    }
  }

  WriteFileText(base / "vectors.csv", VectorsCsv(pairs));
  result.vectors_written = pairs.size() * 2;

  if (result.errors.empty()) {
    json meta;
    meta["inputs"] = current_inputs;
    meta["version"] = kExtractorVersion;
    WriteFileText(global_meta_path, meta.dump(2));
  } else if (fs::exists(global_meta_path)) {
    // A partial run must not masquerade as a fresh complete one.
    fs::remove(global_meta_path);
  }
  return result;
}

ExperimentResult RunExperiment(const RunConfig& config) {
  if (config.manifest_path.empty() || config.output_dir.empty()) {
    throw Error("experiment: manifest and output_dir are required");
  }
  ExperimentResult result;
  result.output_dir = config.output_dir;

  std::vector<PairRecord> records = LoadManifest(config.manifest_path);
  if (records.size() < 2) throw Error("experiment: need at least 2 pairs");

  std::vector<PairVectors> pairs;
  if (!config.cache_dir.empty()) {
    ExtractResult ext = RunExtract(config.manifest_path, config.cache_dir,
                                   config.extraction, config.jobs);
    if (!ext.errors.empty()) {
      throw Error("experiment: feature cache extraction failed: " +
                  ext.errors.front());
    }
    result.warnings = ext.warnings;
    pairs = ParseVectorsCsv(
        ReadFileText((fs::path(config.cache_dir) / "vectors.csv").string()),
        records);
  } else {
    pairs = ExtractPairVectors(records, config.extraction, config.jobs,
                               &result.warnings);
  }

  ModelDataset data = BuildDeltaDataset(pairs, config.delta_mode);
  SplitPlan plan =
      MakeSplit(records, config.split_kind, config.k, config.split_seed);

  BatteryOptions options;
  options.forest = config.forest;
  options.ridge_lambda = config.ridge_lambda;
  options.knn_k = config.knn_k;
  options.delta_mode = config.delta_mode;
  result.report = RunImportanceBattery(data, plan, options);

  json meta;
  meta["tool"] = "prosim";
  meta["extractor_version"] = kExtractorVersion;
  meta["config"] = json::parse(config.ToJson());
  meta["split_plan"] = json::parse(plan.ToJson());
  meta["n_pairs"] = records.size();
  meta["warnings"] = result.warnings;
  WriteReportFiles(config.output_dir, result.report, meta.dump(2));
  return result;
}

ScoreResult RunScore(const std::string& model_path, const UtteranceSpan& seed,
                     const UtteranceSpan& reenactment,
                     const ExtractionConfig& config) {
  TrainedModel model = TrainedModel::Load(model_path);
  if (model.extractor_version != kExtractorVersion) {
    throw Error("score: model built against extractor version '" +
                model.extractor_version + "' but this build is '" +
                kExtractorVersion + "'; re-train or convert the model");
  }
  const auto& labels = DimensionLabels();
  if (model.feature_layout.size() != kNumDims ||
      !std::equal(labels.begin(), labels.end(),
                  model.feature_layout.begin())) {
    throw Error("score: model feature layout does not match the extractor's "
                "100-dimension layout; it was likely trained on a feature "
                "subset and cannot score raw audio");
  }

  auto vector_for = [&](const UtteranceSpan& span) {
    AudioBuffer buf = LoadWav(span.track_path);
    BaseFeatureMatrix feats = ExtractTrackFeatures(buf, config);
    return TileUtterance(feats, span.start_s, span.end_s, config);
  };
  FeatureVector seed_vec = vector_for(seed);
  FeatureVector reen_vec = vector_for(reenactment);
  FeatureVector delta = DeltaVector(seed_vec, reen_vec, model.delta_mode);

  ScoreResult result;
  result.kind = model.kind;
  result.value =
      model.Predict(std::span<const double>(delta.values.data(), kNumDims));
  return result;
}

}  // namespace prosim
