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

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "prosim/common.hpp"
#include "prosim/pipeline.hpp"

namespace {

// Exit codes: 0 success, 1 usage/config error, 2 partial data failure,
// 3 internal error.
constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kPartialFailure = 2;
constexpr int kInternalError = 3;

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw prosim::Error("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

struct CommonFlags {
  std::string config_path;
  prosim::RunConfig config;

  void LoadConfigFile() {
    if (!config_path.empty()) {
      config = prosim::RunConfig::FromJson(ReadText(config_path));
    }
  }
};

struct ModelFlags {
  prosim::ForestConfig forest;
  double ridge_lambda = 1e-3;
  size_t knn_k = 50;

  void Register(CLI::App* cmd) {
    cmd->add_option("--trees", forest.n_trees, "Trees in the forest");
    cmd->add_option("--min-leaf", forest.min_leaf, "Minimum samples per leaf");
    cmd->add_option("--max-depth", forest.max_depth,
                    "Tree depth limit (0 = unlimited)");
    cmd->add_option("--features-per-split", forest.features_per_split,
                    "Candidate dimensions per split (0 = dim/3)");
    cmd->add_option("--forest-seed", forest.rng_seed, "Forest RNG seed");
    cmd->add_option("--ridge-lambda", ridge_lambda,
                    "Ridge penalty for the linear model");
    cmd->add_option("--knn-k", knn_k, "Neighbors for the KNN model");
  }

  // Config-file settings load after parsing, so only explicitly passed
  // flags may override them.
  void Apply(CLI::App* cmd, prosim::RunConfig& config) const {
    if (cmd->count("--trees")) config.forest.n_trees = forest.n_trees;
    if (cmd->count("--min-leaf")) config.forest.min_leaf = forest.min_leaf;
    if (cmd->count("--max-depth")) config.forest.max_depth = forest.max_depth;
    if (cmd->count("--features-per-split")) {
      config.forest.features_per_split = forest.features_per_split;
    }
    if (cmd->count("--forest-seed")) config.forest.rng_seed = forest.rng_seed;
    if (cmd->count("--ridge-lambda")) config.ridge_lambda = ridge_lambda;
    if (cmd->count("--knn-k")) config.knn_k = knn_k;
  }
};

int PrintErrors(const std::vector<std::string>& errors) {
  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
  return errors.empty() ? kOk : kPartialFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prosim: prosodic features and pragmatic-similarity models"};
  app.require_subcommand(1);

  CommonFlags common;

  // ---- extract ----
  auto* extract = app.add_subcommand(
      "extract", "Extract per-track feature caches and utterance vectors");
  std::string ex_manifest, ex_out;
  unsigned ex_jobs = 1;
  double ex_frame_ms = 32.0, ex_hop_ms = 10.0;
  extract->add_option("--manifest", ex_manifest, "Pair manifest CSV")
      ->required();
  extract->add_option("--out", ex_out, "Output directory")->required();
  extract->add_option("--jobs", ex_jobs, "Concurrent track extractions");
  extract->add_option("--config", common.config_path,
                      "JSON run config (extraction settings are used)");
  extract->add_option("--frame-ms", ex_frame_ms, "Analysis frame length (ms)");
  extract->add_option("--hop-ms", ex_hop_ms, "Analysis hop (ms)");

  // ---- experiment ----
  auto* experiment = app.add_subcommand(
      "experiment",
      "Train and evaluate all models and run the importance battery");
  std::string xp_manifest, xp_out, xp_split = "session", xp_delta = "signed";
  std::string xp_cache;
  size_t xp_k = 10;
  uint64_t xp_split_seed = 1;
  unsigned xp_jobs = 1;
  experiment->add_option("--config", common.config_path,
                         "JSON run config; explicit flags override it");
  experiment->add_option("--manifest", xp_manifest, "Pair manifest CSV");
  experiment->add_option("--out", xp_out, "Report output directory");
  experiment->add_option("--split-kind", xp_split, "session | kfold");
  experiment->add_option("--k", xp_k, "Folds for kfold splits");
  experiment->add_option("--split-seed", xp_split_seed, "Fold shuffle seed");
  experiment->add_option("--delta-mode", xp_delta, "signed | absolute");
  experiment->add_option("--cache", xp_cache,
                         "Feature cache directory (reused when fresh)");
  experiment->add_option("--jobs", xp_jobs, "Concurrent track extractions");
  ModelFlags model_flags;
  model_flags.Register(experiment);

  // ---- score ----
  auto* score = app.add_subcommand(
      "score", "Score one utterance pair with a serialized model");
  std::string sc_model;
  prosim::UtteranceSpan sc_seed, sc_reen;
  score->add_option("--model", sc_model, "Model JSON path")->required();
  score->add_option("--seed-wav", sc_seed.track_path, "Seed WAV")->required();
  score->add_option("--seed-start", sc_seed.start_s, "Seed start (s)")
      ->required();
  score->add_option("--seed-end", sc_seed.end_s, "Seed end (s)")->required();
  score->add_option("--reen-wav", sc_reen.track_path, "Re-enactment WAV")
      ->required();
  score->add_option("--reen-start", sc_reen.start_s, "Re-enactment start (s)")
      ->required();
  score->add_option("--reen-end", sc_reen.end_s, "Re-enactment end (s)")
      ->required();
  score->add_option("--config", common.config_path, "JSON run config");

  // ---- split ----
  auto* split = app.add_subcommand(
      "split", "Materialize a train/test split plan as JSON");
  std::string sp_manifest, sp_out, sp_kind = "session";
  size_t sp_k = 10;
  uint64_t sp_seed = 1;
  split->add_option("--manifest", sp_manifest, "Pair manifest CSV")->required();
  split->add_option("--kind", sp_kind, "session | kfold");
  split->add_option("--k", sp_k, "Folds for kfold splits");
  split->add_option("--seed", sp_seed, "Fold shuffle seed");
  split->add_option("--out", sp_out, "Plan output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    common.LoadConfigFile();

    if (extract->parsed()) {
      prosim::RunConfig& cfg = common.config;
      if (extract->count("--frame-ms")) cfg.extraction.frame_ms = ex_frame_ms;
      if (extract->count("--hop-ms")) cfg.extraction.hop_ms = ex_hop_ms;
      prosim::ExtractResult result =
          prosim::RunExtract(ex_manifest, ex_out, cfg.extraction, ex_jobs);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      if (result.vectors_skipped) {
        std::cout << "extract: up to date, nothing rewritten\n";
      } else {
        std::cout << "extract: " << result.tracks_written << " track caches "
                  << "written, " << result.tracks_skipped << " fresh, "
                  << result.vectors_written << " vectors\n";
      }
      return PrintErrors(result.errors);
    }

    if (experiment->parsed()) {
      prosim::RunConfig& cfg = common.config;
      if (experiment->count("--manifest")) cfg.manifest_path = xp_manifest;
      if (experiment->count("--out")) cfg.output_dir = xp_out;
      if (experiment->count("--split-kind")) {
        cfg.split_kind = prosim::SplitKindFromName(xp_split);
      }
      if (experiment->count("--k")) cfg.k = xp_k;
      if (experiment->count("--split-seed")) cfg.split_seed = xp_split_seed;
      if (experiment->count("--delta-mode")) {
        cfg.delta_mode = prosim::DeltaModeFromName(xp_delta);
      }
      if (experiment->count("--cache")) cfg.cache_dir = xp_cache;
      if (experiment->count("--jobs")) cfg.jobs = xp_jobs;
      model_flags.Apply(experiment, cfg);

      prosim::ExperimentResult result = prosim::RunExperiment(cfg);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "report written to " << result.output_dir << "\n";
      for (const auto& score_row : result.report.model_scores) {
        std::cout << "  " << prosim::ModelKindName(score_row.kind)
                  << ": pearson="
                  << (score_row.pearson
                          ? prosim::FormatDouble(*score_row.pearson)
                          : std::string("undefined"))
                  << " mse=" << prosim::FormatDouble(score_row.mse) << "\n";
      }
      return kOk;
    }

    if (score->parsed()) {
      prosim::ScoreResult result = prosim::RunScore(
          sc_model, sc_seed, sc_reen, common.config.extraction);
      if (result.kind == prosim::ModelKind::kEuclidean) {
        std::cout << "kind=euclidean distance="
                  << prosim::FormatDouble(result.value)
                  << " (higher = less similar)\n";
      } else {
        std::cout << "kind=" << prosim::ModelKindName(result.kind)
                  << " similarity=" << prosim::FormatDouble(result.value)
                  << " (1-5 scale)\n";
      }
      return kOk;
    }

    if (split->parsed()) {
      std::vector<prosim::PairRecord> records =
          prosim::LoadManifest(sp_manifest);
      prosim::SplitPlan plan = prosim::MakeSplit(
          records, prosim::SplitKindFromName(sp_kind), sp_k, sp_seed);
      std::ofstream out(sp_out);
      if (!out) throw prosim::Error("cannot open " + sp_out + " for writing");
      out << plan.ToJson() << "\n";
      std::cout << "split plan with " << plan.folds.size()
                << " fold(s) written to " << sp_out << "\n";
      return kOk;
    }
  } catch (const prosim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUsageError;
}
