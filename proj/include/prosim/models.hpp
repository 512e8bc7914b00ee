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

#ifndef PROSIM_MODELS_HPP_
#define PROSIM_MODELS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prosim/features.hpp"

namespace prosim {

// Rows of feature deltas with pair ids and judgment targets. Fitting
// order-normalizes rows by id, so storage order never affects a model.
struct ModelDataset {
  size_t dim = 0;
  std::vector<std::string> ids;
  std::vector<double> x;  // row-major, ids.size() * dim
  std::vector<double> y;
  std::vector<std::string> feature_labels;

  size_t NumRows() const { return ids.size(); }
  std::span<const double> Row(size_t i) const {
    return std::span<const double>(x.data() + i * dim, dim);
  }
  void AddRow(const std::string& id, std::span<const double> row, double target);

  ModelDataset SelectColumns(const std::vector<size_t>& columns) const;
  ModelDataset SelectRows(const std::vector<size_t>& rows) const;
  ModelDataset SortedById() const;
};

// Per-dimension mean/sd from the training deltas; sd floored at 1e-8 so
// constant dimensions z-score to zero.
struct ZStats {
  std::vector<double> mean;
  std::vector<double> sd;

  std::vector<double> Apply(std::span<const double> row) const;
};

ZStats ComputeZStats(const ModelDataset& train);

enum class ModelKind { kEuclidean, kLinear, kKnn, kForest };

const char* ModelKindName(ModelKind kind);
ModelKind ModelKindFromName(const std::string& name);

struct ForestConfig {
  size_t n_trees = 100;
  size_t max_depth = 0;           // 0 = unlimited
  size_t min_leaf = 5;
  size_t features_per_split = 0;  // 0 = ceil(dim / 3)
  uint64_t rng_seed = 1;
};

struct TreeNode {
  int32_t left = -1;   // -1 marks a leaf
  int32_t right = -1;
  uint32_t dim = 0;
  double threshold = 0.0;
  double value = 0.0;  // leaf prediction

  bool IsLeaf() const { return left < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;
  double Predict(std::span<const double> z) const;
};

class TrainedModel {
 public:
  ModelKind kind = ModelKind::kEuclidean;
  std::vector<std::string> feature_layout;
  std::string extractor_version = kExtractorVersion;
  DeltaMode delta_mode = DeltaMode::kSigned;
  ZStats stats;

  // linear
  std::vector<double> weights;  // on z-scored inputs
  double intercept = 0.0;
  double ridge_lambda = 1e-3;

  // knn
  size_t k = 50;
  std::vector<double> train_z;  // row-major
  std::vector<double> train_y;
  std::vector<std::string> train_ids;

  // forest
  ForestConfig forest_config;
  std::vector<Tree> trees;
  std::vector<double> importances;  // per dimension, sums to 1

  std::vector<std::string> fit_warnings;

  // For the euclidean kind this is a distance (higher = less similar);
  // for the regression kinds, a judgment estimate.
  double Predict(std::span<const double> delta) const;

  std::string ToJson() const;
  static TrainedModel FromJson(const std::string& json_text);
  void Save(const std::string& path) const;
  static TrainedModel Load(const std::string& path);
};

// Distance baseline: L2 norm of the z-scored delta.
TrainedModel FitEuclidean(const ModelDataset& train);

// Ridge-regularized least squares on z-scored deltas, intercept unpenalized.
TrainedModel FitLinear(const ModelDataset& train, double ridge_lambda = 1e-3);

// Unweighted k-nearest-neighbors mean; distance ties break by ascending id.
TrainedModel FitKnn(const ModelDataset& train, size_t k = 50);

// Bootstrap CART regression forest with variance-reduction splits and
// per-split feature subsampling. Deterministic for a given rng_seed.
TrainedModel FitForest(const ModelDataset& train, const ForestConfig& config);

struct EvalResult {
  std::optional<double> pearson;  // empty when either side is constant
  double mse = 0.0;
};

std::optional<double> PearsonCorrelation(const std::vector<double>& a,
                                         const std::vector<double>& b);

EvalResult EvaluatePredictions(const std::vector<double>& predictions,
                               const std::vector<double>& targets);

EvalResult Evaluate(const TrainedModel& model, const ModelDataset& test);

}  // namespace prosim

#endif  // PROSIM_MODELS_HPP_
