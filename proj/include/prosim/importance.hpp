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

#ifndef PROSIM_IMPORTANCE_HPP_
#define PROSIM_IMPORTANCE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "prosim/dataset.hpp"
#include "prosim/models.hpp"

namespace prosim {

// Train/test materialization of one fold of a split plan.
struct FoldData {
  ModelDataset train;
  ModelDataset test;
};

std::vector<FoldData> MaterializeFolds(const ModelDataset& data,
                                       const SplitPlan& plan);

// Pearson correlation of each dimension against the judgments, over all
// pairs. Constant dimensions yield an empty optional (rendered blank, never
// coerced to zero).
std::vector<std::optional<double>> PerDimensionCorrelations(
    const ModelDataset& data);

// One forest per fold training set, importance vectors averaged across
// folds and renormalized to sum 1.
std::vector<double> FoldAveragedForestImportance(const ModelDataset& data,
                                                 const SplitPlan& plan,
                                                 const ForestConfig& config);

enum class SubsetMode { kOnly, kExclude };

// Dimension indices covered by the given feature types / window positions.
std::vector<size_t> DimsForTypes(const std::vector<size_t>& types);
std::vector<size_t> DimsForWindows(const std::vector<size_t>& windows);

// Retrains a forest from scratch on the selected dimensions (or their
// complement) per fold, pools the out-of-fold predictions, and returns
// their correlation with the judgments.
std::optional<double> SubsetExperiment(const ModelDataset& data,
                                       const SplitPlan& plan,
                                       const std::vector<size_t>& dims,
                                       SubsetMode mode,
                                       const ForestConfig& config);

struct ModelScore {
  ModelKind kind = ModelKind::kEuclidean;
  std::optional<double> pearson;
  double mse = 0.0;
};

struct TypeImportanceRow {
  size_t feature = 0;            // BaseFeature index
  double importance = 0.0;       // summed over the type's 10 dimensions
  std::optional<double> only_correlation;
  std::optional<double> ablation_correlation;  // all-but-this-type model
};

struct PositionImportanceRow {
  size_t window = 0;
  std::optional<double> only_correlation;
  double summed_importance = 0.0;
};

struct ImportanceReport {
  std::vector<ModelScore> model_scores;  // euclidean, linear, knn, forest
  std::vector<std::optional<double>> dimension_correlations;  // 100
  std::vector<double> dimension_importance;  // 100, fold-averaged, sums to 1
  std::vector<TypeImportanceRow> per_type;   // sorted by importance, descending
  std::vector<PositionImportanceRow> per_position;  // window order
  SplitPlan split;
  ForestConfig forest_config;
  DeltaMode delta_mode = DeltaMode::kSigned;
  double ridge_lambda = 1e-3;
  size_t knn_k = 50;
};

struct BatteryOptions {
  ForestConfig forest;
  double ridge_lambda = 1e-3;
  size_t knn_k = 50;
  DeltaMode delta_mode = DeltaMode::kSigned;
};

// The full analysis battery: four model scores (out-of-fold predictions
// pooled across folds), per-dimension correlations and fold-averaged forest
// importances, and the per-type / per-position / ablation tables.
ImportanceReport RunImportanceBattery(const ModelDataset& data,
                                      const SplitPlan& plan,
                                      const BatteryOptions& options);

}  // namespace prosim

#endif  // PROSIM_IMPORTANCE_HPP_
