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

#include "prosim/importance.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "prosim/common.hpp"

namespace prosim {

namespace {

// Pools out-of-fold predictions in fold order (test ids are sorted within a
// fold), so every correlation below is over one deterministic vector pair.
struct PooledPredictions {
  std::vector<double> predictions;
  std::vector<double> targets;
};

template <typename FitFn>
PooledPredictions PooledOutOfFold(const std::vector<FoldData>& folds,
                                  const FitFn& fit) {
  PooledPredictions pooled;
  for (const FoldData& fold : folds) {
    TrainedModel model = fit(fold.train);
    for (size_t i = 0; i < fold.test.NumRows(); ++i) {
      pooled.predictions.push_back(model.Predict(fold.test.Row(i)));
      pooled.targets.push_back(fold.test.y[i]);
    }
  }
  return pooled;
}

std::vector<size_t> ComplementDims(const std::vector<size_t>& dims, size_t n) {
  std::vector<bool> in(n, false);
  for (size_t d : dims) {
    if (d < n) in[d] = true;
  }
  std::vector<size_t> out;
  for (size_t d = 0; d < n; ++d) {
    if (!in[d]) out.push_back(d);
  }
  return out;
}

}  // namespace

std::vector<FoldData> MaterializeFolds(const ModelDataset& data,
                                       const SplitPlan& plan) {
  std::map<std::string, size_t> row_of;
  for (size_t i = 0; i < data.NumRows(); ++i) row_of[data.ids[i]] = i;

  std::vector<FoldData> folds;
  folds.reserve(plan.folds.size());
  for (const SplitFold& fold : plan.folds) {
    FoldData fd;
    auto collect = [&](const std::vector<std::string>& ids) {
      std::vector<size_t> rows;
      rows.reserve(ids.size());
      for (const std::string& id : ids) {
        auto it = row_of.find(id);
        if (it == row_of.end()) {
          throw Error("split references unknown pair_id '" + id + "'");
        }
        rows.push_back(it->second);
      }
      return data.SelectRows(rows);
    };
    fd.train = collect(fold.train_ids);
    fd.test = collect(fold.test_ids);
    if (fd.train.NumRows() == 0 || fd.test.NumRows() == 0) {
      throw Error("split fold with empty train or test set");
    }
    folds.push_back(std::move(fd));
  }
  return folds;
}

std::vector<std::optional<double>> PerDimensionCorrelations(
    const ModelDataset& data) {
  if (data.NumRows() < 2) {
    throw Error("dimension correlations: need at least 2 pairs");
  }
  std::vector<std::optional<double>> out(data.dim);
  std::vector<double> column(data.NumRows());
  for (size_t d = 0; d < data.dim; ++d) {
    for (size_t i = 0; i < data.NumRows(); ++i) column[i] = data.x[i * data.dim + d];
    out[d] = PearsonCorrelation(column, data.y);
  }
  return out;
}

std::vector<double> FoldAveragedForestImportance(const ModelDataset& data,
                                                 const SplitPlan& plan,
                                                 const ForestConfig& config) {
  std::vector<FoldData> folds = MaterializeFolds(data, plan);
  std::vector<double> average(data.dim, 0.0);
  for (const FoldData& fold : folds) {
    TrainedModel forest = FitForest(fold.train, config);
    for (size_t d = 0; d < data.dim; ++d) average[d] += forest.importances[d];
  }
  double total = std::accumulate(average.begin(), average.end(), 0.0);
  if (total <= 0.0) throw Error("importance: zero total importance");
  for (double& v : average) v /= total;
  return average;
}

std::vector<size_t> DimsForTypes(const std::vector<size_t>& types) {
  std::vector<size_t> dims;
  for (size_t t : types) {
    if (t >= kNumBaseFeatures) throw Error("feature type index out of range");
    for (size_t w = 0; w < kNumWindows; ++w) dims.push_back(t * kNumWindows + w);
  }
  std::sort(dims.begin(), dims.end());
  return dims;
}

std::vector<size_t> DimsForWindows(const std::vector<size_t>& windows) {
  std::vector<size_t> dims;
  for (size_t w : windows) {
    if (w >= kNumWindows) throw Error("window index out of range");
    for (size_t t = 0; t < kNumBaseFeatures; ++t) {
      dims.push_back(t * kNumWindows + w);
    }
  }
  std::sort(dims.begin(), dims.end());
  return dims;
}

std::optional<double> SubsetExperiment(const ModelDataset& data,
                                       const SplitPlan& plan,
                                       const std::vector<size_t>& dims,
                                       SubsetMode mode,
                                       const ForestConfig& config) {
  if (dims.empty()) throw Error("subset experiment: empty selector");
  std::vector<size_t> selected =
      mode == SubsetMode::kOnly ? dims : ComplementDims(dims, data.dim);
  if (selected.empty()) {
    throw Error("subset experiment: selection leaves zero dimensions");
  }
  ModelDataset projected = data.SelectColumns(selected);
  std::vector<FoldData> folds = MaterializeFolds(projected, plan);
  PooledPredictions pooled = PooledOutOfFold(
      folds, [&](const ModelDataset& train) { return FitForest(train, config); });
  return PearsonCorrelation(pooled.predictions, pooled.targets);
}

ImportanceReport RunImportanceBattery(const ModelDataset& data,
                                      const SplitPlan& plan,
                                      const BatteryOptions& options) {
  if (data.dim != kNumDims) {
    throw Error("importance battery expects the full " +
                std::to_string(kNumDims) + "-dimensional representation");
  }
  ImportanceReport report;
  report.split = plan;
  report.forest_config = options.forest;
  report.delta_mode = options.delta_mode;
  report.ridge_lambda = options.ridge_lambda;
  report.knn_k = options.knn_k;

  std::vector<FoldData> folds = MaterializeFolds(data, plan);

  // Model scores from pooled out-of-fold predictions; the fold forests also
  // provide the fold-averaged importances.
  std::vector<std::vector<double>> fold_importances;
  {
    PooledPredictions euclid = PooledOutOfFold(
        folds, [&](const ModelDataset& train) { return FitEuclidean(train); });
    PooledPredictions linear = PooledOutOfFold(folds, [&](const ModelDataset& train) {
      return FitLinear(train, options.ridge_lambda);
    });
    PooledPredictions knn = PooledOutOfFold(folds, [&](const ModelDataset& train) {
      return FitKnn(train, options.knn_k);
    });
    PooledPredictions forest = PooledOutOfFold(folds, [&](const ModelDataset& train) {
      TrainedModel model = FitForest(train, options.forest);
      fold_importances.push_back(model.importances);
      return model;
    });

    auto score = [](ModelKind kind, const PooledPredictions& pooled) {
      EvalResult res = EvaluatePredictions(pooled.predictions, pooled.targets);
      return ModelScore{kind, res.pearson, res.mse};
    };
    report.model_scores = {score(ModelKind::kEuclidean, euclid),
                           score(ModelKind::kLinear, linear),
                           score(ModelKind::kKnn, knn),
                           score(ModelKind::kForest, forest)};
  }

  report.dimension_importance.assign(kNumDims, 0.0);
  for (const auto& imp : fold_importances) {
    for (size_t d = 0; d < kNumDims; ++d) report.dimension_importance[d] += imp[d];
  }
  double total = std::accumulate(report.dimension_importance.begin(),
                                 report.dimension_importance.end(), 0.0);
  if (total > 0.0) {
    for (double& v : report.dimension_importance) v /= total;
  }

  report.dimension_correlations = PerDimensionCorrelations(data);

  for (size_t t = 0; t < kNumBaseFeatures; ++t) {
    TypeImportanceRow row;
    row.feature = t;
    std::vector<size_t> dims = DimsForTypes({t});
    for (size_t d : dims) row.importance += report.dimension_importance[d];
    row.only_correlation =
        SubsetExperiment(data, plan, dims, SubsetMode::kOnly, options.forest);
    row.ablation_correlation =
        SubsetExperiment(data, plan, dims, SubsetMode::kExclude, options.forest);
    report.per_type.push_back(row);
  }
  std::stable_sort(report.per_type.begin(), report.per_type.end(),
                   [](const TypeImportanceRow& a, const TypeImportanceRow& b) {
                     return a.importance > b.importance;
                   });

  for (size_t w = 0; w < kNumWindows; ++w) {
    PositionImportanceRow row;
    row.window = w;
    std::vector<size_t> dims = DimsForWindows({w});
    for (size_t d : dims) row.summed_importance += report.dimension_importance[d];
    row.only_correlation =
        SubsetExperiment(data, plan, dims, SubsetMode::kOnly, options.forest);
    report.per_position.push_back(row);
  }

  return report;
}

}  // namespace prosim
