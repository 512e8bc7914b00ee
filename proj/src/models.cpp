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

#include "prosim/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "prosim/common.hpp"

namespace prosim {

namespace {

using nlohmann::json;

constexpr double kSdFloor = 1e-8;
constexpr double kPureNodeSse = 1e-12;

std::vector<size_t> SortPermutationById(const std::vector<std::string>& ids) {
  std::vector<size_t> perm(ids.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](size_t a, size_t b) {
    if (ids[a] != ids[b]) return ids[a] < ids[b];
    return a < b;
  });
  return perm;
}

std::vector<double> ZScoreRows(const ModelDataset& data, const ZStats& stats) {
  std::vector<double> z(data.x.size());
  for (size_t i = 0; i < data.NumRows(); ++i) {
    std::vector<double> row = stats.Apply(data.Row(i));
    std::copy(row.begin(), row.end(), z.begin() + i * data.dim);
  }
  return z;
}

// Solves (A)w = b for symmetric positive definite A via Cholesky, in place.
std::vector<double> CholeskySolve(std::vector<double> a, std::vector<double> b,
                                  size_t n) {
  for (size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (diag <= 0.0) throw Error("ridge solve: matrix not positive definite");
    diag = std::sqrt(diag);
    a[j * n + j] = diag;
    for (size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / diag;
    }
  }
  for (size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (size_t k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
    b[i] = v / a[i * n + i];
  }
  for (size_t ii = n; ii > 0; --ii) {
    size_t i = ii - 1;
    double v = b[i];
    for (size_t k = i + 1; k < n; ++k) v -= a[k * n + i] * b[k];
    b[i] = v / a[i * n + i];
  }
  return b;
}

struct TreeBuilder {
  const std::vector<double>& z;  // row-major training matrix
  const std::vector<double>& y;
  size_t dim;
  size_t n_rows;
  const ForestConfig& config;
  size_t features_per_split;
  Rng rng;
  std::vector<double>& importance;  // accumulated raw impurity decrease

  std::vector<size_t> candidate_dims;
  std::vector<std::pair<double, double>> sorted;  // (value, target) scratch

  TreeBuilder(const std::vector<double>& z_in, const std::vector<double>& y_in,
              size_t dim_in, const ForestConfig& cfg, uint64_t seed,
              std::vector<double>& importance_in)
      : z(z_in),
        y(y_in),
        dim(dim_in),
        n_rows(y_in.size()),
        config(cfg),
        features_per_split(cfg.features_per_split > 0
                               ? std::min(cfg.features_per_split, dim_in)
                               : (dim_in + 2) / 3),
        rng(seed),
        importance(importance_in) {
    candidate_dims.resize(dim);
    std::iota(candidate_dims.begin(), candidate_dims.end(), 0);
  }

  Tree Build() {
    std::vector<size_t> samples(n_rows);
    for (size_t i = 0; i < n_rows; ++i) samples[i] = rng.Index(n_rows);
    Tree tree;
    BuildNode(tree, samples, 0);
    return tree;
  }

  int32_t BuildNode(Tree& tree, std::vector<size_t>& samples, size_t depth) {
    double sum = 0.0, sum2 = 0.0;
    for (size_t i : samples) {
      sum += y[i];
      sum2 += y[i] * y[i];
    }
    double n = static_cast<double>(samples.size());
    double node_sse = sum2 - sum * sum / n;
    double node_mean = sum / n;

    int32_t index = static_cast<int32_t>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes[index].value = node_mean;

    bool can_split = samples.size() >= 2 * config.min_leaf &&
                     node_sse > kPureNodeSse &&
                     (config.max_depth == 0 || depth < config.max_depth);
    if (!can_split) return index;

    // Sample candidate dimensions without replacement.
    for (size_t i = 0; i < features_per_split; ++i) {
      size_t j = i + rng.Index(dim - i);
      std::swap(candidate_dims[i], candidate_dims[j]);
    }

    double best_gain = 0.0;
    size_t best_dim = 0;
    double best_threshold = 0.0;
    bool found = false;

    for (size_t c = 0; c < features_per_split; ++c) {
      size_t d = candidate_dims[c];
      sorted.clear();
      for (size_t i : samples) sorted.emplace_back(z[i * dim + d], y[i]);
      std::sort(sorted.begin(), sorted.end());

      double left_sum = 0.0, left_sum2 = 0.0;
      for (size_t p = 0; p + 1 < sorted.size(); ++p) {
        left_sum += sorted[p].second;
        left_sum2 += sorted[p].second * sorted[p].second;
        size_t n_left = p + 1;
        size_t n_right = sorted.size() - n_left;
        if (n_left < config.min_leaf || n_right < config.min_leaf) continue;
        if (sorted[p].first == sorted[p + 1].first) continue;
        double right_sum = sum - left_sum;
        double right_sum2 = sum2 - left_sum2;
        double sse_left = left_sum2 - left_sum * left_sum / n_left;
        double sse_right = right_sum2 - right_sum * right_sum / n_right;
        double gain = node_sse - sse_left - sse_right;
        if (gain > best_gain) {
          best_gain = gain;
          best_dim = d;
          best_threshold = 0.5 * (sorted[p].first + sorted[p + 1].first);
          found = true;
        }
      }
    }

    if (!found) return index;

    importance[best_dim] += best_gain;

    std::vector<size_t> left, right;
    left.reserve(samples.size());
    right.reserve(samples.size());
    for (size_t i : samples) {
      if (z[i * dim + best_dim] <= best_threshold) {
        left.push_back(i);
      } else {
        right.push_back(i);
      }
    }
    samples.clear();
    samples.shrink_to_fit();

    int32_t left_index = BuildNode(tree, left, depth + 1);
    int32_t right_index = BuildNode(tree, right, depth + 1);
    tree.nodes[index].left = left_index;
    tree.nodes[index].right = right_index;
    tree.nodes[index].dim = static_cast<uint32_t>(best_dim);
    tree.nodes[index].threshold = best_threshold;
    return index;
  }
};

}  // namespace

void ModelDataset::AddRow(const std::string& id, std::span<const double> row,
                          double target) {
  if (dim == 0) dim = row.size();
  if (row.size() != dim) throw Error("dataset: row dimension mismatch");
  ids.push_back(id);
  x.insert(x.end(), row.begin(), row.end());
  y.push_back(target);
}

ModelDataset ModelDataset::SelectColumns(const std::vector<size_t>& columns) const {
  if (columns.empty()) throw Error("dataset: selection leaves zero dimensions");
  ModelDataset out;
  out.dim = columns.size();
  out.ids = ids;
  out.y = y;
  out.x.reserve(NumRows() * columns.size());
  for (size_t i = 0; i < NumRows(); ++i) {
    for (size_t c : columns) {
      if (c >= dim) throw Error("dataset: column index out of range");
      out.x.push_back(x[i * dim + c]);
    }
  }
  if (!feature_labels.empty()) {
    out.feature_labels.reserve(columns.size());
    for (size_t c : columns) out.feature_labels.push_back(feature_labels[c]);
  }
  return out;
}

ModelDataset ModelDataset::SelectRows(const std::vector<size_t>& rows) const {
  ModelDataset out;
  out.dim = dim;
  out.feature_labels = feature_labels;
  for (size_t r : rows) {
    if (r >= NumRows()) throw Error("dataset: row index out of range");
    out.AddRow(ids[r], Row(r), y[r]);
  }
  return out;
}

ModelDataset ModelDataset::SortedById() const {
  std::vector<size_t> perm = SortPermutationById(ids);
  return SelectRows(perm);
}

std::vector<double> ZStats::Apply(std::span<const double> row) const {
  if (row.size() != mean.size()) {
    throw Error("z-stats: dimension mismatch (" + std::to_string(row.size()) +
                " vs " + std::to_string(mean.size()) + ")");
  }
  std::vector<double> out(row.size());
  for (size_t i = 0; i < row.size(); ++i) {
    out[i] = (row[i] - mean[i]) / sd[i];
  }
  return out;
}

ZStats ComputeZStats(const ModelDataset& train) {
  if (train.NumRows() == 0) throw Error("z-stats: empty training set");
  ZStats stats;
  stats.mean.assign(train.dim, 0.0);
  stats.sd.assign(train.dim, 0.0);
  double n = static_cast<double>(train.NumRows());
  for (size_t i = 0; i < train.NumRows(); ++i) {
    auto row = train.Row(i);
    for (size_t d = 0; d < train.dim; ++d) stats.mean[d] += row[d];
  }
  for (size_t d = 0; d < train.dim; ++d) stats.mean[d] /= n;
  for (size_t i = 0; i < train.NumRows(); ++i) {
    auto row = train.Row(i);
    for (size_t d = 0; d < train.dim; ++d) {
      double diff = row[d] - stats.mean[d];
      stats.sd[d] += diff * diff;
    }
  }
  for (size_t d = 0; d < train.dim; ++d) {
    stats.sd[d] = std::max(std::sqrt(stats.sd[d] / n), kSdFloor);
  }
  return stats;
}

const char* ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kEuclidean: return "euclidean";
    case ModelKind::kLinear: return "linear";
    case ModelKind::kKnn: return "knn";
    case ModelKind::kForest: return "forest";
  }
  return "unknown";
}

ModelKind ModelKindFromName(const std::string& name) {
  if (name == "euclidean") return ModelKind::kEuclidean;
  if (name == "linear") return ModelKind::kLinear;
  if (name == "knn") return ModelKind::kKnn;
  if (name == "forest") return ModelKind::kForest;
  throw Error("unknown model kind: " + name);
}

double Tree::Predict(std::span<const double> z) const {
  size_t node = 0;
  while (!nodes[node].IsLeaf()) {
    node = z[nodes[node].dim] <= nodes[node].threshold
               ? static_cast<size_t>(nodes[node].left)
               : static_cast<size_t>(nodes[node].right);
  }
  return nodes[node].value;
}

double TrainedModel::Predict(std::span<const double> delta) const {
  std::vector<double> z = stats.Apply(delta);
  switch (kind) {
    case ModelKind::kEuclidean: {
      double s = 0.0;
      for (double v : z) s += v * v;
      return std::sqrt(s);
    }
    case ModelKind::kLinear: {
      double s = intercept;
      for (size_t d = 0; d < z.size(); ++d) s += weights[d] * z[d];
      return s;
    }
    case ModelKind::kKnn: {
      size_t n = train_y.size();
      size_t kk = std::min(k, n);
      if (n == 0) throw Error("knn: empty training set");
      std::vector<std::pair<double, size_t>> order(n);
      for (size_t i = 0; i < n; ++i) {
        double dist = 0.0;
        for (size_t d = 0; d < z.size(); ++d) {
          double diff = z[d] - train_z[i * z.size() + d];
          dist += diff * diff;
        }
        order[i] = {dist, i};
      }
      std::sort(order.begin(), order.end(),
                [&](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first < b.first;
                  return train_ids[a.second] < train_ids[b.second];
                });
      double s = 0.0;
      for (size_t i = 0; i < kk; ++i) s += train_y[order[i].second];
      return s / static_cast<double>(kk);
    }
    case ModelKind::kForest: {
      double s = 0.0;
      for (const Tree& tree : trees) s += tree.Predict(z);
      return s / static_cast<double>(trees.size());
    }
  }
  throw Error("predict: unknown model kind");
}

TrainedModel FitEuclidean(const ModelDataset& train_in) {
  ModelDataset train = train_in.SortedById();
  TrainedModel model;
  model.kind = ModelKind::kEuclidean;
  model.feature_layout = train.feature_labels;
  model.stats = ComputeZStats(train);
  return model;
}

TrainedModel FitLinear(const ModelDataset& train_in, double ridge_lambda) {
  ModelDataset train = train_in.SortedById();
  size_t n = train.NumRows();
  if (n < 2) throw Error("linear fit: need at least 2 training rows");

  TrainedModel model;
  model.kind = ModelKind::kLinear;
  model.feature_layout = train.feature_labels;
  model.ridge_lambda = ridge_lambda;
  model.stats = ComputeZStats(train);

  std::vector<double> z = ZScoreRows(train, model.stats);
  double y_mean = Mean(train.y);
  model.intercept = y_mean;

  double y_var = 0.0;
  for (double v : train.y) y_var += (v - y_mean) * (v - y_mean);
  if (y_var <= 0.0) {
    model.weights.assign(train.dim, 0.0);
    model.fit_warnings.push_back("degenerate targets: constant model");
    return model;
  }

  size_t d = train.dim;
  std::vector<double> a(d * d, 0.0);
  std::vector<double> b(d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double* row = z.data() + i * d;
    double resid = train.y[i] - y_mean;
    for (size_t p = 0; p < d; ++p) {
      b[p] += row[p] * resid;
      for (size_t q = p; q < d; ++q) a[p * d + q] += row[p] * row[q];
    }
  }
  for (size_t p = 0; p < d; ++p) {
    for (size_t q = 0; q < p; ++q) a[p * d + q] = a[q * d + p];
    a[p * d + p] += ridge_lambda;
  }
  model.weights = CholeskySolve(std::move(a), std::move(b), d);
  return model;
}

TrainedModel FitKnn(const ModelDataset& train_in, size_t k) {
  ModelDataset train = train_in.SortedById();
  if (train.NumRows() == 0) throw Error("knn fit: empty training set");
  TrainedModel model;
  model.kind = ModelKind::kKnn;
  model.feature_layout = train.feature_labels;
  model.k = k;
  model.stats = ComputeZStats(train);
  model.train_z = ZScoreRows(train, model.stats);
  model.train_y = train.y;
  model.train_ids = train.ids;
  return model;
}

TrainedModel FitForest(const ModelDataset& train_in, const ForestConfig& config) {
  ModelDataset train = train_in.SortedById();
  size_t n = train.NumRows();
  if (config.n_trees < 1) throw Error("forest fit: need at least one tree");
  if (config.min_leaf < 1) throw Error("forest fit: min_leaf must be >= 1");
  if (n < 2 * config.min_leaf) {
    throw Error("forest fit: need at least " +
                std::to_string(2 * config.min_leaf) + " training rows");
  }

  TrainedModel model;
  model.kind = ModelKind::kForest;
  model.feature_layout = train.feature_labels;
  model.forest_config = config;
  model.stats = ComputeZStats(train);

  std::vector<double> z = ZScoreRows(train, model.stats);
  model.trees.resize(config.n_trees);
  std::vector<std::vector<double>> tree_importance(
      config.n_trees, std::vector<double>(train.dim, 0.0));

  for (size_t t = 0; t < config.n_trees; ++t) {
    uint64_t seed =
        SplitMix64(config.rng_seed + 0x9e3779b97f4a7c15ULL * (t + 1));
    TreeBuilder builder(z, train.y, train.dim, config, seed,
                        tree_importance[t]);
    model.trees[t] = builder.Build();
  }

  model.importances.assign(train.dim, 0.0);
  for (size_t t = 0; t < config.n_trees; ++t) {
    for (size_t d = 0; d < train.dim; ++d) {
      model.importances[d] += tree_importance[t][d];
    }
  }
  double total = std::accumulate(model.importances.begin(),
                                 model.importances.end(), 0.0);
  if (total <= 0.0) {
    // Degenerate targets: every tree is a single leaf.
    std::fill(model.importances.begin(), model.importances.end(),
              1.0 / static_cast<double>(train.dim));
    model.fit_warnings.push_back(
        "degenerate targets: uniform importance by convention");
  } else {
    for (double& v : model.importances) v /= total;
  }
  return model;
}

std::optional<double> PearsonCorrelation(const std::vector<double>& a,
                                         const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return std::nullopt;
  double ma = Mean(a), mb = Mean(b);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) return std::nullopt;
  return cov / std::sqrt(va * vb);
}

EvalResult EvaluatePredictions(const std::vector<double>& predictions,
                               const std::vector<double>& targets) {
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw Error("evaluate: size mismatch or empty test set");
  }
  EvalResult result;
  double se = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    double d = predictions[i] - targets[i];
    se += d * d;
  }
  result.mse = se / static_cast<double>(predictions.size());
  result.pearson = PearsonCorrelation(predictions, targets);
  return result;
}

EvalResult Evaluate(const TrainedModel& model, const ModelDataset& test) {
  if (test.NumRows() == 0) throw Error("evaluate: empty test set");
  std::vector<double> predictions(test.NumRows());
  for (size_t i = 0; i < test.NumRows(); ++i) {
    predictions[i] = model.Predict(test.Row(i));
  }
  return EvaluatePredictions(predictions, test.y);
}

namespace {

json TreesToJson(const std::vector<Tree>& trees) {
  json arr = json::array();
  for (const Tree& tree : trees) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes) {
      nodes.push_back({{"l", n.left},
                       {"r", n.right},
                       {"d", n.dim},
                       {"t", n.threshold},
                       {"v", n.value}});
    }
    arr.push_back(std::move(nodes));
  }
  return arr;
}

std::vector<Tree> TreesFromJson(const json& arr) {
  std::vector<Tree> trees;
  trees.reserve(arr.size());
  for (const json& jt : arr) {
    Tree tree;
    tree.nodes.reserve(jt.size());
    for (const json& jn : jt) {
      TreeNode n;
      n.left = jn.at("l").get<int32_t>();
      n.right = jn.at("r").get<int32_t>();
      n.dim = jn.at("d").get<uint32_t>();
      n.threshold = jn.at("t").get<double>();
      n.value = jn.at("v").get<double>();
      tree.nodes.push_back(n);
    }
    trees.push_back(std::move(tree));
  }
  return trees;
}

}  // namespace

std::string TrainedModel::ToJson() const {
  json j;
  j["format"] = "prosim.model.v1";
  j["kind"] = ModelKindName(kind);
  j["extractor_version"] = extractor_version;
  j["delta_mode"] = DeltaModeName(delta_mode);
  j["feature_layout"] = feature_layout;
  j["stats"] = {{"mean", stats.mean}, {"sd", stats.sd}};
  switch (kind) {
    case ModelKind::kEuclidean:
      break;
    case ModelKind::kLinear:
      j["params"] = {{"weights", weights},
                     {"intercept", intercept},
                     {"ridge_lambda", ridge_lambda}};
      break;
    case ModelKind::kKnn:
      j["params"] = {{"k", k},
                     {"train_z", train_z},
                     {"train_y", train_y},
                     {"train_ids", train_ids}};
      break;
    case ModelKind::kForest:
      j["params"] = {{"n_trees", forest_config.n_trees},
                     {"max_depth", forest_config.max_depth},
                     {"min_leaf", forest_config.min_leaf},
                     {"features_per_split", forest_config.features_per_split},
                     {"rng_seed", forest_config.rng_seed},
                     {"importances", importances},
                     {"trees", TreesToJson(trees)}};
      break;
  }
  return j.dump();
}

TrainedModel TrainedModel::FromJson(const std::string& json_text) {
  json j = json::parse(json_text);
  if (j.value("format", "") != "prosim.model.v1") {
    throw Error("model file: unrecognized format");
  }
  TrainedModel m;
  m.kind = ModelKindFromName(j.at("kind").get<std::string>());
  m.extractor_version = j.value("extractor_version", "");
  m.delta_mode = DeltaModeFromName(j.value("delta_mode", "signed"));
  m.feature_layout = j.at("feature_layout").get<std::vector<std::string>>();
  m.stats.mean = j.at("stats").at("mean").get<std::vector<double>>();
  m.stats.sd = j.at("stats").at("sd").get<std::vector<double>>();
  switch (m.kind) {
    case ModelKind::kEuclidean:
      break;
    case ModelKind::kLinear: {
      const json& p = j.at("params");
      m.weights = p.at("weights").get<std::vector<double>>();
      m.intercept = p.at("intercept").get<double>();
      m.ridge_lambda = p.at("ridge_lambda").get<double>();
      break;
    }
    case ModelKind::kKnn: {
      const json& p = j.at("params");
      m.k = p.at("k").get<size_t>();
      m.train_z = p.at("train_z").get<std::vector<double>>();
      m.train_y = p.at("train_y").get<std::vector<double>>();
      m.train_ids = p.at("train_ids").get<std::vector<std::string>>();
      break;
    }
    case ModelKind::kForest: {
      const json& p = j.at("params");
      m.forest_config.n_trees = p.at("n_trees").get<size_t>();
      m.forest_config.max_depth = p.at("max_depth").get<size_t>();
      m.forest_config.min_leaf = p.at("min_leaf").get<size_t>();
      m.forest_config.features_per_split =
          p.at("features_per_split").get<size_t>();
      m.forest_config.rng_seed = p.at("rng_seed").get<uint64_t>();
      m.importances = p.at("importances").get<std::vector<double>>();
      m.trees = TreesFromJson(p.at("trees"));
      break;
    }
  }
  return m;
}

void TrainedModel::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("model save: cannot open " + path);
  out << ToJson() << "\n";
  if (!out) throw Error("model save: write failed for " + path);
}

TrainedModel TrainedModel::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("model load: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return FromJson(text);
}

}  // namespace prosim
