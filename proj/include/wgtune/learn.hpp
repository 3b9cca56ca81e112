#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wgtune/features.hpp"
#include "wgtune/space.hpp"

namespace wgtune {

enum class ClassifierAlgo { ZeroR, NaiveBayes, DecisionTree, RandomForest };
std::string_view to_string(ClassifierAlgo a);
ClassifierAlgo classifier_algo_from_string(std::string_view s);

enum class RegressionMode { Runtime, Speedup };
std::string_view to_string(RegressionMode m);
RegressionMode regression_mode_from_string(std::string_view s);

// Scenario feature vectors labelled with their oracle workgroup size.
struct LabelledDataset {
  std::vector<FeatureVector> features;
  std::vector<WorkgroupSize> labels;
};

// (features, w, target) training tuples; the target is a runtime in
// milliseconds or a speedup over the baseline, per the mode tag.
struct RegressionDataset {
  struct Row {
    FeatureVector features;
    WorkgroupSize w;
    double target;
  };
  RegressionMode mode = RegressionMode::Runtime;
  std::vector<Row> rows;
};

struct TreeParams {
  int max_depth = 16;
  int min_leaf = 2;
};

struct ForestParams {
  int trees = 50;
  int max_depth = 16;
  int min_leaf = 2;   // 5 for regression forests
  int mtry = 0;       // features per split; 0 = sqrt(d) classification, d/3 regression
  bool bootstrap = true;
};

namespace detail {

// One CART node; leaves have feature == -1. The split predicate is
// x[feature] <= threshold with thresholds placed at observed values, so
// monotone rescaling of a feature leaves every decision unchanged.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = -1;     // class index at classification leaves
  double value = 0.0; // mean target at regression leaves
};

struct Tree {
  std::vector<TreeNode> nodes;
  int predict_class(std::span<const double> row) const;
  double predict_value(std::span<const double> row) const;
};

}  // namespace detail

// Gini impurity of a node with the given class counts: 1 - sum p_i^2.
double gini_impurity(std::span<const int> class_counts);

// A trained label predictor. Prediction is deterministic and always returns a
// label seen in training.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual WorkgroupSize predict(const FeatureVector& f) const = 0;
  virtual std::string_view algorithm() const = 0;
  virtual const std::vector<WorkgroupSize>& classes() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

// A trained (features, w) -> value predictor.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual double predict(const FeatureVector& f, WorkgroupSize w) const = 0;
  virtual RegressionMode mode() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

std::unique_ptr<Classifier> train_classifier(ClassifierAlgo algo, const LabelledDataset& data,
                                             std::uint64_t seed, const TreeParams& tree = {},
                                             const ForestParams& forest = {});

// Forest of variance-reduction regression trees over the scenario features
// extended with (w_c, w_r, w_c*w_r); prediction is the mean of tree outputs.
std::unique_ptr<Regressor> train_regressor(const RegressionDataset& data, std::uint64_t seed,
                                           ForestParams params = {.min_leaf = 5});

WorkgroupSize predict_label(const Classifier& model, const FeatureVector& f);
double predict_value(const Regressor& model, const FeatureVector& f, WorkgroupSize w);

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);
std::unique_ptr<Regressor> regressor_from_json(const nlohmann::json& j);

// Per-tree votes of a forest classifier, in tree order (empty for other
// algorithms). The forest prediction is the plurality of these.
std::vector<WorkgroupSize> forest_votes(const Classifier& model, const FeatureVector& f);

}  // namespace wgtune
