#include "wgtune/learn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "wgtune/errors.hpp"
#include "wgtune/rng.hpp"

namespace wgtune {

using nlohmann::json;

std::string_view to_string(ClassifierAlgo a) {
  switch (a) {
    case ClassifierAlgo::ZeroR: return "zeror";
    case ClassifierAlgo::NaiveBayes: return "naive_bayes";
    case ClassifierAlgo::DecisionTree: return "decision_tree";
    case ClassifierAlgo::RandomForest: return "random_forest";
  }
  throw InvalidArgument("bad classifier algorithm");
}

ClassifierAlgo classifier_algo_from_string(std::string_view s) {
  if (s == "zeror") return ClassifierAlgo::ZeroR;
  if (s == "naive_bayes") return ClassifierAlgo::NaiveBayes;
  if (s == "decision_tree") return ClassifierAlgo::DecisionTree;
  if (s == "random_forest") return ClassifierAlgo::RandomForest;
  throw InvalidArgument("unknown classifier algorithm '" + std::string(s) + "'");
}

std::string_view to_string(RegressionMode m) {
  return m == RegressionMode::Runtime ? "runtime" : "speedup";
}

RegressionMode regression_mode_from_string(std::string_view s) {
  if (s == "runtime") return RegressionMode::Runtime;
  if (s == "speedup") return RegressionMode::Speedup;
  throw InvalidArgument("unknown regression mode '" + std::string(s) + "'");
}

double gini_impurity(std::span<const int> class_counts) {
  long long n = 0;
  for (int c : class_counts) n += c;
  if (n == 0) return 0.0;
  double sumsq = 0.0;
  for (int c : class_counts) sumsq += static_cast<double>(c) * c;
  return 1.0 - sumsq / (static_cast<double>(n) * static_cast<double>(n));
}

namespace detail {

int Tree::predict_class(std::span<const double> row) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(i)];
    i = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(i)].label;
}

double Tree::predict_value(std::span<const double> row) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(i)];
    i = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

}  // namespace detail

namespace {

using detail::Tree;
using detail::TreeNode;

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // weighted child impurity; lower is better
};

// CART builder over per-feature presorted index lists. The lists are
// partitioned down the tree, so each level costs O(d * n) after one initial
// sort per feature. Covers both criteria: Gini over class ids, variance over
// regression targets. Ties in split quality keep the first candidate found
// (lowest feature index, then lowest threshold), which makes training
// deterministic.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<double>& x, int width, const std::vector<int>* y_class,
              int n_classes, const std::vector<double>* y_reg, int max_depth, int min_leaf,
              int mtry, Rng& rng)
      : x_(x),
        width_(width),
        y_class_(y_class),
        n_classes_(n_classes),
        y_reg_(y_reg),
        max_depth_(max_depth),
        min_leaf_(std::max(1, min_leaf)),
        mtry_(std::clamp(mtry, 1, width)),
        rng_(rng) {}

  Tree build(const std::vector<int>& samples) {
    std::vector<std::vector<int>> lists(static_cast<std::size_t>(width_));
    for (int f = 0; f < width_; ++f) {
      auto& list = lists[static_cast<std::size_t>(f)];
      list = samples;
      std::stable_sort(list.begin(), list.end(),
                       [&](int a, int b) { return value(a, f) < value(b, f); });
    }
    tree_.nodes.clear();
    grow(std::move(lists), 0);
    return std::move(tree_);
  }

 private:
  double value(int row, int feature) const {
    return x_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
              static_cast<std::size_t>(feature)];
  }

  int add_leaf(const std::vector<int>& samples) {
    TreeNode node;
    if (y_class_) {
      std::vector<int> counts(static_cast<std::size_t>(n_classes_), 0);
      for (int idx : samples) ++counts[static_cast<std::size_t>((*y_class_)[static_cast<std::size_t>(idx)])];
      node.label =
          static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    } else {
      double sum = 0.0;
      for (int idx : samples) sum += (*y_reg_)[static_cast<std::size_t>(idx)];
      node.value = sum / static_cast<double>(samples.size());
    }
    tree_.nodes.push_back(node);
    return static_cast<int>(tree_.nodes.size()) - 1;
  }

  std::vector<int> pick_features() {
    std::vector<int> pool(static_cast<std::size_t>(width_));
    std::iota(pool.begin(), pool.end(), 0);
    if (mtry_ >= width_) return pool;
    for (int i = 0; i < mtry_; ++i) {
      int j = i + static_cast<int>(rng_.bounded(static_cast<std::uint64_t>(width_ - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(mtry_));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  void scan_class_feature(const std::vector<int>& list, int feature, Split& best) const {
    int n = static_cast<int>(list.size());
    std::vector<double> right_counts(static_cast<std::size_t>(n_classes_), 0.0);
    for (int idx : list) {
      right_counts[static_cast<std::size_t>((*y_class_)[static_cast<std::size_t>(idx)])] += 1.0;
    }
    double right_sumsq = 0.0;
    for (double c : right_counts) right_sumsq += c * c;
    double parent = static_cast<double>(n) - right_sumsq / n;

    std::vector<double> left_counts(static_cast<std::size_t>(n_classes_), 0.0);
    double left_sumsq = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      int idx = list[static_cast<std::size_t>(i)];
      auto cls = static_cast<std::size_t>((*y_class_)[static_cast<std::size_t>(idx)]);
      left_sumsq += 2.0 * left_counts[cls] + 1.0;
      left_counts[cls] += 1.0;
      right_sumsq -= 2.0 * right_counts[cls] - 1.0;
      right_counts[cls] -= 1.0;
      int nl = i + 1;
      int nr = n - nl;
      if (nl < min_leaf_ || nr < min_leaf_) continue;
      double here = value(idx, feature);
      if (!(here < value(list[static_cast<std::size_t>(i + 1)], feature))) continue;
      double score = (nl - left_sumsq / nl) + (nr - right_sumsq / nr);
      if (score >= parent - 1e-12) continue;
      if (best.feature < 0 || score < best.score) {
        best = Split{feature, here, score};
      }
    }
  }

  void scan_reg_feature(const std::vector<int>& list, int feature, Split& best) const {
    int n = static_cast<int>(list.size());
    double total = 0.0;
    for (int idx : list) total += (*y_reg_)[static_cast<std::size_t>(idx)];
    double parent = -(total * total / n);

    double left_sum = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      int idx = list[static_cast<std::size_t>(i)];
      left_sum += (*y_reg_)[static_cast<std::size_t>(idx)];
      int nl = i + 1;
      int nr = n - nl;
      if (nl < min_leaf_ || nr < min_leaf_) continue;
      double here = value(idx, feature);
      if (!(here < value(list[static_cast<std::size_t>(i + 1)], feature))) continue;
      double right_sum = total - left_sum;
      // Maximising sum_l^2/nl + sum_r^2/nr minimises weighted child variance;
      // negated so lower is better, as with Gini.
      double score = -(left_sum * left_sum / nl + right_sum * right_sum / nr);
      if (score >= parent) continue;
      if (best.feature < 0 || score < best.score) {
        best = Split{feature, here, score};
      }
    }
  }

  bool is_pure(const std::vector<int>& samples) const {
    if (y_class_) {
      int first = (*y_class_)[static_cast<std::size_t>(samples.front())];
      return std::all_of(samples.begin(), samples.end(), [&](int idx) {
        return (*y_class_)[static_cast<std::size_t>(idx)] == first;
      });
    }
    double first = (*y_reg_)[static_cast<std::size_t>(samples.front())];
    return std::all_of(samples.begin(), samples.end(), [&](int idx) {
      return (*y_reg_)[static_cast<std::size_t>(idx)] == first;
    });
  }

  int grow(std::vector<std::vector<int>>&& lists, int depth) {
    const auto& samples = lists.front();
    int n = static_cast<int>(samples.size());
    if (depth >= max_depth_ || n < 2 * min_leaf_ || is_pure(samples)) {
      return add_leaf(samples);
    }

    Split best;
    for (int f : pick_features()) {
      const auto& list = lists[static_cast<std::size_t>(f)];
      if (y_class_) {
        scan_class_feature(list, f, best);
      } else {
        scan_reg_feature(list, f, best);
      }
    }
    if (best.feature < 0) {
      return add_leaf(samples);
    }

    std::vector<std::vector<int>> left_lists(lists.size());
    std::vector<std::vector<int>> right_lists(lists.size());
    for (std::size_t g = 0; g < lists.size(); ++g) {
      for (int idx : lists[g]) {
        if (value(idx, best.feature) <= best.threshold) {
          left_lists[g].push_back(idx);
        } else {
          right_lists[g].push_back(idx);
        }
      }
    }
    lists.clear();

    TreeNode node;
    node.feature = best.feature;
    node.threshold = best.threshold;
    tree_.nodes.push_back(node);
    int self = static_cast<int>(tree_.nodes.size()) - 1;
    int left = grow(std::move(left_lists), depth + 1);
    int right = grow(std::move(right_lists), depth + 1);
    tree_.nodes[static_cast<std::size_t>(self)].left = left;
    tree_.nodes[static_cast<std::size_t>(self)].right = right;
    return self;
  }

  const std::vector<double>& x_;
  int width_;
  const std::vector<int>* y_class_;
  int n_classes_;
  const std::vector<double>* y_reg_;
  int max_depth_;
  int min_leaf_;
  int mtry_;
  Rng& rng_;
  Tree tree_;
};

// Builds `count` trees, each from its own seeded stream, optionally
// bootstrapped. Trees are independent, so they build on worker threads; the
// result is positionally deterministic regardless of scheduling.
template <typename BuildOne>
std::vector<Tree> build_forest(int count, int n_rows, std::uint64_t seed, bool bootstrap,
                               BuildOne&& build_one) {
  std::vector<Tree> trees(static_cast<std::size_t>(count));
  unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(),
                                           static_cast<unsigned>(count)));
  auto task = [&](unsigned worker) {
    for (int t = static_cast<int>(worker); t < count; t += static_cast<int>(workers)) {
      Rng rng(fnv1a64_mix(seed, static_cast<std::uint64_t>(t) + 1));
      std::vector<int> samples(static_cast<std::size_t>(n_rows));
      if (bootstrap) {
        for (auto& s : samples) {
          s = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n_rows)));
        }
        std::sort(samples.begin(), samples.end());
      } else {
        std::iota(samples.begin(), samples.end(), 0);
      }
      trees[static_cast<std::size_t>(t)] = build_one(samples, rng);
    }
  };
  if (workers == 1) {
    task(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(task, w);
    for (auto& th : pool) th.join();
  }
  return trees;
}

std::vector<double> flatten_features(const std::vector<FeatureVector>& features) {
  std::vector<double> x;
  x.reserve(features.size() * kFeatureCount);
  for (const auto& f : features) {
    auto v = f.values();
    x.insert(x.end(), v.begin(), v.end());
  }
  return x;
}

// Sorted unique labels; y[i] indexes into the result.
std::vector<WorkgroupSize> index_labels(const std::vector<WorkgroupSize>& labels,
                                        std::vector<int>& y) {
  std::vector<WorkgroupSize> classes = labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  y.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), labels[i]) -
                            classes.begin());
  }
  return classes;
}

json label_to_json(WorkgroupSize w) { return json::array({w.cols(), w.rows()}); }

WorkgroupSize label_from_json(const json& j) {
  return WorkgroupSize(j.at(0).get<int>(), j.at(1).get<int>());
}

json tree_node_to_json(const Tree& tree, int index, bool classification) {
  const auto& node = tree.nodes[static_cast<std::size_t>(index)];
  if (node.feature < 0) {
    if (classification) return json{{"leaf", json{{"label_index", node.label}}}};
    return json{{"leaf", json{{"value", node.value}}}};
  }
  return json{{"split", json{{"feature", node.feature},
                             {"threshold", node.threshold},
                             {"left", tree_node_to_json(tree, node.left, classification)},
                             {"right", tree_node_to_json(tree, node.right, classification)}}}};
}

json tree_to_json(const Tree& tree, bool classification) {
  return tree_node_to_json(tree, 0, classification);
}

int tree_node_from_json(const json& j, Tree& tree, bool classification) {
  TreeNode node;
  if (j.contains("leaf")) {
    const auto& leaf = j.at("leaf");
    if (classification) {
      node.label = leaf.at("label_index").get<int>();
    } else {
      node.value = leaf.at("value").get<double>();
    }
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size()) - 1;
  }
  const auto& split = j.at("split");
  node.feature = split.at("feature").get<int>();
  node.threshold = split.at("threshold").get<double>();
  tree.nodes.push_back(node);
  int self = static_cast<int>(tree.nodes.size()) - 1;
  int left = tree_node_from_json(split.at("left"), tree, classification);
  int right = tree_node_from_json(split.at("right"), tree, classification);
  tree.nodes[static_cast<std::size_t>(self)].left = left;
  tree.nodes[static_cast<std::size_t>(self)].right = right;
  return self;
}

Tree tree_from_json(const json& j, bool classification) {
  Tree tree;
  tree_node_from_json(j, tree, classification);
  return tree;
}

void check_schema(const json& j) {
  if (j.value("schema", "") != kFeatureSchemaVersion) {
    throw SchemaError("model was built for feature schema '" + j.value("schema", "?") +
                      "', expected '" + std::string(kFeatureSchemaVersion) + "'");
  }
}

void check_width(int got, int want) {
  if (got != want) {
    throw SchemaError("feature width mismatch: model expects " + std::to_string(want) +
                      ", got " + std::to_string(got));
  }
}

class ZeroRClassifier final : public Classifier {
 public:
  ZeroRClassifier(std::vector<WorkgroupSize> classes, int label_index)
      : classes_(std::move(classes)), label_index_(label_index) {}

  WorkgroupSize predict(const FeatureVector&) const override {
    return classes_[static_cast<std::size_t>(label_index_)];
  }
  std::string_view algorithm() const override { return to_string(ClassifierAlgo::ZeroR); }
  const std::vector<WorkgroupSize>& classes() const override { return classes_; }

  json to_json() const override {
    json classes = json::array();
    for (auto w : classes_) classes.push_back(label_to_json(w));
    return json{{"algorithm", algorithm()},
                {"schema", kFeatureSchemaVersion},
                {"width", kFeatureCount},
                {"classes", classes},
                {"label_index", label_index_}};
  }

 private:
  std::vector<WorkgroupSize> classes_;
  int label_index_;
};

class NaiveBayesClassifier final : public Classifier {
 public:
  NaiveBayesClassifier(std::vector<WorkgroupSize> classes, std::vector<double> log_priors,
                       std::vector<std::vector<double>> means,
                       std::vector<std::vector<double>> variances)
      : classes_(std::move(classes)),
        log_priors_(std::move(log_priors)),
        means_(std::move(means)),
        variances_(std::move(variances)) {}

  WorkgroupSize predict(const FeatureVector& f) const override {
    auto row = f.values();
    int best = 0;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      double lp = log_priors_[c];
      for (int i = 0; i < kFeatureCount; ++i) {
        double var = variances_[c][static_cast<std::size_t>(i)];
        double diff = row[static_cast<std::size_t>(i)] - means_[c][static_cast<std::size_t>(i)];
        lp -= 0.5 * (std::log(6.283185307179586 * var) + diff * diff / var);
      }
      if (lp > best_lp) {
        best_lp = lp;
        best = static_cast<int>(c);
      }
    }
    return classes_[static_cast<std::size_t>(best)];
  }

  std::string_view algorithm() const override { return to_string(ClassifierAlgo::NaiveBayes); }
  const std::vector<WorkgroupSize>& classes() const override { return classes_; }

  json to_json() const override {
    json classes = json::array();
    for (auto w : classes_) classes.push_back(label_to_json(w));
    return json{{"algorithm", algorithm()},
                {"schema", kFeatureSchemaVersion},
                {"width", kFeatureCount},
                {"classes", classes},
                {"log_priors", log_priors_},
                {"means", means_},
                {"variances", variances_}};
  }

 private:
  std::vector<WorkgroupSize> classes_;
  std::vector<double> log_priors_;
  std::vector<std::vector<double>> means_;
  std::vector<std::vector<double>> variances_;
};

class TreeClassifier final : public Classifier {
 public:
  TreeClassifier(std::vector<WorkgroupSize> classes, Tree tree)
      : classes_(std::move(classes)), tree_(std::move(tree)) {}

  WorkgroupSize predict(const FeatureVector& f) const override {
    return classes_[static_cast<std::size_t>(tree_.predict_class(f.values()))];
  }
  std::string_view algorithm() const override { return to_string(ClassifierAlgo::DecisionTree); }
  const std::vector<WorkgroupSize>& classes() const override { return classes_; }

  json to_json() const override {
    json classes = json::array();
    for (auto w : classes_) classes.push_back(label_to_json(w));
    return json{{"algorithm", algorithm()},
                {"schema", kFeatureSchemaVersion},
                {"width", kFeatureCount},
                {"classes", classes},
                {"tree", tree_to_json(tree_, true)}};
  }

 private:
  std::vector<WorkgroupSize> classes_;
  Tree tree_;
};

class ForestClassifier final : public Classifier {
 public:
  ForestClassifier(std::vector<WorkgroupSize> classes, std::vector<Tree> trees)
      : classes_(std::move(classes)), trees_(std::move(trees)) {}

  WorkgroupSize predict(const FeatureVector& f) const override {
    std::vector<int> votes(classes_.size(), 0);
    for (const auto& tree : trees_) {
      ++votes[static_cast<std::size_t>(tree.predict_class(f.values()))];
    }
    auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
    return classes_[static_cast<std::size_t>(best)];
  }

  std::vector<WorkgroupSize> votes(const FeatureVector& f) const {
    std::vector<WorkgroupSize> out;
    out.reserve(trees_.size());
    for (const auto& tree : trees_) {
      out.push_back(classes_[static_cast<std::size_t>(tree.predict_class(f.values()))]);
    }
    return out;
  }

  std::string_view algorithm() const override { return to_string(ClassifierAlgo::RandomForest); }
  const std::vector<WorkgroupSize>& classes() const override { return classes_; }

  json to_json() const override {
    json classes = json::array();
    for (auto w : classes_) classes.push_back(label_to_json(w));
    json trees = json::array();
    for (const auto& tree : trees_) trees.push_back(tree_to_json(tree, true));
    return json{{"algorithm", algorithm()},
                {"schema", kFeatureSchemaVersion},
                {"width", kFeatureCount},
                {"classes", classes},
                {"trees", trees}};
  }

 private:
  std::vector<WorkgroupSize> classes_;
  std::vector<Tree> trees_;
};

constexpr int kRegressorWidth = kFeatureCount + 3;  // + w_c, w_r, w_c*w_r

std::array<double, kRegressorWidth> extended_row(const FeatureVector& f, WorkgroupSize w) {
  std::array<double, kRegressorWidth> row{};
  auto v = f.values();
  std::copy(v.begin(), v.end(), row.begin());
  row[kFeatureCount] = w.cols();
  row[kFeatureCount + 1] = w.rows();
  row[kFeatureCount + 2] = static_cast<double>(w.area());
  return row;
}

class ForestRegressor final : public Regressor {
 public:
  ForestRegressor(RegressionMode mode, std::vector<Tree> trees)
      : mode_(mode), trees_(std::move(trees)) {}

  double predict(const FeatureVector& f, WorkgroupSize w) const override {
    auto row = extended_row(f, w);
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict_value(row);
    return sum / static_cast<double>(trees_.size());
  }

  RegressionMode mode() const override { return mode_; }

  json to_json() const override {
    json trees = json::array();
    for (const auto& tree : trees_) trees.push_back(tree_to_json(tree, false));
    return json{{"algorithm", "forest_regressor"},
                {"schema", kFeatureSchemaVersion},
                {"width", kRegressorWidth},
                {"mode", to_string(mode_)},
                {"trees", trees}};
  }

 private:
  RegressionMode mode_;
  std::vector<Tree> trees_;
};

}  // namespace

std::unique_ptr<Classifier> train_classifier(ClassifierAlgo algo, const LabelledDataset& data,
                                             std::uint64_t seed, const TreeParams& tree_params,
                                             const ForestParams& forest_params) {
  if (data.features.empty()) {
    throw EmptyTrainingSet("classifier training data is empty");
  }
  if (data.features.size() != data.labels.size()) {
    throw InvalidArgument("feature/label count mismatch");
  }
  std::vector<int> y;
  auto classes = index_labels(data.labels, y);
  int n = static_cast<int>(data.features.size());
  int n_classes = static_cast<int>(classes.size());

  switch (algo) {
    case ClassifierAlgo::ZeroR: {
      std::vector<int> counts(classes.size(), 0);
      for (int c : y) ++counts[static_cast<std::size_t>(c)];
      auto best = std::max_element(counts.begin(), counts.end()) - counts.begin();
      return std::make_unique<ZeroRClassifier>(std::move(classes), static_cast<int>(best));
    }

    case ClassifierAlgo::NaiveBayes: {
      std::vector<double> log_priors(classes.size());
      std::vector<std::vector<double>> means(classes.size(),
                                             std::vector<double>(kFeatureCount, 0.0));
      std::vector<std::vector<double>> vars(classes.size(),
                                            std::vector<double>(kFeatureCount, 0.0));
      std::vector<int> counts(classes.size(), 0);
      for (int i = 0; i < n; ++i) {
        auto c = static_cast<std::size_t>(y[static_cast<std::size_t>(i)]);
        ++counts[c];
        auto row = data.features[static_cast<std::size_t>(i)].values();
        for (int f = 0; f < kFeatureCount; ++f) {
          means[c][static_cast<std::size_t>(f)] += row[static_cast<std::size_t>(f)];
        }
      }
      for (std::size_t c = 0; c < classes.size(); ++c) {
        log_priors[c] = std::log(static_cast<double>(counts[c]) / n);
        for (auto& m : means[c]) m /= counts[c];
      }
      for (int i = 0; i < n; ++i) {
        auto c = static_cast<std::size_t>(y[static_cast<std::size_t>(i)]);
        auto row = data.features[static_cast<std::size_t>(i)].values();
        for (int f = 0; f < kFeatureCount; ++f) {
          double diff = row[static_cast<std::size_t>(f)] - means[c][static_cast<std::size_t>(f)];
          vars[c][static_cast<std::size_t>(f)] += diff * diff;
        }
      }
      double max_var = 0.0;
      for (std::size_t c = 0; c < classes.size(); ++c) {
        for (auto& v : vars[c]) {
          v /= counts[c];
          max_var = std::max(max_var, v);
        }
      }
      double smoothing = 1e-9 * (max_var > 0.0 ? max_var : 1.0);
      for (auto& per_class : vars) {
        for (auto& v : per_class) v += smoothing;
      }
      return std::make_unique<NaiveBayesClassifier>(std::move(classes), std::move(log_priors),
                                                    std::move(means), std::move(vars));
    }

    case ClassifierAlgo::DecisionTree: {
      auto x = flatten_features(data.features);
      Rng rng(fnv1a64_mix(seed, 0x7ee5));
      TreeBuilder builder(x, kFeatureCount, &y, n_classes, nullptr, tree_params.max_depth,
                          tree_params.min_leaf, kFeatureCount, rng);
      std::vector<int> samples(static_cast<std::size_t>(n));
      std::iota(samples.begin(), samples.end(), 0);
      return std::make_unique<TreeClassifier>(std::move(classes), builder.build(samples));
    }

    case ClassifierAlgo::RandomForest: {
      auto x = flatten_features(data.features);
      int mtry = forest_params.mtry > 0
                     ? forest_params.mtry
                     : std::max(1, static_cast<int>(std::lround(std::sqrt(kFeatureCount))));
      auto trees = build_forest(
          forest_params.trees, n, fnv1a64_mix(seed, 0xf0537), forest_params.bootstrap,
          [&](const std::vector<int>& samples, Rng& rng) {
            TreeBuilder builder(x, kFeatureCount, &y, n_classes, nullptr,
                                forest_params.max_depth, forest_params.min_leaf, mtry, rng);
            return builder.build(samples);
          });
      return std::make_unique<ForestClassifier>(std::move(classes), std::move(trees));
    }
  }
  throw InvalidArgument("bad classifier algorithm");
}

std::unique_ptr<Regressor> train_regressor(const RegressionDataset& data, std::uint64_t seed,
                                           ForestParams params) {
  if (data.rows.empty()) {
    throw EmptyTrainingSet("regressor training data is empty");
  }
  int n = static_cast<int>(data.rows.size());
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(n) * kRegressorWidth);
  std::vector<double> y;
  y.reserve(static_cast<std::size_t>(n));
  for (const auto& row : data.rows) {
    if (data.mode == RegressionMode::Runtime && !(row.target > 0.0)) {
      throw InvalidArgument("runtime targets must be positive");
    }
    auto ext = extended_row(row.features, row.w);
    x.insert(x.end(), ext.begin(), ext.end());
    y.push_back(row.target);
  }
  int mtry = params.mtry > 0 ? params.mtry : std::max(1, kRegressorWidth / 3);
  auto trees = build_forest(params.trees, n, fnv1a64_mix(seed, 0x2e6), params.bootstrap,
                            [&](const std::vector<int>& samples, Rng& rng) {
                              TreeBuilder builder(x, kRegressorWidth, nullptr, 0, &y,
                                                  params.max_depth, params.min_leaf, mtry, rng);
                              return builder.build(samples);
                            });
  return std::make_unique<ForestRegressor>(data.mode, std::move(trees));
}

WorkgroupSize predict_label(const Classifier& model, const FeatureVector& f) {
  return model.predict(f);
}

double predict_value(const Regressor& model, const FeatureVector& f, WorkgroupSize w) {
  return model.predict(f, w);
}

std::vector<WorkgroupSize> forest_votes(const Classifier& model, const FeatureVector& f) {
  if (const auto* forest = dynamic_cast<const ForestClassifier*>(&model)) {
    return forest->votes(f);
  }
  return {};
}

std::unique_ptr<Classifier> classifier_from_json(const json& j) {
  check_schema(j);
  check_width(j.at("width").get<int>(), kFeatureCount);
  auto algo = classifier_algo_from_string(j.at("algorithm").get<std::string>());
  std::vector<WorkgroupSize> classes;
  for (const auto& c : j.at("classes")) classes.push_back(label_from_json(c));
  if (classes.empty()) {
    throw ParseError("model has no classes");
  }
  switch (algo) {
    case ClassifierAlgo::ZeroR: {
      int idx = j.at("label_index").get<int>();
      if (idx < 0 || idx >= static_cast<int>(classes.size())) {
        throw ParseError("label index out of range");
      }
      return std::make_unique<ZeroRClassifier>(std::move(classes), idx);
    }
    case ClassifierAlgo::NaiveBayes: {
      return std::make_unique<NaiveBayesClassifier>(
          std::move(classes), j.at("log_priors").get<std::vector<double>>(),
          j.at("means").get<std::vector<std::vector<double>>>(),
          j.at("variances").get<std::vector<std::vector<double>>>());
    }
    case ClassifierAlgo::DecisionTree: {
      return std::make_unique<TreeClassifier>(std::move(classes),
                                              tree_from_json(j.at("tree"), true));
    }
    case ClassifierAlgo::RandomForest: {
      std::vector<Tree> trees;
      for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t, true));
      return std::make_unique<ForestClassifier>(std::move(classes), std::move(trees));
    }
  }
  throw ParseError("bad classifier JSON");
}

std::unique_ptr<Regressor> regressor_from_json(const json& j) {
  check_schema(j);
  check_width(j.at("width").get<int>(), kRegressorWidth);
  if (j.at("algorithm").get<std::string>() != "forest_regressor") {
    throw ParseError("unknown regressor algorithm");
  }
  auto mode = regression_mode_from_string(j.at("mode").get<std::string>());
  std::vector<Tree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t, false));
  if (trees.empty()) {
    throw ParseError("regressor has no trees");
  }
  return std::make_unique<ForestRegressor>(mode, std::move(trees));
}

}  // namespace wgtune
