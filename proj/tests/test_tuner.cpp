#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "wgtune/errors.hpp"
#include "wgtune/rng.hpp"
#include "wgtune/tuner.hpp"

using namespace wgtune;

namespace {

// Classifier stub with a fixed answer, for driving the fallback paths.
class FixedClassifier final : public Classifier {
 public:
  explicit FixedClassifier(WorkgroupSize w) : w_(w), classes_{w} {}
  WorkgroupSize predict(const FeatureVector&) const override { return w_; }
  std::string_view algorithm() const override { return "fixed"; }
  const std::vector<WorkgroupSize>& classes() const override { return classes_; }
  nlohmann::json to_json() const override { return {}; }

 private:
  WorkgroupSize w_;
  std::vector<WorkgroupSize> classes_;
};

// Regressor stub backed by a lookup table; unknown sizes get a default.
class TableRegressor final : public Regressor {
 public:
  TableRegressor(RegressionMode mode, std::map<WorkgroupSize, double> values,
                 double fallback = 1e6)
      : mode_(mode), values_(std::move(values)), fallback_(fallback) {}
  double predict(const FeatureVector&, WorkgroupSize w) const override {
    auto it = values_.find(w);
    return it == values_.end() ? fallback_ : it->second;
  }
  RegressionMode mode() const override { return mode_; }
  nlohmann::json to_json() const override { return {}; }

 private:
  RegressionMode mode_;
  std::map<WorkgroupSize, double> values_;
  double fallback_;
};

ProbeFn probe_refusing(std::set<WorkgroupSize> refused, int max = 1 << 20) {
  return [refused = std::move(refused), max](WorkgroupSize w) {
    if (w.area() > max) return ProbeResult::Oversized;
    return refused.count(w) ? ProbeResult::Refused : ProbeResult::Legal;
  };
}

FeatureVector dummy_features() { return FeatureVector(std::array<double, kFeatureCount>{}); }

}  // namespace

TEST_CASE("fitness") {
  CHECK(fitness(FitnessMode::RuntimeReciprocal, 10.0) == doctest::Approx(0.1));
  CHECK(fitness(FitnessMode::Speedup, 1.33) == 1.33);
  CHECK_THROWS_AS(fitness(FitnessMode::RuntimeReciprocal, 0.0), InvalidPrediction);
  CHECK_THROWS_AS(fitness(FitnessMode::RuntimeReciprocal, -3.0), InvalidPrediction);

  // strictly decreasing in reciprocal mode
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    double x1 = 0.01 + rng.uniform01() * 10;
    double x2 = x1 + 0.01 + rng.uniform01() * 10;
    CHECK(fitness(FitnessMode::RuntimeReciprocal, x1) >
          fitness(FitnessMode::RuntimeReciprocal, x2));
  }
}

TEST_CASE("tune_classify returns a legal prediction unchanged") {
  FixedClassifier model(WorkgroupSize(8, 8));
  ConstraintContext ctx(1024, 1024);
  auto outcome = tune_classify(model, dummy_features(), ctx,
                               FallbackStrategy::nearest_neighbour(), probe_refusing({}));
  CHECK(outcome.w == WorkgroupSize(8, 8));
  CHECK(outcome.fallback_iterations == 0);
  CHECK(outcome.initial_probe == ProbeResult::Legal);
}

TEST_CASE("nearest neighbour picks the closest candidate") {
  // prediction (64,4) oversized; candidates {(16,4), (60,4)}: distances 48 vs 4
  FixedClassifier model(WorkgroupSize(64, 4));
  std::set<WorkgroupSize> refused;
  for (const auto& w : enumerate_space(240)) {
    if (w != WorkgroupSize(16, 4) && w != WorkgroupSize(60, 4)) refused.insert(w);
  }
  ConstraintContext ctx(240, 240, refused);
  auto outcome = tune_classify(model, dummy_features(), ctx,
                               FallbackStrategy::nearest_neighbour(), probe_refusing({}, 240));
  CHECK(outcome.w == WorkgroupSize(60, 4));
  CHECK(outcome.fallback_iterations == 1);
  CHECK(outcome.initial_probe == ProbeResult::Oversized);
}

TEST_CASE("nearest neighbour matches brute force on random instances") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int eff = static_cast<int>(rng.range(2, 64)) * 2;
    auto space = enumerate_space(eff);
    std::set<WorkgroupSize> known_refused;
    for (const auto& w : space) {
      if (rng.uniform01() < 0.4) known_refused.insert(w);
    }
    if (known_refused.size() == space.size()) known_refused.erase(*known_refused.begin());

    WorkgroupSize prediction(static_cast<int>(rng.range(1, 200)),
                             static_cast<int>(rng.range(1, 200)));
    if (prediction.area() <= eff && !known_refused.count(prediction)) {
      known_refused.insert(prediction);  // force the fallback to run
    }

    FixedClassifier model(prediction);
    ConstraintContext ctx(eff, eff, known_refused);
    auto outcome = tune_classify(model, dummy_features(), ctx,
                                 FallbackStrategy::nearest_neighbour(), probe_refusing({}, eff));

    // brute force: nearest candidate by Euclidean distance, smallest first
    WorkgroupSize best;
    double best_d = 1e300;
    bool found = false;
    for (const auto& c : space) {
      if (known_refused.count(c)) continue;
      double d = std::sqrt(std::pow(c.rows() - prediction.rows(), 2.0) +
                           std::pow(c.cols() - prediction.cols(), 2.0));
      if (!found || d < best_d) {
        best = c;
        best_d = d;
        found = true;
      }
    }
    REQUIRE(found);
    CHECK(outcome.w == best);
  }
}

TEST_CASE("nearest neighbour never revisits a refused size and walks outward") {
  FixedClassifier model(WorkgroupSize(10, 10));
  ConstraintContext ctx(1024, 1024, {WorkgroupSize(10, 10)});
  std::set<WorkgroupSize> runtime_refused{WorkgroupSize(10, 8), WorkgroupSize(8, 10),
                                          WorkgroupSize(10, 12), WorkgroupSize(12, 10)};
  std::map<WorkgroupSize, int> probes;
  ProbeFn probe = [&](WorkgroupSize w) {
    ++probes[w];
    return runtime_refused.count(w) ? ProbeResult::Refused : ProbeResult::Legal;
  };
  auto outcome =
      tune_classify(model, dummy_features(), ctx, FallbackStrategy::nearest_neighbour(), probe);
  CHECK(runtime_refused.count(outcome.w) == 0);
  CHECK(outcome.fallback_iterations >= 1);
  for (const auto& [w, count] : probes) CHECK(count == 1);
}

TEST_CASE("baseline fallback returns the ranked safe size") {
  FixedClassifier model(WorkgroupSize(64, 64));  // oversized for the context
  ConstraintContext ctx(256, 256);
  FallbackStrategy strategy =
      FallbackStrategy::baseline({WorkgroupSize(4, 4), WorkgroupSize(8, 2)});

  SUBCASE("first ranked size is legal") {
    auto outcome = tune_classify(model, dummy_features(), ctx, strategy, probe_refusing({}));
    CHECK(outcome.w == WorkgroupSize(4, 4));
    CHECK(outcome.fallback_iterations == 1);
  }
  SUBCASE("refused head falls through to the next ranked size") {
    auto outcome = tune_classify(model, dummy_features(), ctx, strategy,
                                 probe_refusing({WorkgroupSize(4, 4)}));
    CHECK(outcome.w == WorkgroupSize(8, 2));
    CHECK(outcome.fallback_iterations == 2);
  }
  SUBCASE("exhausted ranking raises NoLegalParameter") {
    CHECK_THROWS_AS(
        tune_classify(model, dummy_features(), ctx, strategy,
                      probe_refusing({WorkgroupSize(4, 4), WorkgroupSize(8, 2)})),
        NoLegalParameter);
  }
}

TEST_CASE("random fallback stays inside the pool and is seed-deterministic") {
  FixedClassifier model(WorkgroupSize(512, 512));
  std::set<WorkgroupSize> known_refused{WorkgroupSize(2, 2), WorkgroupSize(2, 4)};
  ConstraintContext ctx(64, 64, known_refused);
  auto strategy = FallbackStrategy::random(99);

  auto a = tune_classify(model, dummy_features(), ctx, strategy, probe_refusing({}, 64));
  auto b = tune_classify(model, dummy_features(), ctx, strategy, probe_refusing({}, 64));
  CHECK(a.w == b.w);
  CHECK(known_refused.count(a.w) == 0);
  CHECK(a.w.area() <= 64);

  // a probe that refuses everything it is offered exhausts the pool
  CHECK_THROWS_AS(tune_classify(model, dummy_features(), ctx, strategy,
                                [](WorkgroupSize) { return ProbeResult::Refused; }),
                  NoLegalParameter);
}

TEST_CASE("tune_regress selects the fitness argmax") {
  ConstraintContext ctx(8, 8);  // candidates: (2,2), (2,4), (4,2)
  TableRegressor runtime_model(RegressionMode::Runtime, {{WorkgroupSize(2, 2), 10.0},
                                                         {WorkgroupSize(4, 2), 5.0},
                                                         {WorkgroupSize(2, 4), 8.0}});

  SUBCASE("argmax of reciprocal runtime is argmin runtime") {
    auto outcome = tune_regress(runtime_model, dummy_features(), ctx,
                                FitnessMode::RuntimeReciprocal, probe_refusing({}));
    CHECK(outcome.w == WorkgroupSize(4, 2));
    CHECK(outcome.rejections == 0);
  }

  SUBCASE("a refused best candidate costs exactly one rejection") {
    auto outcome = tune_regress(runtime_model, dummy_features(), ctx,
                                FitnessMode::RuntimeReciprocal,
                                probe_refusing({WorkgroupSize(4, 2)}));
    CHECK(outcome.w == WorkgroupSize(2, 4));
    CHECK(outcome.rejections == 1);
  }

  SUBCASE("speedup mode maximises the raw output") {
    TableRegressor speedup_model(RegressionMode::Speedup, {{WorkgroupSize(2, 2), 1.1},
                                                           {WorkgroupSize(4, 2), 2.0},
                                                           {WorkgroupSize(2, 4), 0.5}});
    auto outcome = tune_regress(speedup_model, dummy_features(), ctx, FitnessMode::Speedup,
                                probe_refusing({}));
    CHECK(outcome.w == WorkgroupSize(4, 2));
  }

  SUBCASE("mode mismatch is rejected") {
    CHECK_THROWS_AS(tune_regress(runtime_model, dummy_features(), ctx, FitnessMode::Speedup,
                                 probe_refusing({})),
                    InvalidArgument);
  }

  SUBCASE("known-refused candidates never get probed") {
    ConstraintContext refusing(8, 8, {WorkgroupSize(4, 2)});
    int probes = 0;
    ProbeFn probe = [&](WorkgroupSize w) {
      ++probes;
      CHECK(w != WorkgroupSize(4, 2));
      return ProbeResult::Legal;
    };
    auto outcome = tune_regress(runtime_model, dummy_features(), refusing,
                                FitnessMode::RuntimeReciprocal, probe);
    CHECK(outcome.w == WorkgroupSize(2, 4));
    CHECK(probes == 1);
  }

  SUBCASE("exhausting the candidates raises NoLegalParameter") {
    CHECK_THROWS_AS(tune_regress(runtime_model, dummy_features(), ctx,
                                 FitnessMode::RuntimeReciprocal,
                                 [](WorkgroupSize) { return ProbeResult::Refused; }),
                    NoLegalParameter);
  }
}

TEST_CASE("tune_regress performs exactly k rejections for k outranking refusals") {
  // Also covers random k via a property sweep.
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    int eff = 64;
    auto space = enumerate_space(eff);
    std::map<WorkgroupSize, double> speedups;
    for (std::size_t i = 0; i < space.size(); ++i) {
      speedups[space[i]] = 1.0 + rng.uniform01() * 10;
    }
    TableRegressor model(RegressionMode::Speedup, speedups);

    // refuse the top k candidates by fitness
    int k = static_cast<int>(rng.bounded(6));
    std::vector<std::pair<double, WorkgroupSize>> ranked;
    for (const auto& [w, v] : speedups) ranked.emplace_back(v, w);
    std::sort(ranked.begin(), ranked.end(), [](auto& a, auto& b) { return a.first > b.first; });
    std::set<WorkgroupSize> refused;
    for (int i = 0; i < k; ++i) refused.insert(ranked[static_cast<std::size_t>(i)].second);

    ConstraintContext ctx(eff, eff);
    auto outcome = tune_regress(model, dummy_features(), ctx, FitnessMode::Speedup,
                                probe_refusing(refused, eff));
    CHECK(outcome.rejections == k);
    CHECK(outcome.w == ranked[static_cast<std::size_t>(k)].second);
  }
}

TEST_CASE("tune_regress ties break lexicographically") {
  ConstraintContext ctx(8, 8);
  TableRegressor model(RegressionMode::Speedup, {{WorkgroupSize(2, 2), 1.0},
                                                 {WorkgroupSize(2, 4), 2.0},
                                                 {WorkgroupSize(4, 2), 2.0}});
  auto outcome =
      tune_regress(model, dummy_features(), ctx, FitnessMode::Speedup, probe_refusing({}));
  CHECK(outcome.w == WorkgroupSize(2, 4));
}
