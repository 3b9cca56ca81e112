#include "wgtune/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wgtune/errors.hpp"
#include "wgtune/features.hpp"
#include "wgtune/learn.hpp"
#include "wgtune/rng.hpp"
#include "wgtune/tuner.hpp"

namespace wgtune {

namespace {

constexpr std::string_view kMetricsHeader =
    "technique,scenario_id,time_ms,accuracy,validity,refused,performance,speedup,"
    "fallback_iterations";

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const ConstraintContext& context_of(const EvalData& data, const std::string& id) {
  auto it = data.contexts.find(id);
  if (it == data.contexts.end()) {
    throw UnknownScenario("no constraint context for scenario " + id);
  }
  return it->second;
}

const Scenario& scenario_of(const EvalData& data, const std::string& id) {
  auto it = data.scenarios.find(id);
  if (it == data.scenarios.end()) {
    throw UnknownScenario("no descriptor for scenario " + id);
  }
  return it->second;
}

// Known-refused sizes accumulated over the training scenarios: the prior
// knowledge available to fallback handlers and the regression candidate set.
std::set<WorkgroupSize> prior_refused_union(const EvalData& data,
                                            const std::vector<std::string>& train_ids) {
  std::set<WorkgroupSize> out;
  for (const auto& id : train_ids) {
    const auto& refused = context_of(data, id).refused();
    out.insert(refused.begin(), refused.end());
  }
  return out;
}

// Episode context for one scenario: its maxima with the prior-known refused
// sizes that fit under them.
ConstraintContext episode_context(const EvalData& data, const std::string& id,
                                  const std::set<WorkgroupSize>& prior_refused) {
  const auto& ctx = context_of(data, id);
  std::set<WorkgroupSize> refused;
  for (const auto& w : prior_refused) {
    if (w.area() <= ctx.effective_max()) refused.insert(w);
  }
  return ConstraintContext(ctx.device_max(), ctx.kernel_max(), std::move(refused));
}

// Sizes legal in every listed scenario, per the recorded contexts.
std::set<WorkgroupSize> safe_over(const EvalData& data, const std::vector<std::string>& ids) {
  int max_eff = 0;
  std::vector<ConstraintContext> contexts;
  for (const auto& id : ids) {
    contexts.push_back(context_of(data, id));
    max_eff = std::max(max_eff, contexts.back().effective_max());
  }
  return safe_set(contexts, enumerate_space(max_eff));
}

ProbeFn data_probe(const EvalData& data, const std::string& id) {
  const auto& ctx = context_of(data, id);
  return [&data, &ctx, id](WorkgroupSize w) {
    if (w.area() > ctx.effective_max()) return ProbeResult::Oversized;
    if (ctx.refused().count(w)) return ProbeResult::Refused;
    if (data.table.has(id, w)) return ProbeResult::Legal;
    // Exhaustive collection means an even-grid size under the maximum is
    // either sampled or refused; anything else is off-grid and untested.
    return ProbeResult::Refused;
  };
}

class ClassifierTechnique final : public Technique {
 public:
  ClassifierTechnique(ClassifierAlgo algo, FallbackKind fallback)
      : algo_(algo), fallback_(fallback) {}

  std::string name() const override {
    std::string algo{algo_ == ClassifierAlgo::ZeroR          ? "zeror"
                     : algo_ == ClassifierAlgo::NaiveBayes   ? "nb"
                     : algo_ == ClassifierAlgo::DecisionTree ? "tree"
                                                             : "forest"};
    return algo + "-" + std::string(to_string(fallback_));
  }

  void fit(const EvalData& data, const std::vector<std::string>& train_ids,
           std::uint64_t seed) override {
    if (train_ids.empty()) {
      throw EmptyTrainingSet("no training scenarios");
    }
    LabelledDataset labelled;
    for (const auto& id : train_ids) {
      labelled.features.push_back(extract(scenario_of(data, id)));
      labelled.labels.push_back(oracle(id, data.table));
    }
    model_ = train_classifier(algo_, labelled, seed);
    prior_refused_ = prior_refused_union(data, train_ids);
    seed_ = seed;
    if (fallback_ == FallbackKind::Baseline) {
      baseline_ranking_ = baseline_ranking(train_ids, data.table, safe_over(data, train_ids));
    }
  }

  Outcome predict(const EvalData& data, const std::string& scenario_id) override {
    FeatureVector f = extract(scenario_of(data, scenario_id));
    ConstraintContext ctx = episode_context(data, scenario_id, prior_refused_);
    FallbackStrategy strategy;
    switch (fallback_) {
      case FallbackKind::Baseline:
        strategy = FallbackStrategy::baseline(baseline_ranking_);
        break;
      case FallbackKind::Random:
        strategy = FallbackStrategy::random(fnv1a64(scenario_id, seed_));
        break;
      case FallbackKind::NearestNeighbour:
        strategy = FallbackStrategy::nearest_neighbour();
        break;
    }
    auto probe = data_probe(data, scenario_id);
    auto start = std::chrono::steady_clock::now();
    ClassifyOutcome tuned = tune_classify(*model_, f, ctx, strategy, probe);
    auto elapsed = std::chrono::steady_clock::now() - start;

    Outcome out;
    out.w = tuned.w;
    out.tune_time_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    out.fallback_iterations = tuned.fallback_iterations;
    out.initial_valid = tuned.initial_probe != ProbeResult::Oversized;
    out.initial_refused = tuned.initial_probe == ProbeResult::Refused;
    return out;
  }

 private:
  ClassifierAlgo algo_;
  FallbackKind fallback_;
  std::unique_ptr<Classifier> model_;
  std::set<WorkgroupSize> prior_refused_;
  std::vector<WorkgroupSize> baseline_ranking_;
  std::uint64_t seed_ = 0;
};

class RegressorTechnique final : public Technique {
 public:
  explicit RegressorTechnique(RegressionMode mode) : mode_(mode) {}

  std::string name() const override {
    return mode_ == RegressionMode::Runtime ? "runtime-reg" : "speedup-reg";
  }

  void fit(const EvalData& data, const std::vector<std::string>& train_ids,
           std::uint64_t seed) override {
    if (train_ids.empty()) {
      throw EmptyTrainingSet("no training scenarios");
    }
    WorkgroupSize base;
    if (mode_ == RegressionMode::Speedup) {
      base = baseline_param(train_ids, data.table, safe_over(data, train_ids));
    }
    RegressionDataset dataset;
    dataset.mode = mode_;
    for (const auto& id : train_ids) {
      FeatureVector f = extract(scenario_of(data, id));
      for (const auto& [w, _] : data.table.scenario_rows(id)) {
        double target = mode_ == RegressionMode::Runtime
                            ? data.table.mean_runtime(id, w)
                            : speedup(id, w, base, data.table);
        dataset.rows.push_back({f, w, target});
      }
    }
    model_ = train_regressor(dataset, seed);
    prior_refused_ = prior_refused_union(data, train_ids);
  }

  Outcome predict(const EvalData& data, const std::string& scenario_id) override {
    FeatureVector f = extract(scenario_of(data, scenario_id));
    ConstraintContext ctx = episode_context(data, scenario_id, prior_refused_);
    FitnessMode fitness_mode = mode_ == RegressionMode::Runtime
                                   ? FitnessMode::RuntimeReciprocal
                                   : FitnessMode::Speedup;
    auto probe = data_probe(data, scenario_id);
    auto start = std::chrono::steady_clock::now();
    RegressOutcome tuned = tune_regress(*model_, f, ctx, fitness_mode, probe);
    auto elapsed = std::chrono::steady_clock::now() - start;

    Outcome out;
    out.w = tuned.w;
    out.tune_time_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    out.fallback_iterations = tuned.rejections;
    return out;
  }

 private:
  RegressionMode mode_;
  std::unique_ptr<Regressor> model_;
  std::set<WorkgroupSize> prior_refused_;
};

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

EvalData assemble_eval_data(const std::vector<Scenario>& scenarios, SampleTable table,
                            const RefusedRecord& refused, const OracleConfig& cfg) {
  EvalData data;
  data.table = std::move(table);
  for (const auto& s : scenarios) {
    data.scenarios.emplace(s.id, s);
    std::set<WorkgroupSize> scenario_refused;
    if (auto it = refused.find(s.id); it != refused.end()) scenario_refused = it->second;
    data.contexts.emplace(s.id, scenario_context(s, cfg, std::move(scenario_refused)));
  }
  return data;
}

std::unique_ptr<Technique> make_technique(const std::string& id) {
  if (id == "runtime-reg") return std::make_unique<RegressorTechnique>(RegressionMode::Runtime);
  if (id == "speedup-reg") return std::make_unique<RegressorTechnique>(RegressionMode::Speedup);
  auto dash = id.find('-');
  if (dash != std::string::npos) {
    std::string algo_name = id.substr(0, dash);
    std::string fb_name = id.substr(dash + 1);
    ClassifierAlgo algo;
    if (algo_name == "zeror") {
      algo = ClassifierAlgo::ZeroR;
    } else if (algo_name == "nb") {
      algo = ClassifierAlgo::NaiveBayes;
    } else if (algo_name == "tree") {
      algo = ClassifierAlgo::DecisionTree;
    } else if (algo_name == "forest") {
      algo = ClassifierAlgo::RandomForest;
    } else {
      throw InvalidArgument("unknown technique '" + id + "'");
    }
    return std::make_unique<ClassifierTechnique>(algo, fallback_kind_from_string(fb_name));
  }
  throw InvalidArgument("unknown technique '" + id + "'");
}

std::vector<std::string> technique_ids() {
  std::vector<std::string> ids;
  for (const char* algo : {"zeror", "nb", "tree", "forest"}) {
    for (const char* fb : {"baseline", "random", "nn"}) {
      ids.push_back(std::string(algo) + "-" + fb);
    }
  }
  ids.push_back("runtime-reg");
  ids.push_back("speedup-reg");
  return ids;
}

std::vector<Partition> partition_kfold(const std::vector<std::string>& scenario_ids, int k,
                                       std::uint64_t seed) {
  int n = static_cast<int>(scenario_ids.size());
  if (k < 2 || k > n) {
    throw InvalidArgument("k must be in [2, " + std::to_string(n) + "], got " +
                          std::to_string(k));
  }
  std::vector<std::string> shuffled = scenario_ids;
  Rng rng(fnv1a64_mix(fnv1a64("kfold"), seed));
  rng.shuffle(shuffled);

  std::vector<Partition> folds(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    folds[static_cast<std::size_t>(i % k)].second.push_back(shuffled[static_cast<std::size_t>(i)]);
  }
  for (auto& [train, test] : folds) {
    std::sort(test.begin(), test.end());
    for (const auto& id : scenario_ids) {
      if (!std::binary_search(test.begin(), test.end(), id)) train.push_back(id);
    }
    std::sort(train.begin(), train.end());
  }
  return folds;
}

Partition partition_synthetic_real(const std::vector<Scenario>& scenarios) {
  Partition p;
  for (const auto& s : scenarios) {
    if (s.kernel.name.rfind("synthetic-", 0) == 0) {
      p.first.push_back(s.id);
    } else {
      p.second.push_back(s.id);
    }
  }
  if (p.first.empty() || p.second.empty()) {
    throw InvalidPartition("synthetic/real split needs both synthetic and real kernels, got " +
                           std::to_string(p.first.size()) + "/" + std::to_string(p.second.size()));
  }
  std::sort(p.first.begin(), p.first.end());
  std::sort(p.second.begin(), p.second.end());
  return p;
}

std::vector<Partition> partition_leave_one_out(const std::vector<Scenario>& scenarios,
                                               LeaveOneOutDimension dimension) {
  auto key_of = [&](const Scenario& s) -> std::string {
    switch (dimension) {
      case LeaveOneOutDimension::Device: return s.device.id;
      case LeaveOneOutDimension::Kernel: return s.kernel.name;
      case LeaveOneOutDimension::Dataset:
        return std::to_string(s.dataset.width) + "x" + std::to_string(s.dataset.height) + "/" +
               std::string(to_string(s.dataset.in_type)) + "-" +
               std::string(to_string(s.dataset.out_type));
    }
    throw InvalidArgument("bad dimension");
  };

  std::map<std::string, std::vector<std::string>> by_value;
  for (const auto& s : scenarios) by_value[key_of(s)].push_back(s.id);
  if (by_value.size() < 2) {
    throw InvalidPartition("leave-one-out needs >= 2 distinct values along the dimension");
  }

  std::vector<Partition> out;
  for (const auto& [value, test_ids] : by_value) {
    Partition p;
    p.second = test_ids;
    std::sort(p.second.begin(), p.second.end());
    for (const auto& [other, ids] : by_value) {
      if (other == value) continue;
      p.first.insert(p.first.end(), ids.begin(), ids.end());
    }
    std::sort(p.first.begin(), p.first.end());
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<EvalRecord> evaluate(Technique& technique,
                                 const std::vector<std::string>& train_ids,
                                 const std::vector<std::string>& test_ids, const EvalData& data,
                                 std::uint64_t seed, const EvalOptions& options) {
  for (const auto& id : test_ids) {
    const auto& ctx = context_of(data, id);
    for (const auto& w : enumerate_space(ctx.effective_max())) {
      if (!ctx.refused().count(w) && !data.table.has(id, w)) {
        throw IncompleteSpace("scenario " + id + " is missing samples for " + w.str());
      }
    }
  }

  technique.fit(data, train_ids, seed);

  // The speedup comparator: the best fixed choice learned from the training
  // data, required to be legal for every scenario in the evaluation.
  WorkgroupSize base;
  if (options.pinned_baseline) {
    base = *options.pinned_baseline;
  } else {
    std::vector<std::string> all_ids = train_ids;
    all_ids.insert(all_ids.end(), test_ids.begin(), test_ids.end());
    base = baseline_param(train_ids, data.table, safe_over(data, all_ids));
  }

  std::vector<std::string> ordered_tests = test_ids;
  std::sort(ordered_tests.begin(), ordered_tests.end());

  std::vector<EvalRecord> records;
  records.reserve(ordered_tests.size());
  for (const auto& id : ordered_tests) {
    auto outcome = technique.predict(data, id);
    EvalRecord record;
    record.chosen = outcome.w;
    record.baseline = base;
    auto& row = record.row;
    row.technique = technique.name();
    row.scenario_id = id;
    row.time_ms = outcome.tune_time_ms;
    row.accuracy = outcome.w == oracle(id, data.table) ? 1 : 0;
    row.validity = outcome.initial_valid ? 1 : 0;
    row.refused = outcome.initial_refused ? 1 : 0;
    row.performance = performance(id, outcome.w, data.table);
    row.speedup = speedup(id, outcome.w, base, data.table);
    row.fallback_iterations = outcome.fallback_iterations;
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<MetricsRow> rows_of(const std::vector<EvalRecord>& records) {
  std::vector<MetricsRow> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(r.row);
  return rows;
}

std::vector<TechniqueSummary> summarize(const std::vector<MetricsRow>& rows) {
  if (rows.empty()) {
    throw InvalidArgument("no metric rows to summarize");
  }
  std::map<std::string, std::vector<const MetricsRow*>> by_technique;
  for (const auto& row : rows) by_technique[row.technique].push_back(&row);

  std::vector<TechniqueSummary> out;
  for (const auto& [technique, group] : by_technique) {
    TechniqueSummary s;
    s.technique = technique;
    s.rows = static_cast<int>(group.size());
    std::vector<double> speedups;
    for (const auto* row : group) {
      speedups.push_back(row->speedup);
      s.mean_speedup += row->speedup;
      s.mean_performance_pct += row->performance;
      s.accuracy_rate += row->accuracy;
      s.fallback_rate += row->fallback_iterations >= 1 ? 1.0 : 0.0;
      s.mean_time_ms += row->time_ms;
    }
    double n = static_cast<double>(group.size());
    s.mean_speedup /= n;
    s.mean_performance_pct = 100.0 * s.mean_performance_pct / n;
    s.accuracy_rate /= n;
    s.fallback_rate /= n;
    s.mean_time_ms /= n;
    s.median_speedup = median_of(std::move(speedups));
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_report(const std::vector<TechniqueSummary>& summaries) {
  std::ostringstream out;
  out << "technique      rows  mean-speedup  median-speedup  perf-%oracle  accuracy"
         "  fallback-rate  mean-time-ms\n";
  char line[256];
  for (const auto& s : summaries) {
    std::snprintf(line, sizeof line, "%-13s %5d %13.3f %15.3f %13.1f %9.2f %14.2f %13.4f\n",
                  s.technique.c_str(), s.rows, s.mean_speedup, s.median_speedup,
                  s.mean_performance_pct, s.accuracy_rate, s.fallback_rate, s.mean_time_ms);
    out << line;
  }
  return out.str();
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.technique;
    out += ',';
    out += r.scenario_id;
    out += ',';
    out += format_double(r.time_ms);
    out += ',';
    out += std::to_string(r.accuracy);
    out += ',';
    out += std::to_string(r.validity);
    out += ',';
    out += std::to_string(r.refused);
    out += ',';
    out += format_double(r.performance);
    out += ',';
    out += format_double(r.speedup);
    out += ',';
    out += std::to_string(r.fallback_iterations);
    out += '\n';
  }
  return out;
}

std::vector<MetricsRow> metrics_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != kMetricsHeader) {
        throw ParseError("expected metrics header", line_no);
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 9) {
      throw ParseError("expected 9 fields", line_no);
    }
    auto to_double = [&](const std::string& s) {
      double v = 0;
      auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ParseError("bad number '" + s + "'", line_no);
      }
      return v;
    };
    MetricsRow r;
    r.technique = fields[0];
    r.scenario_id = fields[1];
    r.time_ms = to_double(fields[2]);
    r.accuracy = static_cast<int>(to_double(fields[3]));
    r.validity = static_cast<int>(to_double(fields[4]));
    r.refused = static_cast<int>(to_double(fields[5]));
    r.performance = to_double(fields[6]);
    r.speedup = to_double(fields[7]);
    r.fallback_iterations = static_cast<int>(to_double(fields[8]));
    rows.push_back(std::move(r));
  }
  if (!saw_header) {
    throw ParseError("missing metrics header", 1);
  }
  return rows;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << metrics_to_csv(rows);
}

std::vector<TechniqueSummary> human_expert_summary(const std::vector<EvalRecord>& records,
                                                   const EvalData& data) {
  const WorkgroupSize expert(32, 4);
  std::vector<MetricsRow> adjusted;
  for (const auto& record : records) {
    const auto& id = record.row.scenario_id;
    const auto& ctx = context_of(data, id);
    if (!is_legal(expert, ctx) || !data.table.has(id, expert)) continue;
    MetricsRow row = record.row;
    row.speedup = speedup(id, record.chosen, expert, data.table);
    adjusted.push_back(std::move(row));
  }
  if (adjusted.empty()) {
    throw InvalidPartition("the human-expert size 32x4 is legal in no evaluated scenario");
  }
  return summarize(adjusted);
}

}  // namespace wgtune
