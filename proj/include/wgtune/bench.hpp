#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wgtune/datastore.hpp"
#include "wgtune/scenario.hpp"
#include "wgtune/simoracle.hpp"
#include "wgtune/space.hpp"

namespace wgtune {

// One evaluated prediction. accuracy/performance/speedup describe the final
// returned size; validity/refused describe the raw prediction before any
// fallback ran (always 1/0 for regressor techniques).
struct MetricsRow {
  std::string technique;
  std::string scenario_id;
  double time_ms = 0.0;
  int accuracy = 0;
  int validity = 1;
  int refused = 0;
  double performance = 0.0;
  double speedup = 0.0;
  int fallback_iterations = 0;
};

// Everything a technique needs to train and be scored: the scenarios, the
// exhaustively collected samples, and each scenario's constraint context
// (maxima plus recorded refusals).
struct EvalData {
  std::map<std::string, Scenario> scenarios;
  SampleTable table;
  std::map<std::string, ConstraintContext> contexts;
};

EvalData assemble_eval_data(const std::vector<Scenario>& scenarios, SampleTable table,
                            const RefusedRecord& refused, const OracleConfig& cfg = {});

// An autotuning technique under evaluation: one of the classifier x fallback
// combinations, or a regression mode.
class Technique {
 public:
  struct Outcome {
    WorkgroupSize w;
    double tune_time_ms = 0.0;  // the tuner call only; feature extraction excluded
    int fallback_iterations = 0;
    bool initial_valid = true;
    bool initial_refused = false;
  };

  virtual ~Technique() = default;
  virtual std::string name() const = 0;
  virtual void fit(const EvalData& data, const std::vector<std::string>& train_ids,
                   std::uint64_t seed) = 0;
  virtual Outcome predict(const EvalData& data, const std::string& scenario_id) = 0;
};

// Factory for the standard technique ids: {zeror,nb,tree,forest}-{baseline,
// random,nn} and {runtime-reg, speedup-reg}.
std::unique_ptr<Technique> make_technique(const std::string& id);
std::vector<std::string> technique_ids();

using Partition = std::pair<std::vector<std::string>, std::vector<std::string>>;

// Seeded shuffle into k folds; each id appears in exactly one test fold.
std::vector<Partition> partition_kfold(const std::vector<std::string>& scenario_ids, int k,
                                       std::uint64_t seed);

// Train on synthetic-kernel scenarios, test on the rest.
Partition partition_synthetic_real(const std::vector<Scenario>& scenarios);

enum class LeaveOneOutDimension { Device, Kernel, Dataset };

// One (train, test) pair per distinct value along the dimension.
std::vector<Partition> partition_leave_one_out(const std::vector<Scenario>& scenarios,
                                               LeaveOneOutDimension dimension);

struct EvalOptions {
  std::optional<WorkgroupSize> pinned_baseline;  // fidelity runs pin w(4x4)
};

struct EvalRecord {
  MetricsRow row;
  WorkgroupSize chosen;
  WorkgroupSize baseline;  // the speedup comparator used for this row
};

// Trains the technique on the train scenarios and scores one prediction per
// test scenario. The table must cover every test scenario's legal space.
std::vector<EvalRecord> evaluate(Technique& technique,
                                 const std::vector<std::string>& train_ids,
                                 const std::vector<std::string>& test_ids, const EvalData& data,
                                 std::uint64_t seed, const EvalOptions& options = {});

struct TechniqueSummary {
  std::string technique;
  int rows = 0;
  double mean_speedup = 0.0;
  double median_speedup = 0.0;
  double mean_performance_pct = 0.0;  // percent of oracle
  double accuracy_rate = 0.0;
  double fallback_rate = 0.0;  // fraction of rows needing >= 1 fallback iteration
  double mean_time_ms = 0.0;
};

std::vector<TechniqueSummary> summarize(const std::vector<MetricsRow>& rows);
std::string format_report(const std::vector<TechniqueSummary>& summaries);

// Raw metrics CSV with header
// "technique,scenario_id,time_ms,accuracy,validity,refused,performance,speedup,fallback_iterations".
std::string metrics_to_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> metrics_from_csv(const std::string& text);
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

// Speedup of each chosen size over the human-expert pick w(32x4), skipping
// scenarios where that size is not legal. Returns per-technique summaries
// with speedups relative to the expert choice.
std::vector<TechniqueSummary> human_expert_summary(const std::vector<EvalRecord>& records,
                                                   const EvalData& data);

std::vector<MetricsRow> rows_of(const std::vector<EvalRecord>& records);

}  // namespace wgtune
