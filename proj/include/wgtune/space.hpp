#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace wgtune {

// A 2D workgroup size: w_c columns by w_r rows. Ordering is lexicographic by
// (w_c, w_r), which is the tie-break order used by every argmin/argmax in the
// library.
class WorkgroupSize {
 public:
  WorkgroupSize() = default;
  WorkgroupSize(int cols, int rows);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  long long area() const { return static_cast<long long>(cols_) * rows_; }

  // Canonical text form "<w_c>x<w_r>", e.g. "16x8".
  std::string str() const;
  static WorkgroupSize parse(std::string_view text);

  auto operator<=>(const WorkgroupSize&) const = default;

 private:
  int cols_ = 1;
  int rows_ = 1;
};

// Per-scenario constraints: the device and per-kernel workgroup size maxima
// plus the set of sizes known to be refused by the runtime. Oversized entries
// are rejected at construction; an oversized size is illegal, not refused.
class ConstraintContext {
 public:
  ConstraintContext(int device_max, int kernel_max, std::set<WorkgroupSize> refused = {});

  int device_max() const { return device_max_; }
  int kernel_max() const { return kernel_max_; }
  int effective_max() const { return device_max_ < kernel_max_ ? device_max_ : kernel_max_; }
  const std::set<WorkgroupSize>& refused() const { return refused_; }

 private:
  int device_max_;
  int kernel_max_;
  std::set<WorkgroupSize> refused_;
};

// Observed runtimes for (scenario, workgroup size) test cases. At most one
// row per pair; a row's sample list grows as observations are added. Rows
// iterate in canonical order: scenario id, then size.
class SampleTable {
 public:
  using SizeMap = std::map<WorkgroupSize, std::vector<double>>;

  // Appends one runtime observation, creating the row if needed.
  void add_runtime(const std::string& scenario_id, WorkgroupSize w, double runtime_ms);
  // Inserts a whole row; the (scenario, size) pair must not already exist.
  void add_row(const std::string& scenario_id, WorkgroupSize w, std::vector<double> runtimes);

  bool has(const std::string& scenario_id, WorkgroupSize w) const;
  bool has_scenario(const std::string& scenario_id) const;
  const std::vector<double>& runtimes(const std::string& scenario_id, WorkgroupSize w) const;
  double mean_runtime(const std::string& scenario_id, WorkgroupSize w) const;

  // Rows for one scenario, keyed by size. Throws UnknownScenario.
  const SizeMap& scenario_rows(const std::string& scenario_id) const;
  std::vector<std::string> scenario_ids() const;

  std::size_t row_count() const;
  bool empty() const { return rows_.empty(); }

  const std::map<std::string, SizeMap>& rows() const { return rows_; }

  bool operator==(const SampleTable&) const = default;

 private:
  std::map<std::string, SizeMap> rows_;
};

// All (w_c, w_r) with both dimensions even positive integers and
// w_c * w_r <= effective_max, sorted lexicographically.
std::vector<WorkgroupSize> enumerate_space(int effective_max);

// W_legal membership: under the effective maximum and not refused.
bool is_legal(WorkgroupSize w, const ConstraintContext& ctx);

// Sizes from `space` legal in every context (W_safe).
std::set<WorkgroupSize> safe_set(const std::vector<ConstraintContext>& contexts,
                                 const std::vector<WorkgroupSize>& space);

// The size with the lowest mean runtime for the scenario; ties go to the
// lexicographically smallest size.
WorkgroupSize oracle(const std::string& scenario_id, const SampleTable& table);

// mean_runtime(oracle) / mean_runtime(w), in (0, 1].
double performance(const std::string& scenario_id, WorkgroupSize w, const SampleTable& table);

// mean_runtime(base) / mean_runtime(w).
double speedup(const std::string& scenario_id, WorkgroupSize w, WorkgroupSize base,
               const SampleTable& table);

// The safe size with the highest geometric-mean performance over the training
// scenarios. Computed in log space; ties go to the smallest size.
WorkgroupSize baseline_param(const std::vector<std::string>& training_scenarios,
                             const SampleTable& table, const std::set<WorkgroupSize>& safe);

// Safe sizes ordered by descending geometric-mean performance (ties by size).
// baseline_param is the front element.
std::vector<WorkgroupSize> baseline_ranking(const std::vector<std::string>& training_scenarios,
                                            const SampleTable& table,
                                            const std::set<WorkgroupSize>& safe);

}  // namespace wgtune
