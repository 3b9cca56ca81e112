#include "wgtune/space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "wgtune/errors.hpp"

namespace wgtune {

WorkgroupSize::WorkgroupSize(int cols, int rows) : cols_(cols), rows_(rows) {
  if (cols < 1 || rows < 1) {
    throw InvalidArgument("workgroup size dimensions must be >= 1, got " +
                          std::to_string(cols) + "x" + std::to_string(rows));
  }
}

std::string WorkgroupSize::str() const {
  return std::to_string(cols_) + "x" + std::to_string(rows_);
}

WorkgroupSize WorkgroupSize::parse(std::string_view text) {
  auto sep = text.find('x');
  if (sep == std::string_view::npos || sep == 0 || sep + 1 >= text.size()) {
    throw ParseError("bad workgroup size '" + std::string(text) + "', expected <w_c>x<w_r>");
  }
  int cols = 0;
  int rows = 0;
  auto lhs = text.substr(0, sep);
  auto rhs = text.substr(sep + 1);
  auto r1 = std::from_chars(lhs.data(), lhs.data() + lhs.size(), cols);
  auto r2 = std::from_chars(rhs.data(), rhs.data() + rhs.size(), rows);
  if (r1.ec != std::errc{} || r1.ptr != lhs.data() + lhs.size() ||
      r2.ec != std::errc{} || r2.ptr != rhs.data() + rhs.size()) {
    throw ParseError("bad workgroup size '" + std::string(text) + "'");
  }
  if (cols < 1 || rows < 1) {
    throw ParseError("workgroup size dimensions must be >= 1 in '" + std::string(text) + "'");
  }
  return WorkgroupSize(cols, rows);
}

ConstraintContext::ConstraintContext(int device_max, int kernel_max,
                                     std::set<WorkgroupSize> refused)
    : device_max_(device_max), kernel_max_(kernel_max), refused_(std::move(refused)) {
  if (effective_max() < 1) {
    throw InvalidArgument("effective max workgroup size must be >= 1");
  }
  for (const auto& w : refused_) {
    if (w.area() > effective_max()) {
      throw InvalidArgument("refused size " + w.str() + " exceeds the effective maximum " +
                            std::to_string(effective_max()) + "; oversized sizes are illegal, "
                            "not refused");
    }
  }
}

void SampleTable::add_runtime(const std::string& scenario_id, WorkgroupSize w,
                              double runtime_ms) {
  if (!(runtime_ms > 0.0)) {
    throw InvalidArgument("runtime must be positive, got " + std::to_string(runtime_ms) +
                          " for " + scenario_id + " " + w.str());
  }
  rows_[scenario_id][w].push_back(runtime_ms);
}

void SampleTable::add_row(const std::string& scenario_id, WorkgroupSize w,
                          std::vector<double> runtimes) {
  if (runtimes.empty()) {
    throw InvalidArgument("sample list for " + scenario_id + " " + w.str() + " is empty");
  }
  for (double t : runtimes) {
    if (!(t > 0.0)) {
      throw InvalidArgument("runtime must be positive, got " + std::to_string(t));
    }
  }
  auto& per_scenario = rows_[scenario_id];
  if (per_scenario.count(w)) {
    throw DuplicateTestCase("duplicate test case " + scenario_id + " " + w.str());
  }
  per_scenario.emplace(w, std::move(runtimes));
}

bool SampleTable::has(const std::string& scenario_id, WorkgroupSize w) const {
  auto it = rows_.find(scenario_id);
  return it != rows_.end() && it->second.count(w) > 0;
}

bool SampleTable::has_scenario(const std::string& scenario_id) const {
  return rows_.count(scenario_id) > 0;
}

const std::vector<double>& SampleTable::runtimes(const std::string& scenario_id,
                                                 WorkgroupSize w) const {
  auto it = rows_.find(scenario_id);
  if (it == rows_.end()) {
    throw UnknownTestCase("no samples for scenario " + scenario_id);
  }
  auto jt = it->second.find(w);
  if (jt == it->second.end()) {
    throw UnknownTestCase("no samples for " + scenario_id + " " + w.str());
  }
  return jt->second;
}

double SampleTable::mean_runtime(const std::string& scenario_id, WorkgroupSize w) const {
  const auto& samples = runtimes(scenario_id, w);
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

const SampleTable::SizeMap& SampleTable::scenario_rows(const std::string& scenario_id) const {
  auto it = rows_.find(scenario_id);
  if (it == rows_.end()) {
    throw UnknownScenario("no samples for scenario " + scenario_id);
  }
  return it->second;
}

std::vector<std::string> SampleTable::scenario_ids() const {
  std::vector<std::string> ids;
  ids.reserve(rows_.size());
  for (const auto& [id, _] : rows_) ids.push_back(id);
  return ids;
}

std::size_t SampleTable::row_count() const {
  std::size_t n = 0;
  for (const auto& [_, sizes] : rows_) n += sizes.size();
  return n;
}

std::vector<WorkgroupSize> enumerate_space(int effective_max) {
  if (effective_max < 4) {
    throw EmptySpace("no even workgroup size fits under max " + std::to_string(effective_max));
  }
  std::vector<WorkgroupSize> space;
  for (int c = 2; c <= effective_max / 2; c += 2) {
    for (int r = 2; static_cast<long long>(c) * r <= effective_max; r += 2) {
      space.emplace_back(c, r);
    }
  }
  return space;
}

bool is_legal(WorkgroupSize w, const ConstraintContext& ctx) {
  return w.area() <= ctx.effective_max() && ctx.refused().count(w) == 0;
}

std::set<WorkgroupSize> safe_set(const std::vector<ConstraintContext>& contexts,
                                 const std::vector<WorkgroupSize>& space) {
  if (contexts.empty()) {
    throw InvalidArgument("safe_set requires at least one context");
  }
  std::set<WorkgroupSize> safe;
  for (const auto& w : space) {
    bool ok = std::all_of(contexts.begin(), contexts.end(),
                          [&](const ConstraintContext& ctx) { return is_legal(w, ctx); });
    if (ok) safe.insert(w);
  }
  return safe;
}

WorkgroupSize oracle(const std::string& scenario_id, const SampleTable& table) {
  const auto& rows = table.scenario_rows(scenario_id);
  // Map iteration is size-ascending, so keeping the first strict minimum
  // implements the lexicographic tie-break.
  const WorkgroupSize* best = nullptr;
  double best_mean = 0.0;
  for (const auto& [w, _] : rows) {
    double mean = table.mean_runtime(scenario_id, w);
    if (!best || mean < best_mean) {
      best = &w;
      best_mean = mean;
    }
  }
  return *best;
}

double performance(const std::string& scenario_id, WorkgroupSize w, const SampleTable& table) {
  WorkgroupSize omega = oracle(scenario_id, table);
  return table.mean_runtime(scenario_id, omega) / table.mean_runtime(scenario_id, w);
}

double speedup(const std::string& scenario_id, WorkgroupSize w, WorkgroupSize base,
               const SampleTable& table) {
  return table.mean_runtime(scenario_id, base) / table.mean_runtime(scenario_id, w);
}

namespace {

// Mean log-performance over the training scenarios; exp of it is the
// geometric mean, but ordering is preserved without exponentiating.
double mean_log_performance(WorkgroupSize w, const std::vector<std::string>& scenarios,
                            const SampleTable& table) {
  double sum = 0.0;
  for (const auto& id : scenarios) {
    sum += std::log(performance(id, w, table));
  }
  return sum / static_cast<double>(scenarios.size());
}

}  // namespace

WorkgroupSize baseline_param(const std::vector<std::string>& training_scenarios,
                             const SampleTable& table, const std::set<WorkgroupSize>& safe) {
  return baseline_ranking(training_scenarios, table, safe).front();
}

std::vector<WorkgroupSize> baseline_ranking(const std::vector<std::string>& training_scenarios,
                                            const SampleTable& table,
                                            const std::set<WorkgroupSize>& safe) {
  if (safe.empty()) {
    throw NoSafeParameter("the safe set is empty");
  }
  if (training_scenarios.empty()) {
    throw InvalidArgument("baseline requires at least one training scenario");
  }
  std::vector<std::pair<double, WorkgroupSize>> scored;
  scored.reserve(safe.size());
  for (const auto& w : safe) {
    scored.emplace_back(mean_log_performance(w, training_scenarios, table), w);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<WorkgroupSize> ranked;
  ranked.reserve(scored.size());
  for (const auto& [_, w] : scored) ranked.push_back(w);
  return ranked;
}

}  // namespace wgtune
