#pragma once

#include <array>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "wgtune/scenario.hpp"

namespace wgtune {

inline constexpr int kFeatureCount = 29;
inline constexpr std::string_view kFeatureSchemaVersion = "fv1";

// Names of the fv1 schema, in vector order: 10 device features, 14 kernel
// features, 5 dataset features.
const std::array<std::string_view, kFeatureCount>& feature_names();

// An ordered, fixed-schema vector of explanatory variables for a scenario.
class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::array<double, kFeatureCount> values) : values_(values) {}

  std::span<const double, kFeatureCount> values() const { return values_; }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  double at_name(std::string_view name) const;

  bool operator==(const FeatureVector&) const = default;

 private:
  std::array<double, kFeatureCount> values_{};
};

// Deterministic feature extraction. Pure: equal scenarios yield element-wise
// equal vectors.
FeatureVector extract(const Scenario& s);

// Per-category instruction densities: count / total. The counts must sum to
// the total.
std::map<InstrCategory, double> densities(const std::map<InstrCategory, int>& counts, int total);
std::array<double, kInstrCategoryCount> densities(const InstrCounts& counts, int total);

}  // namespace wgtune
