#include "wgtune/features.hpp"

#include <numeric>
#include <string>

#include "wgtune/errors.hpp"

namespace wgtune {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      // device
      "compute_units", "frequency_mhz", "local_mem_kb", "global_cache_kb", "global_mem_mb",
      "device_max_wgsize", "simd_width", "is_cpu", "is_gpu", "vendor_class",
      // kernel
      "border_north", "border_south", "border_east", "border_west", "total_instructions",
      "density_load", "density_store", "density_int_arith", "density_float_arith",
      "density_branch", "density_vector", "density_call", "density_other", "complexity",
      // dataset
      "width", "height", "in_type_size", "out_type_size", "element_count"};
  return names;
}

double FeatureVector::at_name(std::string_view name) const {
  const auto& names = feature_names();
  for (int i = 0; i < kFeatureCount; ++i) {
    if (names[static_cast<std::size_t>(i)] == name) return values_[static_cast<std::size_t>(i)];
  }
  throw InvalidArgument("unknown feature '" + std::string(name) + "'");
}

std::array<double, kInstrCategoryCount> densities(const InstrCounts& counts, int total) {
  if (total <= 0) {
    throw InvalidArgument("instruction total must be positive");
  }
  int sum = std::accumulate(counts.begin(), counts.end(), 0);
  if (sum != total) {
    throw InconsistentCounts("instruction counts sum to " + std::to_string(sum) +
                             ", expected " + std::to_string(total));
  }
  std::array<double, kInstrCategoryCount> out{};
  for (int i = 0; i < kInstrCategoryCount; ++i) {
    out[static_cast<std::size_t>(i)] =
        static_cast<double>(counts[static_cast<std::size_t>(i)]) / total;
  }
  return out;
}

std::map<InstrCategory, double> densities(const std::map<InstrCategory, int>& counts,
                                          int total) {
  InstrCounts flat{};
  for (const auto& [cat, n] : counts) flat[static_cast<std::size_t>(cat)] = n;
  auto d = densities(flat, total);
  std::map<InstrCategory, double> out;
  for (int i = 0; i < kInstrCategoryCount; ++i) {
    out[static_cast<InstrCategory>(i)] = d[static_cast<std::size_t>(i)];
  }
  return out;
}

FeatureVector extract(const Scenario& s) {
  std::array<double, kFeatureCount> v{};
  int i = 0;
  const auto& dev = s.device;
  v[i++] = dev.compute_units;
  v[i++] = dev.frequency_mhz;
  v[i++] = dev.local_mem_kb;
  v[i++] = dev.global_cache_kb;
  v[i++] = dev.global_mem_mb;
  v[i++] = dev.device_max_wgsize;
  v[i++] = dev.simd_width;
  v[i++] = dev.device_type == DeviceType::CPU ? 1.0 : 0.0;
  v[i++] = dev.device_type == DeviceType::GPU ? 1.0 : 0.0;
  v[i++] = static_cast<double>(dev.vendor_class);

  const auto& k = s.kernel;
  v[i++] = k.north;
  v[i++] = k.south;
  v[i++] = k.east;
  v[i++] = k.west;
  v[i++] = k.total_instructions;
  auto dens = densities(k.instr_counts, k.total_instructions);
  for (double d : dens) v[i++] = d;
  v[i++] = k.complexity ? 1.0 : 0.0;

  const auto& ds = s.dataset;
  v[i++] = ds.width;
  v[i++] = ds.height;
  v[i++] = element_size_bytes(ds.in_type);
  v[i++] = element_size_bytes(ds.out_type);
  v[i++] = static_cast<double>(ds.element_count());
  return FeatureVector(v);
}

}  // namespace wgtune
