#pragma once

#include <array>
#include <string>
#include <string_view>

namespace wgtune {

enum class DeviceType { CPU, GPU };
enum class VendorClass { INTEL_CPU, AMD_GPU, NVIDIA_GPU, OTHER };
enum class ElementType { INT32, FLOAT32, FLOAT64 };

std::string_view to_string(DeviceType t);
std::string_view to_string(VendorClass v);
std::string_view to_string(ElementType t);
DeviceType device_type_from_string(std::string_view s);
VendorClass vendor_class_from_string(std::string_view s);
ElementType element_type_from_string(std::string_view s);

int element_size_bytes(ElementType t);  // INT32=4, FLOAT32=4, FLOAT64=8

// Static instruction categories carried by kernel descriptors. The order here
// is the serialization and feature-schema order.
enum class InstrCategory { Load, Store, IntArith, FloatArith, Branch, Vector, Call, Other };
inline constexpr int kInstrCategoryCount = 8;
std::string_view to_string(InstrCategory c);
InstrCategory instr_category_from_string(std::string_view s);

using InstrCounts = std::array<int, kInstrCategoryCount>;

struct DeviceDescriptor {
  std::string id;
  DeviceType device_type = DeviceType::CPU;
  VendorClass vendor_class = VendorClass::OTHER;
  int compute_units = 1;
  int frequency_mhz = 1;
  int local_mem_kb = 1;
  int global_cache_kb = 0;
  int global_mem_mb = 1;
  int device_max_wgsize = 64;  // power of two, >= 64
  int simd_width = 8;          // one of 8, 16, 32, 64

  void validate() const;  // throws InvalidDescriptor
};

struct KernelDescriptor {
  std::string name;
  int north = 0;
  int south = 0;
  int east = 0;
  int west = 0;
  InstrCounts instr_counts{};
  int total_instructions = 1;  // must equal the sum of instr_counts
  bool complexity = false;

  void validate() const;
};

struct DatasetDescriptor {
  int width = 1;
  int height = 1;
  ElementType in_type = ElementType::FLOAT32;
  ElementType out_type = ElementType::FLOAT32;

  long long element_count() const { return static_cast<long long>(width) * height; }
  void validate() const;
};

// The unit of prediction: one (device, kernel, dataset) combination. The id
// is the deterministic join of the descriptor identities.
struct Scenario {
  DeviceDescriptor device;
  KernelDescriptor kernel;
  DatasetDescriptor dataset;
  std::string id;
};

// Validates the descriptors and assembles the Scenario with its id
// "<device.id>/<kernel.name>/<width>x<height>/<in_type>-<out_type>".
Scenario make_scenario(const DeviceDescriptor& device, const KernelDescriptor& kernel,
                       const DatasetDescriptor& dataset);

std::string scenario_id(const DeviceDescriptor& device, const KernelDescriptor& kernel,
                        const DatasetDescriptor& dataset);

}  // namespace wgtune
