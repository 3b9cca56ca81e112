#include "wgtune/scenario.hpp"

#include <numeric>

#include "wgtune/errors.hpp"

namespace wgtune {

namespace {

constexpr std::array<std::string_view, 2> kDeviceTypeNames = {"CPU", "GPU"};
constexpr std::array<std::string_view, 4> kVendorClassNames = {"INTEL_CPU", "AMD_GPU",
                                                               "NVIDIA_GPU", "OTHER"};
constexpr std::array<std::string_view, 3> kElementTypeNames = {"INT32", "FLOAT32", "FLOAT64"};
constexpr std::array<std::string_view, kInstrCategoryCount> kInstrCategoryNames = {
    "load", "store", "int_arith", "float_arith", "branch", "vector", "call", "other"};

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

std::string_view to_string(DeviceType t) { return kDeviceTypeNames[static_cast<int>(t)]; }
std::string_view to_string(VendorClass v) { return kVendorClassNames[static_cast<int>(v)]; }
std::string_view to_string(ElementType t) { return kElementTypeNames[static_cast<int>(t)]; }
std::string_view to_string(InstrCategory c) { return kInstrCategoryNames[static_cast<int>(c)]; }

DeviceType device_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kDeviceTypeNames.size(); ++i) {
    if (s == kDeviceTypeNames[i]) return static_cast<DeviceType>(i);
  }
  throw ParseError("unknown device type '" + std::string(s) + "'");
}

VendorClass vendor_class_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kVendorClassNames.size(); ++i) {
    if (s == kVendorClassNames[i]) return static_cast<VendorClass>(i);
  }
  throw ParseError("unknown vendor class '" + std::string(s) + "'");
}

ElementType element_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kElementTypeNames.size(); ++i) {
    if (s == kElementTypeNames[i]) return static_cast<ElementType>(i);
  }
  throw ParseError("unknown element type '" + std::string(s) + "'");
}

InstrCategory instr_category_from_string(std::string_view s) {
  for (int i = 0; i < kInstrCategoryCount; ++i) {
    if (s == kInstrCategoryNames[i]) return static_cast<InstrCategory>(i);
  }
  throw ParseError("unknown instruction category '" + std::string(s) + "'");
}

int element_size_bytes(ElementType t) {
  switch (t) {
    case ElementType::INT32: return 4;
    case ElementType::FLOAT32: return 4;
    case ElementType::FLOAT64: return 8;
  }
  throw InvalidArgument("bad element type");
}

void DeviceDescriptor::validate() const {
  if (id.empty() || id.find_first_of("/,\n") != std::string::npos) {
    throw InvalidDescriptor("device id must be non-empty and free of '/', ',': '" + id + "'");
  }
  if (compute_units < 1 || frequency_mhz < 1 || local_mem_kb < 1 || global_mem_mb < 1 ||
      global_cache_kb < 0) {
    throw InvalidDescriptor("device '" + id + "' has a non-positive hardware field");
  }
  if (!is_power_of_two(device_max_wgsize) || device_max_wgsize < 64) {
    throw InvalidDescriptor("device '" + id + "' max workgroup size must be a power of two >= 64, got " +
                            std::to_string(device_max_wgsize));
  }
  if (simd_width != 8 && simd_width != 16 && simd_width != 32 && simd_width != 64) {
    throw InvalidDescriptor("device '" + id + "' simd width must be one of 8/16/32/64, got " +
                            std::to_string(simd_width));
  }
  bool cpu_class = vendor_class == VendorClass::INTEL_CPU;
  if (cpu_class && device_type != DeviceType::CPU) {
    throw InvalidDescriptor("device '" + id + "' vendor class INTEL_CPU requires device type CPU");
  }
}

void KernelDescriptor::validate() const {
  if (name.empty() || name.find_first_of("/,\n") != std::string::npos) {
    throw InvalidDescriptor("kernel name must be non-empty and free of '/', ',': '" + name + "'");
  }
  for (int b : {north, south, east, west}) {
    if (b < 0 || b > 64) {
      throw InvalidDescriptor("kernel '" + name + "' border values must be in [0, 64]");
    }
  }
  if (total_instructions < 1) {
    throw InvalidDescriptor("kernel '" + name + "' must have a positive instruction count");
  }
  int sum = 0;
  for (int c : instr_counts) {
    if (c < 0) {
      throw InvalidDescriptor("kernel '" + name + "' has a negative instruction count");
    }
    sum += c;
  }
  if (sum != total_instructions) {
    throw InvalidDescriptor("kernel '" + name + "' instruction counts sum to " +
                            std::to_string(sum) + ", expected " +
                            std::to_string(total_instructions));
  }
}

void DatasetDescriptor::validate() const {
  if (width < 1 || height < 1) {
    throw InvalidDescriptor("dataset dimensions must be >= 1, got " + std::to_string(width) +
                            "x" + std::to_string(height));
  }
}

std::string scenario_id(const DeviceDescriptor& device, const KernelDescriptor& kernel,
                        const DatasetDescriptor& dataset) {
  std::string id = device.id;
  id += '/';
  id += kernel.name;
  id += '/';
  id += std::to_string(dataset.width);
  id += 'x';
  id += std::to_string(dataset.height);
  id += '/';
  id += to_string(dataset.in_type);
  id += '-';
  id += to_string(dataset.out_type);
  return id;
}

Scenario make_scenario(const DeviceDescriptor& device, const KernelDescriptor& kernel,
                       const DatasetDescriptor& dataset) {
  device.validate();
  kernel.validate();
  dataset.validate();
  return Scenario{device, kernel, dataset, scenario_id(device, kernel, dataset)};
}

}  // namespace wgtune
