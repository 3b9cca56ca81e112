#include "wgtune/synthgen.hpp"

#include <array>
#include <string>

#include "wgtune/errors.hpp"
#include "wgtune/rng.hpp"

namespace wgtune {

namespace {

// Category weights for the synthetic instruction split. Compute-intensive
// kernels lean on float arithmetic and loads; lightweight ones on plain
// memory traffic.
constexpr std::array<double, kInstrCategoryCount> kLightweightWeights = {
    0.30, 0.15, 0.15, 0.10, 0.10, 0.05, 0.05, 0.10};
constexpr std::array<double, kInstrCategoryCount> kComputeWeights = {
    0.25, 0.08, 0.12, 0.30, 0.08, 0.07, 0.04, 0.06};

InstrCounts draw_split(Rng& rng, int total, const std::array<double, kInstrCategoryCount>& w) {
  std::array<double, kInstrCategoryCount> cumulative{};
  double sum = 0.0;
  for (int i = 0; i < kInstrCategoryCount; ++i) {
    sum += w[static_cast<std::size_t>(i)];
    cumulative[static_cast<std::size_t>(i)] = sum;
  }
  InstrCounts counts{};
  for (int n = 0; n < total; ++n) {
    double u = rng.uniform01() * sum;
    int cat = 0;
    while (cat < kInstrCategoryCount - 1 && u >= cumulative[static_cast<std::size_t>(cat)]) {
      ++cat;
    }
    ++counts[static_cast<std::size_t>(cat)];
  }
  return counts;
}

KernelDescriptor fixture_kernel(std::string name, int n, int s, int e, int w, InstrCounts counts,
                                int total, bool complexity) {
  KernelDescriptor k;
  k.name = std::move(name);
  k.north = n;
  k.south = s;
  k.east = e;
  k.west = w;
  k.instr_counts = counts;
  k.total_instructions = total;
  k.complexity = complexity;
  k.validate();
  return k;
}

}  // namespace

std::vector<KernelDescriptor> generate_kernels(int n, std::uint64_t seed) {
  if (n < 1) {
    throw InvalidArgument("kernel count must be >= 1, got " + std::to_string(n));
  }
  Rng rng(fnv1a64_mix(fnv1a64("synthgen"), seed));
  std::vector<KernelDescriptor> kernels;
  kernels.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    KernelDescriptor kd;
    kd.name = "synthetic-" + std::to_string(seed) + "-" + std::to_string(k);
    kd.complexity = rng.coin();
    kd.north = static_cast<int>(rng.range(1, 30));
    kd.south = static_cast<int>(rng.range(1, 30));
    kd.east = static_cast<int>(rng.range(1, 30));
    kd.west = static_cast<int>(rng.range(1, 30));
    kd.total_instructions =
        static_cast<int>(kd.complexity ? rng.range(592, 706) : rng.range(67, 137));
    kd.instr_counts = draw_split(rng, kd.total_instructions,
                                 kd.complexity ? kComputeWeights : kLightweightWeights);
    kd.validate();
    kernels.push_back(std::move(kd));
  }
  return kernels;
}

std::vector<KernelDescriptor> reference_kernels(int gaussian_border) {
  if (gaussian_border < 1 || gaussian_border > 10) {
    throw InvalidArgument("gaussian border must be in [1, 10], got " +
                          std::to_string(gaussian_border));
  }
  int g = gaussian_border;
  return {
      fixture_kernel("gaussian", g, g, g, g, {20, 8, 12, 24, 6, 0, 4, 8}, 82, false),
      fixture_kernel("gol", 1, 1, 1, 1, {52, 20, 48, 0, 40, 0, 10, 20}, 190, false),
      fixture_kernel("he", 1, 1, 1, 1, {28, 10, 16, 38, 8, 0, 5, 8}, 113, true),
      fixture_kernel("nms", 1, 1, 1, 1, {60, 18, 38, 52, 32, 0, 8, 16}, 224, false),
      fixture_kernel("sobel", 1, 1, 1, 1, {64, 20, 40, 74, 18, 0, 10, 20}, 246, false),
      fixture_kernel("threshold", 0, 0, 0, 0, {12, 6, 10, 4, 8, 0, 2, 4}, 46, false),
  };
}

std::vector<DatasetDescriptor> generate_datasets() {
  std::vector<DatasetDescriptor> out;
  for (int size : {512, 1024, 2048, 4096}) {
    for (ElementType t : {ElementType::INT32, ElementType::FLOAT32, ElementType::FLOAT64}) {
      DatasetDescriptor d;
      d.width = size;
      d.height = size;
      d.in_type = t;
      d.out_type = t;
      out.push_back(d);
    }
  }
  return out;
}

std::vector<DeviceDescriptor> reference_devices() {
  auto dev = [](const char* id, DeviceType t, VendorClass v, int cu, int mhz, int local_kb,
                int cache_kb, int mem_mb, int max_wg, int simd) {
    DeviceDescriptor d;
    d.id = id;
    d.device_type = t;
    d.vendor_class = v;
    d.compute_units = cu;
    d.frequency_mhz = mhz;
    d.local_mem_kb = local_kb;
    d.global_cache_kb = cache_kb;
    d.global_mem_mb = mem_mb;
    d.device_max_wgsize = max_wg;
    d.simd_width = simd;
    d.validate();
    return d;
  };
  return {
      dev("i5-2430M", DeviceType::CPU, VendorClass::INTEL_CPU, 4, 2400, 32, 256, 7937, 512, 8),
      dev("i5-4570", DeviceType::CPU, VendorClass::INTEL_CPU, 4, 3200, 32, 256, 7901, 512, 8),
      dev("i7-3820", DeviceType::CPU, VendorClass::INTEL_CPU, 8, 1200, 32, 256, 7944, 512, 16),
      dev("tahiti-7970", DeviceType::GPU, VendorClass::AMD_GPU, 32, 1000, 32, 16, 2959, 256, 64),
      dev("gtx-590", DeviceType::GPU, VendorClass::NVIDIA_GPU, 1, 1215, 48, 256, 1536, 512, 32),
      dev("gtx-690", DeviceType::GPU, VendorClass::NVIDIA_GPU, 8, 1019, 48, 128, 2048, 512, 32),
      dev("gtx-titan", DeviceType::GPU, VendorClass::NVIDIA_GPU, 14, 980, 48, 224, 6144, 1024, 32),
  };
}

std::vector<Scenario> standard_scenarios(std::uint64_t seed) {
  auto devices = reference_devices();
  auto datasets = generate_datasets();
  auto synthetic = generate_kernels(40, seed);
  auto real = reference_kernels();

  std::vector<Scenario> out;
  out.reserve(50);
  for (int i = 0; i < 40; ++i) {
    const auto& dev = devices[static_cast<std::size_t>(i % 7)];
    const auto& ds = datasets[static_cast<std::size_t>((i * 5 + 3) % 12)];
    out.push_back(make_scenario(dev, synthetic[static_cast<std::size_t>(i)], ds));
  }
  for (int j = 0; j < 10; ++j) {
    const auto& dev = devices[static_cast<std::size_t>((j * 3 + 1) % 7)];
    const auto& ds = datasets[static_cast<std::size_t>((j * 7 + 2) % 12)];
    out.push_back(make_scenario(dev, real[static_cast<std::size_t>(j % 6)], ds));
  }
  return out;
}

}  // namespace wgtune
