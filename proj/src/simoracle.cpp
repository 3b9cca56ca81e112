#include "wgtune/simoracle.hpp"

#include <algorithm>
#include <cmath>

#include "wgtune/errors.hpp"
#include "wgtune/rng.hpp"

namespace wgtune {

namespace {

// Refusal base rates per device class; multiples of eight divide theirs by 4.
constexpr double kRefuseRateIntelCpu = 0.10;
constexpr double kRefuseRateNvidia = 0.04;
constexpr double kRefuseRateOther = 0.02;

// Tail/imbalance cost of running few workgroups: the last wave dominates.
constexpr double kSchedTail = 64.0;

long long tile_elements(const KernelDescriptor& k, WorkgroupSize w) {
  return static_cast<long long>(w.cols() + k.east + k.west) *
         static_cast<long long>(w.rows() + k.north + k.south);
}

long long tile_bytes(const KernelDescriptor& k, WorkgroupSize w, int elem_bytes) {
  return tile_elements(k, w) * elem_bytes;
}

double refusal_rate(VendorClass vendor, WorkgroupSize w) {
  double rate = 0.0;
  switch (vendor) {
    case VendorClass::AMD_GPU: return 0.0;
    case VendorClass::INTEL_CPU: rate = kRefuseRateIntelCpu; break;
    case VendorClass::NVIDIA_GPU: rate = kRefuseRateNvidia; break;
    case VendorClass::OTHER: rate = kRefuseRateOther; break;
  }
  if (w.cols() % 8 == 0 && w.rows() % 8 == 0) rate /= 4.0;
  return rate;
}

// Stable unit-interval hash of the test-case identity. Independent of the run
// seed so that refused sets are a fixed property of the scenario.
double refusal_draw(const DeviceDescriptor& device, const KernelDescriptor& kernel,
                    WorkgroupSize w) {
  std::uint64_t h = fnv1a64("refuse");
  h = fnv1a64(device.id, h);
  h = fnv1a64(kernel.name, h);
  h = fnv1a64_mix(h, static_cast<std::uint64_t>(w.cols()));
  h = fnv1a64_mix(h, static_cast<std::uint64_t>(w.rows()));
  return (h >> 11) * 0x1.0p-53;
}

int effective_max(const Scenario& s, const OracleConfig& cfg) {
  int m = std::min(s.device.device_max_wgsize, kernel_max_wgsize(s.device, s.kernel));
  if (cfg.max_wgsize_cap > 0) m = std::min(m, cfg.max_wgsize_cap);
  return m;
}

}  // namespace

int kernel_max_wgsize(const DeviceDescriptor& device, const KernelDescriptor& kernel) {
  int max = device.device_max_wgsize;
  if (kernel.total_instructions > 400 && max > 64) max /= 2;
  // Local-memory check at the widest flat shape the device allows, assuming
  // single-precision elements (the dataset is unknown at compile time).
  long long flat_tile = tile_bytes(kernel, WorkgroupSize(device.device_max_wgsize, 1), 4);
  if (flat_tile > static_cast<long long>(device.local_mem_kb) * 1024 && max > 64) max /= 2;
  return max;
}

bool is_refused(const DeviceDescriptor& device, const KernelDescriptor& kernel, WorkgroupSize w,
                int out_elem_bytes) {
  if (device.vendor_class == VendorClass::AMD_GPU) return false;
  if (tile_bytes(kernel, w, out_elem_bytes) >
      static_cast<long long>(device.local_mem_kb) * 1024) {
    return true;
  }
  return refusal_draw(device, kernel, w) < refusal_rate(device.vendor_class, w);
}

ConstraintContext scenario_context(const Scenario& s, const OracleConfig& cfg,
                                   std::set<WorkgroupSize> refused) {
  int device_max = s.device.device_max_wgsize;
  if (cfg.max_wgsize_cap > 0) device_max = std::min(device_max, cfg.max_wgsize_cap);
  return ConstraintContext(device_max, kernel_max_wgsize(s.device, s.kernel),
                           std::move(refused));
}

double model_runtime_ms(const Scenario& s, WorkgroupSize w) {
  const auto& dev = s.device;
  const auto& k = s.kernel;
  const auto& ds = s.dataset;

  double area = static_cast<double>(w.area());
  double work = static_cast<double>(ds.element_count()) * k.total_instructions;
  double base = work / (static_cast<double>(dev.compute_units) * dev.frequency_mhz * 1000.0);

  // SIMD alignment: partially filled vectors waste lanes. This is the one
  // stepped factor in the model.
  double lanes = static_cast<double>(dev.simd_width);
  double simd_f = std::ceil(area / lanes) * lanes / area;

  // Redundant border loads: each workgroup stages the tile covering its
  // elements plus the border region.
  double tile_f = static_cast<double>(tile_elements(k, w)) / area;

  // Few workgroups leave the device exposed to the slowest wave.
  double wg_cols = std::ceil(static_cast<double>(ds.width) / w.cols());
  double wg_rows = std::ceil(static_cast<double>(ds.height) / w.rows());
  double n_wg = wg_cols * wg_rows;
  double sched_f = 1.0 + kSchedTail / n_wg;

  // Contended local memory above half capacity.
  double pressure = static_cast<double>(tile_bytes(k, w, element_size_bytes(ds.out_type))) /
                    (static_cast<double>(dev.local_mem_kb) * 1024.0);
  double lmem_f = 1.0 + std::max(0.0, pressure - 0.5);

  return base * simd_f * tile_f * sched_f * lmem_f;
}

std::vector<double> run(const Scenario& s, WorkgroupSize w, const OracleConfig& cfg) {
  int eff_max = effective_max(s, cfg);
  if (w.area() > eff_max) {
    throw IllegalWorkgroupSize("size " + w.str() + " exceeds the effective maximum " +
                               std::to_string(eff_max) + " for " + s.id);
  }
  if (is_refused(s.device, s.kernel, w, element_size_bytes(s.dataset.out_type))) {
    throw RefusedParameter("size " + w.str() + " refused for " + s.id, w.cols(), w.rows());
  }
  double base = model_runtime_ms(s, w);
  std::vector<double> samples(static_cast<std::size_t>(cfg.min_samples), base);
  if (cfg.noise_sigma > 0.0) {
    std::uint64_t stream = fnv1a64_mix(fnv1a64(s.id, fnv1a64("run")), cfg.seed);
    stream = fnv1a64_mix(stream, static_cast<std::uint64_t>(w.cols()));
    stream = fnv1a64_mix(stream, static_cast<std::uint64_t>(w.rows()));
    Rng rng(stream);
    for (auto& t : samples) t = base * std::exp(cfg.noise_sigma * rng.normal());
  }
  return samples;
}

CollectResult collect(const std::vector<Scenario>& scenarios, const OracleConfig& cfg) {
  if (scenarios.empty()) {
    throw InvalidArgument("collect requires at least one scenario");
  }
  CollectResult result;
  for (const auto& s : scenarios) {
    auto& refused = result.refused[s.id];
    int out_bytes = element_size_bytes(s.dataset.out_type);
    for (const auto& w : enumerate_space(effective_max(s, cfg))) {
      if (is_refused(s.device, s.kernel, w, out_bytes)) {
        refused.insert(w);
      } else {
        result.table.add_row(s.id, w, run(s, w, cfg));
      }
    }
    result.contexts.emplace(s.id, scenario_context(s, cfg, refused));
  }
  return result;
}

}  // namespace wgtune
