#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wgtune/scenario.hpp"
#include "wgtune/space.hpp"

namespace wgtune {

// Configuration for the simulated runtime oracle.
struct OracleConfig {
  double noise_sigma = 0.05;  // lognormal multiplicative noise; 0 = exact reruns
  std::uint64_t seed = 0;
  int min_samples = 30;     // runtimes recorded per test case
  int max_wgsize_cap = 0;   // optional cap on the effective max (0 = none)
};

// Per-kernel maximum workgroup size on a device: the device maximum, halved
// once for instruction-heavy kernels and once more when the widest flat tile
// would overflow local memory, floored at 64. Mirrors the value an OpenCL
// runtime reports after compiling a kernel for a device.
int kernel_max_wgsize(const DeviceDescriptor& device, const KernelDescriptor& kernel);

// Deterministic refusal decision for a size within the legal bound. AMD-class
// devices never refuse; CPU-class devices refuse most often; sizes with both
// dimensions a multiple of eight are refused four times less often. A size
// whose tile cannot fit in local memory is always refused (except on AMD).
// The decision hashes only (device id, kernel name, w), so the refused set is
// stable across runs and seeds.
bool is_refused(const DeviceDescriptor& device, const KernelDescriptor& kernel, WorkgroupSize w,
                int out_elem_bytes = 4);

// The constraint context the simulator enforces for a scenario, with the
// given known-refused set.
ConstraintContext scenario_context(const Scenario& s, const OracleConfig& cfg,
                                   std::set<WorkgroupSize> refused = {});

// Simulated execution: cfg.min_samples runtimes in milliseconds. Throws
// IllegalWorkgroupSize when w exceeds the effective maximum and
// RefusedParameter when the runtime refuses it.
std::vector<double> run(const Scenario& s, WorkgroupSize w, const OracleConfig& cfg);

// Noise-free base runtime of the performance model (exposed for tests).
double model_runtime_ms(const Scenario& s, WorkgroupSize w);

struct CollectResult {
  SampleTable table;
  std::map<std::string, std::set<WorkgroupSize>> refused;      // per scenario
  std::map<std::string, ConstraintContext> contexts;           // per scenario, incl. refused
};

// Exhaustive enumeration of every scenario's legal space: runs each legal
// size cfg.min_samples times, records refused sizes instead of raising.
CollectResult collect(const std::vector<Scenario>& scenarios, const OracleConfig& cfg);

}  // namespace wgtune
