#pragma once

#include <cstdint>
#include <vector>

#include "wgtune/scenario.hpp"

namespace wgtune {

// Draws n synthetic stencil kernel descriptors, deterministically for a fixed
// (n, seed). Borders are uniform on [1, 30] per direction; lightweight
// kernels carry 67-137 static instructions, compute-intensive ones 592-706,
// with the per-category split drawn from a weighting matching each class.
// Names are "synthetic-<seed>-<k>".
std::vector<KernelDescriptor> generate_kernels(int n, std::uint64_t seed);

// The six real-world stencil kernels with their border sizes and static
// instruction totals. The per-category split is a fixture; the gaussian
// border is configurable in [1, 10].
std::vector<KernelDescriptor> reference_kernels(int gaussian_border = 5);

// The 512/1024/2048/4096 square datasets crossed with the three same-type
// element pairs; 12 descriptors.
std::vector<DatasetDescriptor> generate_datasets();

// Seven devices modelled on a mixed CPU / multi-GPU experimental rig: three
// Intel CPUs, one AMD GPU, three generations of Nvidia GPU.
std::vector<DeviceDescriptor> reference_devices();

// The standard mixed fixture: 40 synthetic-kernel scenarios plus 10
// real-kernel scenarios spread over all seven devices and the dataset grid.
// Synthetic scenarios come first.
std::vector<Scenario> standard_scenarios(std::uint64_t seed);

}  // namespace wgtune
