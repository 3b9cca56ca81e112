#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wgtune/scenario.hpp"
#include "wgtune/space.hpp"

namespace wgtune {

using RefusedRecord = std::map<std::string, std::set<WorkgroupSize>>;

// Samples CSV: header "scenario_id,w_c,w_r,runtime_ms", one line per
// individual runtime observation, rows grouped on load. Runtimes are written
// in shortest round-trip decimal form, so save/load is lossless and reruns
// are byte-identical. A (scenario, size) group that reappears after closing
// is a duplicate.
void save_samples(const SampleTable& table, const std::filesystem::path& path);
SampleTable load_samples(const std::filesystem::path& path);

std::string samples_to_csv(const SampleTable& table);
SampleTable samples_from_csv(const std::string& text);

// Refused-set CSV: header "scenario_id,w_c,w_r".
void save_refused(const RefusedRecord& refused, const std::filesystem::path& path);
RefusedRecord load_refused(const std::filesystem::path& path);

// Descriptor JSON schema, shared by the files on disk and the daemon wire
// format.
nlohmann::json device_to_json(const DeviceDescriptor& d);
nlohmann::json kernel_to_json(const KernelDescriptor& k);
nlohmann::json dataset_to_json(const DatasetDescriptor& d);
DeviceDescriptor device_from_json(const nlohmann::json& j);
KernelDescriptor kernel_from_json(const nlohmann::json& j);
DatasetDescriptor dataset_from_json(const nlohmann::json& j);

struct DescriptorSet {
  std::vector<DeviceDescriptor> devices;
  std::vector<KernelDescriptor> kernels;
  std::vector<DatasetDescriptor> datasets;
};

// One JSON document per descriptor, under <dir>/devices, <dir>/kernels and
// <dir>/datasets.
void save_descriptors(const DescriptorSet& set, const std::filesystem::path& dir);
DescriptorSet load_descriptors(const std::filesystem::path& dir);

std::filesystem::path save_device(const DeviceDescriptor& d, const std::filesystem::path& dir);
std::filesystem::path save_kernel(const KernelDescriptor& k, const std::filesystem::path& dir);
std::filesystem::path save_dataset(const DatasetDescriptor& d, const std::filesystem::path& dir);

// Every scenario formed by crossing the descriptor set, ordered by id.
std::vector<Scenario> cross_scenarios(const DescriptorSet& set);

// Ingests externally measured runtimes (same CSV columns as save_samples,
// arbitrary line order; repeated (scenario, size) lines merge into one row).
// Scenario ids must match a combination of the registered descriptors.
SampleTable import_external(const std::filesystem::path& csv_path,
                            const std::filesystem::path& descriptor_dir);

}  // namespace wgtune
