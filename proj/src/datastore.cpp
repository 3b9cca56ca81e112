#include "wgtune/datastore.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wgtune/errors.hpp"

namespace wgtune {

namespace {

using nlohmann::json;

constexpr std::string_view kSamplesHeader = "scenario_id,w_c,w_r,runtime_ms";
constexpr std::string_view kRefusedHeader = "scenario_id,w_c,w_r";

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

int parse_int_field(std::string_view text, std::size_t line_no, const char* what) {
  int value = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError(std::string("bad ") + what + " '" + std::string(text) + "'", line_no);
  }
  return value;
}

double parse_runtime_field(std::string_view text, std::size_t line_no) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError("bad runtime '" + std::string(text) + "'", line_no);
  }
  if (!(value > 0.0)) {
    throw ParseError("runtime must be positive, got '" + std::string(text) + "'", line_no);
  }
  return value;
}

// Walks a samples CSV body, invoking row(scenario_id, w, runtime, line_no)
// for each observation line.
template <typename RowFn>
void parse_samples_csv(const std::string& text, RowFn&& row) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != kSamplesHeader) {
        throw ParseError("expected header '" + std::string(kSamplesHeader) + "'", line_no);
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line_no);
    }
    if (fields[0].empty()) {
      throw ParseError("empty scenario id", line_no);
    }
    int w_c = parse_int_field(fields[1], line_no, "w_c");
    int w_r = parse_int_field(fields[2], line_no, "w_r");
    if (w_c < 1 || w_r < 1) {
      throw ParseError("workgroup size dimensions must be >= 1", line_no);
    }
    double runtime = parse_runtime_field(fields[3], line_no);
    row(std::string(fields[0]), WorkgroupSize(w_c, w_r), runtime, line_no);
  }
  if (!saw_header) {
    throw ParseError("missing header '" + std::string(kSamplesHeader) + "'", 1);
  }
}

std::string dataset_stem(const DatasetDescriptor& d) {
  return std::to_string(d.width) + "x" + std::to_string(d.height) + "-" +
         std::string(to_string(d.in_type)) + "-" + std::string(to_string(d.out_type));
}

json parse_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("bad JSON in " + path.string() + ": " + e.what());
  }
}

template <typename T, typename FromJson>
std::vector<T> load_descriptor_dir(const std::filesystem::path& dir, FromJson&& from_json) {
  std::vector<T> out;
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("missing descriptor directory " + dir.string());
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  out.reserve(paths.size());
  for (const auto& p : paths) {
    try {
      out.push_back(from_json(parse_json_file(p)));
    } catch (const json::exception& e) {
      throw ParseError("bad descriptor " + p.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

nlohmann::json device_to_json(const DeviceDescriptor& d) {
  return json{{"id", d.id},
              {"device_type", to_string(d.device_type)},
              {"vendor_class", to_string(d.vendor_class)},
              {"compute_units", d.compute_units},
              {"frequency_mhz", d.frequency_mhz},
              {"local_mem_kb", d.local_mem_kb},
              {"global_cache_kb", d.global_cache_kb},
              {"global_mem_mb", d.global_mem_mb},
              {"device_max_wgsize", d.device_max_wgsize},
              {"simd_width", d.simd_width}};
}

DeviceDescriptor device_from_json(const nlohmann::json& j) {
  DeviceDescriptor d;
  d.id = j.at("id").get<std::string>();
  d.device_type = device_type_from_string(j.at("device_type").get<std::string>());
  d.vendor_class = vendor_class_from_string(j.at("vendor_class").get<std::string>());
  d.compute_units = j.at("compute_units").get<int>();
  d.frequency_mhz = j.at("frequency_mhz").get<int>();
  d.local_mem_kb = j.at("local_mem_kb").get<int>();
  d.global_cache_kb = j.at("global_cache_kb").get<int>();
  d.global_mem_mb = j.at("global_mem_mb").get<int>();
  d.device_max_wgsize = j.at("device_max_wgsize").get<int>();
  d.simd_width = j.at("simd_width").get<int>();
  d.validate();
  return d;
}

nlohmann::json kernel_to_json(const KernelDescriptor& k) {
  json counts = json::object();
  for (int i = 0; i < kInstrCategoryCount; ++i) {
    counts[std::string(to_string(static_cast<InstrCategory>(i)))] =
        k.instr_counts[static_cast<std::size_t>(i)];
  }
  return json{{"name", k.name},       {"north", k.north},
              {"south", k.south},     {"east", k.east},
              {"west", k.west},       {"instr_counts", counts},
              {"total_instructions", k.total_instructions},
              {"complexity", k.complexity}};
}

KernelDescriptor kernel_from_json(const nlohmann::json& j) {
  KernelDescriptor k;
  k.name = j.at("name").get<std::string>();
  k.north = j.at("north").get<int>();
  k.south = j.at("south").get<int>();
  k.east = j.at("east").get<int>();
  k.west = j.at("west").get<int>();
  const auto& counts = j.at("instr_counts");
  for (int i = 0; i < kInstrCategoryCount; ++i) {
    k.instr_counts[static_cast<std::size_t>(i)] =
        counts.at(std::string(to_string(static_cast<InstrCategory>(i)))).get<int>();
  }
  k.total_instructions = j.at("total_instructions").get<int>();
  k.complexity = j.at("complexity").get<bool>();
  k.validate();
  return k;
}

nlohmann::json dataset_to_json(const DatasetDescriptor& d) {
  return json{{"width", d.width},
              {"height", d.height},
              {"in_type", to_string(d.in_type)},
              {"out_type", to_string(d.out_type)}};
}

DatasetDescriptor dataset_from_json(const nlohmann::json& j) {
  DatasetDescriptor d;
  d.width = j.at("width").get<int>();
  d.height = j.at("height").get<int>();
  d.in_type = element_type_from_string(j.at("in_type").get<std::string>());
  d.out_type = element_type_from_string(j.at("out_type").get<std::string>());
  d.validate();
  return d;
}


std::string samples_to_csv(const SampleTable& table) {
  std::string out(kSamplesHeader);
  out += '\n';
  for (const auto& [id, sizes] : table.rows()) {
    for (const auto& [w, runtimes] : sizes) {
      std::string prefix = id + ',' + std::to_string(w.cols()) + ',' +
                           std::to_string(w.rows()) + ',';
      for (double t : runtimes) {
        out += prefix;
        out += format_double(t);
        out += '\n';
      }
    }
  }
  return out;
}

SampleTable samples_from_csv(const std::string& text) {
  SampleTable table;
  std::pair<std::string, WorkgroupSize> current{"", WorkgroupSize()};
  std::set<std::pair<std::string, WorkgroupSize>> closed;
  bool have_current = false;
  parse_samples_csv(text, [&](std::string id, WorkgroupSize w, double runtime,
                              std::size_t line_no) {
    std::pair<std::string, WorkgroupSize> key{std::move(id), w};
    if (!have_current || key != current) {
      if (closed.count(key)) {
        throw DuplicateTestCase("duplicate test case " + key.first + " " + w.str() +
                                " (line " + std::to_string(line_no) + ")");
      }
      if (have_current) closed.insert(current);
      current = key;
      have_current = true;
    }
    table.add_runtime(key.first, w, runtime);
  });
  return table;
}

void save_samples(const SampleTable& table, const std::filesystem::path& path) {
  write_file(path, samples_to_csv(table));
}

SampleTable load_samples(const std::filesystem::path& path) {
  return samples_from_csv(read_file(path));
}

void save_refused(const RefusedRecord& refused, const std::filesystem::path& path) {
  std::string out(kRefusedHeader);
  out += '\n';
  for (const auto& [id, sizes] : refused) {
    for (const auto& w : sizes) {
      out += id + ',' + std::to_string(w.cols()) + ',' + std::to_string(w.rows()) + '\n';
    }
  }
  write_file(path, out);
}

RefusedRecord load_refused(const std::filesystem::path& path) {
  RefusedRecord refused;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != kRefusedHeader) {
        throw ParseError("expected header '" + std::string(kRefusedHeader) + "'", line_no);
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 3 || fields[0].empty()) {
      throw ParseError("expected 'scenario_id,w_c,w_r'", line_no);
    }
    int w_c = parse_int_field(fields[1], line_no, "w_c");
    int w_r = parse_int_field(fields[2], line_no, "w_r");
    if (w_c < 1 || w_r < 1) {
      throw ParseError("workgroup size dimensions must be >= 1", line_no);
    }
    refused[std::string(fields[0])].insert(WorkgroupSize(w_c, w_r));
  }
  if (!saw_header) {
    throw ParseError("missing header '" + std::string(kRefusedHeader) + "'", 1);
  }
  return refused;
}

std::filesystem::path save_device(const DeviceDescriptor& d, const std::filesystem::path& dir) {
  d.validate();
  auto path = dir / (d.id + ".json");
  write_file(path, device_to_json(d).dump(2) + "\n");
  return path;
}

std::filesystem::path save_kernel(const KernelDescriptor& k, const std::filesystem::path& dir) {
  k.validate();
  auto path = dir / (k.name + ".json");
  write_file(path, kernel_to_json(k).dump(2) + "\n");
  return path;
}

std::filesystem::path save_dataset(const DatasetDescriptor& d,
                                   const std::filesystem::path& dir) {
  d.validate();
  auto path = dir / (dataset_stem(d) + ".json");
  write_file(path, dataset_to_json(d).dump(2) + "\n");
  return path;
}

void save_descriptors(const DescriptorSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "devices");
  std::filesystem::create_directories(dir / "kernels");
  std::filesystem::create_directories(dir / "datasets");
  for (const auto& d : set.devices) save_device(d, dir / "devices");
  for (const auto& k : set.kernels) save_kernel(k, dir / "kernels");
  for (const auto& d : set.datasets) save_dataset(d, dir / "datasets");
}

DescriptorSet load_descriptors(const std::filesystem::path& dir) {
  DescriptorSet set;
  set.devices = load_descriptor_dir<DeviceDescriptor>(dir / "devices", device_from_json);
  set.kernels = load_descriptor_dir<KernelDescriptor>(dir / "kernels", kernel_from_json);
  set.datasets = load_descriptor_dir<DatasetDescriptor>(dir / "datasets", dataset_from_json);
  return set;
}

std::vector<Scenario> cross_scenarios(const DescriptorSet& set) {
  std::vector<Scenario> out;
  out.reserve(set.devices.size() * set.kernels.size() * set.datasets.size());
  for (const auto& dev : set.devices) {
    for (const auto& k : set.kernels) {
      for (const auto& ds : set.datasets) {
        out.push_back(make_scenario(dev, k, ds));
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  return out;
}

SampleTable import_external(const std::filesystem::path& csv_path,
                            const std::filesystem::path& descriptor_dir) {
  auto scenarios = cross_scenarios(load_descriptors(descriptor_dir));
  std::set<std::string> known;
  for (const auto& s : scenarios) known.insert(s.id);

  SampleTable table;
  parse_samples_csv(read_file(csv_path), [&](std::string id, WorkgroupSize w, double runtime,
                                             std::size_t line_no) {
    if (!known.count(id)) {
      throw UnknownScenario("scenario '" + id + "' does not match any registered descriptor "
                            "combination (line " + std::to_string(line_no) + ")");
    }
    table.add_runtime(id, w, runtime);
  });
  return table;
}

}  // namespace wgtune
