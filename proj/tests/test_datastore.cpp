#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "wgtune/datastore.hpp"
#include "wgtune/errors.hpp"
#include "wgtune/rng.hpp"
#include "wgtune/synthgen.hpp"

using namespace wgtune;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("wgtune-test-" + std::to_string(Rng(std::random_device{}()).next()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SampleTable random_table(Rng& rng, int scenarios, int sizes_per_scenario) {
  SampleTable table;
  auto space = enumerate_space(512);
  for (int s = 0; s < scenarios; ++s) {
    std::string id = "dev-" + std::to_string(s) + "/k/512x512/INT32-INT32";
    std::set<WorkgroupSize> used;
    while (static_cast<int>(used.size()) < sizes_per_scenario) {
      used.insert(space[static_cast<std::size_t>(rng.bounded(space.size()))]);
    }
    for (const auto& w : used) {
      std::vector<double> runtimes;
      int n = static_cast<int>(rng.range(1, 4));
      for (int i = 0; i < n; ++i) {
        // full-precision doubles, the awkward kind
        runtimes.push_back(std::ldexp(1.0 + rng.uniform01(), static_cast<int>(rng.range(-6, 9))));
      }
      table.add_row(id, w, runtimes);
    }
  }
  return table;
}

}  // namespace

TEST_CASE("samples CSV round trip") {
  Rng rng(5);
  SampleTable table = random_table(rng, 3, 5);
  std::string csv = samples_to_csv(table);
  SampleTable loaded = samples_from_csv(csv);
  CHECK(loaded == table);                    // lossless
  CHECK(samples_to_csv(loaded) == csv);      // byte-identical on re-save
}

TEST_CASE("samples CSV round trip survives 1000 random tables") {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    SampleTable table = random_table(rng, 1, 3);
    std::string csv = samples_to_csv(table);
    SampleTable loaded = samples_from_csv(csv);
    REQUIRE(loaded == table);
    REQUIRE(samples_to_csv(loaded) == csv);
  }
}

TEST_CASE("samples CSV edge cases") {
  CHECK(samples_from_csv("scenario_id,w_c,w_r,runtime_ms\n").empty());

  CHECK_THROWS_AS(samples_from_csv("wrong,header\n"), ParseError);
  CHECK_THROWS_AS(samples_from_csv(""), ParseError);
  CHECK_THROWS_AS(samples_from_csv("scenario_id,w_c,w_r,runtime_ms\ns,4,4,-1\n"), ParseError);
  CHECK_THROWS_AS(samples_from_csv("scenario_id,w_c,w_r,runtime_ms\ns,4,4,0\n"), ParseError);
  CHECK_THROWS_AS(samples_from_csv("scenario_id,w_c,w_r,runtime_ms\ns,4,4\n"), ParseError);
  CHECK_THROWS_AS(samples_from_csv("scenario_id,w_c,w_r,runtime_ms\ns,x,4,1\n"), ParseError);
  CHECK_THROWS_AS(samples_from_csv("scenario_id,w_c,w_r,runtime_ms\ns,0,4,1\n"), ParseError);

  // line numbers are reported
  try {
    samples_from_csv("scenario_id,w_c,w_r,runtime_ms\ns,4,4,1.5\ns,4,4,bad\n");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }

  // grouped lines merge; a group that reappears later is a duplicate
  SampleTable merged = samples_from_csv(
      "scenario_id,w_c,w_r,runtime_ms\ns,4,4,1\ns,4,4,2\ns,2,2,3\n");
  CHECK(merged.runtimes("s", WorkgroupSize(4, 4)) == std::vector<double>{1, 2});
  CHECK_THROWS_AS(
      samples_from_csv("scenario_id,w_c,w_r,runtime_ms\ns,4,4,1\ns,2,2,3\ns,4,4,2\n"),
      DuplicateTestCase);
}

TEST_CASE("samples file IO") {
  TempDir tmp;
  Rng rng(9);
  SampleTable table = random_table(rng, 2, 4);
  auto path = tmp.path / "samples.csv";
  save_samples(table, path);
  CHECK(load_samples(path) == table);
  CHECK_THROWS_AS(load_samples(tmp.path / "missing.csv"), IoError);
}

TEST_CASE("refused CSV round trip") {
  TempDir tmp;
  RefusedRecord refused;
  refused["a/k/512x512/INT32-INT32"] = {WorkgroupSize(2, 4), WorkgroupSize(16, 2)};
  refused["b/k/512x512/INT32-INT32"] = {WorkgroupSize(64, 2)};
  auto path = tmp.path / "refused.csv";
  save_refused(refused, path);
  CHECK(load_refused(path) == refused);
  CHECK_THROWS_AS(load_refused(tmp.path / "nope.csv"), IoError);
}

TEST_CASE("descriptor persistence") {
  TempDir tmp;
  DescriptorSet set;
  set.devices = reference_devices();
  set.kernels = reference_kernels();
  set.datasets = generate_datasets();
  save_descriptors(set, tmp.path);

  DescriptorSet loaded = load_descriptors(tmp.path);
  REQUIRE(loaded.devices.size() == set.devices.size());
  REQUIRE(loaded.kernels.size() == set.kernels.size());
  REQUIRE(loaded.datasets.size() == set.datasets.size());

  // file ordering is by name; compare as sets of ids
  std::set<std::string> ids_in, ids_out;
  for (const auto& d : set.devices) ids_in.insert(d.id);
  for (const auto& d : loaded.devices) ids_out.insert(d.id);
  CHECK(ids_in == ids_out);

  for (const auto& k : loaded.kernels) k.validate();
  for (const auto& d : loaded.datasets) d.validate();

  auto scenarios = cross_scenarios(loaded);
  CHECK(scenarios.size() == 7 * 6 * 12);
  CHECK(std::is_sorted(scenarios.begin(), scenarios.end(),
                       [](const Scenario& a, const Scenario& b) { return a.id < b.id; }));
}

TEST_CASE("descriptor JSON validation") {
  TempDir tmp;
  fs::create_directories(tmp.path / "devices");
  fs::create_directories(tmp.path / "kernels");
  fs::create_directories(tmp.path / "datasets");
  std::ofstream(tmp.path / "devices" / "bad.json") << "{\"id\": \"x\"}";
  CHECK_THROWS_AS(load_descriptors(tmp.path), ParseError);

  std::ofstream(tmp.path / "devices" / "bad.json") << "not json";
  CHECK_THROWS_AS(load_descriptors(tmp.path), ParseError);
}

TEST_CASE("import_external") {
  TempDir tmp;
  DescriptorSet set;
  set.devices = {reference_devices()[1]};    // i5-4570
  set.kernels = {reference_kernels()[1]};    // gol
  set.datasets = {generate_datasets()[3]};   // 1024x1024 INT32
  save_descriptors(set, tmp.path / "descriptors");

  std::string id = "i5-4570/gol/1024x1024/INT32-INT32";
  auto csv_path = tmp.path / "external.csv";

  SUBCASE("well-formed file ingests") {
    std::ofstream(csv_path) << "scenario_id,w_c,w_r,runtime_ms\n"
                            << id << ",4,4,10.5\n"
                            << id << ",8,8,9.25\n"
                            << id << ",32,5,12\n";  // odd sizes allowed in imports
    SampleTable table = import_external(csv_path, tmp.path / "descriptors");
    CHECK(table.row_count() == 3);
    CHECK(table.mean_runtime(id, WorkgroupSize(32, 5)) == 12.0);
  }

  SUBCASE("repeated lines merge regardless of position") {
    std::ofstream(csv_path) << "scenario_id,w_c,w_r,runtime_ms\n"
                            << id << ",4,4,10\n"
                            << id << ",8,8,9\n"
                            << id << ",4,4,11\n";
    SampleTable table = import_external(csv_path, tmp.path / "descriptors");
    CHECK(table.runtimes(id, WorkgroupSize(4, 4)) == std::vector<double>{10, 11});
  }

  SUBCASE("unknown scenario id") {
    std::ofstream(csv_path) << "scenario_id,w_c,w_r,runtime_ms\n"
                            << "ghost/gol/1024x1024/INT32-INT32,4,4,10\n";
    CHECK_THROWS_AS(import_external(csv_path, tmp.path / "descriptors"), UnknownScenario);
  }

  SUBCASE("non-positive runtime") {
    std::ofstream(csv_path) << "scenario_id,w_c,w_r,runtime_ms\n" << id << ",4,4,0\n";
    CHECK_THROWS_AS(import_external(csv_path, tmp.path / "descriptors"), ParseError);
  }
}
