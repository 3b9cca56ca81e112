#include <doctest.h>

#include <numeric>
#include <set>

#include "wgtune/errors.hpp"
#include "wgtune/synthgen.hpp"

using namespace wgtune;

TEST_CASE("generate_kernels is deterministic") {
  auto a = generate_kernels(5, 42);
  auto b = generate_kernels(5, 42);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].instr_counts == b[i].instr_counts);
    CHECK(a[i].total_instructions == b[i].total_instructions);
    CHECK(a[i].complexity == b[i].complexity);
  }
  CHECK(a[0].name == "synthetic-42-0");
  CHECK_THROWS_AS(generate_kernels(0, 1), InvalidArgument);
}

TEST_CASE("synthetic parameter ranges match the table bounds") {
  auto kernels = generate_kernels(1000, 7);
  bool saw_light = false;
  bool saw_heavy = false;
  for (const auto& k : kernels) {
    for (int b : {k.north, k.south, k.east, k.west}) {
      CHECK(b >= 1);
      CHECK(b <= 30);
    }
    if (k.complexity) {
      saw_heavy = true;
      CHECK(k.total_instructions >= 592);
      CHECK(k.total_instructions <= 706);
    } else {
      saw_light = true;
      CHECK(k.total_instructions >= 67);
      CHECK(k.total_instructions <= 137);
    }
    int sum = std::accumulate(k.instr_counts.begin(), k.instr_counts.end(), 0);
    CHECK(sum == k.total_instructions);
  }
  CHECK(saw_light);
  CHECK(saw_heavy);
}

TEST_CASE("distinct seeds give distinct kernel name sets") {
  auto a = generate_kernels(4, 1);
  auto b = generate_kernels(4, 2);
  std::set<std::string> names_a, names_b;
  for (const auto& k : a) names_a.insert(k.name);
  for (const auto& k : b) names_b.insert(k.name);
  CHECK(names_a != names_b);
}

TEST_CASE("reference kernels") {
  auto kernels = reference_kernels();
  REQUIRE(kernels.size() == 6);

  auto find = [&](const std::string& name) -> const KernelDescriptor& {
    for (const auto& k : kernels) {
      if (k.name == name) return k;
    }
    REQUIRE(false);
    return kernels.front();
  };

  const auto& gol = find("gol");
  CHECK(gol.north == 1);
  CHECK(gol.south == 1);
  CHECK(gol.east == 1);
  CHECK(gol.west == 1);
  CHECK(gol.total_instructions == 190);

  const auto& threshold = find("threshold");
  CHECK(threshold.north == 0);
  CHECK(threshold.south == 0);
  CHECK(threshold.east == 0);
  CHECK(threshold.west == 0);
  CHECK(threshold.total_instructions == 46);

  CHECK(find("gaussian").total_instructions == 82);
  CHECK(find("gaussian").north == 5);  // default border
  CHECK(find("he").total_instructions == 113);
  CHECK(find("nms").total_instructions == 224);
  CHECK(find("sobel").total_instructions == 246);

  auto wide = reference_kernels(10);
  CHECK(wide[0].north == 10);
  CHECK_THROWS_AS(reference_kernels(0), InvalidArgument);
  CHECK_THROWS_AS(reference_kernels(11), InvalidArgument);
}

TEST_CASE("generate_datasets") {
  auto datasets = generate_datasets();
  CHECK(datasets.size() == 12);
  bool has_512_f32 = false;
  for (const auto& d : datasets) {
    CHECK(d.width == d.height);
    if (d.width == 512 && d.in_type == ElementType::FLOAT32 &&
        d.out_type == ElementType::FLOAT32) {
      has_512_f32 = true;
    }
  }
  CHECK(has_512_f32);
}

TEST_CASE("reference devices") {
  auto devices = reference_devices();
  REQUIRE(devices.size() == 7);
  int amd = 0, cpus = 0, nvidia = 0;
  for (const auto& d : devices) {
    d.validate();
    if (d.vendor_class == VendorClass::AMD_GPU) ++amd;
    if (d.vendor_class == VendorClass::INTEL_CPU) ++cpus;
    if (d.vendor_class == VendorClass::NVIDIA_GPU) ++nvidia;
  }
  CHECK(amd == 1);
  CHECK(cpus == 3);
  CHECK(nvidia == 3);
}

TEST_CASE("standard scenario fixture") {
  auto scenarios = standard_scenarios(17);
  REQUIRE(scenarios.size() == 50);
  std::set<std::string> ids;
  std::set<std::string> devices;
  int synthetic = 0;
  for (const auto& s : scenarios) {
    ids.insert(s.id);
    devices.insert(s.device.id);
    if (s.kernel.name.rfind("synthetic-", 0) == 0) ++synthetic;
  }
  CHECK(ids.size() == 50);   // no duplicate scenarios
  CHECK(devices.size() == 7);  // every device participates
  CHECK(synthetic == 40);
}
