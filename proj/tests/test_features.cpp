#include <doctest.h>

#include <cmath>

#include "wgtune/errors.hpp"
#include "wgtune/features.hpp"
#include "wgtune/synthgen.hpp"

using namespace wgtune;

namespace {

Scenario sample_scenario() {
  auto devices = reference_devices();
  auto kernels = reference_kernels();
  auto datasets = generate_datasets();
  return make_scenario(devices[1], kernels[1], datasets[3]);  // i5-4570 / gol / 1024^2 int
}

}  // namespace

TEST_CASE("schema shape") {
  CHECK(feature_names().size() == kFeatureCount);
  CHECK(kFeatureCount == 29);
  // order pinned: device block, kernel block, dataset block
  CHECK(feature_names()[0] == "compute_units");
  CHECK(feature_names()[10] == "border_north");
  CHECK(feature_names()[24] == "width");
  CHECK(feature_names()[28] == "element_count");
}

TEST_CASE("extract is deterministic") {
  FeatureVector a = extract(sample_scenario());
  FeatureVector b = extract(sample_scenario());
  CHECK(a == b);
}

TEST_CASE("extract values") {
  FeatureVector f = extract(sample_scenario());
  CHECK(f.at_name("compute_units") == 4.0);
  CHECK(f.at_name("frequency_mhz") == 3200.0);
  CHECK(f.at_name("is_cpu") == 1.0);
  CHECK(f.at_name("is_gpu") == 0.0);
  CHECK(f.at_name("vendor_class") == 0.0);  // INTEL_CPU ordinal
  CHECK(f.at_name("border_north") == 1.0);
  CHECK(f.at_name("total_instructions") == 190.0);
  CHECK(f.at_name("complexity") == 0.0);
  CHECK(f.at_name("width") == 1024.0);
  CHECK(f.at_name("element_count") == 1048576.0);
  CHECK(f.at_name("in_type_size") == 4.0);
  CHECK_THROWS_AS(f.at_name("bogus"), InvalidArgument);
}

TEST_CASE("density features") {
  // kernel with 100 instructions of which 20 are loads
  KernelDescriptor k;
  k.name = "dense";
  k.instr_counts = {20, 10, 30, 10, 10, 0, 10, 10};
  k.total_instructions = 100;
  auto devices = reference_devices();
  auto datasets = generate_datasets();
  FeatureVector f = extract(make_scenario(devices[0], k, datasets[0]));
  CHECK(f.at_name("density_load") == doctest::Approx(0.20));

  double sum = 0;
  for (const char* name : {"density_load", "density_store", "density_int_arith",
                           "density_float_arith", "density_branch", "density_vector",
                           "density_call", "density_other"}) {
    sum += f.at_name(name);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("densities function") {
  InstrCounts one{};
  one[0] = 1;
  auto d = densities(one, 1);
  CHECK(d[0] == 1.0);
  for (int i = 1; i < kInstrCategoryCount; ++i) CHECK(d[static_cast<std::size_t>(i)] == 0.0);

  InstrCounts equal;
  equal.fill(1);
  auto d8 = densities(equal, 8);
  for (double v : d8) CHECK(v == doctest::Approx(0.125));

  // the gol fixture split over its 190 total
  InstrCounts gol = {52, 20, 48, 0, 40, 0, 10, 20};
  auto dg = densities(gol, 190);
  double sum = 0;
  for (int i = 0; i < kInstrCategoryCount; ++i) {
    CHECK(dg[static_cast<std::size_t>(i)] ==
          doctest::Approx(gol[static_cast<std::size_t>(i)] / 190.0));
    sum += dg[static_cast<std::size_t>(i)];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(densities(gol, 0), InvalidArgument);
  CHECK_THROWS_AS(densities(gol, 189), InconsistentCounts);
}

TEST_CASE("no feature is NaN or infinite across the fixture scenarios") {
  for (const auto& s : standard_scenarios(99)) {
    FeatureVector f = extract(s);
    for (double v : f.values()) {
      CHECK(std::isfinite(v));
    }
    double sum = 0;
    for (int i = 15; i <= 22; ++i) sum += f[i];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}
