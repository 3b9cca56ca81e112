#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "wgtune/features.hpp"
#include "wgtune/learn.hpp"
#include "wgtune/space.hpp"

namespace wgtune {

// What the execution environment reports when a size is proposed. In tests
// and the evaluation harness this wraps recorded data; in serve mode it is
// the remote client's accept/refuse feedback.
enum class ProbeResult { Legal, Refused, Oversized };
using ProbeFn = std::function<ProbeResult(WorkgroupSize)>;

enum class FallbackKind { Baseline, Random, NearestNeighbour };
std::string_view to_string(FallbackKind k);
FallbackKind fallback_kind_from_string(std::string_view s);

// How an illegal classifier prediction is repaired. Strategies are explicit;
// Baseline carries the precomputed safe-size ranking, Random its draw seed.
struct FallbackStrategy {
  FallbackKind kind = FallbackKind::NearestNeighbour;
  std::vector<WorkgroupSize> baseline_ranking;  // best-first; Baseline only
  std::uint64_t seed = 0;                       // Random only

  static FallbackStrategy baseline(std::vector<WorkgroupSize> ranking);
  static FallbackStrategy random(std::uint64_t seed);
  static FallbackStrategy nearest_neighbour();
};

enum class FitnessMode { RuntimeReciprocal, Speedup };

// Maps a regressor output onto a maximisable score: the reciprocal of a
// predicted runtime, or a predicted speedup unchanged.
double fitness(FitnessMode mode, double x);

struct ClassifyOutcome {
  WorkgroupSize w;             // returned size, legal under the probe
  int fallback_iterations = 0; // fallback proposals probed (0 = prediction legal)
  WorkgroupSize initial;       // the raw classifier prediction
  ProbeResult initial_probe = ProbeResult::Legal;
};

// Classifier prediction with fallback repair. The returned size is legal
// under the probe; candidates for Random and NearestNeighbour come from the
// even grid under the effective maximum minus the context's known-refused
// set minus anything found refused during this episode.
ClassifyOutcome tune_classify(const Classifier& model, const FeatureVector& f,
                              const ConstraintContext& ctx, const FallbackStrategy& strategy,
                              const ProbeFn& probe);

struct RegressOutcome {
  WorkgroupSize w;
  int rejections = 0;  // candidates refused before the returned one
};

// Regression-driven selection: scores every candidate under the fitness
// function and probes them best-first, dropping refused candidates, so the
// loop self-corrects without fallback handlers.
RegressOutcome tune_regress(const Regressor& model, const FeatureVector& f,
                            const ConstraintContext& ctx, FitnessMode mode,
                            const ProbeFn& probe);

}  // namespace wgtune
