#include "wgtune/tuner.hpp"

#include <algorithm>
#include <set>

#include "wgtune/errors.hpp"
#include "wgtune/rng.hpp"

namespace wgtune {

std::string_view to_string(FallbackKind k) {
  switch (k) {
    case FallbackKind::Baseline: return "baseline";
    case FallbackKind::Random: return "random";
    case FallbackKind::NearestNeighbour: return "nn";
  }
  throw InvalidArgument("bad fallback kind");
}

FallbackKind fallback_kind_from_string(std::string_view s) {
  if (s == "baseline") return FallbackKind::Baseline;
  if (s == "random") return FallbackKind::Random;
  if (s == "nn") return FallbackKind::NearestNeighbour;
  throw InvalidArgument("unknown fallback '" + std::string(s) + "'");
}

FallbackStrategy FallbackStrategy::baseline(std::vector<WorkgroupSize> ranking) {
  FallbackStrategy s;
  s.kind = FallbackKind::Baseline;
  s.baseline_ranking = std::move(ranking);
  return s;
}

FallbackStrategy FallbackStrategy::random(std::uint64_t seed) {
  FallbackStrategy s;
  s.kind = FallbackKind::Random;
  s.seed = seed;
  return s;
}

FallbackStrategy FallbackStrategy::nearest_neighbour() {
  FallbackStrategy s;
  s.kind = FallbackKind::NearestNeighbour;
  return s;
}

double fitness(FitnessMode mode, double x) {
  if (mode == FitnessMode::RuntimeReciprocal) {
    if (!(x > 0.0)) {
      throw InvalidPrediction("predicted runtime must be positive, got " + std::to_string(x));
    }
    return 1.0 / x;
  }
  return x;
}

namespace {

// Candidates "expected from prior observations to be legal": the even grid
// under the effective maximum minus the known-refused set.
std::vector<WorkgroupSize> candidate_pool(const ConstraintContext& ctx) {
  std::vector<WorkgroupSize> pool;
  for (const auto& w : enumerate_space(ctx.effective_max())) {
    if (!ctx.refused().count(w)) pool.push_back(w);
  }
  return pool;
}

long long squared_distance(WorkgroupSize a, WorkgroupSize b) {
  long long dc = a.cols() - b.cols();
  long long dr = a.rows() - b.rows();
  return dc * dc + dr * dr;
}

}  // namespace

ClassifyOutcome tune_classify(const Classifier& model, const FeatureVector& f,
                              const ConstraintContext& ctx, const FallbackStrategy& strategy,
                              const ProbeFn& probe) {
  ClassifyOutcome outcome;
  outcome.initial = model.predict(f);
  if (outcome.initial.area() > ctx.effective_max()) {
    outcome.initial_probe = ProbeResult::Oversized;
  } else if (ctx.refused().count(outcome.initial)) {
    outcome.initial_probe = ProbeResult::Refused;
  } else {
    outcome.initial_probe = probe(outcome.initial);
  }
  if (outcome.initial_probe == ProbeResult::Legal) {
    outcome.w = outcome.initial;
    return outcome;
  }

  std::set<WorkgroupSize> episode_refused;
  if (outcome.initial_probe == ProbeResult::Refused) episode_refused.insert(outcome.initial);

  switch (strategy.kind) {
    case FallbackKind::Baseline: {
      // The ranked safe set, best geometric-mean performance first. The top
      // entry is the Baseline answer; later entries only matter if the probe
      // refuses it for this scenario.
      for (const auto& w : strategy.baseline_ranking) {
        if (w.area() > ctx.effective_max() || ctx.refused().count(w) ||
            episode_refused.count(w)) {
          continue;
        }
        ++outcome.fallback_iterations;
        if (probe(w) == ProbeResult::Legal) {
          outcome.w = w;
          return outcome;
        }
        episode_refused.insert(w);
      }
      throw NoLegalParameter("baseline fallback exhausted the safe ranking");
    }

    case FallbackKind::Random: {
      auto pool = candidate_pool(ctx);
      std::erase_if(pool, [&](WorkgroupSize w) { return episode_refused.count(w) > 0; });
      Rng rng(strategy.seed);
      while (!pool.empty()) {
        std::size_t pick = static_cast<std::size_t>(rng.bounded(pool.size()));
        WorkgroupSize w = pool[pick];
        ++outcome.fallback_iterations;
        if (probe(w) == ProbeResult::Legal) {
          outcome.w = w;
          return outcome;
        }
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      throw NoLegalParameter("random fallback exhausted the candidate pool");
    }

    case FallbackKind::NearestNeighbour: {
      auto pool = candidate_pool(ctx);
      std::erase_if(pool, [&](WorkgroupSize w) { return episode_refused.count(w) > 0; });
      WorkgroupSize target = outcome.initial;
      while (!pool.empty()) {
        // Pool is in enumeration (lexicographic) order, so keeping the first
        // strict minimum breaks distance ties toward the smallest size.
        std::size_t best = 0;
        long long best_d = squared_distance(pool[0], target);
        for (std::size_t i = 1; i < pool.size(); ++i) {
          long long d = squared_distance(pool[i], target);
          if (d < best_d) {
            best = i;
            best_d = d;
          }
        }
        WorkgroupSize w = pool[best];
        ++outcome.fallback_iterations;
        if (probe(w) == ProbeResult::Legal) {
          outcome.w = w;
          return outcome;
        }
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
        target = w;
      }
      throw NoLegalParameter("nearest-neighbour fallback exhausted the candidate pool");
    }
  }
  throw InvalidArgument("bad fallback kind");
}

RegressOutcome tune_regress(const Regressor& model, const FeatureVector& f,
                            const ConstraintContext& ctx, FitnessMode mode,
                            const ProbeFn& probe) {
  RegressionMode want =
      mode == FitnessMode::RuntimeReciprocal ? RegressionMode::Runtime : RegressionMode::Speedup;
  if (model.mode() != want) {
    throw InvalidArgument("fitness mode requires a " + std::string(to_string(want)) +
                          "-mode regressor");
  }

  struct Scored {
    double score;
    WorkgroupSize w;
  };
  std::vector<Scored> candidates;
  for (const auto& w : candidate_pool(ctx)) {
    candidates.push_back({fitness(mode, model.predict(f, w)), w});
  }
  // Best fitness first; ties go to the smaller size so runs are reproducible.
  std::sort(candidates.begin(), candidates.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.w < b.w;
  });

  RegressOutcome outcome;
  for (const auto& c : candidates) {
    if (probe(c.w) == ProbeResult::Legal) {
      outcome.w = c.w;
      return outcome;
    }
    ++outcome.rejections;
  }
  throw NoLegalParameter("regression tuner exhausted the candidate set");
}

}  // namespace wgtune
