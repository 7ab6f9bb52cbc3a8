#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pcat/engine.hpp"

namespace pcat {

struct Bounds {
  enum class Strategy { Exhaustive, Random };
  std::uint64_t max_steps = 200;
  std::uint64_t max_objects = 200;
  std::uint64_t max_configs = 200000;
  Strategy strategy = Strategy::Exhaustive;
  std::uint64_t samples = 100;
  std::uint64_t seed = 1;
};

struct ExploreOptions {
  enum class Dedup {
    Global,    // one visit per (configuration, phase)
    PerLayer,  // merge only within a BFS layer; every trace length survives
    None,
  };
  Dedup dedup = Dedup::Global;
  /// Drop states holding a symbol that provably keeps a rule applicable forever.
  bool prune_absorbing = true;
  /// Record every (depth, result) pair of a halting state.
  bool record_halts = false;
  /// States descending from one that held this symbol are marked; a marked
  /// halting state is reported as a counterexample.
  std::optional<Symbol> taint;
  unsigned jobs = 1;
};

struct Truncation {
  bool steps = false;
  bool objects = false;
  bool configs = false;
  bool any() const { return steps || objects || configs; }
};

struct ExplorationReport {
  std::set<ParikhVector> results;
  /// Choice indices (into Engine::enumerate at each step) leading to a
  /// halting state with that result.
  std::map<ParikhVector, std::vector<std::uint32_t>> witnesses;
  Truncation truncated;
  /// Lowest output already in the environment over every pruned state.
  /// Every result below it has been found.
  std::optional<Count> pending_min_sum;
  std::uint64_t visited = 0;
  std::uint64_t max_frontier = 0;
  std::uint64_t stuck = 0;     // non-halting states without a successor
  std::uint64_t absorbed = 0;  // states dropped by absorbing-symbol pruning
  std::uint64_t deepest = 0;
  std::size_t min_membranes = 0;
  std::size_t max_membranes = 0;
  std::set<std::pair<std::uint64_t, ParikhVector>> halts;
  std::uint64_t taint_counterexamples = 0;
  std::vector<std::vector<std::uint32_t>> counterexample_paths;
  std::uint64_t samples_run = 0;
  std::uint64_t samples_halted = 0;
};

/// Symbols that, once in any region, keep the system from halting.
std::vector<Symbol> absorbing_symbols(const PSystem& sys);

Count objects_counted(const PSystem& sys, const Configuration& cfg);

ExplorationReport explore(const PSystem& sys, const Bounds& bounds, const ExploreOptions& opt = {});

struct TraceStep {
  std::uint64_t step = 0;
  std::string selection;
  std::string choice;
  std::string config;
};

struct SampleRun {
  std::vector<TraceStep> trace;
  std::optional<ParikhVector> result;
  bool halted = false;
  bool stuck = false;
};

/// One computation choosing uniformly among the step choices; reproducible per seed.
SampleRun sample_run(const PSystem& sys, const Bounds& bounds, std::uint64_t seed);

/// Re-applies a recorded path of choice indices from the initial configuration.
std::vector<TraceStep> replay(const PSystem& sys, const std::vector<std::uint32_t>& path);

struct Comparison {
  bool equal = true;
  bool exact = true;               // neither side truncated
  std::optional<Count> below;      // vectors with sum >= below were not compared
  std::vector<ParikhVector> spurious;  // in got, not in oracle
  std::vector<ParikhVector> missing;   // in oracle, not in got
};

Comparison compare_sets(const std::set<ParikhVector>& got, std::optional<Count> got_bound,
                        const std::set<ParikhVector>& oracle, std::optional<Count> oracle_bound);

std::string render_diff(const Comparison& c);

std::string report_text(const PSystem& sys, const ExplorationReport& r);
std::string report_json(const PSystem& sys, const ExplorationReport& r);
std::string trace_text(const std::vector<TraceStep>& trace);

}  // namespace pcat
