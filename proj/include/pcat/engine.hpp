#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcat/membrane.hpp"

namespace pcat {

/// One rule applied in one region, with every inward-targeted object bound to
/// a child position of that region.
struct RuleInstance {
  Path region;
  std::uint32_t rule = 0;
  std::vector<std::uint32_t> resolved;  // parallel to Rule::inward_targets()
  friend auto operator<=>(const RuleInstance&, const RuleInstance&) = default;
};

struct StepChoice {
  std::vector<std::pair<RuleInstance, Count>> instances;  // sorted, counts > 0
  std::string selection;  // label-set name, or per-region targets under target selection
  std::vector<Path> dissolved;
};

struct EngineFault : std::logic_error {
  using std::logic_error::logic_error;
};

using RuleFilter = std::function<bool(const Rule&)>;

/// Stateless step semantics for one system. Holds precomputed rule indexes;
/// every member is const and safe to call concurrently.
class Engine {
 public:
  explicit Engine(const PSystem& sys);

  const PSystem& system() const { return sys_; }

  /// Indices of rules attached to the region at `path` that can fire against
  /// its current contents (inward targets need a matching child).
  std::vector<std::uint32_t> applicable_rules(const Configuration& cfg, const Path& path,
                                              const RuleFilter& filter = {}) const;

  /// Every admissible maximal step, duplicate-free and in canonical order.
  std::vector<StepChoice> enumerate(const Configuration& cfg, std::uint64_t step) const;

  Configuration apply(const Configuration& cfg, const StepChoice& choice) const;

  bool is_halting(const Configuration& cfg, std::uint64_t step) const;

  ParikhVector result_of(const Configuration& cfg) const;

  /// Controlled mode: label set in force at `step`, if any.
  std::optional<std::size_t> scheduled_set(std::uint64_t step) const;
  /// Part of the step index the transition relation depends on.
  std::uint64_t phase(std::uint64_t step) const;
  /// True when no transition can leave a state at this step index.
  bool schedule_exhausted(std::uint64_t step) const;

  std::string render_choice(const StepChoice& c) const;

 private:
  struct Selector;
  std::vector<StepChoice> enumerate_selector(const Configuration& cfg, const Selector& sel) const;
  bool any_applicable(const Configuration& cfg, const std::vector<bool>* mask) const;

  const PSystem& sys_;
  std::vector<std::vector<bool>> set_masks_;  // per ControlMode::sets entry, over rule indices
  std::vector<bool> union_mask_;
};

std::vector<std::uint32_t> applicable_rules(const PSystem& sys, const Configuration& cfg, const Path& path,
                                            const RuleFilter& filter = {});
std::vector<StepChoice> enumerate_step_choices(const PSystem& sys, const Configuration& cfg,
                                               std::uint64_t step);
Configuration apply_step(const PSystem& sys, const Configuration& cfg, const StepChoice& choice);
bool is_halting(const PSystem& sys, const Configuration& cfg, std::uint64_t step);
ParikhVector result_of(const PSystem& sys, const Configuration& cfg);

}  // namespace pcat
