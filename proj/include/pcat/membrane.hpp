#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcat/multiset.hpp"

namespace pcat {

using MembraneLabel = std::string;

enum class TargetKind : std::uint8_t { Here, Out, In, InLabel };

struct Target {
  TargetKind kind = TargetKind::Here;
  MembraneLabel label;  // InLabel only

  static Target here() { return {}; }
  static Target out() { return {TargetKind::Out, {}}; }
  static Target in() { return {TargetKind::In, {}}; }
  static Target in_label(MembraneLabel l) { return {TargetKind::InLabel, std::move(l)}; }

  bool is_inward() const { return kind == TargetKind::In || kind == TargetKind::InLabel; }
  friend auto operator<=>(const Target&, const Target&) = default;
};

std::string to_string(const Target& t);

struct RhsObject {
  Symbol symbol;
  Target target;
  friend auto operator<=>(const RhsObject&, const RhsObject&) = default;
};

enum class RuleKind : std::uint8_t { NonCoop, Catalytic, CatalyticCreate };

/// One evolution rule attached to a region label.
///
///  - NonCoop:          reactant -> rhs [delta]
///  - Catalytic:        catalyst reactant -> (catalyst, catalyst_target) rhs
///  - CatalyticCreate:  catalyst reactant -> catalyst [ contents ]_new_label
struct Rule {
  std::string label;  // empty when the system does not label rules
  MembraneLabel region;
  RuleKind kind = RuleKind::NonCoop;
  Symbol catalyst;  // Catalytic / CatalyticCreate only
  Symbol reactant;
  std::vector<RhsObject> rhs;
  Target catalyst_target;
  // Group target of a rule with empty rhs; only consulted under target
  // selection (e.g. `d -> (.,out)`).
  Target empty_target;
  bool dissolves = false;  // NonCoop only
  MembraneLabel new_label;  // CatalyticCreate only
  Multiset contents;        // CatalyticCreate only

  bool is_catalytic() const { return kind != RuleKind::NonCoop; }
  Multiset lhs() const;
  /// The single target shared by all produced objects, if there is one.
  std::optional<Target> uniform_target() const;
  /// Target used to group the rule under target selection.
  Target group_target() const;
  /// Inward-targeted objects in resolution order: rhs objects first, then the
  /// catalyst when it moves inward.
  std::vector<Target> inward_targets() const;
};

struct Membrane {
  MembraneLabel label;
  Multiset contents;
  std::vector<Membrane> children;
};

struct Configuration {
  Multiset environment;
  Membrane skin;
};

using Path = std::vector<std::uint32_t>;

std::string to_string(const Path& p);

struct InvalidPath : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const Membrane& region_lookup(const Configuration& cfg, const Path& path);
Membrane& region_lookup(Configuration& cfg, const Path& path);

/// Deterministic string identifying a configuration up to sibling order.
std::string canonicalize(const Configuration& cfg, const Alphabet& alphabet);
/// Sorts every sibling list by (label, canonical string) so that positional
/// paths are reproducible for isomorphic configurations.
void normalize(Configuration& cfg, const Alphabet& alphabet);

std::size_t membrane_count(const Configuration& cfg);

struct LabelSet {
  std::string name;
  std::vector<std::string> labels;
};

struct ControlMode {
  enum class Kind : std::uint8_t { Plain, LabelSelection, TargetSelection, Controlled };
  Kind kind = Kind::Plain;
  std::vector<LabelSet> sets;         // W for LabelSelection, the alphabet of the schedule otherwise
  std::vector<std::size_t> schedule;  // indices into sets (Controlled)
  bool weak = false;
  bool periodic = false;  // schedule repeats with period schedule.size()

  std::size_t period() const { return periodic ? schedule.size() : 0; }
};

std::string to_string(ControlMode::Kind k);

struct Variant {
  bool mobile = false;
  bool creation = false;
  bool targets_labeled = false;
};

/// Where results are read: the environment (f = 0) or a membrane label.
struct OutputRegion {
  bool environment = true;
  MembraneLabel label;
};

struct PSystem {
  Alphabet alphabet;
  std::vector<Symbol> catalysts;
  Configuration initial;
  std::vector<Rule> rules;
  // Region labels that own rules but are absent from the initial structure.
  std::vector<MembraneLabel> creatable_regions;
  OutputRegion output;
  std::vector<Symbol> output_order;
  Variant variant;
  ControlMode control;
  std::string header;  // free-form comment block, rendered as `# ` lines

  bool is_catalyst(Symbol s) const;
  Count catalyst_total(const Configuration& cfg) const;
};

struct Violation {
  std::string where;
  std::string message;
};

/// Every syntactic restriction the system breaks; empty means valid.
std::vector<Violation> validate_system(const PSystem& sys);

std::string describe(const Rule& rule, const Alphabet& alphabet);

/// Symbol as written in the text format, quoted when needed.
std::string quote_symbol(const std::string& name);

}  // namespace pcat
