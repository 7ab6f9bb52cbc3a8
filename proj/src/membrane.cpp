#include "pcat/membrane.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace pcat {

std::string to_string(const Target& t) {
  switch (t.kind) {
    case TargetKind::Here: return "here";
    case TargetKind::Out: return "out";
    case TargetKind::In: return "in";
    case TargetKind::InLabel: return "in_" + t.label;
  }
  return "?";
}

std::string to_string(const Path& p) {
  if (p.empty()) return "/";
  std::string out;
  for (auto i : p) out += "/" + std::to_string(i);
  return out;
}

std::string to_string(ControlMode::Kind k) {
  switch (k) {
    case ControlMode::Kind::Plain: return "plain";
    case ControlMode::Kind::LabelSelection: return "label-selection";
    case ControlMode::Kind::TargetSelection: return "target-selection";
    case ControlMode::Kind::Controlled: return "controlled";
  }
  return "?";
}

Multiset Rule::lhs() const {
  Multiset m;
  if (is_catalytic()) m.add(catalyst);
  m.add(reactant);
  return m;
}

std::optional<Target> Rule::uniform_target() const {
  if (kind == RuleKind::CatalyticCreate) return Target::here();
  std::optional<Target> t;
  if (kind == RuleKind::Catalytic) t = catalyst_target;
  for (const auto& o : rhs) {
    if (!t) t = o.target;
    else if (*t != o.target) return std::nullopt;
  }
  if (!t) t = empty_target;
  return t;
}

Target Rule::group_target() const {
  if (auto t = uniform_target()) return *t;
  return rhs.front().target;
}

std::vector<Target> Rule::inward_targets() const {
  std::vector<Target> out;
  for (const auto& o : rhs)
    if (o.target.is_inward()) out.push_back(o.target);
  if (kind == RuleKind::Catalytic && catalyst_target.is_inward()) out.push_back(catalyst_target);
  return out;
}

const Membrane& region_lookup(const Configuration& cfg, const Path& path) {
  const Membrane* node = &cfg.skin;
  for (auto i : path) {
    if (i >= node->children.size()) throw InvalidPath("invalid region path " + to_string(path));
    node = &node->children[i];
  }
  return *node;
}

Membrane& region_lookup(Configuration& cfg, const Path& path) {
  return const_cast<Membrane&>(region_lookup(std::as_const(cfg), path));
}

namespace {

std::string canonical_node(const Membrane& m, const Alphabet& alphabet) {
  std::string out = m.label + "{" + to_text(m.contents, alphabet) + "}";
  if (m.children.empty()) return out;
  std::vector<std::pair<const std::string*, std::string>> kids;
  kids.reserve(m.children.size());
  for (const auto& c : m.children) kids.emplace_back(&c.label, canonical_node(c, alphabet));
  std::sort(kids.begin(), kids.end(), [](const auto& a, const auto& b) {
    return std::tie(*a.first, a.second) < std::tie(*b.first, b.second);
  });
  out += "[";
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (i) out += ",";
    out += kids[i].second;
  }
  return out + "]";
}

std::string normalize_node(Membrane& m, const Alphabet& alphabet) {
  std::vector<std::pair<std::string, std::size_t>> keys;
  keys.reserve(m.children.size());
  for (std::size_t i = 0; i < m.children.size(); ++i)
    keys.emplace_back(normalize_node(m.children[i], alphabet), i);
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    return std::tie(m.children[a.second].label, a.first) <
           std::tie(m.children[b.second].label, b.first);
  });
  std::string out = m.label + "{" + to_text(m.contents, alphabet) + "}";
  if (keys.empty()) return out;
  std::vector<Membrane> sorted;
  sorted.reserve(keys.size());
  out += "[";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i) out += ",";
    out += keys[i].first;
    sorted.push_back(std::move(m.children[keys[i].second]));
  }
  m.children = std::move(sorted);
  return out + "]";
}

std::size_t count_nodes(const Membrane& m) {
  std::size_t n = 1;
  for (const auto& c : m.children) n += count_nodes(c);
  return n;
}

}  // namespace

std::string canonicalize(const Configuration& cfg, const Alphabet& alphabet) {
  return canonical_node(cfg.skin, alphabet) + " env{" + to_text(cfg.environment, alphabet) + "}";
}

void normalize(Configuration& cfg, const Alphabet& alphabet) { normalize_node(cfg.skin, alphabet); }

std::size_t membrane_count(const Configuration& cfg) { return count_nodes(cfg.skin); }

bool PSystem::is_catalyst(Symbol s) const {
  return std::find(catalysts.begin(), catalysts.end(), s) != catalysts.end();
}

Count PSystem::catalyst_total(const Configuration& cfg) const {
  Count total = 0;
  std::function<void(const Membrane&)> walk = [&](const Membrane& m) {
    for (auto c : catalysts) total += m.contents.count(c);
    for (const auto& k : m.children) walk(k);
  };
  walk(cfg.skin);
  for (auto c : catalysts) total += cfg.environment.count(c);
  return total;
}

std::string quote_symbol(const std::string& name) {
  bool plain = !name.empty() && name.front() != '\'' && name != "." && name != "delta" &&
               name.find_first_of("#()[],:;^ \t") == std::string::npos && name.find("->") == std::string::npos;
  return plain ? name : "'" + name + "'";
}

namespace {

std::string quoted(const std::string& name) { return quote_symbol(name); }

std::string render_object(const std::string& name, const Target& t) {
  if (t.kind == TargetKind::Here) return quoted(name);
  return "(" + quoted(name) + "," + to_string(t) + ")";
}

}  // namespace

std::string describe(const Rule& r, const Alphabet& a) {
  std::string out;
  if (r.is_catalytic()) out += quoted(a.name(r.catalyst)) + " ";
  out += quoted(a.name(r.reactant)) + " ->";
  if (r.kind == RuleKind::Catalytic) out += " " + render_object(a.name(r.catalyst), r.catalyst_target);
  if (r.kind == RuleKind::CatalyticCreate) {
    out += " " + quoted(a.name(r.catalyst)) + " [";
    for (const auto& [s, k] : r.contents.entries())
      for (Count i = 0; i < k; ++i) out += " " + quoted(a.name(s));
    out += " ]_" + r.new_label;
    return out;
  }
  for (const auto& o : r.rhs) out += " " + render_object(a.name(o.symbol), o.target);
  if (r.rhs.empty() && r.kind == RuleKind::NonCoop) {
    out += r.empty_target.kind == TargetKind::Here ? " ." : " (.," + to_string(r.empty_target) + ")";
  }
  if (r.dissolves) out += " delta";
  return out;
}

std::vector<Violation> validate_system(const PSystem& sys) {
  std::vector<Violation> out;
  const auto& A = sys.alphabet;
  auto add = [&](std::string where, std::string msg) { out.push_back({std::move(where), std::move(msg)}); };

  std::set<MembraneLabel> present;
  std::function<void(const Membrane&)> collect = [&](const Membrane& m) {
    present.insert(m.label);
    for (const auto& c : m.children) collect(c);
  };
  collect(sys.initial.skin);
  std::set<MembraneLabel> known = present;
  known.insert(sys.creatable_regions.begin(), sys.creatable_regions.end());
  const MembraneLabel& skin = sys.initial.skin.label;

  std::function<void(const Membrane&, bool)> check_tree = [&](const Membrane& m, bool is_skin) {
    if (!is_skin && m.label == skin) add("membrane " + m.label, "skin label reused by an inner membrane");
    for (const auto& c : m.children) check_tree(c, false);
  };
  check_tree(sys.initial.skin, true);
  for (const auto& [s, k] : sys.initial.environment.entries())
    if (sys.is_catalyst(s)) add("environment", "catalyst " + A.name(s) + " starts in the environment");

  const bool labels_required = sys.control.kind == ControlMode::Kind::LabelSelection ||
                               sys.control.kind == ControlMode::Kind::Controlled;
  std::map<std::string, std::size_t> label_use;

  for (std::size_t i = 0; i < sys.rules.size(); ++i) {
    const Rule& r = sys.rules[i];
    std::string where = "rule " + (r.label.empty() ? "#" + std::to_string(i) : r.label) + " in region " +
                        r.region + " (" + describe(r, A) + ")";
    if (!known.count(r.region)) add(where, "region label " + r.region + " does not exist and is never created");
    if (!r.label.empty() && label_use[r.label]++ > 0) add(where, "duplicate rule label " + r.label);
    if (labels_required && r.label.empty()) add(where, "unlabeled rule under a label-driven control mode");

    if (r.is_catalytic()) {
      if (!sys.is_catalyst(r.catalyst)) add(where, A.name(r.catalyst) + " is not a declared catalyst");
    }
    if (sys.is_catalyst(r.reactant)) add(where, "catalyst " + A.name(r.reactant) + " used as a reactant");
    for (const auto& o : r.rhs) {
      if (sys.is_catalyst(o.symbol)) add(where, "catalyst " + A.name(o.symbol) + " produced on the right-hand side");
      if (o.target.kind == TargetKind::InLabel) {
        if (!sys.variant.targets_labeled) add(where, "labeled in-target in a system without labeled targets");
        if (!known.count(o.target.label)) add(where, "target membrane " + o.target.label + " never exists");
      }
    }
    for (const auto& [s, k] : r.contents.entries())
      if (sys.is_catalyst(s)) add(where, "catalyst placed in created membrane contents");

    if (r.kind == RuleKind::Catalytic && r.catalyst_target.kind != TargetKind::Here) {
      if (!sys.variant.mobile) add(where, "immobile catalyst moved");
      if (r.catalyst_target.kind == TargetKind::Out && r.region == skin)
        add(where, "catalyst sent out of the skin into the environment");
      if (r.catalyst_target.kind == TargetKind::InLabel && !sys.variant.targets_labeled)
        add(where, "labeled in-target in a system without labeled targets");
    }
    if (r.kind == RuleKind::CatalyticCreate) {
      if (!sys.variant.creation) add(where, "membrane creation in a system without creation");
      if (r.new_label == skin) add(where, "creation of a membrane with the skin label");
    }
    if (r.dissolves && r.region == skin) add(where, "dissolution rule in the skin region");

    if (sys.control.kind == ControlMode::Kind::TargetSelection) {
      auto t = r.uniform_target();
      if (!t) add(where, "mixed targets under target selection");
      if (r.is_catalytic() && (!t || t->kind != TargetKind::Here))
        add(where, "catalytic rule with a non-here target under target selection");
    }
  }

  if (labels_required) {
    for (const auto& set : sys.control.sets)
      for (const auto& l : set.labels)
        if (!label_use.count(l)) add("label set " + set.name, "unknown rule label " + l);
    if (sys.control.sets.empty()) add("control", "no label sets declared");
  }
  if (sys.control.kind == ControlMode::Kind::Controlled) {
    if (sys.control.schedule.empty()) add("control", "empty control schedule");
    for (auto idx : sys.control.schedule)
      if (idx >= sys.control.sets.size()) add("control", "schedule references an undeclared set");
  }

  std::set<Symbol> seen;
  for (auto s : sys.output_order)
    if (!seen.insert(s).second) add("output", "duplicate output symbol " + A.name(s));
  if (!sys.output.environment && !known.count(sys.output.label))
    add("output", "output membrane " + sys.output.label + " does not exist");
  return out;
}

}  // namespace pcat
