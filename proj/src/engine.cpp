#include "pcat/engine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace pcat {

struct Engine::Selector {
  const std::vector<bool>* mask = nullptr;  // nullptr admits every rule
  bool target_groups = false;
  std::string name;
};

namespace {

struct RegionView {
  Path path;
  const Membrane* node = nullptr;
  std::vector<std::uint32_t> child_regions;  // child position -> region index
};

void flatten(const Membrane& m, Path& path, std::vector<RegionView>& out) {
  auto self = out.size();
  out.push_back({path, &m, {}});
  for (std::uint32_t i = 0; i < m.children.size(); ++i) {
    path.push_back(i);
    out[self].child_regions.push_back(static_cast<std::uint32_t>(out.size()));
    flatten(m.children[i], path, out);
    path.pop_back();
  }
}

std::vector<RegionView> flatten(const Configuration& cfg) {
  std::vector<RegionView> out;
  Path p;
  flatten(cfg.skin, p, out);
  return out;
}

std::vector<std::uint32_t> candidate_children(const Membrane& m, const Target& t) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < m.children.size(); ++i)
    if (t.kind == TargetKind::In || (t.kind == TargetKind::InLabel && m.children[i].label == t.label))
      out.push_back(i);
  return out;
}

void subtract_times(Multiset& m, const Multiset& lhs, Count k) {
  for (Count i = 0; i < k; ++i) m.subtract(lhs);
}
void add_times(Multiset& m, const Multiset& lhs, Count k) {
  for (Count i = 0; i < k; ++i) m.add_all(lhs);
}

bool shares_symbol(const Multiset& a, const Multiset& b) {
  for (const auto& [s, k] : a.entries())
    if (b.count(s)) return true;
  return false;
}

// A rule that fits a region and has somewhere to send its inward objects.
struct LocalRule {
  std::uint32_t rule = 0;
  Multiset lhs;
  Target group;
  std::vector<std::vector<std::uint32_t>> candidates;  // per inward target
  bool blockable() const { return !candidates.empty(); }
};

struct RegionOption {
  std::vector<std::pair<std::uint32_t, Count>> counts;  // local rule index -> count
  Multiset residual;
  const std::vector<std::uint32_t>* scope = nullptr;  // local rules the option must be maximal against
  std::optional<Target> group;
};

struct RegionState {
  std::vector<LocalRule> rules;
  std::vector<std::vector<std::uint32_t>> scopes;  // one per group (or one overall)
  std::vector<std::optional<Target>> scope_targets;
  std::vector<RegionOption> options;
};

// Depth-first extension over rules in canonical order, branching on how many
// copies of each rule to take. Leaves that leave a non-blockable rule
// applicable are dropped; blockable ones are settled globally.
void extend(const std::vector<LocalRule>& rules, const std::vector<std::uint32_t>& scope,
            const std::vector<bool>& shares_later, std::size_t pos, Multiset& residual,
            std::vector<std::pair<std::uint32_t, Count>>& chosen, std::vector<RegionOption>& out) {
  if (pos == scope.size()) {
    for (auto j : scope)
      if (!rules[j].blockable() && residual.contains(rules[j].lhs)) return;
    out.push_back({chosen, residual, nullptr, std::nullopt});
    return;
  }
  const LocalRule& r = rules[scope[pos]];
  Count max = residual.times_contained(r.lhs);
  for (Count k = max + 1; k-- > 0;) {
    subtract_times(residual, r.lhs, k);
    bool settled = !r.blockable() && !shares_later[pos];
    if (settled && residual.contains(r.lhs)) {
      add_times(residual, r.lhs, k);
      break;  // fewer copies leave even more room
    }
    if (k) chosen.emplace_back(scope[pos], k);
    extend(rules, scope, shares_later, pos + 1, residual, chosen, out);
    if (k) chosen.pop_back();
    add_times(residual, r.lhs, k);
  }
}

std::vector<RegionOption> maximal_options(const std::vector<LocalRule>& rules,
                                          const std::vector<std::uint32_t>& scope, const Multiset& contents) {
  std::vector<bool> shares_later(scope.size(), false);
  for (std::size_t i = 0; i < scope.size(); ++i)
    for (std::size_t j = i + 1; j < scope.size() && !shares_later[i]; ++j)
      shares_later[i] = shares_symbol(rules[scope[i]].lhs, rules[scope[j]].lhs);
  std::vector<RegionOption> out;
  Multiset residual = contents;
  std::vector<std::pair<std::uint32_t, Count>> chosen;
  extend(rules, scope, shares_later, 0, residual, chosen, out);
  return out;
}

// All ways to spread `k` identical applications over `n` resolution tuples.
void distribute(std::size_t n, Count k, std::size_t i, std::vector<Count>& acc,
                std::vector<std::vector<Count>>& out) {
  if (i + 1 == n) {
    acc[i] = k;
    out.push_back(acc);
    return;
  }
  for (Count c = k + 1; c-- > 0;) {
    acc[i] = c;
    distribute(n, k - c, i + 1, acc, out);
  }
}

void cartesian(const std::vector<std::vector<std::uint32_t>>& lists, std::size_t i, std::vector<std::uint32_t>& acc,
               std::vector<std::vector<std::uint32_t>>& out) {
  if (i == lists.size()) {
    out.push_back(acc);
    return;
  }
  for (auto v : lists[i]) {
    acc.push_back(v);
    cartesian(lists, i + 1, acc, out);
    acc.pop_back();
  }
}

using Instances = std::vector<std::pair<RuleInstance, Count>>;

}  // namespace

Engine::Engine(const PSystem& sys) : sys_(sys) {
  std::unordered_map<std::string, std::uint32_t> by_label;
  for (std::uint32_t i = 0; i < sys.rules.size(); ++i)
    if (!sys.rules[i].label.empty()) by_label.emplace(sys.rules[i].label, i);
  union_mask_.assign(sys.rules.size(), false);
  for (const auto& set : sys.control.sets) {
    std::vector<bool> mask(sys.rules.size(), false);
    for (const auto& l : set.labels)
      if (auto it = by_label.find(l); it != by_label.end()) {
        mask[it->second] = true;
        union_mask_[it->second] = true;
      }
    set_masks_.push_back(std::move(mask));
  }
}

std::vector<std::uint32_t> Engine::applicable_rules(const Configuration& cfg, const Path& path,
                                                    const RuleFilter& filter) const {
  const Membrane& m = region_lookup(cfg, path);
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < sys_.rules.size(); ++i) {
    const Rule& r = sys_.rules[i];
    if (r.region != m.label || (filter && !filter(r))) continue;
    if (!m.contents.contains(r.lhs())) continue;
    bool reachable = true;
    for (const auto& t : r.inward_targets())
      if (candidate_children(m, t).empty()) reachable = false;
    if (reachable) out.push_back(i);
  }
  return out;
}

bool Engine::any_applicable(const Configuration& cfg, const std::vector<bool>* mask) const {
  for (const auto& view : flatten(cfg)) {
    auto rules = applicable_rules(cfg, view.path, [&](const Rule& r) {
      return !mask || (*mask)[static_cast<std::size_t>(&r - sys_.rules.data())];
    });
    if (!rules.empty()) return true;
  }
  return false;
}

std::optional<std::size_t> Engine::scheduled_set(std::uint64_t step) const {
  const auto& c = sys_.control;
  if (c.kind != ControlMode::Kind::Controlled || c.schedule.empty()) return std::nullopt;
  if (c.periodic) return c.schedule[step % c.schedule.size()];
  if (step < c.schedule.size()) return c.schedule[step];
  return std::nullopt;
}

std::uint64_t Engine::phase(std::uint64_t step) const {
  const auto& c = sys_.control;
  if (c.kind != ControlMode::Kind::Controlled) return 0;
  if (c.periodic) return step % c.schedule.size();
  return std::min<std::uint64_t>(step, c.schedule.size());
}

bool Engine::schedule_exhausted(std::uint64_t step) const {
  const auto& c = sys_.control;
  return c.kind == ControlMode::Kind::Controlled && !c.periodic && step >= c.schedule.size();
}

std::vector<StepChoice> Engine::enumerate(const Configuration& cfg, std::uint64_t step) const {
  using K = ControlMode::Kind;
  switch (sys_.control.kind) {
    case K::Plain: return enumerate_selector(cfg, Selector{nullptr, false, ""});
    case K::TargetSelection: return enumerate_selector(cfg, Selector{nullptr, true, ""});
    case K::Controlled: {
      auto set = scheduled_set(step);
      if (!set) return {};
      return enumerate_selector(cfg, Selector{&set_masks_[*set], false, sys_.control.sets[*set].name});
    }
    case K::LabelSelection: {
      std::map<Instances, StepChoice> merged;
      for (std::size_t i = 0; i < set_masks_.size(); ++i)
        for (auto& c : enumerate_selector(cfg, Selector{&set_masks_[i], false, sys_.control.sets[i].name}))
          merged.try_emplace(c.instances, std::move(c));
      std::vector<StepChoice> out;
      out.reserve(merged.size());
      for (auto& [k, v] : merged) out.push_back(std::move(v));
      return out;
    }
  }
  return {};
}

std::vector<StepChoice> Engine::enumerate_selector(const Configuration& cfg, const Selector& sel) const {
  const auto regions = flatten(cfg);
  std::vector<RegionState> states(regions.size());

  for (std::size_t ri = 0; ri < regions.size(); ++ri) {
    const Membrane& m = *regions[ri].node;
    RegionState& st = states[ri];
    for (std::uint32_t i = 0; i < sys_.rules.size(); ++i) {
      const Rule& r = sys_.rules[i];
      if (r.region != m.label || (sel.mask && !(*sel.mask)[i])) continue;
      LocalRule lr{i, r.lhs(), r.group_target(), {}};
      if (!m.contents.contains(lr.lhs)) continue;
      bool reachable = true;
      for (const auto& t : r.inward_targets()) {
        lr.candidates.push_back(candidate_children(m, t));
        if (lr.candidates.back().empty()) reachable = false;
      }
      if (reachable) st.rules.push_back(std::move(lr));
    }
    if (sel.target_groups) {
      std::map<Target, std::vector<std::uint32_t>> groups;
      for (std::uint32_t j = 0; j < st.rules.size(); ++j) groups[st.rules[j].group].push_back(j);
      for (auto& [t, idx] : groups) {
        st.scopes.push_back(std::move(idx));
        st.scope_targets.push_back(t);
      }
    } else {
      std::vector<std::uint32_t> all(st.rules.size());
      for (std::uint32_t j = 0; j < all.size(); ++j) all[j] = j;
      st.scopes.push_back(std::move(all));
      st.scope_targets.push_back(std::nullopt);
    }
    for (std::size_t g = 0; g < st.scopes.size(); ++g) {
      for (auto& opt : maximal_options(st.rules, st.scopes[g], m.contents)) {
        if (sel.target_groups && opt.counts.empty()) continue;  // a region that can fire must
        opt.scope = &st.scopes[g];
        opt.group = st.scope_targets[g];
        st.options.push_back(std::move(opt));
      }
    }
    if (st.options.empty()) {
      // Nothing applicable here (or, under target selection, no group at all).
      static const std::vector<std::uint32_t> kNone;
      st.options.push_back({{}, m.contents, st.rules.empty() ? &kNone : &st.scopes.front(), std::nullopt});
    }
  }

  std::map<Instances, StepChoice> found;
  std::vector<const RegionOption*> pick(regions.size(), nullptr);

  auto settle = [&]() {
    bool any = false;
    std::vector<bool> dissolving(regions.size(), false);
    for (std::size_t ri = 0; ri < regions.size(); ++ri)
      for (const auto& [j, k] : pick[ri]->counts) {
        any = true;
        if (sys_.rules[states[ri].rules[j].rule].dissolves) dissolving[ri] = true;
      }
    if (!any) return;

    auto blocked = [&](std::size_t ri, const LocalRule& lr) {
      for (const auto& cands : lr.candidates) {
        bool all_dissolve = true;
        for (auto c : cands)
          if (!dissolving[regions[ri].child_regions[c]]) all_dissolve = false;
        if (all_dissolve) return true;
      }
      return false;
    };
    for (std::size_t ri = 0; ri < regions.size(); ++ri) {
      const RegionOption& o = *pick[ri];
      for (auto j : *o.scope) {
        const LocalRule& lr = states[ri].rules[j];
        if (o.residual.contains(lr.lhs) && !blocked(ri, lr)) return;  // extendable
      }
    }

    // Resolve inward targets, never into a region that dissolves this step.
    std::vector<std::vector<Instances>> alternatives(regions.size());
    for (std::size_t ri = 0; ri < regions.size(); ++ri) {
      const RegionOption& o = *pick[ri];
      const RegionView& view = regions[ri];
      auto usable = [&](std::uint32_t child) { return !dissolving[view.child_regions[child]]; };
      auto& alts = alternatives[ri];
      bool moves_inward = std::any_of(o.counts.begin(), o.counts.end(),
                                      [&](const auto& e) { return states[ri].rules[e.first].blockable(); });
      if (sel.target_groups && o.group && o.group->is_inward() && moves_inward) {
        for (auto child : candidate_children(*view.node, *o.group)) {
          if (!usable(child)) continue;
          Instances inst;
          for (const auto& [j, k] : o.counts) {
            const LocalRule& lr = states[ri].rules[j];
            inst.push_back({RuleInstance{view.path, lr.rule, std::vector<std::uint32_t>(lr.candidates.size(), child)}, k});
          }
          alts.push_back(std::move(inst));
        }
        if (alts.empty()) return;
        continue;
      }
      alts.push_back({});
      for (const auto& [j, k] : o.counts) {
        const LocalRule& lr = states[ri].rules[j];
        std::vector<std::vector<std::uint32_t>> allowed;
        for (const auto& cands : lr.candidates) {
          allowed.emplace_back();
          for (auto c : cands)
            if (usable(c)) allowed.back().push_back(c);
          if (allowed.back().empty()) return;
        }
        std::vector<std::vector<std::uint32_t>> tuples;
        std::vector<std::uint32_t> acc;
        cartesian(allowed, 0, acc, tuples);
        std::vector<std::vector<Count>> spreads;
        std::vector<Count> tmp(tuples.size(), 0);
        distribute(tuples.size(), k, 0, tmp, spreads);
        std::vector<Instances> next;
        for (const auto& base : alts)
          for (const auto& spread : spreads) {
            Instances inst = base;
            for (std::size_t t = 0; t < tuples.size(); ++t)
              if (spread[t]) inst.push_back({RuleInstance{view.path, lr.rule, tuples[t]}, spread[t]});
            next.push_back(std::move(inst));
          }
        alts = std::move(next);
      }
    }

    std::vector<Path> dissolved;
    for (std::size_t ri = 0; ri < regions.size(); ++ri)
      if (dissolving[ri]) dissolved.push_back(regions[ri].path);
    std::string selection = sel.name;
    if (sel.target_groups) {
      for (std::size_t ri = 0; ri < regions.size(); ++ri)
        if (pick[ri]->group && !pick[ri]->counts.empty()) {
          if (!selection.empty()) selection += ' ';
          selection += to_string(regions[ri].path) + "=" + to_string(*pick[ri]->group);
        }
    }

    std::vector<std::size_t> idx(regions.size(), 0);
    while (true) {
      Instances all;
      for (std::size_t ri = 0; ri < regions.size(); ++ri)
        for (const auto& e : alternatives[ri][idx[ri]]) all.push_back(e);
      std::sort(all.begin(), all.end());
      if (!found.count(all)) found.emplace(all, StepChoice{all, selection, dissolved});
      std::size_t ri = 0;
      while (ri < regions.size() && ++idx[ri] == alternatives[ri].size()) idx[ri++] = 0;
      if (ri == regions.size()) break;
    }
  };

  std::function<void(std::size_t)> combine = [&](std::size_t ri) {
    if (ri == regions.size()) {
      settle();
      return;
    }
    for (const auto& opt : states[ri].options) {
      pick[ri] = &opt;
      combine(ri + 1);
    }
  };
  combine(0);

  std::vector<StepChoice> out;
  out.reserve(found.size());
  for (auto& [k, v] : found) out.push_back(std::move(v));
  return out;
}

namespace {

void dissolve_marked(Membrane& node, Path& path, const std::set<Path>& marked) {
  std::vector<Membrane> kept;
  kept.reserve(node.children.size());
  for (std::uint32_t i = 0; i < node.children.size(); ++i) {
    path.push_back(i);
    Membrane& child = node.children[i];
    dissolve_marked(child, path, marked);
    if (marked.count(path)) {
      node.contents.add_all(child.contents);
      for (auto& grandchild : child.children) kept.push_back(std::move(grandchild));
    } else {
      kept.push_back(std::move(child));
    }
    path.pop_back();
  }
  node.children = std::move(kept);
}

}  // namespace

Configuration Engine::apply(const Configuration& cfg, const StepChoice& choice) const {
  Configuration next = cfg;
  for (const auto& [inst, k] : choice.instances) {
    if (inst.rule >= sys_.rules.size()) throw EngineFault("rule index out of range");
    Membrane& m = region_lookup(next, inst.region);
    if (m.label != sys_.rules[inst.rule].region) throw EngineFault("rule applied in a foreign region");
    Multiset need = sys_.rules[inst.rule].lhs();
    for (Count i = 0; i < k; ++i) {
      if (!m.contents.contains(need)) throw EngineFault("step consumes more than the region holds");
      m.contents.subtract(need);
    }
  }

  std::set<Path> dissolved;
  std::vector<std::pair<Path, Membrane>> created;
  for (const auto& [inst, k] : choice.instances) {
    const Rule& r = sys_.rules[inst.rule];
    std::size_t next_inward = 0;
    auto deliver = [&](Symbol s, const Target& t) {
      switch (t.kind) {
        case TargetKind::Here: region_lookup(next, inst.region).contents.add(s, k); break;
        case TargetKind::Out:
          if (inst.region.empty()) next.environment.add(s, k);
          else region_lookup(next, Path(inst.region.begin(), inst.region.end() - 1)).contents.add(s, k);
          break;
        case TargetKind::In:
        case TargetKind::InLabel: {
          if (next_inward >= inst.resolved.size()) throw EngineFault("unresolved inward target");
          Path dest = inst.region;
          dest.push_back(inst.resolved[next_inward++]);
          const Membrane& d = region_lookup(next, dest);
          if (t.kind == TargetKind::InLabel && d.label != t.label) throw EngineFault("in-target label mismatch");
          region_lookup(next, dest).contents.add(s, k);
          break;
        }
      }
    };
    for (const auto& o : r.rhs) deliver(o.symbol, o.target);
    if (r.kind == RuleKind::Catalytic) deliver(r.catalyst, r.catalyst_target);
    if (r.kind == RuleKind::CatalyticCreate) {
      region_lookup(next, inst.region).contents.add(r.catalyst, k);
      for (Count i = 0; i < k; ++i) created.push_back({inst.region, Membrane{r.new_label, r.contents, {}}});
    }
    if (r.dissolves) {
      if (inst.region.empty()) throw EngineFault("skin dissolution");
      dissolved.insert(inst.region);
    }
  }
  for (const auto& p : choice.dissolved) dissolved.insert(p);

  for (auto& [parent, membrane] : created) region_lookup(next, parent).children.push_back(std::move(membrane));
  Path root;
  dissolve_marked(next.skin, root, dissolved);
  return next;
}

bool Engine::is_halting(const Configuration& cfg, std::uint64_t step) const {
  using K = ControlMode::Kind;
  const auto& c = sys_.control;
  switch (c.kind) {
    case K::Plain:
    case K::TargetSelection: return !any_applicable(cfg, nullptr);
    case K::LabelSelection: return !any_applicable(cfg, &union_mask_);
    case K::Controlled: {
      if (schedule_exhausted(step)) return step == c.schedule.size() || c.weak ? !any_applicable(cfg, &union_mask_) : false;
      auto set = scheduled_set(step);
      if (any_applicable(cfg, &set_masks_[*set])) return false;
      if (c.weak) return true;
      return c.periodic && step % c.schedule.size() == 0;
    }
  }
  return false;
}

ParikhVector Engine::result_of(const Configuration& cfg) const {
  if (sys_.output.environment) return parikh(cfg.environment, sys_.output_order);
  Multiset acc;
  std::function<void(const Membrane&)> walk = [&](const Membrane& m) {
    if (m.label == sys_.output.label) acc.add_all(m.contents);
    for (const auto& k : m.children) walk(k);
  };
  walk(cfg.skin);
  return parikh(acc, sys_.output_order);
}

std::string Engine::render_choice(const StepChoice& c) const {
  std::string out;
  for (const auto& [inst, k] : c.instances) {
    if (!out.empty()) out += "; ";
    const Rule& r = sys_.rules[inst.rule];
    out += to_string(inst.region) + " " + (r.label.empty() ? "#" + std::to_string(inst.rule) : r.label);
    if (!inst.resolved.empty()) {
      out += " ->";
      for (auto child : inst.resolved) out += " " + std::to_string(child);
    }
    if (k != 1) out += " x" + std::to_string(k);
  }
  return out;
}

std::vector<std::uint32_t> applicable_rules(const PSystem& sys, const Configuration& cfg, const Path& path,
                                            const RuleFilter& filter) {
  return Engine(sys).applicable_rules(cfg, path, filter);
}
std::vector<StepChoice> enumerate_step_choices(const PSystem& sys, const Configuration& cfg, std::uint64_t step) {
  return Engine(sys).enumerate(cfg, step);
}
Configuration apply_step(const PSystem& sys, const Configuration& cfg, const StepChoice& choice) {
  return Engine(sys).apply(cfg, choice);
}
bool is_halting(const PSystem& sys, const Configuration& cfg, std::uint64_t step) {
  return Engine(sys).is_halting(cfg, step);
}
ParikhVector result_of(const PSystem& sys, const Configuration& cfg) { return Engine(sys).result_of(cfg); }

}  // namespace pcat
