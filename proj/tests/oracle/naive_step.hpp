#pragma once
// Brute-force reference for one computation step. Shares only the data model
// with the engine: it enumerates every applicable multiset of rule instances
// and keeps the ones that pass the admissibility and maximality predicates.

#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pcat/engine.hpp"

namespace pcat::oracle {

using Instances = std::vector<std::pair<RuleInstance, Count>>;

struct Region {
  Path path;
  const Membrane* node;
  std::vector<Path> children;
};

inline void regions_of(const Membrane& m, Path& path, std::vector<Region>& out) {
  Region r{path, &m, {}};
  for (std::uint32_t i = 0; i < m.children.size(); ++i) {
    Path c = path;
    c.push_back(i);
    r.children.push_back(c);
  }
  out.push_back(r);
  for (std::uint32_t i = 0; i < m.children.size(); ++i) {
    path.push_back(i);
    regions_of(m.children[i], path, out);
    path.pop_back();
  }
}

inline std::vector<Region> regions_of(const Configuration& cfg) {
  std::vector<Region> out;
  Path p;
  regions_of(cfg.skin, p, out);
  return out;
}

/// Every instance a rule admitted by `allowed` could form in `cfg`,
/// regardless of whether its left-hand side fits.
inline std::vector<RuleInstance> all_instances(const PSystem& sys, const Configuration& cfg,
                                               const std::function<bool(std::uint32_t)>& allowed) {
  std::vector<RuleInstance> out;
  for (const auto& reg : regions_of(cfg)) {
    for (std::uint32_t i = 0; i < sys.rules.size(); ++i) {
      const Rule& r = sys.rules[i];
      if (r.region != reg.node->label || !allowed(i)) continue;
      std::vector<std::vector<std::uint32_t>> tuples{{}};
      for (const auto& t : r.inward_targets()) {
        std::vector<std::vector<std::uint32_t>> next;
        for (const auto& tup : tuples)
          for (std::uint32_t c = 0; c < reg.node->children.size(); ++c) {
            const auto& child = reg.node->children[c];
            if (t.kind == TargetKind::InLabel && child.label != t.label) continue;
            auto e = tup;
            e.push_back(c);
            next.push_back(e);
          }
        tuples = std::move(next);
      }
      for (auto& tup : tuples) out.push_back({reg.path, i, tup});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Checker {
  const PSystem& sys;
  const Configuration& cfg;
  std::vector<RuleInstance> candidates;
  bool target_groups;

  const Membrane& at(const Path& p) const { return region_lookup(cfg, p); }

  std::map<Path, Multiset> residuals(const Instances& inst, bool& fits) const {
    std::map<Path, Multiset> res;
    for (const auto& reg : regions_of(cfg)) res[reg.path] = reg.node->contents;
    fits = true;
    for (const auto& [ri, k] : inst) {
      Multiset lhs = sys.rules[ri.rule].lhs();
      for (Count i = 0; i < k; ++i) {
        if (!res[ri.region].contains(lhs)) {
          fits = false;
          return res;
        }
        res[ri.region].subtract(lhs);
      }
    }
    return res;
  }

  std::set<Path> dissolving(const Instances& inst) const {
    std::set<Path> d;
    for (const auto& [ri, k] : inst)
      if (sys.rules[ri.rule].dissolves) d.insert(ri.region);
    return d;
  }

  static Path child_path(const RuleInstance& ri, std::uint32_t c) {
    Path p = ri.region;
    p.push_back(c);
    return p;
  }

  bool sends_into(const RuleInstance& ri, const std::set<Path>& d) const {
    for (auto c : ri.resolved)
      if (d.count(child_path(ri, c))) return true;
    return false;
  }

  /// Under target selection a region fires one target; inward objects of
  /// all its instances share one child.
  struct Group {
    Target target;
    std::optional<std::uint32_t> child;
  };

  static bool one_child(const RuleInstance& ri, std::optional<std::uint32_t>& child) {
    for (auto c : ri.resolved) {
      if (child && *child != c) return false;
      child = c;
    }
    return true;
  }

  bool admissible(const Instances& inst) const {
    if (inst.empty()) return false;
    bool fits = false;
    auto res = residuals(inst, fits);
    if (!fits) return false;
    auto d = dissolving(inst);
    for (const auto& [ri, k] : inst)
      if (sends_into(ri, d)) return false;

    std::map<Path, Group> fired;
    if (target_groups) {
      for (const auto& [ri, k] : inst) {
        Target t = sys.rules[ri.rule].group_target();
        auto [it, fresh] = fired.emplace(ri.region, Group{t, std::nullopt});
        if (!fresh && it->second.target != t) return false;
        if (!one_child(ri, it->second.child)) return false;
      }
      // Every region with something applicable fires.
      for (const auto& x : candidates)
        if (at(x.region).contents.contains(sys.rules[x.rule].lhs()) && !fired.count(x.region)) return false;
    }
    return maximal(res, d, fired);
  }

  bool maximal(std::map<Path, Multiset>& res, const std::set<Path>& d, const std::map<Path, Group>& fired) const {
    for (const auto& x : candidates) {
      if (target_groups) {
        auto it = fired.find(x.region);
        if (it == fired.end() || sys.rules[x.rule].group_target() != it->second.target) continue;
        auto child = it->second.child;
        if (!one_child(x, child)) continue;
      }
      if (!res[x.region].contains(sys.rules[x.rule].lhs())) continue;
      if (sends_into(x, d)) continue;  // would send into a dissolving region
      return false;
    }
    return true;
  }
};

/// All admissible maximal instance multisets for the rules `allowed` admits.
inline std::set<Instances> naive_choices(const PSystem& sys, const Configuration& cfg,
                                         const std::function<bool(std::uint32_t)>& allowed, bool target_groups) {
  Checker chk{sys, cfg, all_instances(sys, cfg, allowed), target_groups};
  std::set<Instances> out;
  Instances acc;
  bool fits = true;
  std::map<Path, Multiset> res = chk.residuals({}, fits);
  std::function<void(std::size_t)> walk = [&](std::size_t i) {
    if (i == chk.candidates.size()) {
      if (chk.admissible(acc)) out.insert(acc);
      return;
    }
    const RuleInstance& x = chk.candidates[i];
    Multiset lhs = sys.rules[x.rule].lhs();
    walk(i + 1);
    Count k = 0;
    while (res[x.region].contains(lhs)) {
      res[x.region].subtract(lhs);
      ++k;
      acc.push_back({x, k});
      walk(i + 1);
      acc.pop_back();
    }
    for (Count j = 0; j < k; ++j) res[x.region].add_all(lhs);
  };
  walk(0);
  return out;
}

inline std::function<bool(std::uint32_t)> mask_for(const PSystem& sys, const LabelSet& set) {
  std::set<std::string> labels(set.labels.begin(), set.labels.end());
  return [&sys, labels](std::uint32_t i) { return labels.count(sys.rules[i].label) > 0; };
}

/// Reference enumeration for any control mode.
inline std::set<Instances> naive_step(const PSystem& sys, const Configuration& cfg, std::uint64_t step) {
  using K = ControlMode::Kind;
  const auto& ctl = sys.control;
  auto any = [](std::uint32_t) { return true; };
  switch (ctl.kind) {
    case K::Plain: return naive_choices(sys, cfg, any, false);
    case K::TargetSelection: return naive_choices(sys, cfg, any, true);
    case K::LabelSelection: {
      std::set<Instances> out;
      for (const auto& s : ctl.sets) out.merge(naive_choices(sys, cfg, mask_for(sys, s), false));
      return out;
    }
    case K::Controlled: {
      if (ctl.schedule.empty()) return {};
      std::size_t idx;
      if (ctl.periodic)
        idx = ctl.schedule[step % ctl.schedule.size()];
      else if (step < ctl.schedule.size())
        idx = ctl.schedule[step];
      else
        return {};
      return naive_choices(sys, cfg, mask_for(sys, ctl.sets[idx]), false);
    }
  }
  return {};
}

/// Independent non-extendability check of one engine choice.
inline bool non_extendable(const PSystem& sys, const Configuration& cfg, const StepChoice& c,
                           const std::function<bool(std::uint32_t)>& allowed, bool target_groups) {
  Checker chk{sys, cfg, all_instances(sys, cfg, allowed), target_groups};
  return chk.admissible(c.instances);
}

/// Random small system and configuration for property tests: at most six
/// symbols and four rules.
struct RandomCase {
  PSystem sys;
  Configuration cfg;
  std::uint64_t step = 0;
};

inline RandomCase random_case(std::mt19937_64& rng, ControlMode::Kind mode) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  RandomCase rc;
  PSystem& sys = rc.sys;
  std::size_t nsym = 3 + pick(4);  // 3..6 symbols, the first one a catalyst
  std::vector<Symbol> syms;
  static const char* kNames[] = {"c", "a", "b", "d", "e", "f"};
  for (std::size_t i = 0; i < nsym; ++i) syms.push_back(sys.alphabet.intern(kNames[i]));
  sys.catalysts = {syms[0]};
  Symbol cat = syms[0];
  auto object = [&] { return syms[1 + pick(nsym - 1)]; };

  sys.variant.mobile = chance(0.3);
  sys.variant.targets_labeled = chance(0.5);
  sys.variant.creation = mode != ControlMode::Kind::TargetSelection && chance(0.3);
  const bool ts = mode == ControlMode::Kind::TargetSelection;

  // Structure: skin "1" with up to three children labeled 2/3, one maybe nested.
  Membrane skin{"1", {}, {}};
  std::size_t kids = pick(4);
  for (std::size_t i = 0; i < kids; ++i) skin.children.push_back({chance(0.5) ? "2" : "3", {}, {}});
  if (kids && chance(0.3)) skin.children[0].children.push_back({"3", {}, {}});
  std::vector<MembraneLabel> labels{"1", "2", "3"};

  auto random_target = [&]() -> Target {
    switch (pick(ts ? 3 : 4)) {
      case 0: return Target::here();
      case 1: return Target::out();
      case 2: return Target::in();
      default: return sys.variant.targets_labeled ? Target::in_label(chance(0.5) ? "2" : "3") : Target::in();
    }
  };

  std::size_t nrules = 1 + pick(4);
  for (std::size_t i = 0; i < nrules; ++i) {
    Rule r;
    r.label = "r" + std::to_string(i + 1);
    r.region = labels[pick(labels.size())];
    r.reactant = object();
    std::size_t kind = pick(sys.variant.creation ? 3 : 2);
    if (kind >= 1) {
      r.kind = kind == 2 ? RuleKind::CatalyticCreate : RuleKind::Catalytic;
      r.catalyst = cat;
    }
    if (r.kind == RuleKind::CatalyticCreate) {
      r.new_label = chance(0.5) ? "2" : "3";
      r.contents.add(object(), 1 + pick(2));
    } else {
      Target shared = random_target();
      if (ts && r.kind == RuleKind::Catalytic) shared = Target::here();
      std::size_t n = pick(3);
      for (std::size_t k = 0; k < n; ++k) r.rhs.push_back({object(), ts ? shared : random_target()});
      if (n == 0) r.empty_target = shared;
      if (r.kind == RuleKind::Catalytic && sys.variant.mobile && !ts && chance(0.3))
        r.catalyst_target = chance(0.5) ? Target::in() : Target::out();
      if (r.kind == RuleKind::NonCoop && r.region != "1" && chance(0.3)) r.dissolves = true;
    }
    sys.rules.push_back(std::move(r));
  }

  // Contents: a handful of objects per region, catalyst in one region.
  std::function<void(Membrane&)> fill = [&](Membrane& m) {
    std::size_t n = pick(4);
    for (std::size_t i = 0; i < n; ++i) m.contents.add(object());
    for (auto& c : m.children) fill(c);
  };
  fill(skin);
  std::vector<Membrane*> nodes{&skin};
  for (auto& c : skin.children) {
    nodes.push_back(&c);
    for (auto& g : c.children) nodes.push_back(&g);
  }
  nodes[pick(nodes.size())]->contents.add(cat, 1 + (chance(0.2) ? 1 : 0));
  sys.initial.skin = skin;
  rc.cfg = sys.initial;

  sys.control.kind = mode;
  if (mode == ControlMode::Kind::LabelSelection || mode == ControlMode::Kind::Controlled) {
    std::size_t nsets = 1 + pick(3);
    for (std::size_t s = 0; s < nsets; ++s) {
      LabelSet set{"U" + std::to_string(s + 1), {}};
      for (const auto& r : sys.rules)
        if (chance(0.5)) set.labels.push_back(r.label);
      sys.control.sets.push_back(std::move(set));
    }
    if (mode == ControlMode::Kind::Controlled) {
      std::size_t len = 1 + pick(3);
      for (std::size_t s = 0; s < len; ++s) sys.control.schedule.push_back(pick(nsets));
      sys.control.periodic = chance(0.7);
      sys.control.weak = chance(0.5);
      rc.step = pick(6);
    }
  }
  auto syms_out = sys.alphabet.symbols();
  sys.output_order = {syms_out.back()};
  return rc;
}

}  // namespace pcat::oracle
