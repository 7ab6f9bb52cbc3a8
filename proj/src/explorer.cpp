#include "pcat/explorer.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "json.hpp"

namespace pcat {

namespace {

std::set<MembraneLabel> labels_in(const Membrane& m) {
  std::set<MembraneLabel> out{m.label};
  for (const auto& c : m.children) out.merge(labels_in(c));
  return out;
}

bool holds(const Membrane& m, Symbol s) {
  if (m.contents.count(s)) return true;
  return std::any_of(m.children.begin(), m.children.end(), [&](const Membrane& c) { return holds(c, s); });
}

// Every membrane with this label in the initial structure has a child that
// satisfies the target.
bool children_guaranteed(const Membrane& m, const MembraneLabel& label, const Target& t) {
  if (m.label == label) {
    bool ok = std::any_of(m.children.begin(), m.children.end(), [&](const Membrane& c) {
      return t.kind == TargetKind::In || c.label == t.label;
    });
    if (!ok) return false;
  }
  return std::all_of(m.children.begin(), m.children.end(),
                     [&](const Membrane& c) { return children_guaranteed(c, label, t); });
}

Count output_sum(const PSystem& sys, const Configuration& cfg) {
  return sys.output.environment ? parikh(cfg.environment, sys.output_order).sum() : 0;
}

}  // namespace

std::vector<Symbol> absorbing_symbols(const PSystem& sys) {
  const auto& ctl = sys.control;
  if (ctl.kind == ControlMode::Kind::Controlled && !ctl.periodic) return {};
  const bool static_tree = std::none_of(sys.rules.begin(), sys.rules.end(), [](const Rule& r) {
    return r.dissolves || r.kind == RuleKind::CatalyticCreate;
  });
  const MembraneLabel& skin = sys.initial.skin.label;
  std::set<MembraneLabel> regions = labels_in(sys.initial.skin);
  std::set<MembraneLabel> creatable(sys.creatable_regions.begin(), sys.creatable_regions.end());
  regions.insert(creatable.begin(), creatable.end());

  std::unordered_map<std::string, std::uint32_t> by_label;
  for (std::uint32_t i = 0; i < sys.rules.size(); ++i) by_label.emplace(sys.rules[i].label, i);

  std::vector<Symbol> out;
  for (Symbol x : sys.alphabet.symbols()) {
    if (sys.is_catalyst(x)) continue;
    bool ok = true;
    std::vector<bool> witness(sys.rules.size(), false);
    for (std::uint32_t i = 0; i < sys.rules.size() && ok; ++i) {
      const Rule& r = sys.rules[i];
      if (r.reactant != x) continue;
      if (r.kind == RuleKind::CatalyticCreate) {
        ok = false;
        break;
      }
      bool reproduced = false;
      for (const auto& o : r.rhs)
        if (o.symbol == x && !(o.target.kind == TargetKind::Out && r.region == skin)) reproduced = true;
      if (!reproduced) ok = false;
      if (r.kind != RuleKind::NonCoop) continue;
      bool always = true;
      for (const auto& t : r.inward_targets())
        if (!static_tree || creatable.count(r.region) || !children_guaranteed(sys.initial.skin, r.region, t))
          always = false;
      witness[i] = always;
    }
    if (!ok) continue;

    auto covers = [&](const std::vector<bool>* mask) {
      for (const auto& region : regions) {
        bool found = false;
        for (std::uint32_t i = 0; i < sys.rules.size() && !found; ++i)
          found = witness[i] && sys.rules[i].region == region && (!mask || (*mask)[i]);
        if (!found) return false;
      }
      return true;
    };
    auto mask_of = [&](const LabelSet& set) {
      std::vector<bool> mask(sys.rules.size(), false);
      for (const auto& l : set.labels)
        if (auto it = by_label.find(l); it != by_label.end()) mask[it->second] = true;
      return mask;
    };
    switch (ctl.kind) {
      case ControlMode::Kind::Plain:
      case ControlMode::Kind::TargetSelection: ok = covers(nullptr); break;
      case ControlMode::Kind::LabelSelection: {
        // Any set with an applicable rule keeps the system from halting.
        std::vector<bool> any(sys.rules.size(), false);
        for (const auto& set : ctl.sets) {
          auto m = mask_of(set);
          for (std::size_t i = 0; i < m.size(); ++i) any[i] = any[i] || m[i];
        }
        ok = covers(&any);
        break;
      }
      case ControlMode::Kind::Controlled:
        for (auto idx : ctl.schedule) {
          auto m = mask_of(ctl.sets.at(idx));
          if (!covers(&m)) ok = false;
        }
        break;
    }
    if (ok) out.push_back(x);
  }
  return out;
}

Count objects_counted(const PSystem& sys, const Configuration& cfg) {
  Count total = 0;
  std::function<void(const Membrane&)> walk = [&](const Membrane& m) {
    total += m.contents.total();
    for (const auto& c : m.children) walk(c);
  };
  walk(cfg.skin);
  std::set<Symbol> outputs(sys.output_order.begin(), sys.output_order.end());
  for (const auto& [s, k] : cfg.environment.entries())
    if (!outputs.count(s)) total += k;
  return total;
}

namespace {

struct Pending {
  Configuration cfg;
  std::uint64_t node = 0;
  bool tainted = false;
};

struct Expanded {
  enum class Kind { Absorbed, Halting, OverSteps, OverObjects, Expanded } kind = Kind::Expanded;
  ParikhVector result;
  std::size_t membranes = 0;
  std::vector<Configuration> successors;
  std::vector<std::string> keys;
};

struct Node {
  std::uint64_t parent;
  std::uint32_t choice;
};

std::vector<std::uint32_t> path_to(const std::vector<Node>& nodes, std::uint64_t id) {
  std::vector<std::uint32_t> out;
  while (id != 0) {
    out.push_back(nodes[id].choice);
    id = nodes[id].parent;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

ExplorationReport explore_random(const PSystem& sys, const Bounds& bounds) {
  ExplorationReport rep;
  std::mt19937_64 seeds(bounds.seed);
  Engine engine(sys);
  rep.min_membranes = rep.max_membranes = membrane_count(sys.initial);
  for (std::uint64_t i = 0; i < bounds.samples; ++i) {
    auto run = sample_run(sys, bounds, seeds());
    ++rep.samples_run;
    rep.deepest = std::max<std::uint64_t>(rep.deepest, run.trace.size());
    if (run.result) {
      ++rep.samples_halted;
      rep.results.insert(*run.result);
    } else if (!run.stuck) {
      rep.truncated.steps = true;
    }
  }
  return rep;
}

}  // namespace

ExplorationReport explore(const PSystem& sys, const Bounds& bounds, const ExploreOptions& opt) {
  if (bounds.strategy == Bounds::Strategy::Random) return explore_random(sys, bounds);
  Engine engine(sys);
  ExplorationReport rep;
  std::vector<Symbol> absorbing = opt.prune_absorbing ? absorbing_symbols(sys) : std::vector<Symbol>{};
  auto note_pending = [&](Count s) {
    if (!rep.pending_min_sum || s < *rep.pending_min_sum) rep.pending_min_sum = s;
  };

  std::vector<Node> nodes{{0, 0}};
  Configuration init = sys.initial;
  normalize(init, sys.alphabet);
  std::unordered_set<std::string> seen;
  auto key_of = [&](const std::string& canon, std::uint64_t depth, bool tainted) {
    std::string key = canon + "|" + std::to_string(engine.phase(depth));
    if (tainted) key += "|t";
    return key;
  };
  bool init_taint = opt.taint && holds(init.skin, *opt.taint);
  seen.insert(key_of(canonicalize(init, sys.alphabet), 0, init_taint));
  rep.visited = 1;
  rep.min_membranes = rep.max_membranes = membrane_count(init);
  std::vector<Pending> frontier;
  frontier.push_back({std::move(init), 0, init_taint});

  for (std::uint64_t depth = 0; !frontier.empty(); ++depth) {
    rep.max_frontier = std::max<std::uint64_t>(rep.max_frontier, frontier.size());
    rep.deepest = depth;
    std::vector<Expanded> layer(frontier.size());
    parallel_for(frontier.size(), opt.jobs, [&](std::size_t i) {
      const Configuration& cfg = frontier[i].cfg;
      Expanded& e = layer[i];
      e.membranes = membrane_count(cfg);
      for (Symbol a : absorbing)
        if (holds(cfg.skin, a)) {
          e.kind = Expanded::Kind::Absorbed;
          return;
        }
      if (engine.is_halting(cfg, depth)) {
        e.kind = Expanded::Kind::Halting;
        e.result = engine.result_of(cfg);
        return;
      }
      if (depth >= bounds.max_steps) {
        e.kind = Expanded::Kind::OverSteps;
        return;
      }
      if (objects_counted(sys, cfg) > bounds.max_objects) {
        e.kind = Expanded::Kind::OverObjects;
        return;
      }
      for (const auto& choice : engine.enumerate(cfg, depth)) {
        Configuration next = engine.apply(cfg, choice);
        normalize(next, sys.alphabet);
        e.keys.push_back(canonicalize(next, sys.alphabet));
        e.successors.push_back(std::move(next));
      }
    });

    if (opt.dedup == ExploreOptions::Dedup::PerLayer) seen.clear();
    std::vector<Pending> next_frontier;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      Expanded& e = layer[i];
      const Pending& p = frontier[i];
      rep.min_membranes = std::min(rep.min_membranes, e.membranes);
      rep.max_membranes = std::max(rep.max_membranes, e.membranes);
      switch (e.kind) {
        case Expanded::Kind::Absorbed: ++rep.absorbed; continue;
        case Expanded::Kind::Halting:
          if (p.tainted) {
            ++rep.taint_counterexamples;
            if (rep.counterexample_paths.size() < 5) rep.counterexample_paths.push_back(path_to(nodes, p.node));
          } else {
            if (rep.results.insert(e.result).second) rep.witnesses[e.result] = path_to(nodes, p.node);
            if (opt.record_halts) rep.halts.insert({depth, e.result});
          }
          continue;
        case Expanded::Kind::OverSteps:
          rep.truncated.steps = true;
          note_pending(output_sum(sys, p.cfg));
          continue;
        case Expanded::Kind::OverObjects:
          rep.truncated.objects = true;
          note_pending(output_sum(sys, p.cfg));
          continue;
        case Expanded::Kind::Expanded: break;
      }
      if (e.successors.empty()) ++rep.stuck;
      for (std::size_t k = 0; k < e.successors.size(); ++k) {
        bool tainted = p.tainted || (opt.taint && holds(e.successors[k].skin, *opt.taint));
        if (opt.dedup != ExploreOptions::Dedup::None) {
          std::string key = key_of(e.keys[k], depth + 1, tainted);
          if (seen.count(key)) continue;
          if (rep.visited >= bounds.max_configs) {
            rep.truncated.configs = true;
            note_pending(output_sum(sys, e.successors[k]));
            continue;
          }
          seen.insert(std::move(key));
        } else if (rep.visited >= bounds.max_configs) {
          rep.truncated.configs = true;
          note_pending(output_sum(sys, e.successors[k]));
          continue;
        }
        ++rep.visited;
        nodes.push_back({p.node, static_cast<std::uint32_t>(k)});
        next_frontier.push_back({std::move(e.successors[k]), nodes.size() - 1, tainted});
      }
    }
    frontier = std::move(next_frontier);
  }
  return rep;
}

SampleRun sample_run(const PSystem& sys, const Bounds& bounds, std::uint64_t seed) {
  Engine engine(sys);
  std::mt19937_64 rng(seed);
  SampleRun run;
  Configuration cfg = sys.initial;
  normalize(cfg, sys.alphabet);
  run.trace.push_back({0, "", "", canonicalize(cfg, sys.alphabet)});
  for (std::uint64_t step = 0;; ++step) {
    if (engine.is_halting(cfg, step)) {
      run.halted = true;
      run.result = engine.result_of(cfg);
      return run;
    }
    if (step >= bounds.max_steps || objects_counted(sys, cfg) > bounds.max_objects) return run;
    auto choices = engine.enumerate(cfg, step);
    if (choices.empty()) {
      run.stuck = true;
      return run;
    }
    std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
    const StepChoice& c = choices[pick(rng)];
    cfg = engine.apply(cfg, c);
    normalize(cfg, sys.alphabet);
    run.trace.push_back({step + 1, c.selection, engine.render_choice(c), canonicalize(cfg, sys.alphabet)});
  }
}

std::vector<TraceStep> replay(const PSystem& sys, const std::vector<std::uint32_t>& path) {
  Engine engine(sys);
  Configuration cfg = sys.initial;
  normalize(cfg, sys.alphabet);
  std::vector<TraceStep> out{{0, "", "", canonicalize(cfg, sys.alphabet)}};
  for (std::uint64_t step = 0; step < path.size(); ++step) {
    auto choices = engine.enumerate(cfg, step);
    if (path[step] >= choices.size()) throw EngineFault("recorded choice no longer exists");
    const StepChoice& c = choices[path[step]];
    cfg = engine.apply(cfg, c);
    normalize(cfg, sys.alphabet);
    out.push_back({step + 1, c.selection, engine.render_choice(c), canonicalize(cfg, sys.alphabet)});
  }
  return out;
}

Comparison compare_sets(const std::set<ParikhVector>& got, std::optional<Count> got_bound,
                        const std::set<ParikhVector>& oracle, std::optional<Count> oracle_bound) {
  Comparison c;
  c.exact = !got_bound && !oracle_bound;
  if (got_bound) c.below = got_bound;
  if (oracle_bound) c.below = c.below ? std::min(*c.below, *oracle_bound) : *oracle_bound;
  auto keep = [&](const ParikhVector& v) { return !c.below || v.sum() < *c.below; };
  for (const auto& v : got)
    if (keep(v) && !oracle.count(v)) c.spurious.push_back(v);
  for (const auto& v : oracle)
    if (keep(v) && !got.count(v)) c.missing.push_back(v);
  c.equal = c.spurious.empty() && c.missing.empty();
  return c;
}

std::string render_diff(const Comparison& c) {
  std::ostringstream out;
  for (const auto& v : c.spurious) out << "+" << to_string(v) << "\n";
  for (const auto& v : c.missing) out << "-" << to_string(v) << "\n";
  return out.str();
}

namespace {

std::string flags(const Truncation& t) {
  if (!t.any()) return "no";
  std::string out;
  if (t.steps) out += " steps";
  if (t.objects) out += " objects";
  if (t.configs) out += " configs";
  return out.substr(1);
}

}  // namespace

std::string report_text(const PSystem& sys, const ExplorationReport& r) {
  std::ostringstream out;
  out << "results (" << r.results.size() << ") over <";
  for (std::size_t i = 0; i < sys.output_order.size(); ++i)
    out << (i ? "," : "") << sys.alphabet.name(sys.output_order[i]);
  out << ">:\n";
  for (const auto& v : r.results) out << "  " << to_string(v) << "\n";
  out << "truncated: " << flags(r.truncated) << "\n";
  if (r.pending_min_sum) out << "complete below output sum: " << *r.pending_min_sum << "\n";
  out << "visited states: " << r.visited << "\n";
  out << "max frontier: " << r.max_frontier << "\n";
  out << "deepest layer: " << r.deepest << "\n";
  out << "stuck states: " << r.stuck << "\n";
  out << "absorbed states: " << r.absorbed << "\n";
  out << "membranes: " << r.min_membranes << ".." << r.max_membranes << "\n";
  if (r.samples_run) out << "samples: " << r.samples_run << " (" << r.samples_halted << " halted)\n";
  if (r.taint_counterexamples) out << "marked halting states: " << r.taint_counterexamples << "\n";
  return out.str();
}

std::string report_json(const PSystem& sys, const ExplorationReport& r) {
  nlohmann::ordered_json j;
  std::vector<std::string> order;
  for (auto s : sys.output_order) order.push_back(sys.alphabet.name(s));
  j["output_order"] = order;
  auto results = nlohmann::json::array();
  for (const auto& v : r.results) results.push_back(v.values);
  j["results"] = results;
  j["truncated"] = {{"steps", r.truncated.steps}, {"objects", r.truncated.objects}, {"configs", r.truncated.configs}};
  j["complete_below"] = r.pending_min_sum ? nlohmann::json(*r.pending_min_sum) : nlohmann::json(nullptr);
  j["visited"] = r.visited;
  j["max_frontier"] = r.max_frontier;
  j["deepest"] = r.deepest;
  j["stuck"] = r.stuck;
  j["absorbed"] = r.absorbed;
  j["membranes"] = {r.min_membranes, r.max_membranes};
  if (r.samples_run) j["samples"] = {{"run", r.samples_run}, {"halted", r.samples_halted}};
  return j.dump(2) + "\n";
}

std::string trace_text(const std::vector<TraceStep>& trace) {
  std::ostringstream out;
  for (const auto& t : trace) {
    out << "step " << t.step;
    if (!t.selection.empty()) out << " [" << t.selection << "]";
    if (!t.choice.empty()) out << " " << t.choice;
    out << " => " << t.config << "\n";
  }
  return out.str();
}

}  // namespace pcat
