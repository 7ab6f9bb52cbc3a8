// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Criteria stated in terms of the command line drive
// the pcat executable itself.

#include <array>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "oracle/naive_step.hpp"
#include "oracle/rm_paths.hpp"
#include "pcat/compilers.hpp"
#include "pcat/explorer.hpp"
#include "pcat/system_text.hpp"

using namespace pcat;

namespace {

const char* const kMachines[] = {"add1", "even", "decr", "two_out"};

std::string machine_path(const std::string& name) { return std::string(PCAT_MACHINES_DIR) + "/" + name + ".rm"; }

RegisterMachine machine(const std::string& name) {
  std::ifstream in(machine_path(name));
  std::ostringstream s;
  s << in.rdbuf();
  return parse_machine(s.str());
}

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(PCAT_BIN) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    pass = false;
    if (detail.size() < 2000) detail += (detail.empty() ? "" : "; ") + why;
  }
};

Outcome oracle_matrix() {
  Outcome o;
  int exact_pairs = 0;
  for (auto c : all_constructions())
    for (auto m : kMachines) {
      auto r = run("compare " + machine_path(m) + " -c " + to_string(c));
      // Machines with infinite output sets are compared on the prefix below
      // the lowest output sum left unexplored by either side.
      bool exact = r.out.find("compared exactly\nequal\n") != std::string::npos;
      bool prefix = r.out.find("\nequal\n") != std::string::npos && r.out.find("compared below") != std::string::npos;
      if (r.code != 0) o.fail(to_string(c) + "/" + m + " exit " + std::to_string(r.code));
      else if (!exact && !prefix) o.fail(to_string(c) + "/" + m + " no comparison verdict");
      else if (exact) ++exact_pairs;
    }
  if (o.pass) o.detail = "20 pairs equal, " + std::to_string(exact_pairs) + " of them untruncated";
  return o;
}

Outcome ls_step_exact() {
  Outcome o;
  auto m = machine("decr");
  auto a = compile_ls(m);
  Bounds b;
  b.max_steps = 10;
  ExploreOptions opt;
  opt.dedup = ExploreOptions::Dedup::PerLayer;
  opt.record_halts = true;
  auto rep = explore(a.system, b, opt);
  std::set<std::pair<std::uint64_t, std::vector<Count>>> got;
  for (const auto& [len, v] : rep.halts) got.insert({len, v.values});
  auto want = oracle::rm_paths(m, 10).halts;
  if (want.empty()) o.fail("machine has no halting trace within 10 steps");
  if (got != want) {
    std::ostringstream s;
    s << "system halts:";
    for (const auto& [len, v] : got) s << " " << len << ":" << to_string(ParikhVector{v});
    s << " machine halts:";
    for (const auto& [len, v] : want) s << " " << len << ":" << to_string(ParikhVector{v});
    o.fail(s.str());
  } else {
    o.detail = std::to_string(got.size()) + " halting trace lengths match";
  }
  return o;
}

Outcome tv_period() {
  Outcome o;
  std::size_t n = 0;
  for (auto name : {"decr", "even"}) {
    auto a = compile_tv(machine(name));
    Bounds b;
    b.max_steps = 72;
    ExploreOptions opt;
    opt.dedup = ExploreOptions::Dedup::PerLayer;
    opt.record_halts = true;
    auto rep = explore(a.system, b, opt);
    if (rep.halts.empty()) o.fail(std::string(name) + ": no halting trace");
    for (const auto& [len, v] : rep.halts)
      if (len % 6 != 0) o.fail(std::string(name) + ": halts after " + std::to_string(len));
    n += rep.halts.size();
  }
  if (o.pass) o.detail = std::to_string(n) + " halting traces, all lengths divisible by 6";
  return o;
}

Outcome membrane_budget() {
  Outcome o;
  Bounds b;
  b.max_steps = 120;
  ExploreOptions opt;
  opt.prune_absorbing = false;
  auto span = [&](const PSystem& s) {
    auto r = explore(s, b, opt);
    return std::pair{r.min_membranes, r.max_membranes};
  };
  auto hi = span(compile_mcre(machine("decr")).system).second;
  if (hi != 2) o.fail("mcre/decr peaks at " + std::to_string(hi));
  for (auto m : kMachines) {
    auto ts = span(compile_ts(machine(m)).system);
    if (ts != std::pair<std::size_t, std::size_t>{7, 7})
      o.fail(std::string("ts/") + m + " " + std::to_string(ts.first) + ".." + std::to_string(ts.second));
    auto mob = span(compile_mobile(machine(m)).system);
    if (mob != std::pair<std::size_t, std::size_t>{3, 3})
      o.fail(std::string("mobile/") + m + " " + std::to_string(mob.first) + ".." + std::to_string(mob.second));
  }
  if (o.pass) o.detail = "mcre max 2, ts 7, mobile 3";
  return o;
}

std::function<bool(std::uint32_t)> allowed_for(const PSystem& sys, const StepChoice& c, std::uint64_t step) {
  using K = ControlMode::Kind;
  const auto& ctl = sys.control;
  if (ctl.kind == K::LabelSelection) {
    for (const auto& s : ctl.sets)
      if (s.name == c.selection) return oracle::mask_for(sys, s);
    return [](std::uint32_t) { return false; };
  }
  if (ctl.kind == K::Controlled) {
    std::size_t idx = ctl.periodic ? ctl.schedule[step % ctl.schedule.size()] : ctl.schedule[step];
    return oracle::mask_for(sys, ctl.sets[idx]);
  }
  return [](std::uint32_t) { return true; };
}

Outcome maximality() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::size_t choices_checked = 0;
  for (auto mode : {ControlMode::Kind::Plain, ControlMode::Kind::LabelSelection, ControlMode::Kind::TargetSelection,
                    ControlMode::Kind::Controlled}) {
    for (int i = 0; i < 1000; ++i) {
      auto rc = oracle::random_case(rng, mode);
      Engine e(rc.sys);
      auto choices = e.enumerate(rc.cfg, rc.step);
      std::set<oracle::Instances> got;
      for (const auto& c : choices) {
        got.insert(c.instances);
        ++choices_checked;
        bool tg = mode == ControlMode::Kind::TargetSelection;
        if (!oracle::non_extendable(rc.sys, rc.cfg, c, allowed_for(rc.sys, c, rc.step), tg))
          o.fail(to_string(mode) + " case " + std::to_string(i) + ": extendable choice " + e.render_choice(c));
      }
      if (got.size() != choices.size()) o.fail(to_string(mode) + " case " + std::to_string(i) + ": duplicates");
      if (got != oracle::naive_step(rc.sys, rc.cfg, rc.step))
        o.fail(to_string(mode) + " case " + std::to_string(i) + ": differs from the naive enumerator\n" +
               render_system(rc.sys));
    }
  }
  if (o.pass) o.detail = "4000 configurations, " + std::to_string(choices_checked) + " choices";
  return o;
}

Outcome trap() {
  Outcome o;
  std::uint64_t visited = 0;
  for (auto c : all_constructions())
    for (auto m : kMachines) {
      auto a = compile(machine(m), c);
      auto it = a.system.alphabet.find("#");
      if (!it) continue;  // membrane creation has no trap symbol
      Bounds b;
      b.max_steps = 60;
      ExploreOptions opt;
      opt.prune_absorbing = false;
      opt.taint = *it;
      auto rep = explore(a.system, b, opt);
      visited += rep.visited;
      if (rep.taint_counterexamples)
        o.fail(to_string(c) + "/" + m + ": " + std::to_string(rep.taint_counterexamples) + " counterexamples");
    }
  if (o.pass) o.detail = "0 counterexamples over " + std::to_string(visited) + " states";
  return o;
}

Outcome mutation() {
  Outcome o;
  for (auto c : {"ls", "ts", "mobile"}) {
    std::string caught;
    for (auto m : kMachines) {
      auto r = run(std::string("compare ") + machine_path(m) + " -c " + c + " --drop-guards");
      if (r.code == 1) caught += caught.empty() ? m : std::string(",") + m;
      else if (r.code != 0) o.fail(std::string(c) + "/" + m + " exit " + std::to_string(r.code));
    }
    if (caught.empty()) o.fail(std::string(c) + ": no machine detects the missing guards");
    else o.detail += (o.detail.empty() ? "" : "; ") + std::string(c) + " caught by " + caught;
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  for (auto c : all_constructions())
    for (auto m : kMachines) {
      std::string file = std::string(PCAT_WORK_DIR) + "/accept_" + to_string(c) + "_" + m + ".psys";
      auto comp = run("compile " + machine_path(m) + " -c " + to_string(c) + " -o " + file);
      if (comp.code != 0) {
        o.fail("compile " + to_string(c) + "/" + m + " failed");
        continue;
      }
      for (auto fmt : {"text", "json"}) {
        auto one = run("explore " + file + " --jobs 1 --format " + fmt);
        auto eight = run("explore " + file + " --jobs 8 --format " + fmt);
        if (one.code != 0 || eight.code != 0 || one.out != eight.out)
          o.fail(to_string(c) + "/" + m + " " + fmt + " reports differ");
      }
    }
  if (o.pass) o.detail = "40 report pairs byte-identical";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {"oracle equivalence matrix", oracle_matrix},
      {"label selection step-exactness", ls_step_exact},
      {"time-varying period six", tv_period},
      {"membrane budget", membrane_budget},
      {"maximality against brute force", maximality},
      {"trap prevents halting", trap},
      {"guard mutation detected", mutation},
      {"worker count determinism", determinism},
  };
  int failed = 0, n = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << ++n << " " << c.name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
