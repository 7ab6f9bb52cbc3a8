#include <algorithm>
#include <set>
#include <random>

#include "doctest.h"
#include "oracle/rm_paths.hpp"
#include "pcat/compilers.hpp"
#include "pcat/explorer.hpp"
#include "pcat/system_text.hpp"
#include "support.hpp"

using namespace pcat;
using namespace pcat::test;

namespace {

const Rule* rule_by_label(const PSystem& sys, const std::string& label) {
  for (const auto& r : sys.rules)
    if (r.label == label) return &r;
  return nullptr;
}

Configuration single(const PSystem& sys, std::initializer_list<const char*> objects) {
  Configuration cfg{{}, {sys.initial.skin.label, {}, {}}};
  for (auto o : objects) cfg.skin.contents.add(sym(sys, o));
  return cfg;
}

bool every_choice_uses(const PSystem& sys, const Configuration& cfg, std::uint64_t step, const std::string& label) {
  Engine e(sys);
  auto cs = e.enumerate(cfg, step);
  if (cs.empty()) return false;
  for (const auto& c : cs) {
    bool found = false;
    for (const auto& [ri, k] : c.instances) found = found || sys.rules[ri.rule].label == label;
    if (!found) return false;
  }
  return true;
}

std::set<std::vector<Count>> values(const std::set<ParikhVector>& s) {
  std::set<std::vector<Count>> out;
  for (const auto& v : s) out.insert(v.values);
  return out;
}

}  // namespace

TEST_CASE("every construction yields a valid system that survives render and parse") {
  for (auto name : kMachines) {
    auto m = machine(name);
    for (auto c : all_constructions()) {
      CAPTURE(name);
      CAPTURE(to_string(c));
      auto a = compile(m, c);
      CHECK(validate_system(a.system).empty());
      CHECK(a.system.output.environment);
      std::vector<std::string> order;
      for (auto s : a.system.output_order) order.push_back(a.system.alphabet.name(s));
      std::vector<std::string> want;
      for (std::uint32_t r = 3; r <= m.registers; ++r) want.push_back("a_" + std::to_string(r));
      CHECK(order == want);
      std::string text = render_system(a.system);
      CHECK(text.find("construction: " + to_string(c)) != std::string::npos);
      PSystem back = parse_system(text);
      CHECK(validate_system(back).empty());
      CHECK(render_system(back) == text);
      auto rule_set = [](const PSystem& s) {
        std::multiset<std::string> out;
        for (const auto& r : s.rules) out.insert(r.region + "/" + r.label + ": " + describe(r, s.alphabet));
        return out;
      };
      CHECK(rule_set(back) == rule_set(a.system));
      CHECK(canonicalize(start(back), back.alphabet) == canonicalize(start(a.system), a.system.alphabet));
      bool has_sub = std::any_of(m.program.begin(), m.program.end(),
                                 [](const Instruction& i) { return i.op == Instruction::Op::Sub; });
      if (has_sub && c != Construction::Tv && c != Construction::Mcre) CHECK_FALSE(a.guard_rules.empty());
    }
  }
}

TEST_CASE("construction names") {
  for (auto c : all_constructions()) CHECK(construction_from_string(to_string(c)) == c);
  CHECK_FALSE(construction_from_string("nope"));
  CHECK_THROWS_AS(compile_ls(parse_machine("registers 3\nl0: SUB(3) lh lh\nlh: HALT\n")), CompileError);
}

TEST_CASE("label selection: single-ADD machine") {
  auto a = compile_ls(machine("add1"));
  const PSystem& s = a.system;
  const Rule* l0 = rule_by_label(s, "l0");
  REQUIRE(l0);
  CHECK(describe(*l0, s.alphabet) == "l0 -> lh (a_3,out)");
  CHECK(s.control.kind == ControlMode::Kind::LabelSelection);
  CHECK(canonicalize(start(s), s.alphabet) == "1{c d l0} env{-}");
  std::set<std::string> names;
  for (const auto& set : s.control.sets) names.insert(set.name);
  CHECK(names.count("trap"));
}

TEST_CASE("label selection: rule counts match a hand count") {
  // guards (one per non-halting label) + finishing rule + ADD rules (two when
  // the branches differ) + two per SUB + shared l<r>, l<r'>, l<d> + trap.
  CHECK(compile_ls(machine("add1")).system.rules.size() == 1 + 1 + 1 + 0 + 0 + 1);
  CHECK(compile_ls(machine("decr")).system.rules.size() == 5 + 1 + 3 + 4 + 3 + 1);
  CHECK(compile_ls(machine("two_out")).system.rules.size() == 6 + 1 + 7 + 2 + 3 + 1);
}

TEST_CASE("label selection: wrong zero guess traps") {
  auto a = compile_ls(machine("decr"));
  const PSystem& s = a.system;
  // At l1 with register 1 holding one copy, the zero set rewrites a_1 to #.
  Configuration cfg = single(s, {"c", "d", "l1", "a_1"});
  Engine e(s);
  bool trapped = false, decremented = false;
  for (const auto& ch : e.enumerate(cfg, 0)) {
    auto n = e.apply(cfg, ch);
    if (n.skin.contents.count(sym(s, "#"))) trapped = true;
    if (n.skin.contents == single(s, {"c", "d", "l2"}).skin.contents) decremented = true;
  }
  CHECK(trapped);
  CHECK(decremented);
}

TEST_CASE("target selection: fixed seven membranes") {
  auto a = compile_ts(machine("decr"));
  const PSystem& s = a.system;
  CHECK(membrane_count(s.initial) == 7);
  for (const auto& r : s.rules) {
    CHECK_FALSE(r.dissolves);
    CHECK(r.kind != RuleKind::CatalyticCreate);
  }
  CHECK(canonicalize(start(s), s.alphabet) == "1{l0}[2{c},3{-},4{-},5{-},6{-},7{-}] env{-}");
  // A SUB label that lands in the ADD membrane is turned into the trap.
  Configuration cfg = start(s);
  cfg.skin.contents = {};
  cfg.skin.children[5].contents.add(sym(s, "l1"));
  REQUIRE(cfg.skin.children[5].label == "7");
  Engine e(s);
  auto cs = e.enumerate(cfg, 0);
  REQUIRE_FALSE(cs.empty());
  for (const auto& ch : cs) CHECK(e.apply(cfg, ch).skin.contents.count(sym(s, "#")) == 1);
  // Those guards are the mutation family.
  for (auto idx : a.guard_rules) {
    CHECK(s.rules[idx].region == "7");
    CHECK(s.rules[idx].rhs.size() == 1);
    CHECK(s.alphabet.name(s.rules[idx].rhs[0].symbol) == "#");
  }
}

TEST_CASE("time-varying: blocking and wrong guesses") {
  auto a = compile_tv(machine("decr"));
  const PSystem& s = a.system;
  CHECK(s.control.period() == 6);
  CHECK(a.steps.period == 6);
  Engine e(s);
  // Phase 2: the catalyst is kept busy by the tilde label; the only way to
  // reach a_1 instead is to let the label trap.
  Configuration busy = single(s, {"c", "l1~", "a_1"});
  auto cs = e.enumerate(busy, 1);
  CHECK(cs.size() == 2);
  for (const auto& ch : cs) {
    auto n = e.apply(busy, ch);
    if (n.skin.contents.count(sym(s, "#")) == 0) CHECK(n.skin.contents == busy.skin.contents);
  }
  // Phase 3: guessed a decrement but no a_1' was produced.
  Configuration wrong = single(s, {"c", "l1_barminus", "h"});
  CHECK(every_choice_uses(s, wrong, 2, "u3_9"));
  CHECK(describe(*rule_by_label(s, "u3_9"), s.alphabet) == "c h -> c '#'");
  // The halting label at a cycle boundary halts under both halting modes.
  Configuration done = single(s, {"c", "lh"});
  CHECK(e.is_halting(done, 0));
  CHECK(e.is_halting(done, 6));
  auto weak = compile_tv(machine("decr"), true);
  CHECK(Engine(weak.system).is_halting(done, 0));
}

TEST_CASE("time-varying normal form") {
  auto m = machine("two_out");
  auto n = normalize_halt_via_zero_test2(m);
  CHECK(rm_validate(n).empty());
  for (const auto& i : n.program) {
    if (i.op == Instruction::Op::Halt) continue;
    bool zero_test_2 = i.op == Instruction::Op::Sub && i.reg == 2;
    if (i.next == n.halt_label()) CHECK(false);
    if (i.alt == n.halt_label()) CHECK(zero_test_2);
  }
  CHECK(values(rm_explore(n, 40).outputs) == values(rm_explore(m, 40).outputs));
}

TEST_CASE("decrement normal form") {
  auto m = parse_machine("registers 3\nl0: ADD(1) l1 l1\nl1: ADD(3) l2 l2\nl2: SUB(1) lh l0\nlh: HALT\n");
  auto n = normalize_decrement_to_halt(m);
  CHECK(rm_validate(n).empty());
  for (const auto& i : n.program)
    if (i.op == Instruction::Op::Sub) CHECK(i.next != n.halt_label());
  CHECK(values(rm_explore(n, 30).outputs) == values(rm_explore(m, 30).outputs));
}

TEST_CASE("membrane creation: both branches of a decrement") {
  auto a = compile_mcre(machine("decr"));
  const PSystem& s = a.system;
  CHECK(s.variant.creation);
  CHECK(s.variant.targets_labeled);
  CHECK(a.steps.add == 2);
  CHECK(a.steps.sub_zero == 4);
  CHECK(a.steps.sub_decrement == 4);
  // l1: SUB(1) l2 l3 with a_1 present: four steps later c l2 d.
  auto full = reach(s, single(s, {"c", "d", "l1", "a_1"}), 0, 4);
  CHECK(full.count("1{c d l2} env{-}"));
  // l3: SUB(1) l4 lh with register 1 empty: c l_k d (the halting jump goes
  // through the finishing label).
  auto empty = reach(s, single(s, {"c", "d", "l3"}), 0, 4);
  CHECK(empty.count("1{c d lfin} env{-}"));
  // First step: the membrane is created while d primes.
  auto one = reach(s, single(s, {"c", "d", "l1", "a_1"}), 0, 1);
  CHECK(one.count("1{a_1 c d'}[2{l1}] env{-}"));
}

TEST_CASE("membrane creation never exceeds two membranes") {
  for (auto name : kMachines) {
    auto a = compile_mcre(machine(name));
    Bounds b;
    b.max_steps = 60;
    auto rep = explore(a.system, b);
    CAPTURE(name);
    CHECK(rep.max_membranes <= 2);
    CHECK(rep.min_membranes == 1);
  }
}

TEST_CASE("mobile catalyst: structure and hazards") {
  auto a = compile_mobile(machine("decr"));
  const PSystem& s = a.system;
  CHECK(s.variant.mobile);
  CHECK(canonicalize(start(s), s.alphabet) == "1{c l0}[2{-},3{-}] env{-}");
  for (const auto& r : s.rules) {
    for (const auto& o : r.rhs) CHECK(o.target.kind != TargetKind::InLabel);
    CHECK(r.catalyst_target.kind != TargetKind::InLabel);
    CHECK((r.catalyst_target.kind != TargetKind::Out || r.region != "1"));
  }
  Engine e(s);
  // c and l1 may go to different membranes; those branches never halt.
  Configuration at_sub = start(s);
  at_sub.skin.contents = Multiset{{sym(s, "c"), 1}, {sym(s, "l1"), 1}};
  auto cs = e.enumerate(at_sub, 0);
  CHECK(cs.size() == 4);
  for (const auto& ch : cs) {
    auto n = e.apply(at_sub, ch);
    normalize(n, s.alphabet);
    bool together = n.skin.children[0].contents.total() != 1;
    bool right = n.skin.children[0].contents.total() == 2;  // membrane 2 serves register 1
    if (together && right) continue;
    PSystem from = s;
    from.initial = n;
    Bounds b;
    b.max_steps = 30;
    ExploreOptions opt;
    opt.prune_absorbing = false;
    CHECK(explore(from, b, opt).results.empty());
  }
  // Entering the wrong membrane together: only the label guard applies.
  Configuration wrong = start(s);
  wrong.skin.children[1].contents = Multiset{{sym(s, "c"), 1}, {sym(s, "l1"), 1}};
  for (const auto& ch : e.enumerate(wrong, 0)) CHECK(e.apply(wrong, ch).skin.children[1].contents.count(sym(s, "#")) == 1);
}

TEST_CASE("constructions agree with the machine on random small machines") {
  std::mt19937_64 rng(99);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  for (int trial = 0; trial < 12; ++trial) {
    // 3..5 instructions over registers 1..4, last one HALT.
    std::size_t n = 3 + pick(3);
    std::string text = "registers 4\n";
    auto lab = [&](std::size_t i) { return i + 1 == n ? std::string("lh") : "l" + std::to_string(i); };
    for (std::size_t i = 0; i + 1 < n; ++i) {
      auto forward = [&] { return lab(i + 1 + pick(n - i - 1)); };
      if (pick(3) == 0) {
        text += lab(i) + ": SUB(" + std::to_string(1 + pick(2)) + ") " + forward() + " " + forward() + "\n";
      } else {
        text += lab(i) + ": ADD(" + std::to_string(1 + pick(4)) + ") " + forward() + " " + forward() + "\n";
      }
    }
    text += "lh: HALT\n";
    CAPTURE(text);
    auto m = parse_machine(text);
    REQUIRE(rm_validate(m).empty());
    auto paths = oracle::rm_paths(m, 20);
    // Keep machines that respect the halting convention.
    if (!rm_explore(m, 20).violations.empty()) continue;
    for (auto c : all_constructions()) {
      CAPTURE(to_string(c));
      auto a = compile(m, c);
      Bounds b;
      b.max_steps = 120;
      auto rep = explore(a.system, b);
      CHECK_FALSE(rep.truncated.any());  // forward-only jumps terminate
      CHECK(values(rep.results) == paths.outputs);
    }
  }
}
