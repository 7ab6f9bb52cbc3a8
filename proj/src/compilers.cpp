#include "pcat/compilers.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "pcat/system_text.hpp"

namespace pcat {

std::string to_string(Construction c) {
  switch (c) {
    case Construction::Ls: return "ls";
    case Construction::Ts: return "ts";
    case Construction::Tv: return "tv";
    case Construction::Mcre: return "mcre";
    case Construction::Mobile: return "mobile";
  }
  return "?";
}

std::optional<Construction> construction_from_string(std::string_view s) {
  for (auto c : all_constructions())
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::vector<Construction> all_constructions() {
  return {Construction::Ls, Construction::Ts, Construction::Tv, Construction::Mcre, Construction::Mobile};
}

std::string StepCost::describe() const {
  if (period) return "every instruction takes one cycle of " + std::to_string(period) + " steps";
  std::ostringstream out;
  out << "ADD=" << add << " SUB(zero)=" << sub_zero << " SUB(decrement)=" << sub_decrement;
  return out.str();
}

namespace {

using Op = Instruction::Op;

std::string fresh_label(const RegisterMachine& m, std::string base) {
  while (m.find(base)) base += "_";
  return base;
}

void require_valid(const RegisterMachine& m) {
  auto v = rm_validate(m);
  if (v.empty()) return;
  std::string msg = "invalid register machine:";
  for (const auto& x : v) msg += "\n  " + x.where + ": " + x.message;
  throw CompileError(msg);
}

RhsObject here(Symbol s) { return {s, Target::here()}; }
RhsObject out(Symbol s) { return {s, Target::out()}; }
RhsObject in(Symbol s) { return {s, Target::in()}; }
RhsObject in_to(Symbol s, const std::string& label) { return {s, Target::in_label(label)}; }

Rule nc(const std::string& region, Symbol a, std::vector<RhsObject> rhs, bool dissolves = false) {
  Rule r;
  r.region = region;
  r.reactant = a;
  r.rhs = std::move(rhs);
  r.dissolves = dissolves;
  return r;
}

Rule cat(const std::string& region, Symbol c, Symbol a, std::vector<RhsObject> rhs, Target ct = Target::here()) {
  Rule r = nc(region, a, std::move(rhs));
  r.kind = RuleKind::Catalytic;
  r.catalyst = c;
  r.catalyst_target = std::move(ct);
  return r;
}

Rule create(const std::string& region, Symbol c, Symbol a, const std::string& label, Multiset contents) {
  Rule r = nc(region, a, {});
  r.kind = RuleKind::CatalyticCreate;
  r.catalyst = c;
  r.new_label = label;
  r.contents = std::move(contents);
  return r;
}

Rule labeled(std::string label, Rule r) {
  r.label = std::move(label);
  return r;
}

class Builder {
 public:
  Builder(const RegisterMachine& source, const RegisterMachine& m, Construction c) : m_(m) {
    art_.source = source;
    art_.normalized = m;
    art_.construction = c;
    for (std::uint32_t r = 1; r <= m.registers; ++r) regs_.push_back(sym(SymbolScheme::reg(r), "reg", std::to_string(r)));
    for (std::uint32_t r = 3; r <= m.registers; ++r) sys().output_order.push_back(regs_[r - 1]);
    sys().output.environment = true;
    std::ostringstream h;
    h << "construction: " << to_string(c) << "\n";
    h << "source machine (" << m.registers << " registers):";
    for (const auto& i : source.program) {
      h << "\n  " << i.label << ": ";
      if (i.op == Op::Halt) h << "HALT";
      else h << (i.op == Op::Add ? "ADD(" : "SUB(") << i.reg << ") " << i.next << " " << i.alt;
    }
    header_ = h.str();
  }

  PSystem& sys() { return art_.system; }
  const RegisterMachine& machine() const { return m_; }

  Symbol sym(const std::string& display, const std::string& kind, const std::string& base) {
    std::string key = kind + ":" + base;
    auto [it, fresh] = owner_.emplace(display, key);
    if (!fresh && it->second != key)
      throw CompileError("derived symbol '" + display + "' is ambiguous (" + it->second + " vs " + key +
                         "); rename the machine labels");
    return sys().alphabet.intern(display);
  }
  Symbol label(const std::string& l) { return sym(l, "label", l); }
  Symbol deco(const std::string& l, const std::string& kind, const std::string& display) {
    return sym(display, kind, l);
  }
  Symbol aux(const std::string& n) { return sym(n, "aux", n); }
  Symbol reg(std::uint32_t r) { return regs_.at(r - 1); }
  Symbol reg_prime(std::uint32_t r) { return sym(SymbolScheme::reg_prime(r), "reg'", std::to_string(r)); }

  std::uint32_t add(Rule r) {
    if (r.label.empty()) r.label = "r" + std::to_string(++auto_label_);
    if (!rule_labels_.insert(r.label).second) throw CompileError("duplicate rule label " + r.label);
    sys().rules.push_back(std::move(r));
    return static_cast<std::uint32_t>(sys().rules.size() - 1);
  }

  CompilationArtifact finish(StepCost steps) {
    art_.steps = steps;
    sys().header = header_ + "\nsteps per instruction: " + steps.describe();
    auto v = validate_system(sys());
    if (!v.empty()) throw CompileError("construction produced an invalid system: " + v.front().where + ": " + v.front().message);
    return std::move(art_);
  }

  void guard(std::uint32_t idx) { art_.guard_rules.push_back(idx); }

 private:
  const RegisterMachine& m_;
  CompilationArtifact art_;
  std::vector<Symbol> regs_;
  std::map<std::string, std::string> owner_;
  std::set<std::string> rule_labels_;
  std::string header_;
  int auto_label_ = 0;
};

std::vector<const Instruction*> with_op(const RegisterMachine& m, Op op, std::uint32_t reg = 0) {
  std::vector<const Instruction*> out;
  for (const auto& i : m.program)
    if (i.op == op && (reg == 0 || i.reg == reg)) out.push_back(&i);
  return out;
}

Membrane leaf(const std::string& label, Multiset contents = {}) { return Membrane{label, std::move(contents), {}}; }

}  // namespace

RegisterMachine normalize_decrement_to_halt(const RegisterMachine& m) {
  const std::string lh = m.halt_label();
  RegisterMachine out = m;
  std::map<std::uint32_t, std::string> pre;
  std::string never;
  for (auto& i : out.program) {
    if (i.op != Op::Sub || i.next != lh) continue;
    if (!pre.count(i.reg)) pre[i.reg] = fresh_label(m, "lpre" + std::to_string(i.reg));
    i.next = pre[i.reg];
  }
  if (pre.empty()) return out;
  never = fresh_label(m, "lnever");
  for (const auto& [r, l] : pre) out.program.push_back({l, Op::Sub, r, never, lh, 0});
  out.program.push_back({never, Op::Add, 1, never, never, 0});
  return out;
}

RegisterMachine normalize_halt_via_zero_test2(const RegisterMachine& m) {
  const std::string lh = m.halt_label();
  RegisterMachine out = m;
  std::string pre = fresh_label(m, "lpre");
  bool used = false;
  for (auto& i : out.program) {
    if (i.op == Op::Halt) continue;
    if (i.next == lh) {
      i.next = pre;
      used = true;
    }
    if (i.alt == lh && !(i.op == Op::Sub && i.reg == 2)) {
      i.alt = pre;
      used = true;
    }
  }
  if (!used) return out;
  std::string never = fresh_label(m, "lnever");
  out.program.push_back({pre, Op::Sub, 2, never, lh, 0});
  out.program.push_back({never, Op::Add, 1, never, never, 0});
  return out;
}

// Label selection, one membrane. Each instruction is one step.
CompilationArtifact compile_ls(const RegisterMachine& source) {
  require_valid(source);
  RegisterMachine m = normalize_decrement_to_halt(source);
  Builder b(source, m, Construction::Ls);
  PSystem& s = b.sys();
  const std::string skin = "1";
  const std::string lh = m.halt_label();
  Symbol c = b.aux("c"), d = b.aux("d"), trap = b.aux(SymbolScheme::trap);
  s.catalysts = {c};
  std::vector<std::string> live;
  for (const auto& i : m.program) {
    b.label(i.label);
    if (i.op != Op::Halt) live.push_back(i.label);
  }
  s.initial.skin = leaf(skin, Multiset{{c, 1}, {d, 1}, {b.label(m.initial()), 1}});
  s.control.kind = ControlMode::Kind::LabelSelection;
  auto& sets = s.control.sets;

  // A wrongly selected set that still contains a guard traps on the present label.
  std::map<std::string, std::string> guard_of;
  for (const auto& x : live) {
    std::string name = "g<" + x + ">";
    b.add(labeled(name, nc(skin, b.label(x), {here(trap)})));
    guard_of[x] = name;
  }
  auto guards_except = [&](const std::string& li) {
    std::vector<std::string> out;
    for (const auto& x : live)
      if (x != li) out.push_back(guard_of[x]);
    return out;
  };
  bool fin_needed = false;
  for (const auto& i : m.program)
    if (i.op != Op::Halt && (i.next == lh || i.alt == lh)) fin_needed = true;
  if (fin_needed) b.add(labeled("l<fin>", nc(skin, d, {})));
  auto finishing = [&](std::vector<std::string>& set, const std::string& li, const std::string& target) {
    if (target != lh) return;
    set.push_back("l<fin>");
    for (auto& g : guards_except(li)) set.push_back(g);
  };

  std::set<std::uint32_t> sub_regs;
  for (const auto* i : with_op(m, Op::Sub)) sub_regs.insert(i->reg);
  for (auto r : sub_regs) {
    std::string rs = std::to_string(r);
    b.add(labeled("l<" + rs + ">", cat(skin, c, b.reg(r), {})));
    b.guard(b.add(labeled("l<" + rs + "'>", cat(skin, c, b.reg(r), {here(trap)}))));
  }
  if (!sub_regs.empty()) b.add(labeled("l<d>", cat(skin, c, d, {here(trap)})));

  for (const auto& i : m.program) {
    Symbol li = b.label(i.label);
    std::string li2 = SymbolScheme::prime(i.label);
    if (i.op == Op::Add) {
      auto produce = [&](const std::string& l) {
        RhsObject a = i.reg <= 2 ? here(b.reg(i.reg)) : out(b.reg(i.reg));
        return std::vector<RhsObject>{here(b.label(l)), a};
      };
      if (i.next == i.alt) {
        b.add(labeled(i.label, nc(skin, li, produce(i.next))));
        LabelSet set{"add_" + i.label, {i.label}};
        finishing(set.labels, i.label, i.next);
        sets.push_back(std::move(set));
        continue;
      }
      b.add(labeled(i.label, nc(skin, li, produce(i.next))));
      b.add(labeled(li2, nc(skin, li, produce(i.alt))));
      if ((i.next == lh) != (i.alt == lh)) {
        LabelSet first{"add_" + i.label + "_j", {i.label}}, second{"add_" + i.label + "_k", {li2}};
        finishing(first.labels, i.label, i.next);
        finishing(second.labels, i.label, i.alt);
        sets.push_back(std::move(first));
        sets.push_back(std::move(second));
      } else {
        sets.push_back({"add_" + i.label, {i.label, li2}});
      }
    } else if (i.op == Op::Sub) {
      std::string rs = std::to_string(i.reg);
      b.add(labeled(i.label, nc(skin, li, {here(b.label(i.next))})));
      b.add(labeled(li2, nc(skin, li, {here(b.label(i.alt))})));
      LabelSet dec{"dec_" + i.label, {i.label, "l<" + rs + ">", "l<d>"}};
      for (auto& g : guards_except(i.label)) dec.labels.push_back(g);
      LabelSet zero{"zero_" + i.label, {li2, "l<" + rs + "'>"}};
      finishing(zero.labels, i.label, i.alt);
      sets.push_back(std::move(dec));
      sets.push_back(std::move(zero));
    }
  }
  b.add(labeled("l<#>", nc(skin, trap, {here(trap)})));
  sets.push_back({"trap", {"l<#>"}});
  return b.finish({1, 1, 1, 0});
}

// Target selection, seven membranes.
CompilationArtifact compile_ts(const RegisterMachine& source) {
  require_valid(source);
  const RegisterMachine& m = source;
  Builder b(source, m, Construction::Ts);
  PSystem& s = b.sys();
  s.control.kind = ControlMode::Kind::TargetSelection;
  const std::string skin = "1", minus = "2", plus = "7";
  auto zero_of = [](std::uint32_t r) { return std::to_string(2 + r); };   // 3, 4
  auto mark_of = [](std::uint32_t r) { return std::to_string(4 + r); };   // 5, 6
  Symbol c = b.aux("c"), d = b.aux("d"), trap = b.aux(SymbolScheme::trap);
  s.catalysts = {c};

  std::vector<std::string> b_plus, b_minus;
  std::map<std::string, std::uint32_t> minus_reg;
  for (const auto& i : m.program) {
    if (i.op == Op::Add) b_plus.push_back(i.label);
    if (i.op == Op::Sub) {
      b_minus.push_back(i.label);
      minus_reg[i.label] = i.reg;
    }
  }
  auto p1 = [&](const std::string& l) { return b.deco(l, "prime", SymbolScheme::prime(l)); };
  auto p2 = [&](const std::string& l) { return b.deco(l, "prime2", SymbolScheme::prime(l, 2)); };
  for (const auto& i : m.program) b.label(i.label);
  Symbol a1 = b.reg(1), a2 = b.reg(2), a1p = b.reg_prime(1), a2p = b.reg_prime(2);

  // B' = B+ ∪ B- ∪ B-' ∪ B-''
  struct Tagged {
    Symbol sym;
    char kind;  // '+', '-', '\'', '"'
    std::uint32_t reg;
  };
  std::vector<Tagged> b_prime;
  for (const auto& l : b_plus) b_prime.push_back({b.label(l), '+', 0});
  for (const auto& l : b_minus) b_prime.push_back({b.label(l), '-', minus_reg[l]});
  for (const auto& l : b_minus) b_prime.push_back({p1(l), '\'', minus_reg[l]});
  for (const auto& l : b_minus) b_prime.push_back({p2(l), '"', minus_reg[l]});

  Membrane sk = leaf(skin, Multiset{{b.label(m.initial()), 1}});
  sk.children = {leaf(minus, Multiset{{c, 1}}), leaf(zero_of(1)), leaf(zero_of(2)),
                 leaf(mark_of(1)),          leaf(mark_of(2)),  leaf(plus)};
  s.initial.skin = std::move(sk);

  // Skin: route everything but output symbols inward.
  for (const auto& l : b_plus) b.add(nc(skin, b.label(l), {in(b.label(l))}));
  for (const auto& l : b_minus) b.add(nc(skin, b.label(l), {in(b.label(l))}));
  for (Symbol x : {a1, a2, a1p, a2p, trap}) b.add(nc(skin, x, {in(x)}));
  for (const auto& l : b_minus) b.add(nc(skin, p1(l), {in(p1(l)), in(d)}));
  for (std::uint32_t r = 3; r <= m.registers; ++r) b.add(nc(skin, b.reg(r), {out(b.reg(r))}));

  auto guards = [&](const std::string& region, auto allowed, bool mutation_family) {
    for (const auto& t : b_prime) {
      if (allowed(t)) continue;
      auto idx = b.add(nc(region, t.sym, {out(trap)}));
      if (mutation_family) b.guard(idx);
    }
  };

  // Membrane +: ADD instructions.
  for (const auto& i : m.program) {
    if (i.op != Op::Add) continue;
    for (const auto* target : {&i.next, &i.alt}) {
      if (target == &i.alt && i.alt == i.next) break;
      b.add(nc(plus, b.label(i.label), {out(b.label(*target)), out(b.reg(i.reg))}));
    }
  }
  guards(plus, [](const Tagged& t) { return t.kind == '+'; }, true);
  for (Symbol x : {a1, a2, trap}) b.add(nc(plus, x, {out(x)}));

  for (std::uint32_t r = 1; r <= 2; ++r) {
    Symbol ar = b.reg(r), other = b.reg(3 - r);
    auto in_r = [r](const Tagged& t) { return t.kind == '-' && t.reg == r; };
    // Zero test.
    const std::string z = zero_of(r);
    for (const auto* i : with_op(m, Op::Sub, r)) b.add(nc(z, b.label(i->label), {out(b.label(i->alt))}));
    b.add(nc(z, ar, {out(trap)}));
    guards(z, in_r, false);
    for (Symbol x : {other, trap}) b.add(nc(z, x, {out(x)}));
    // Marking.
    const std::string mk = mark_of(r);
    for (const auto* i : with_op(m, Op::Sub, r)) b.add(nc(mk, b.label(i->label), {out(p1(i->label))}));
    b.add(nc(mk, ar, {out(b.reg_prime(r))}));
    guards(mk, in_r, false);
    for (Symbol x : {other, trap}) b.add(nc(mk, x, {out(x)}));
  }

  // Membrane -: erase exactly one marked copy, then release the label.
  for (const auto& l : b_minus) {
    const Instruction* i = m.find(l);
    b.add(nc(minus, p1(l), {here(p2(l))}));
    b.add(nc(minus, p2(l), {here(trap)}));
    b.add(nc(minus, p2(l), {out(b.label(i->next))}));
  }
  for (std::uint32_t r = 1; r <= 2; ++r) b.add(cat(minus, c, b.reg_prime(r), {}));
  b.add(cat(minus, c, d, {here(trap)}));
  {
    Rule r = nc(minus, d, {});
    r.empty_target = Target::out();
    b.add(std::move(r));
  }
  for (std::uint32_t r = 1; r <= 2; ++r) b.add(nc(minus, b.reg_prime(r), {out(b.reg(r))}));
  guards(minus, [](const Tagged& t) { return t.kind == '"'; }, false);
  for (Symbol x : {a1, a2, trap}) b.add(nc(minus, x, {out(x)}));
  return b.finish({2, 2, 5, 0});
}

// Time-varying, one membrane, period six.
CompilationArtifact compile_tv(const RegisterMachine& source, bool weak) {
  require_valid(source);
  RegisterMachine m = normalize_halt_via_zero_test2(source);
  Builder b(source, m, Construction::Tv);
  PSystem& s = b.sys();
  const std::string skin = "1";
  Symbol c = b.aux("c"), h = b.aux("h"), trap = b.aux(SymbolScheme::trap);
  s.catalysts = {c};
  for (const auto& i : m.program) b.label(i.label);
  s.initial.skin = leaf(skin, Multiset{{c, 1}, {b.label(m.initial()), 1}});
  s.control.kind = ControlMode::Kind::Controlled;
  s.control.periodic = true;
  s.control.weak = weak;

  std::vector<std::string> live, sub1, sub2;
  for (const auto& i : m.program) {
    if (i.op == Op::Halt) continue;
    live.push_back(i.label);
    if (i.op == Op::Sub) (i.reg == 1 ? sub1 : sub2).push_back(i.label);
  }
  auto tl = [&](const std::string& l) { return b.deco(l, "tilde", SymbolScheme::tilde(l)); };
  auto hat = [&](const std::string& l) { return b.deco(l, "hat", SymbolScheme::hat(l)); };
  auto mn = [&](const std::string& l) { return b.deco(l, "minus", SymbolScheme::minus(l)); };
  auto zr = [&](const std::string& l) { return b.deco(l, "zero", SymbolScheme::zero(l)); };
  auto bmn = [&](const std::string& l) { return b.deco(l, "barminus", SymbolScheme::bar_minus(l)); };
  auto bzr = [&](const std::string& l) { return b.deco(l, "barzero", SymbolScheme::bar_zero(l)); };

  std::vector<std::string> names{"R1", "R2", "R3", "R4", "R5", "R6"};
  std::vector<std::vector<std::string>> phase(6);
  std::vector<int> counter(6, 0);
  auto put = [&](int p, Rule r) {
    r.label = "u" + std::to_string(p + 1) + "_" + std::to_string(++counter[p]);
    phase[p].push_back(r.label);
    b.add(std::move(r));
  };
  auto tilde_blocks = [&](int p) {
    for (const auto& l : live) {
      put(p, cat(skin, c, tl(l), {here(tl(l))}));
      put(p, nc(skin, tl(l), {here(trap)}));
    }
  };
  auto hat_blocks = [&](int p) {
    for (const auto& l : sub2) {
      put(p, cat(skin, c, hat(l), {here(hat(l))}));
      put(p, nc(skin, hat(l), {here(trap)}));
    }
  };
  auto keep_trap = [&](int p) { put(p, nc(skin, trap, {here(trap)})); };

  // R1: ADD instructions, SUB(1) guess, SUB(2) marking.
  for (const auto& i : m.program) {
    if (i.op != Op::Add) continue;
    RhsObject a = i.reg <= 2 ? here(b.reg(i.reg)) : out(b.reg(i.reg));
    put(0, cat(skin, c, b.label(i.label), {a, here(tl(i.next))}));
    if (i.alt != i.next) put(0, cat(skin, c, b.label(i.label), {a, here(tl(i.alt))}));
  }
  for (const auto& l : sub1) {
    put(0, cat(skin, c, b.label(l), {here(mn(l))}));
    put(0, cat(skin, c, b.label(l), {here(zr(l))}));
  }
  for (const auto& l : sub2) put(0, cat(skin, c, b.label(l), {here(hat(l))}));
  keep_trap(0);
  put(0, nc(skin, h, {}));

  // R2/R3 and R5/R6: register r decrement or zero test.
  auto sub_block = [&](std::uint32_t r, int first, const std::vector<std::string>& labels) {
    int second = first + 1;
    Symbol ar = b.reg(r), arp = b.reg_prime(r);
    put(first, cat(skin, c, ar, {here(arp)}));
    for (const auto& l : labels) {
      put(first, nc(skin, mn(l), {here(bmn(l)), here(h)}));
      put(first, nc(skin, zr(l), {here(bzr(l))}));
    }
    tilde_blocks(first);
    if (r == 1) hat_blocks(first);
    keep_trap(first);

    bool last = r == 2;
    for (const auto& l : labels) {
      const Instruction* i = m.find(l);
      Symbol to_zero = last ? b.label(i->alt) : tl(i->alt);
      Symbol to_dec = last ? b.label(i->next) : tl(i->next);
      put(second, cat(skin, c, bzr(l), {here(to_zero)}));
      put(second, nc(skin, bzr(l), {here(trap)}));
      put(second, nc(skin, bmn(l), {here(to_dec)}));
    }
    put(second, nc(skin, arp, {here(trap)}));
    put(second, cat(skin, c, arp, {}));
    put(second, cat(skin, c, h, {here(trap)}));
    if (last) {
      for (const auto& l : live) {
        put(second, cat(skin, c, tl(l), {here(b.label(l))}));
        put(second, nc(skin, tl(l), {here(trap)}));
      }
    } else {
      tilde_blocks(second);
      hat_blocks(second);
    }
    keep_trap(second);
  };
  sub_block(1, 1, sub1);

  // R4: SUB(2) guess.
  for (const auto& l : sub2) {
    put(3, cat(skin, c, hat(l), {here(mn(l))}));
    put(3, cat(skin, c, hat(l), {here(zr(l))}));
  }
  tilde_blocks(3);
  keep_trap(3);
  put(3, nc(skin, h, {}));

  sub_block(2, 4, sub2);

  for (int p = 0; p < 6; ++p) s.control.sets.push_back({names[p], phase[p]});
  s.control.schedule = {0, 1, 2, 3, 4, 5};
  return b.finish({6, 6, 6, 6});
}

// Membrane creation and dissolution, at most two membranes.
CompilationArtifact compile_mcre(const RegisterMachine& source) {
  require_valid(source);
  const std::string lh = source.halt_label();
  const std::string lfin = fresh_label(source, "lfin");
  RegisterMachine m = source;
  for (auto& i : m.program) {
    if (i.op == Op::Halt) continue;
    if (i.next == lh) i.next = lfin;
    if (i.alt == lh) i.alt = lfin;
  }
  Builder b(source, m, Construction::Mcre);
  PSystem& s = b.sys();
  const std::string skin = "1", final_region = "4";
  auto inner = [](std::uint32_t r) { return std::to_string(r + 1); };
  Symbol c = b.aux("c"), d = b.aux("d"), d1 = b.aux("d'"), d2 = b.aux("d''");
  s.catalysts = {c};
  s.variant.creation = true;
  s.variant.targets_labeled = true;
  for (const auto& i : m.program) b.label(i.label);
  Symbol fin = b.label(lfin);
  s.initial.skin = leaf(skin, Multiset{{c, 1}, {d, 1}, {b.label(m.initial()), 1}});
  auto p1 = [&](const std::string& l) { return b.deco(l, "prime", SymbolScheme::prime(l)); };
  auto p2 = [&](const std::string& l) { return b.deco(l, "prime2", SymbolScheme::prime(l, 2)); };
  auto tl = [&](const std::string& l) { return b.deco(l, "tilde", SymbolScheme::tilde(l)); };

  std::set<std::uint32_t> sub_regs;
  for (const auto* i : with_op(m, Op::Sub)) sub_regs.insert(i->reg);

  b.add(nc(skin, d, {here(d1)}));
  b.add(nc(skin, d1, {here(d)}));
  for (std::uint32_t r = 3; r <= m.registers; ++r) b.add(nc(skin, b.reg(r), {out(b.reg(r))}));
  for (const auto* i : with_op(m, Op::Add)) {
    b.add(nc(skin, b.label(i->label), {here(p1(i->label))}));
    for (const auto* target : {&i->next, &i->alt}) {
      if (target == &i->alt && i->alt == i->next) break;
      b.add(nc(skin, p1(i->label), {here(b.reg(i->reg)), here(b.label(*target))}));
    }
  }
  std::set<std::string> waiting;  // zero branches that must not be re-processed inside
  for (const auto* i : with_op(m, Op::Sub)) {
    b.add(create(skin, c, b.label(i->label), inner(i->reg), Multiset{{b.label(i->label), 1}}));
    b.add(cat(skin, c, p2(i->label), {here(b.label(i->next))}));
    const Instruction* k = m.find(i->alt);
    if (k && k->op == Op::Sub && k->reg == i->reg) waiting.insert(i->alt);
  }
  for (auto r : sub_regs) {
    b.add(cat(skin, c, b.reg(r), {in_to(b.reg(r), inner(r))}));
    b.add(nc(skin, d1, {in_to(d1, inner(r))}));
  }
  if (!sub_regs.empty()) b.add(nc(skin, d2, {here(d)}));
  for (const auto& l : waiting) b.add(nc(skin, tl(l), {here(b.label(l))}));

  for (auto r : sub_regs) {
    const std::string in_r = inner(r);
    s.creatable_regions.push_back(in_r);
    for (const auto* i : with_op(m, Op::Sub, r)) {
      b.add(nc(in_r, b.label(i->label), {here(p1(i->label))}));
      b.add(nc(in_r, p1(i->label), {here(p2(i->label))}));
      Symbol zero = waiting.count(i->alt) ? tl(i->alt) : b.label(i->alt);
      b.add(nc(in_r, p2(i->label), {here(zero)}));
    }
    b.add(nc(in_r, b.reg(r), {}, true));
    b.add(nc(in_r, d1, {here(d2)}));
    b.add(nc(in_r, d2, {here(d)}, true));
  }

  // Halting: park the final label in its own membrane and retire d.
  b.add(create(skin, c, fin, final_region, Multiset{{b.label(lh), 1}}));
  b.add(nc(skin, d1, {in_to(d1, final_region)}));
  s.creatable_regions.push_back(final_region);
  b.add(nc(final_region, d1, {}));
  return b.finish({2, 4, 4, 0});
}

// Mobile catalyst, three membranes, targets here/out/in only.
CompilationArtifact compile_mobile(const RegisterMachine& source) {
  require_valid(source);
  const RegisterMachine& m = source;
  Builder b(source, m, Construction::Mobile);
  PSystem& s = b.sys();
  const std::string skin = "1";
  auto inner = [](std::uint32_t r) { return std::to_string(r + 1); };
  Symbol c = b.aux("c"), trap = b.aux(SymbolScheme::trap);
  s.catalysts = {c};
  s.variant.mobile = true;
  for (const auto& i : m.program) b.label(i.label);
  Membrane sk = leaf(skin, Multiset{{c, 1}, {b.label(m.initial()), 1}});
  sk.children = {leaf(inner(1)), leaf(inner(2))};
  s.initial.skin = std::move(sk);
  auto p = [&](const std::string& l, int n) {
    return b.deco(l, "prime" + std::to_string(n), SymbolScheme::prime(l, n));
  };

  for (const auto* i : with_op(m, Op::Add)) {
    RhsObject a = i->reg <= 2 ? in(b.reg(i->reg)) : out(b.reg(i->reg));
    b.add(nc(skin, b.label(i->label), {here(b.label(i->next)), a}));
    if (i->alt != i->next) b.add(nc(skin, b.label(i->label), {here(b.label(i->alt)), a}));
  }
  auto subs = with_op(m, Op::Sub);
  for (const auto* i : subs) b.add(cat(skin, c, b.label(i->label), {in(b.label(i->label))}, Target::in()));
  for (const auto* i : subs) {
    b.add(cat(skin, c, p(i->label, 3), {here(b.label(i->next))}));
    b.add(nc(skin, p(i->label, 3), {here(trap)}));
  }
  b.add(nc(skin, trap, {here(trap)}));

  for (std::uint32_t r = 1; r <= 2; ++r) {
    const std::string reg = inner(r);
    b.add(nc(reg, b.reg(3 - r), {here(trap)}));
    b.add(nc(reg, trap, {here(trap)}));
    b.add(cat(reg, c, b.reg(r), {}, Target::out()));
    for (const auto* i : subs) {
      auto idx = b.add(nc(reg, b.label(i->label), {here(trap)}));
      if (r == 1) b.guard(idx);
    }
    for (const auto* i : with_op(m, Op::Sub, r)) {
      b.add(cat(reg, c, b.label(i->label), {here(p(i->label, 1))}));
      b.add(nc(reg, p(i->label, 1), {here(p(i->label, 2))}));
      b.add(cat(reg, c, p(i->label, 2), {out(b.label(i->alt))}, Target::out()));
      b.add(nc(reg, p(i->label, 2), {out(p(i->label, 3))}));
    }
  }
  return b.finish({1, 4, 5, 0});
}

CompilationArtifact compile(const RegisterMachine& m, Construction c, const CompileOptions& opt) {
  switch (c) {
    case Construction::Ls: return compile_ls(m);
    case Construction::Ts: return compile_ts(m);
    case Construction::Tv: return compile_tv(m, opt.weak);
    case Construction::Mcre: return compile_mcre(m);
    case Construction::Mobile: return compile_mobile(m);
  }
  throw CompileError("unknown construction");
}

void remove_rules(PSystem& sys, const std::vector<std::uint32_t>& indices) {
  std::set<std::uint32_t> drop(indices.begin(), indices.end());
  std::set<std::string> dropped_labels;
  std::vector<Rule> kept;
  for (std::uint32_t i = 0; i < sys.rules.size(); ++i) {
    if (drop.count(i)) {
      if (!sys.rules[i].label.empty()) dropped_labels.insert(sys.rules[i].label);
    } else {
      kept.push_back(std::move(sys.rules[i]));
    }
  }
  sys.rules = std::move(kept);
  for (auto& set : sys.control.sets)
    set.labels.erase(std::remove_if(set.labels.begin(), set.labels.end(),
                                    [&](const std::string& l) { return dropped_labels.count(l) > 0; }),
                     set.labels.end());
}

PSystem mutate_without_guards(const CompilationArtifact& a) {
  PSystem s = a.system;
  remove_rules(s, a.guard_rules);
  s.header += "\nmutation: guard family removed";
  return s;
}

}  // namespace pcat
