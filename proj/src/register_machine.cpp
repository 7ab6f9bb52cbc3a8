#include "pcat/register_machine.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "pcat/system_text.hpp"

namespace pcat {

std::string RegisterMachine::halt_label() const {
  for (const auto& i : program)
    if (i.op == Instruction::Op::Halt) return i.label;
  return {};
}

const Instruction* RegisterMachine::find(std::string_view label) const {
  for (const auto& i : program)
    if (i.label == label) return &i;
  return nullptr;
}

RegisterMachine parse_machine(std::string_view text) {
  static const std::regex header(R"(^\s*registers\s+(\d+)\s*$)");
  static const std::regex instr(
      R"(^\s*([^\s:#]+)\s*:\s*(?:(ADD|SUB)\s*\(\s*(\d+)\s*\)\s+([^\s#]+)(?:\s+([^\s#]+))?|(HALT))\s*$)");
  RegisterMachine m;
  bool have_header = false;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = raw.substr(0, raw.find('#'));
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    while (!line.empty() && (line.back() == '\r')) line.pop_back();
    std::size_t col = line.find_first_not_of(" \t") + 1;
    std::smatch g;
    if (!have_header) {
      if (!std::regex_match(line, g, header)) throw ParseError(number, col, "expected `registers N`");
      try {
        m.registers = static_cast<std::uint32_t>(std::stoul(g[1].str()));
      } catch (const std::exception&) {
        throw ParseError(number, col, "register count out of range");
      }
      have_header = true;
      continue;
    }
    if (!std::regex_match(line, g, instr)) throw ParseError(number, col, "expected `label: ADD(j) l2 l3`, `SUB(j) l2 l3` or `HALT`");
    Instruction ins;
    ins.label = g[1].str();
    ins.line = number;
    if (!seen.insert(ins.label).second) throw ParseError(number, col, "duplicate label " + ins.label);
    if (g[6].matched) {
      ins.op = Instruction::Op::Halt;
    } else {
      ins.op = g[2].str() == "ADD" ? Instruction::Op::Add : Instruction::Op::Sub;
      try {
        ins.reg = static_cast<std::uint32_t>(std::stoul(g[3].str()));
      } catch (const std::exception&) {
        throw ParseError(number, static_cast<std::size_t>(g.position(3)) + 1, "register index out of range");
      }
      ins.next = g[4].str();
      if (!g[5].matched && ins.op == Instruction::Op::Sub)
        throw ParseError(number, col, "SUB needs both a decrement and a zero branch");
      ins.alt = g[5].matched ? g[5].str() : ins.next;
    }
    m.program.push_back(std::move(ins));
  }
  if (!have_header) throw ParseError(number ? number : 1, 1, "missing `registers N` header");
  if (m.program.empty()) throw ParseError(number, 1, "machine has no instructions");
  return m;
}

std::string render_machine(const RegisterMachine& m) {
  std::ostringstream out;
  out << "registers " << m.registers << "\n";
  for (const auto& i : m.program) {
    out << i.label << ": ";
    switch (i.op) {
      case Instruction::Op::Halt: out << "HALT"; break;
      case Instruction::Op::Add: out << "ADD(" << i.reg << ") " << i.next << " " << i.alt; break;
      case Instruction::Op::Sub: out << "SUB(" << i.reg << ") " << i.next << " " << i.alt; break;
    }
    out << "\n";
  }
  return out.str();
}

std::vector<Violation> rm_validate(const RegisterMachine& m) {
  std::vector<Violation> out;
  auto where = [](const Instruction& i) {
    return "instruction " + i.label + (i.line ? " (line " + std::to_string(i.line) + ")" : "");
  };
  if (m.registers < 2) out.push_back({"machine", "needs at least the two working registers"});
  if (m.program.empty()) {
    out.push_back({"machine", "empty program"});
    return out;
  }
  std::set<std::string> labels;
  std::size_t halts = 0;
  for (const auto& i : m.program) {
    if (!labels.insert(i.label).second) out.push_back({where(i), "duplicate label"});
    if (i.op == Instruction::Op::Halt) ++halts;
  }
  if (halts != 1) out.push_back({"machine", "expected exactly one HALT, found " + std::to_string(halts)});
  if (m.program.front().op == Instruction::Op::Halt && m.program.size() > 1)
    out.push_back({where(m.program.front()), "initial instruction is HALT"});
  for (const auto& i : m.program) {
    if (i.op == Instruction::Op::Halt) continue;
    if (i.reg < 1 || i.reg > m.registers)
      out.push_back({where(i), "register " + std::to_string(i.reg) + " out of range 1.." + std::to_string(m.registers)});
    if (i.op == Instruction::Op::Sub && i.reg != 1 && i.reg != 2)
      out.push_back({where(i), "SUB on register " + std::to_string(i.reg) + "; only registers 1 and 2 decrement"});
    for (const auto* target : {&i.next, &i.alt})
      if (!labels.count(*target)) out.push_back({where(i), "jump to undefined label " + *target});
  }
  return out;
}

std::vector<RMState> rm_step(const RegisterMachine& m, const RMState& s) {
  const Instruction* i = m.find(s.label);
  if (!i) throw RMStepError("no instruction labeled " + s.label);
  if (i->op == Instruction::Op::Halt) throw RMStepError("stepping a halted state");
  RMState next = s;
  auto& reg = next.regs.at(i->reg - 1);
  if (i->op == Instruction::Op::Add) {
    ++reg;
    next.label = i->next;
    std::vector<RMState> out{next};
    if (i->alt != i->next) {
      next.label = i->alt;
      out.push_back(next);
    }
    return out;
  }
  if (reg > 0) {
    --reg;
    next.label = i->next;
  } else {
    next.label = i->alt;
  }
  return {next};
}

RMReport rm_explore(const RegisterMachine& m, std::uint64_t max_steps, bool all_paths) {
  RMReport rep;
  auto project = [&](const RMState& s) {
    ParikhVector v;
    for (std::size_t r = 2; r < s.regs.size(); ++r) v.values.push_back(s.regs[r]);
    return v;
  };
  // Layers are deduplicated on their own so every halting length survives.
  std::map<RMState, std::vector<std::string>> layer;
  layer.emplace(RMState{m.initial(), std::vector<Count>(m.registers, 0)}, std::vector<std::string>{m.initial()});
  for (std::uint64_t depth = 0; !layer.empty(); ++depth) {
    std::map<RMState, std::vector<std::string>> next;
    for (const auto& [s, trace] : layer) {
      const Instruction* ins = m.find(s.label);
      if (ins && ins->op == Instruction::Op::Halt) {
        if (s.regs.size() >= 2 && (s.regs[0] || s.regs[1])) {
          rep.violations.push_back(s);
          continue;
        }
        ParikhVector v = project(s);
        if (rep.outputs.insert(v).second) rep.witnesses[v] = trace;
        if (all_paths) rep.halts.insert({depth, v});
        continue;
      }
      if (depth >= max_steps) {
        rep.truncated = true;
        Count sum = project(s).sum();
        if (!rep.pending_min_sum || sum < *rep.pending_min_sum) rep.pending_min_sum = sum;
        continue;
      }
      for (auto& succ : rm_step(m, s)) {
        if (next.count(succ)) continue;
        auto t = trace;
        t.push_back(succ.label);
        next.emplace(std::move(succ), std::move(t));
      }
    }
    layer = std::move(next);
  }
  return rep;
}

}  // namespace pcat
