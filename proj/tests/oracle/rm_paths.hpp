#pragma once
// Path-by-path enumeration of a register machine's computations, with no
// state merging. Exponential; meant for a handful of steps.

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "pcat/register_machine.hpp"

namespace pcat::oracle {

struct RMPaths {
  std::set<std::vector<Count>> outputs;        // output registers of each halt
  std::set<std::pair<std::uint64_t, std::vector<Count>>> halts;  // (length, outputs)
  bool cut = false;                            // some path exceeded the bound
};

inline RMPaths rm_paths(const RegisterMachine& m, std::uint64_t max_steps) {
  RMPaths out;
  std::vector<Count> regs(m.registers, 0);
  std::function<void(const std::string&, std::uint64_t)> go = [&](const std::string& label, std::uint64_t depth) {
    const Instruction* i = nullptr;
    for (const auto& ins : m.program)
      if (ins.label == label) i = &ins;
    if (i->op == Instruction::Op::Halt) {
      std::vector<Count> o(regs.begin() + 2, regs.end());
      out.outputs.insert(o);
      out.halts.insert({depth, o});
      return;
    }
    if (depth == max_steps) {
      out.cut = true;
      return;
    }
    Count& r = regs[i->reg - 1];
    if (i->op == Instruction::Op::Add) {
      ++r;
      go(i->next, depth + 1);
      if (i->alt != i->next) go(i->alt, depth + 1);
      --r;
    } else if (r > 0) {
      --r;
      go(i->next, depth + 1);
      ++r;
    } else {
      go(i->alt, depth + 1);
    }
  };
  go(m.program.front().label, 0);
  return out;
}

}  // namespace pcat::oracle
