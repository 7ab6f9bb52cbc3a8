#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pcat/membrane.hpp"
#include "pcat/multiset.hpp"

namespace pcat {

struct Instruction {
  enum class Op : std::uint8_t { Add, Sub, Halt };
  std::string label;
  Op op = Op::Halt;
  std::uint32_t reg = 0;  // 1-based
  std::string next;       // l2: ADD branch / SUB decrement branch
  std::string alt;        // l3: ADD branch / SUB zero branch
  std::size_t line = 0;   // source line, 0 when built in code
};

/// Registers 1 and 2 are working registers, 3..m hold the output.
struct RegisterMachine {
  std::uint32_t registers = 0;
  std::vector<Instruction> program;  // program[0] is the initial label

  const std::string& initial() const { return program.front().label; }
  /// The label of the HALT instruction (first one if several).
  std::string halt_label() const;
  const Instruction* find(std::string_view label) const;
  std::uint32_t outputs() const { return registers >= 2 ? registers - 2 : 0; }
};

RegisterMachine parse_machine(std::string_view text);
std::string render_machine(const RegisterMachine& m);

std::vector<Violation> rm_validate(const RegisterMachine& m);

struct RMState {
  std::string label;
  std::vector<Count> regs;  // regs[0] is register 1
  friend auto operator<=>(const RMState&, const RMState&) = default;
};

struct RMStepError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Successor states; throws RMStepError on a halted state.
std::vector<RMState> rm_step(const RegisterMachine& m, const RMState& s);

struct RMHalt {
  std::uint64_t length = 0;
  ParikhVector output;
  friend auto operator<=>(const RMHalt&, const RMHalt&) = default;
};

struct RMReport {
  std::set<ParikhVector> outputs;
  bool truncated = false;
  /// Halting states with a nonzero working register.
  std::vector<RMState> violations;
  /// Lowest output sum among states cut off by the step bound.
  std::optional<Count> pending_min_sum;
  /// (trace length, output) over every halting path, when requested.
  std::set<RMHalt> halts;
  std::map<ParikhVector, std::vector<std::string>> witnesses;
};

RMReport rm_explore(const RegisterMachine& m, std::uint64_t max_steps, bool all_paths = false);

}  // namespace pcat
