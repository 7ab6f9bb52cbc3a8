#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pcat/membrane.hpp"
#include "pcat/register_machine.hpp"

namespace pcat {

enum class Construction { Ls, Ts, Tv, Mcre, Mobile };

std::string to_string(Construction c);
std::optional<Construction> construction_from_string(std::string_view s);
std::vector<Construction> all_constructions();

struct CompileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Derived symbol names. Every construction goes through these so that the
/// mapping (base, decoration) -> name stays injective; the builders reject a
/// machine whose labels would make two derived names coincide.
struct SymbolScheme {
  static std::string prime(const std::string& l, int n = 1) { return l + std::string(static_cast<std::size_t>(n), '\''); }
  static std::string tilde(const std::string& l) { return l + "~"; }
  static std::string hat(const std::string& l) { return l + "_hat"; }
  static std::string minus(const std::string& l) { return l + "_minus"; }
  static std::string zero(const std::string& l) { return l + "_zero"; }
  static std::string bar_minus(const std::string& l) { return l + "_barminus"; }
  static std::string bar_zero(const std::string& l) { return l + "_barzero"; }
  static std::string reg(std::uint32_t r) { return "a_" + std::to_string(r); }
  static std::string reg_prime(std::uint32_t r) { return reg(r) + "'"; }
  static constexpr const char* trap = "#";
};

/// Simulation cost of one machine instruction, in P system steps.
struct StepCost {
  unsigned add = 0;
  unsigned sub_zero = 0;
  unsigned sub_decrement = 0;
  unsigned period = 0;  // nonzero when every instruction takes one full control cycle
  std::string describe() const;
};

struct CompilationArtifact {
  PSystem system;
  RegisterMachine source;
  RegisterMachine normalized;  // source after the construction's normal-form pass
  Construction construction = Construction::Ls;
  StepCost steps;
  /// Rules forming the guard family that the mutation test deletes.
  std::vector<std::uint32_t> guard_rules;
};

struct CompileOptions {
  bool weak = false;  // time-varying construction only
};

CompilationArtifact compile(const RegisterMachine& m, Construction c, const CompileOptions& opt = {});
CompilationArtifact compile_ls(const RegisterMachine& m);
CompilationArtifact compile_ts(const RegisterMachine& m);
CompilationArtifact compile_tv(const RegisterMachine& m, bool weak = false);
CompilationArtifact compile_mcre(const RegisterMachine& m);
CompilationArtifact compile_mobile(const RegisterMachine& m);

/// Normal-form passes (exposed for testing).
/// Decrement branches into the halt label go through a SUB on the same
/// register whose zero branch halts.
RegisterMachine normalize_decrement_to_halt(const RegisterMachine& m);
/// The halt label is only reached through a zero test on register 2.
RegisterMachine normalize_halt_via_zero_test2(const RegisterMachine& m);

/// Removes rules (and their labels from every label set).
void remove_rules(PSystem& sys, const std::vector<std::uint32_t>& indices);
/// Copy of the artifact's system with its guard family deleted.
PSystem mutate_without_guards(const CompilationArtifact& a);

}  // namespace pcat
