#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pcat/engine.hpp"
#include "pcat/register_machine.hpp"

namespace pcat::test {

inline RegisterMachine machine(const std::string& name) {
  std::ifstream in(std::string(PCAT_MACHINES_DIR) + "/" + name + ".rm");
  REQUIRE(in);
  std::ostringstream s;
  s << in.rdbuf();
  return parse_machine(s.str());
}

inline const char* const kMachines[] = {"add1", "even", "decr", "two_out"};

inline Configuration start(const PSystem& sys) {
  Configuration c = sys.initial;
  normalize(c, sys.alphabet);
  return c;
}

/// Canonical strings of every configuration exactly `depth` steps after
/// `cfg` (taken at step index `step`).
inline std::set<std::string> reach(const PSystem& sys, const Configuration& cfg, std::uint64_t step,
                                   std::uint64_t depth) {
  Engine e(sys);
  std::map<std::string, Configuration> layer{{canonicalize(cfg, sys.alphabet), cfg}};
  for (std::uint64_t d = 0; d < depth; ++d) {
    std::map<std::string, Configuration> next;
    for (const auto& [k, c] : layer)
      for (const auto& ch : e.enumerate(c, step + d)) {
        auto n = e.apply(c, ch);
        normalize(n, sys.alphabet);
        next.emplace(canonicalize(n, sys.alphabet), std::move(n));
      }
    layer = std::move(next);
  }
  std::set<std::string> out;
  for (const auto& [k, c] : layer) out.insert(k);
  return out;
}

inline Symbol sym(const PSystem& sys, const std::string& name) { return sys.alphabet.at(name); }

}  // namespace pcat::test
