#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcat/compilers.hpp"
#include "pcat/explorer.hpp"
#include "pcat/system_text.hpp"

namespace {

using namespace pcat;

constexpr int kMismatch = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool is_machine_file(const std::string& path) {
  return path.size() >= 3 && path.compare(path.size() - 3, 3, ".rm") == 0;
}

PSystem load_system(const std::string& path) {
  try {
    return parse_system(slurp(path));
  } catch (const ParseError& e) {
    throw UsageError(path + ":" + e.what());
  }
}

RegisterMachine load_machine(const std::string& path) {
  RegisterMachine m;
  try {
    m = parse_machine(slurp(path));
  } catch (const ParseError& e) {
    throw UsageError(path + ":" + e.what());
  }
  auto v = rm_validate(m);
  if (!v.empty()) {
    std::string msg = path + ": invalid machine";
    for (const auto& x : v) msg += "\n  " + x.where + ": " + x.message;
    throw UsageError(msg);
  }
  return m;
}

Construction load_construction(const std::string& name) {
  auto c = construction_from_string(name);
  if (!c) throw UsageError("unknown construction " + name);
  return *c;
}

struct BoundFlags {
  Bounds bounds;
  unsigned jobs = 1;
  std::string format = "text";
  bool random = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-steps", bounds.max_steps, "Step bound")->capture_default_str();
    cmd->add_option("--max-objects", bounds.max_objects, "Object bound (outputs in the environment excluded)")
        ->capture_default_str();
    cmd->add_option("--max-configs", bounds.max_configs, "Distinct configurations bound")->capture_default_str();
    cmd->add_option("--samples", bounds.samples, "Runs in random mode")->capture_default_str();
    cmd->add_option("--seed", bounds.seed, "Seed for random mode")->capture_default_str();
    cmd->add_flag("--random", random, "Sample computations instead of exhaustive search");
    cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 256u))->capture_default_str();
    cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  }
  Bounds effective() const {
    Bounds b = bounds;
    if (random) b.strategy = Bounds::Strategy::Random;
    return b;
  }
};

void print_set(std::ostream& out, const char* name, const std::set<ParikhVector>& s) {
  out << name << " {";
  bool first = true;
  for (const auto& v : s) {
    out << (first ? "" : ", ") << to_string(v);
    first = false;
  }
  out << "}\n";
}

int cmd_compile(const std::string& machine, const std::string& construction, const std::string& out_file, bool weak) {
  auto m = load_machine(machine);
  auto a = compile(m, load_construction(construction), CompileOptions{weak});
  std::string text = render_system(a.system);
  if (out_file.empty() || out_file == "-") {
    std::cout << text;
  } else {
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw UsageError("cannot write " + out_file);
    out << text;
  }
  return 0;
}

int cmd_run(const std::string& path, const BoundFlags& f, bool trace) {
  auto sys = load_system(path);
  auto run = sample_run(sys, f.effective(), f.bounds.seed);
  if (trace) std::cout << trace_text(run.trace);
  if (run.halted)
    std::cout << "halted after " << run.trace.size() - 1 << " steps with " << to_string(*run.result) << "\n";
  else if (run.stuck)
    std::cout << "stuck after " << run.trace.size() - 1 << " steps\n";
  else
    std::cout << "bound reached after " << run.trace.size() - 1 << " steps\n";
  return 0;
}

int cmd_explore(const std::string& path, const BoundFlags& f, bool trace) {
  auto sys = load_system(path);
  ExploreOptions opt;
  opt.jobs = f.jobs;
  auto rep = explore(sys, f.effective(), opt);
  std::cout << (f.format == "json" ? report_json(sys, rep) : report_text(sys, rep));
  if (trace)
    for (const auto& [v, path_] : rep.witnesses)
      std::cout << "witness " << to_string(v) << ":\n" << trace_text(replay(sys, path_));
  return 0;
}

int cmd_compare(const std::string& machine, const std::string& construction, const BoundFlags& f, bool weak,
                bool drop_guards) {
  auto m = load_machine(machine);
  auto a = compile(m, load_construction(construction), CompileOptions{weak});
  PSystem sys = drop_guards ? mutate_without_guards(a) : a.system;
  ExploreOptions opt;
  opt.jobs = f.jobs;
  auto rep = explore(sys, f.effective(), opt);
  auto oracle = rm_explore(m, f.bounds.max_steps);
  auto got_bound = rep.truncated.any() ? std::optional<Count>(rep.pending_min_sum.value_or(0)) : std::nullopt;
  auto oracle_bound = oracle.truncated ? std::optional<Count>(oracle.pending_min_sum.value_or(0)) : std::nullopt;
  auto cmp = compare_sets(rep.results, got_bound, oracle.outputs, oracle_bound);
  if (f.format == "json") {
    nlohmann::ordered_json j;
    auto vecs = [](const std::set<ParikhVector>& s) {
      auto a = nlohmann::json::array();
      for (const auto& v : s) a.push_back(v.values);
      return a;
    };
    auto list = [](const std::vector<ParikhVector>& s) {
      auto a = nlohmann::json::array();
      for (const auto& v : s) a.push_back(v.values);
      return a;
    };
    j["construction"] = construction;
    j["equal"] = cmp.equal;
    j["exact"] = cmp.exact;
    j["below"] = cmp.below ? nlohmann::json(*cmp.below) : nlohmann::json(nullptr);
    j["system"] = vecs(rep.results);
    j["oracle"] = vecs(oracle.outputs);
    j["spurious"] = list(cmp.spurious);
    j["missing"] = list(cmp.missing);
    std::cout << j.dump(2) << "\n";
  } else {
    print_set(std::cout, "system", rep.results);
    print_set(std::cout, "oracle", oracle.outputs);
    if (cmp.below)
      std::cout << "compared below output sum " << *cmp.below << "\n";
    else
      std::cout << "compared exactly\n";
    std::cout << (cmp.equal ? "equal\n" : "MISMATCH\n") << render_diff(cmp);
  }
  return cmp.equal ? 0 : kMismatch;
}

int cmd_validate(const std::string& path) {
  std::vector<Violation> v;
  if (is_machine_file(path)) {
    v = rm_validate([&] {
      try {
        return parse_machine(slurp(path));
      } catch (const ParseError& e) {
        throw UsageError(path + ":" + e.what());
      }
    }());
  } else {
    v = validate_system(load_system(path));
  }
  for (const auto& x : v) std::cout << x.where << ": " << x.message << "\n";
  if (v.empty()) std::cout << "ok\n";
  return v.empty() ? 0 : kMismatch;
}

int cmd_describe(const std::string& path) {
  auto sys = load_system(path);
  std::istringstream header(sys.header);
  for (std::string line; std::getline(header, line);) std::cout << "# " << line << "\n";
  std::cout << "symbols: " << sys.alphabet.size() << "\n";
  std::cout << "membranes: " << membrane_count(sys.initial) << "\n";
  std::cout << "rules: " << sys.rules.size() << "\n";
  for (const auto& r : sys.rules) std::cout << "  " << describe(r, sys.alphabet) << "\n";
  auto absorbing = absorbing_symbols(sys);
  if (!absorbing.empty()) {
    std::cout << "absorbing:";
    for (auto s : absorbing) std::cout << " " << sys.alphabet.name(s);
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Catalytic P system engine and register machine compilers"};
  app.require_subcommand(1);

  std::string file, machine, construction = "ls", out_file;
  bool weak = false, trace = false, drop_guards = false;
  BoundFlags run_f, explore_f, compare_f;

  auto* c_compile = app.add_subcommand("compile", "Compile a register machine into a P system");
  c_compile->add_option("machine", machine, "Machine file (.rm)")->required()->check(CLI::ExistingFile);
  c_compile->add_option("-c,--construction", construction, "ls | ts | tv | mcre | mobile")->capture_default_str();
  c_compile->add_option("-o,--out", out_file, "Output file (default stdout)");
  c_compile->add_flag("--weak", weak, "Weak halting for the time-varying construction");

  auto* c_run = app.add_subcommand("run", "Run one random computation");
  c_run->add_option("system", file, "System file (.psys)")->required()->check(CLI::ExistingFile);
  c_run->add_flag("--trace", trace, "Print every step");
  run_f.attach(c_run);

  auto* c_explore = app.add_subcommand("explore", "Bounded exploration of all computations");
  c_explore->add_option("system", file, "System file (.psys)")->required()->check(CLI::ExistingFile);
  c_explore->add_flag("--trace", trace, "Print a witness trace per result");
  explore_f.attach(c_explore);

  auto* c_compare = app.add_subcommand("compare", "Compile, explore and compare with the machine's own results");
  c_compare->add_option("machine", machine, "Machine file (.rm)")->required()->check(CLI::ExistingFile);
  c_compare->add_option("-c,--construction", construction, "ls | ts | tv | mcre | mobile")->capture_default_str();
  c_compare->add_flag("--weak", weak, "Weak halting for the time-varying construction");
  c_compare->add_flag("--drop-guards", drop_guards, "Delete the construction's guard rules first");
  compare_f.attach(c_compare);

  auto* c_validate = app.add_subcommand("validate", "Check a machine (.rm) or system file");
  c_validate->add_option("file", file, "File")->required()->check(CLI::ExistingFile);

  auto* c_describe = app.add_subcommand("describe", "Summarize a system file");
  c_describe->add_option("system", file, "System file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*c_compile) return cmd_compile(machine, construction, out_file, weak);
    if (*c_run) return cmd_run(file, run_f, trace);
    if (*c_explore) return cmd_explore(file, explore_f, trace);
    if (*c_compare) return cmd_compare(machine, construction, compare_f, weak, drop_guards);
    if (*c_validate) return cmd_validate(file);
    if (*c_describe) return cmd_describe(file);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CompileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMismatch;
  }
  return kUsage;
}
