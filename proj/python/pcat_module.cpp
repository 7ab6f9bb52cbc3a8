#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "pcat/compilers.hpp"
#include "pcat/explorer.hpp"
#include "pcat/system_text.hpp"

namespace py = pybind11;
using namespace pcat;

namespace {

struct System {
  std::shared_ptr<const PSystem> sys;
  std::shared_ptr<const Engine> engine;

  explicit System(PSystem s) : sys(std::make_shared<const PSystem>(std::move(s))), engine(std::make_shared<Engine>(*sys)) {}
};

struct Config {
  System owner;
  Configuration cfg;
  std::uint64_t step = 0;

  std::string canonical() const { return canonicalize(cfg, owner.sys->alphabet); }
};

struct Choice {
  StepChoice choice;
  std::string text;
};

Bounds make_bounds(std::uint64_t max_steps, std::uint64_t max_objects, std::uint64_t max_configs, bool random,
                   std::uint64_t samples, std::uint64_t seed) {
  Bounds b;
  b.max_steps = max_steps;
  b.max_objects = max_objects;
  b.max_configs = max_configs;
  b.strategy = random ? Bounds::Strategy::Random : Bounds::Strategy::Exhaustive;
  b.samples = samples;
  b.seed = seed;
  return b;
}

py::object json_loads(const std::string& s) { return py::module_::import("json").attr("loads")(s); }

py::tuple as_tuple(const ParikhVector& v) { return py::cast(v.values); }

py::list vector_list(const std::set<ParikhVector>& s) {
  py::list out;
  for (const auto& v : s) out.append(as_tuple(v));
  return out;
}

RegisterMachine checked_machine(const std::string& text) {
  auto m = parse_machine(text);
  auto v = rm_validate(m);
  if (!v.empty()) {
    std::string msg = "invalid machine";
    for (const auto& x : v) msg += "\n  " + x.where + ": " + x.message;
    throw std::invalid_argument(msg);
  }
  return m;
}

Construction construction_arg(const std::string& name) {
  auto c = construction_from_string(name);
  if (!c) throw std::invalid_argument("unknown construction " + name);
  return *c;
}

py::list violations(const std::vector<Violation>& v) {
  py::list out;
  for (const auto& x : v) out.append(py::make_tuple(x.where, x.message));
  return out;
}

}  // namespace

PYBIND11_MODULE(pcat, m) {
  m.doc() = "Catalytic P system engine and register machine compilers";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<CompileError>(m, "CompileError", PyExc_ValueError);

  py::class_<Config>(m, "Config")
      .def_readonly("step", &Config::step)
      .def("canonical", &Config::canonical)
      .def("__str__", &Config::canonical)
      .def("__repr__", [](const Config& c) { return "<Config " + c.canonical() + ">"; })
      .def("is_halting", [](const Config& c) { return c.owner.engine->is_halting(c.cfg, c.step); })
      .def("result", [](const Config& c) { return as_tuple(c.owner.engine->result_of(c.cfg)); })
      .def("membranes", [](const Config& c) { return membrane_count(c.cfg); });

  py::class_<Choice>(m, "Choice")
      .def_property_readonly("selection", [](const Choice& c) { return c.choice.selection; })
      .def("__str__", [](const Choice& c) { return c.text; })
      .def("__repr__", [](const Choice& c) { return "<Choice " + c.text + ">"; });

  py::class_<System>(m, "System")
      .def_static("parse", [](const std::string& text) { return System(parse_system(text)); }, py::arg("text"))
      .def("render", [](const System& s) { return render_system(*s.sys); })
      .def("validate", [](const System& s) { return violations(validate_system(*s.sys)); })
      .def_property_readonly("header", [](const System& s) { return s.sys->header; })
      .def_property_readonly("rules", [](const System& s) {
        std::vector<std::string> out;
        for (const auto& r : s.sys->rules) out.push_back(describe(r, s.sys->alphabet));
        return out;
      })
      .def("absorbing_symbols", [](const System& s) {
        std::vector<std::string> out;
        for (auto x : absorbing_symbols(*s.sys)) out.push_back(s.sys->alphabet.name(x));
        return out;
      })
      .def("initial", [](const System& s) {
        Configuration c = s.sys->initial;
        normalize(c, s.sys->alphabet);
        return Config{s, std::move(c), 0};
      })
      .def("choices", [](const System& s, const Config& c) {
        std::vector<Choice> out;
        for (auto& ch : s.engine->enumerate(c.cfg, c.step)) {
          std::string text = s.engine->render_choice(ch);
          out.push_back(Choice{std::move(ch), std::move(text)});
        }
        return out;
      })
      .def("apply", [](const System& s, const Config& c, const Choice& ch) {
        Configuration next = s.engine->apply(c.cfg, ch.choice);
        normalize(next, s.sys->alphabet);
        return Config{s, std::move(next), c.step + 1};
      })
      .def(
          "explore",
          [](const System& s, std::uint64_t max_steps, std::uint64_t max_objects, std::uint64_t max_configs,
             bool random, std::uint64_t samples, std::uint64_t seed, unsigned jobs) {
            ExploreOptions opt;
            opt.jobs = jobs;
            ExplorationReport rep;
            {
              py::gil_scoped_release release;
              rep = explore(*s.sys, make_bounds(max_steps, max_objects, max_configs, random, samples, seed), opt);
            }
            return json_loads(report_json(*s.sys, rep));
          },
          py::arg("max_steps") = 200, py::arg("max_objects") = 200, py::arg("max_configs") = 200000,
          py::arg("random") = false, py::arg("samples") = 100, py::arg("seed") = 1, py::arg("jobs") = 1)
      .def(
          "run",
          [](const System& s, std::uint64_t seed, std::uint64_t max_steps) {
            Bounds b;
            b.max_steps = max_steps;
            auto r = sample_run(*s.sys, b, seed);
            py::dict d;
            d["halted"] = r.halted;
            d["stuck"] = r.stuck;
            d["steps"] = r.trace.size() - 1;
            d["result"] = r.result ? py::object(as_tuple(*r.result)) : py::none();
            d["trace"] = trace_text(r.trace);
            return d;
          },
          py::arg("seed") = 1, py::arg("max_steps") = 200);

  m.def("constructions", [] {
    std::vector<std::string> out;
    for (auto c : all_constructions()) out.push_back(to_string(c));
    return out;
  });

  m.def("validate_machine", [](const std::string& text) { return violations(rm_validate(parse_machine(text))); },
        py::arg("text"));

  m.def(
      "machine_results",
      [](const std::string& text, std::uint64_t max_steps) {
        auto r = rm_explore(checked_machine(text), max_steps);
        py::dict d;
        d["results"] = vector_list(r.outputs);
        d["truncated"] = r.truncated;
        return d;
      },
      py::arg("text"), py::arg("max_steps") = 200);

  m.def(
      "compile",
      [](const std::string& text, const std::string& construction, bool weak) {
        return System(compile(checked_machine(text), construction_arg(construction), CompileOptions{weak}).system);
      },
      py::arg("machine"), py::arg("construction") = "ls", py::arg("weak") = false);

  m.def(
      "compare",
      [](const std::string& text, const std::string& construction, std::uint64_t max_steps, bool drop_guards,
         unsigned jobs) {
        auto machine = checked_machine(text);
        auto a = compile(machine, construction_arg(construction));
        PSystem sys = drop_guards ? mutate_without_guards(a) : a.system;
        Bounds b;
        b.max_steps = max_steps;
        ExploreOptions opt;
        opt.jobs = jobs;
        ExplorationReport rep;
        RMReport oracle;
        {
          py::gil_scoped_release release;
          rep = explore(sys, b, opt);
          oracle = rm_explore(machine, max_steps);
        }
        auto got_bound = rep.truncated.any() ? std::optional<Count>(rep.pending_min_sum.value_or(0)) : std::nullopt;
        auto oracle_bound = oracle.truncated ? std::optional<Count>(oracle.pending_min_sum.value_or(0)) : std::nullopt;
        auto cmp = compare_sets(rep.results, got_bound, oracle.outputs, oracle_bound);
        py::dict d;
        d["equal"] = cmp.equal;
        d["exact"] = cmp.exact;
        d["below"] = cmp.below ? py::object(py::int_(*cmp.below)) : py::none();
        d["system"] = vector_list(rep.results);
        d["oracle"] = vector_list(oracle.outputs);
        d["spurious"] = vector_list({cmp.spurious.begin(), cmp.spurious.end()});
        d["missing"] = vector_list({cmp.missing.begin(), cmp.missing.end()});
        return d;
      },
      py::arg("machine"), py::arg("construction") = "ls", py::arg("max_steps") = 200, py::arg("drop_guards") = false,
      py::arg("jobs") = 1);
}
