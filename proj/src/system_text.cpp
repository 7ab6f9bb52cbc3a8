#include "pcat/system_text.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace pcat {

ParseError::ParseError(std::size_t line_, std::size_t column_, const std::string& message_)
    : std::runtime_error(std::to_string(line_) + ":" + std::to_string(column_) + ": " + message_),
      line(line_),
      column(column_),
      message(message_) {}

namespace {

struct Token {
  std::string text;
  bool quoted = false;
  Count power = 1;
  std::size_t col = 0;

  bool is(std::string_view p) const { return !quoted && text == p; }
};

struct Line {
  std::size_t number = 0;
  std::vector<Token> tokens;
};

bool is_punct(char ch) { return ch == '(' || ch == ')' || ch == '[' || ch == ']' || ch == ',' || ch == ':'; }

Count read_power(const std::string& digits, std::size_t line, std::size_t col) {
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ParseError(line, col, "malformed multiplicity '^" + digits + "'");
  try {
    return std::stoull(digits);
  } catch (const std::out_of_range&) {
    throw ParseError(line, col, "multiplicity out of range");
  }
}

Line lex(std::string_view text, std::size_t number) {
  Line out{number, {}};
  std::size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    std::size_t col = i + 1;
    if (ch == '#') break;  // comment (a `#` symbol must be quoted)
    if (is_punct(ch)) {
      out.tokens.push_back({std::string(1, ch), false, 1, col});
      ++i;
      continue;
    }
    if (ch == '\'') {
      auto close = text.find('\'', i + 1);
      if (close == std::string_view::npos) throw ParseError(number, col, "unterminated quoted symbol");
      Token t{std::string(text.substr(i + 1, close - i - 1)), true, 1, col};
      if (t.text.empty()) throw ParseError(number, col, "empty quoted symbol");
      i = close + 1;
      if (i < text.size() && text[i] == '^') {
        std::size_t j = i + 1;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        t.power = read_power(std::string(text.substr(i + 1, j - i - 1)), number, i + 1);
        i = j;
      }
      out.tokens.push_back(std::move(t));
      continue;
    }
    if (text.substr(i, 2) == "->") {
      out.tokens.push_back({"->", false, 1, col});
      i += 2;
      continue;
    }
    std::size_t j = i;
    // Quotes inside a word are primes (l0', l<1'>); only a leading quote opens a quoted token.
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && !is_punct(text[j]) &&
           text.substr(j, 2) != "->")
      ++j;
    Token t{std::string(text.substr(i, j - i)), false, 1, col};
    if (auto caret = t.text.rfind('^'); caret != std::string::npos && caret > 0 && t.text[0] != '@') {
      t.power = read_power(t.text.substr(caret + 1), number, col + caret);
      t.text.resize(caret);
    }
    out.tokens.push_back(std::move(t));
    i = j;
  }
  return out;
}

bool parse_bool(const Token& t, std::size_t line) {
  if (t.text == "true" || t.text == "yes" || t.text == "1") return true;
  if (t.text == "false" || t.text == "no" || t.text == "0") return false;
  throw ParseError(line, t.col, "expected true or false, got '" + t.text + "'");
}

class Parser {
 public:
  explicit Parser(std::string_view text) {
    std::size_t number = 0, start = 0;
    bool in_header = true;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view raw = text.substr(start, end - start);
      ++number;
      Line line = lex(raw, number);
      if (in_header) {
        auto first = raw.find_first_not_of(" \t\r");
        if (first != std::string_view::npos && raw[first] == '#') {
          std::string_view body = raw.substr(first + 1);
          if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
          while (!body.empty() && (body.back() == '\r' || body.back() == ' ')) body.remove_suffix(1);
          if (!sys_.header.empty()) sys_.header += '\n';
          sys_.header += body;
        } else if (!line.tokens.empty()) {
          in_header = false;
        }
      }
      if (!line.tokens.empty()) lines_.push_back(std::move(line));
      if (end == text.size()) break;
      start = end + 1;
    }
  }

  PSystem run() {
    bool have_skin = false;
    std::optional<std::string> control_kind;
    std::vector<std::pair<std::size_t, const Token*>> schedule_refs;
    while (pos_ < lines_.size()) {
      const Line& l = lines_[pos_++];
      const Token& head = l.tokens[0];
      const std::string& d = head.text;
      if (d == "@objects") {
        for (std::size_t i = 1; i < l.tokens.size(); ++i) declare(l, l.tokens[i]);
      } else if (d == "@catalysts") {
        for (std::size_t i = 1; i < l.tokens.size(); ++i) {
          Symbol s = symbol(l, l.tokens[i]);
          if (!sys_.is_catalyst(s)) sys_.catalysts.push_back(s);
        }
      } else if (d == "@membrane") {
        if (have_skin) throw ParseError(l.number, head.col, "only one top-level membrane (the skin) is allowed");
        have_skin = true;
        sys_.initial.skin = membrane(l);
      } else if (d == "@region") {
        region(l);
      } else if (d == "@environment") {
        sys_.initial.environment.add_all(multiset(l, 1, l.tokens.size()));
      } else if (d == "@output") {
        if (l.tokens.size() < 2) throw ParseError(l.number, head.col, "@output needs `env` or a membrane label");
        sys_.output.environment = l.tokens[1].is("env");
        sys_.output.label = sys_.output.environment ? "" : l.tokens[1].text;
        sys_.output_order.clear();
        for (std::size_t i = 2; i < l.tokens.size(); ++i) sys_.output_order.push_back(symbol(l, l.tokens[i]));
      } else if (d == "@variant") {
        for (std::size_t i = 1; i < l.tokens.size(); ++i) {
          const Token& t = l.tokens[i];
          auto eq = t.text.find('=');
          if (eq == std::string::npos) throw ParseError(l.number, t.col, "expected key=value");
          std::string key = t.text.substr(0, eq);
          Token value{t.text.substr(eq + 1), false, 1, t.col + eq + 1};
          if (key == "mobile") sys_.variant.mobile = parse_bool(value, l.number);
          else if (key == "creation") sys_.variant.creation = parse_bool(value, l.number);
          else if (key == "targets") {
            if (value.text == "labeled") sys_.variant.targets_labeled = true;
            else if (value.text == "plain") sys_.variant.targets_labeled = false;
            else throw ParseError(l.number, value.col, "targets must be labeled or plain");
          } else {
            throw ParseError(l.number, t.col, "unknown variant key '" + key + "'");
          }
        }
      } else if (d == "@control") {
        if (l.tokens.size() < 2) throw ParseError(l.number, head.col, "@control needs a mode");
        control_kind = l.tokens[1].text;
        using K = ControlMode::Kind;
        if (*control_kind == "plain") sys_.control.kind = K::Plain;
        else if (*control_kind == "labelsel") sys_.control.kind = K::LabelSelection;
        else if (*control_kind == "targets") sys_.control.kind = K::TargetSelection;
        else if (*control_kind == "controlled") sys_.control.kind = K::Controlled;
        else throw ParseError(l.number, l.tokens[1].col, "unknown control mode '" + *control_kind + "'");
        for (std::size_t i = 2; i < l.tokens.size(); ++i) {
          if (l.tokens[i].is("weak")) sys_.control.weak = true;
          else if (l.tokens[i].is("strong")) sys_.control.weak = false;
          else if (l.tokens[i].is("periodic")) sys_.control.periodic = true;
          else throw ParseError(l.number, l.tokens[i].col, "unknown control flag '" + l.tokens[i].text + "'");
        }
      } else if (d == "@set") {
        if (l.tokens.size() < 3 || !l.tokens[2].is(":"))
          throw ParseError(l.number, head.col, "expected `@set NAME: labels...`");
        LabelSet set{l.tokens[1].text, {}};
        for (const auto& s : sys_.control.sets)
          if (s.name == set.name) throw ParseError(l.number, l.tokens[1].col, "duplicate label set " + set.name);
        for (std::size_t i = 3; i < l.tokens.size(); ++i) set.labels.push_back(l.tokens[i].text);
        sys_.control.sets.push_back(std::move(set));
      } else if (d == "@schedule") {
        for (std::size_t i = 1; i < l.tokens.size(); ++i) schedule_refs.emplace_back(l.number, &l.tokens[i]);
      } else if (d == "@rule" || d == "@init" || d == "@end") {
        throw ParseError(l.number, head.col, d + " outside a membrane block");
      } else {
        throw ParseError(l.number, head.col, "unknown directive '" + d + "'");
      }
    }
    if (!have_skin) throw ParseError(lines_.empty() ? 1 : lines_.back().number, 1, "no @membrane block");
    for (const auto& [line, tok] : schedule_refs) {
      auto& sets = sys_.control.sets;
      auto it = std::find_if(sets.begin(), sets.end(), [&](const LabelSet& s) { return s.name == tok->text; });
      if (it == sets.end()) throw ParseError(line, tok->col, "schedule names unknown label set " + tok->text);
      sys_.control.schedule.push_back(static_cast<std::size_t>(it - sets.begin()));
    }
    return std::move(sys_);
  }

 private:
  void declare(const Line& l, const Token& t) {
    if (t.power != 1) throw ParseError(l.number, t.col, "multiplicity in a declaration");
    if (!t.quoted && (t.text == "." || t.text == "delta" || is_punct(t.text[0]) || t.text == "->"))
      throw ParseError(l.number, t.col, "'" + t.text + "' is reserved; quote it");
    declared_.insert(sys_.alphabet.intern(t.text).id);
  }

  Symbol symbol(const Line& l, const Token& t) const {
    auto s = sys_.alphabet.find(t.text);
    if (!s || !declared_.count(s->id) || (!t.quoted && is_punct(t.text[0])))
      throw ParseError(l.number, t.col, "undeclared symbol '" + t.text + "'");
    return *s;
  }

  Multiset multiset(const Line& l, std::size_t from, std::size_t to) const {
    Multiset m;
    for (std::size_t i = from; i < to; ++i) {
      const Token& t = l.tokens[i];
      if (t.is("-")) continue;
      m.add(symbol(l, t), t.power);
    }
    return m;
  }

  static std::string label_of(const Line& l, std::size_t index, const char* what) {
    if (index >= l.tokens.size()) throw ParseError(l.number, l.tokens[0].col, std::string("missing ") + what);
    const Token& t = l.tokens[index];
    if (t.quoted || is_punct(t.text[0])) throw ParseError(l.number, t.col, std::string("bad ") + what);
    return t.text;
  }

  // Parses a block body up to the matching @end. `node` is null for @region.
  void block_body(const MembraneLabel& label, Membrane* node, const Line& opener) {
    while (pos_ < lines_.size()) {
      const Line& l = lines_[pos_++];
      const std::string& d = l.tokens[0].text;
      if (d == "@end") return;
      if (d == "@rule") {
        rule(l, label);
      } else if (d == "@init") {
        if (!node) throw ParseError(l.number, l.tokens[0].col, "@init inside @region");
        node->contents.add_all(multiset(l, 1, l.tokens.size()));
      } else if (d == "@membrane") {
        if (!node) throw ParseError(l.number, l.tokens[0].col, "@membrane inside @region");
        node->children.push_back(membrane(l));
      } else {
        throw ParseError(l.number, l.tokens[0].col, "unexpected '" + d + "' inside a membrane block");
      }
    }
    throw ParseError(opener.number, opener.tokens[0].col, "block for " + label + " is missing @end");
  }

  Membrane membrane(const Line& l) {
    Membrane m;
    m.label = label_of(l, 1, "membrane label");
    if (l.tokens.size() > 2) throw ParseError(l.number, l.tokens[2].col, "unexpected text after membrane label");
    block_body(m.label, &m, l);
    return m;
  }

  void region(const Line& l) {
    std::string label = label_of(l, 1, "region label");
    if (std::find(sys_.creatable_regions.begin(), sys_.creatable_regions.end(), label) ==
        sys_.creatable_regions.end())
      sys_.creatable_regions.push_back(label);
    block_body(label, nullptr, l);
  }

  Target target(const Line& l, const Token& t) const {
    if (t.quoted) throw ParseError(l.number, t.col, "bad target");
    if (t.text == "here") return Target::here();
    if (t.text == "out") return Target::out();
    if (t.text == "in") return Target::in();
    if (t.text.rfind("in_", 0) == 0 && t.text.size() > 3) return Target::in_label(t.text.substr(3));
    throw ParseError(l.number, t.col, "unknown target '" + t.text + "'");
  }

  void rule(const Line& l, const MembraneLabel& region) {
    const auto& tk = l.tokens;
    Rule r;
    r.region = region;
    std::size_t i = 1;
    auto arrow = std::find_if(tk.begin(), tk.end(), [](const Token& t) { return t.is("->"); });
    if (arrow == tk.end()) throw ParseError(l.number, tk[0].col, "rule without '->'");
    std::size_t arrow_at = static_cast<std::size_t>(arrow - tk.begin());
    if (arrow_at >= 3 && tk[2].is(":")) {
      r.label = label_of(l, 1, "rule label");
      i = 3;
    }
    std::vector<const Token*> lhs;
    for (; i < arrow_at; ++i) {
      if (tk[i].power != 1) throw ParseError(l.number, tk[i].col, "multiplicity on a rule left-hand side");
      lhs.push_back(&tk[i]);
    }
    if (lhs.empty() || lhs.size() > 2)
      throw ParseError(l.number, tk[0].col, "left-hand side must be one object or catalyst plus one object");
    if (lhs.size() == 2) {
      r.catalyst = symbol(l, *lhs[0]);
      if (!sys_.is_catalyst(r.catalyst))
        throw ParseError(l.number, lhs[0]->col, "two-object left-hand side must start with a catalyst, '" +
                                                    lhs[0]->text + "' is not one");
      r.kind = RuleKind::Catalytic;
    }
    r.reactant = symbol(l, *lhs.back());

    bool catalyst_seen = false;
    i = arrow_at + 1;
    if (i >= tk.size()) throw ParseError(l.number, arrow->col, "empty right-hand side; write '.'");
    while (i < tk.size()) {
      const Token& t = tk[i];
      if (t.is(".")) {
        ++i;
        continue;
      }
      if (t.is("delta")) {
        if (r.kind != RuleKind::NonCoop) throw ParseError(l.number, t.col, "only non-cooperative rules may dissolve");
        r.dissolves = true;
        ++i;
        continue;
      }
      if (t.is("[")) {
        if (r.kind != RuleKind::Catalytic || !catalyst_seen || !r.rhs.empty() || r.catalyst_target != Target::here())
          throw ParseError(l.number, t.col, "membrane creation must read `c a -> c [ contents ]_label`");
        std::size_t close = i + 1;
        while (close < tk.size() && !tk[close].is("]")) ++close;
        if (close + 1 >= tk.size() || tk[close + 1].quoted || tk[close + 1].text.size() < 2 ||
            tk[close + 1].text[0] != '_')
          throw ParseError(l.number, t.col, "expected `]_label` after created contents");
        r.kind = RuleKind::CatalyticCreate;
        for (std::size_t k = i + 1; k < close; ++k) r.contents.add(symbol(l, tk[k]), tk[k].power);
        r.new_label = tk[close + 1].text.substr(1);
        i = close + 2;
        if (i < tk.size()) throw ParseError(l.number, tk[i].col, "nothing may follow a created membrane");
        break;
      }
      if (t.is("(")) {
        if (i + 4 >= tk.size() || !tk[i + 2].is(",") || !tk[i + 4].is(")"))
          throw ParseError(l.number, t.col, "expected (symbol,target)");
        const Token& obj = tk[i + 1];
        Target tgt = target(l, tk[i + 3]);
        if (obj.is(".")) {
          if (!r.rhs.empty() || r.empty_target != Target::here())
            throw ParseError(l.number, obj.col, "(.,target) must be the whole right-hand side");
          r.empty_target = tgt;
        } else {
          Symbol s = symbol(l, obj);
          for (Count k = 0; k < obj.power; ++k) place(r, s, tgt, catalyst_seen);
        }
        i += 5;
        continue;
      }
      Symbol s = symbol(l, t);
      for (Count k = 0; k < t.power; ++k) place(r, s, Target::here(), catalyst_seen);
      ++i;
    }
    if (r.kind == RuleKind::Catalytic && !catalyst_seen)
      throw ParseError(l.number, arrow->col, "catalyst " + sys_.alphabet.name(r.catalyst) +
                                                 " must reappear on the right-hand side");
    if (r.empty_target != Target::here() && r.kind != RuleKind::NonCoop)
      throw ParseError(l.number, arrow->col, "(.,target) only on non-cooperative rules");
    sys_.rules.push_back(std::move(r));
  }

  static void place(Rule& r, Symbol s, const Target& t, bool& catalyst_seen) {
    if (r.kind == RuleKind::Catalytic && !catalyst_seen && s == r.catalyst) {
      catalyst_seen = true;
      r.catalyst_target = t;
      return;
    }
    r.rhs.push_back({s, t});
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
  PSystem sys_;
  std::set<std::uint32_t> declared_;
};

void render_tree(const PSystem& sys, const Membrane& m, int depth, std::set<MembraneLabel>& rules_written,
                 std::ostringstream& out);

std::string render_multiset(const Multiset& m, const Alphabet& a) {
  std::vector<std::pair<std::string, Count>> named;
  for (const auto& [s, k] : m.entries()) named.emplace_back(a.name(s), k);
  std::sort(named.begin(), named.end());
  std::string out;
  for (const auto& [n, k] : named) {
    if (!out.empty()) out += ' ';
    out += quote_symbol(n);
    if (k != 1) out += "^" + std::to_string(k);
  }
  return out;
}

void render_rules(const PSystem& sys, const MembraneLabel& label, const std::string& indent,
                  std::ostringstream& out) {
  for (const auto& r : sys.rules) {
    if (r.region != label) continue;
    out << indent << "@rule ";
    if (!r.label.empty()) out << r.label << ": ";
    out << describe(r, sys.alphabet) << "\n";
  }
}

void render_tree(const PSystem& sys, const Membrane& m, int depth, std::set<MembraneLabel>& rules_written,
                 std::ostringstream& out) {
  std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  out << indent << "@membrane " << m.label << "\n";
  if (!m.contents.empty()) out << indent << "  @init " << render_multiset(m.contents, sys.alphabet) << "\n";
  if (rules_written.insert(m.label).second) render_rules(sys, m.label, indent + "  ", out);
  for (const auto& c : m.children) render_tree(sys, c, depth + 1, rules_written, out);
  out << indent << "@end\n";
}

}  // namespace

PSystem parse_system(std::string_view text) { return Parser(text).run(); }

std::string render_system(const PSystem& sys) {
  std::ostringstream out;
  if (!sys.header.empty()) {
    std::istringstream h(sys.header);
    std::string line;
    while (std::getline(h, line)) out << (line.empty() ? "#" : "# " + line) << "\n";
  }
  const Alphabet& a = sys.alphabet;
  out << "@objects";
  for (auto s : a.symbols()) out << " " << quote_symbol(a.name(s));
  out << "\n@catalysts";
  for (auto c : sys.catalysts) out << " " << quote_symbol(a.name(c));
  out << "\n";
  using K = ControlMode::Kind;
  const auto& c = sys.control;
  out << "@variant mobile=" << (sys.variant.mobile ? "true" : "false")
      << " creation=" << (sys.variant.creation ? "true" : "false")
      << " targets=" << (sys.variant.targets_labeled ? "labeled" : "plain") << "\n";
  out << "@control "
      << (c.kind == K::Plain ? "plain" : c.kind == K::LabelSelection ? "labelsel"
                                      : c.kind == K::TargetSelection ? "targets"
                                                                     : "controlled");
  if (c.kind == K::Controlled) out << (c.weak ? " weak" : " strong") << (c.periodic ? " periodic" : "");
  out << "\n";
  for (const auto& set : c.sets) {
    out << "@set " << set.name << ":";
    for (const auto& l : set.labels) out << " " << l;
    out << "\n";
  }
  if (!c.schedule.empty()) {
    out << "@schedule";
    for (auto i : c.schedule) out << " " << c.sets.at(i).name;
    out << "\n";
  }
  if (!sys.initial.environment.empty())
    out << "@environment " << render_multiset(sys.initial.environment, a) << "\n";
  std::set<MembraneLabel> written;
  render_tree(sys, sys.initial.skin, 0, written, out);
  std::vector<MembraneLabel> extra = sys.creatable_regions;
  for (const auto& r : sys.rules) extra.push_back(r.region);
  for (const auto& label : extra) {
    if (written.count(label)) continue;
    written.insert(label);
    out << "@region " << label << "\n";
    render_rules(sys, label, "  ", out);
    out << "@end\n";
  }
  out << "@output " << (sys.output.environment ? "env" : sys.output.label);
  for (auto s : sys.output_order) out << " " << quote_symbol(a.name(s));
  out << "\n";
  return out.str();
}

}  // namespace pcat
