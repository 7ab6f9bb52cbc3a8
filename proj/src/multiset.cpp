#include "pcat/multiset.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pcat {

Symbol Alphabet::intern(std::string_view name) {
  std::string key(name);
  if (auto it = index_.find(key); it != index_.end()) return Symbol{it->second};
  auto id = static_cast<std::uint32_t>(names_.size());
  names_.push_back(key);
  index_.emplace(std::move(key), id);
  return Symbol{id};
}

std::optional<Symbol> Alphabet::find(std::string_view name) const {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return Symbol{it->second};
  return std::nullopt;
}

Symbol Alphabet::at(std::string_view name) const {
  if (auto s = find(name)) return *s;
  throw std::out_of_range("unknown symbol '" + std::string(name) + "'");
}

std::vector<Symbol> Alphabet::symbols() const {
  std::vector<Symbol> out;
  out.reserve(names_.size());
  for (std::uint32_t i = 0; i < names_.size(); ++i) out.push_back(Symbol{i});
  return out;
}

Multiset::Multiset(std::initializer_list<Entry> entries) {
  for (const auto& [s, k] : entries) add(s, k);
}

Count Multiset::count(Symbol s) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                             [](const Entry& e, Symbol v) { return e.first < v; });
  return (it != entries_.end() && it->first == s) ? it->second : 0;
}

Count Multiset::total() const {
  Count t = 0;
  for (const auto& e : entries_) t += e.second;
  return t;
}

void Multiset::add(Symbol s, Count k) {
  if (k == 0) return;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                             [](const Entry& e, Symbol v) { return e.first < v; });
  if (it != entries_.end() && it->first == s) {
    if (it->second > std::numeric_limits<Count>::max() - k)
      throw std::overflow_error("multiset count overflow");
    it->second += k;
  } else {
    entries_.insert(it, Entry{s, k});
  }
}

void Multiset::add_all(const Multiset& other) {
  for (const auto& [s, k] : other.entries_) add(s, k);
}

void Multiset::subtract(const Multiset& other) {
  for (const auto& [s, k] : other.entries_) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                               [](const Entry& e, Symbol v) { return e.first < v; });
    if (it == entries_.end() || it->first != s || it->second < k)
      throw std::underflow_error("multiset underflow");
    it->second -= k;
    if (it->second == 0) entries_.erase(it);
  }
}

bool Multiset::contains(const Multiset& other) const {
  for (const auto& [s, k] : other.entries_)
    if (count(s) < k) return false;
  return true;
}

Count Multiset::times_contained(const Multiset& other) const {
  Count best = std::numeric_limits<Count>::max();
  for (const auto& [s, k] : other.entries_) best = std::min(best, count(s) / k);
  return other.empty() ? 0 : best;
}

Multiset ms_add(const Multiset& m, Symbol s, Count k) {
  Multiset out = m;
  out.add(s, k);
  return out;
}

std::optional<Multiset> ms_subtract(const Multiset& m, const Multiset& n) {
  if (!m.contains(n)) return std::nullopt;
  Multiset out = m;
  out.subtract(n);
  return out;
}

bool ms_leq(const Multiset& m, const Multiset& n) { return n.contains(m); }

Count ParikhVector::sum() const {
  Count t = 0;
  for (auto v : values) t += v;
  return t;
}

ParikhVector parikh(const Multiset& m, std::span<const Symbol> order) {
  ParikhVector v;
  v.values.reserve(order.size());
  for (auto s : order) v.values.push_back(m.count(s));
  return v;
}

std::string to_string(const ParikhVector& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v.values[i]);
  }
  return out + ")";
}

std::string to_text(const Multiset& m, const Alphabet& alphabet) {
  if (m.empty()) return "-";
  std::vector<std::pair<std::string_view, Count>> named;
  named.reserve(m.entries().size());
  for (const auto& [s, k] : m.entries()) named.emplace_back(alphabet.name(s), k);
  std::sort(named.begin(), named.end());
  std::string out;
  for (const auto& [name, k] : named) {
    if (!out.empty()) out += ' ';
    out += name;
    if (k != 1) {
      out += '^';
      out += std::to_string(k);
    }
  }
  return out;
}

Multiset multiset_from_text(std::string_view text, Alphabet& alphabet) {
  Multiset m;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    if (tok == "-") continue;
    Count k = 1;
    if (auto caret = tok.rfind('^'); caret != std::string::npos && caret > 0) {
      k = std::stoull(tok.substr(caret + 1));
      tok.resize(caret);
    }
    m.add(alphabet.intern(tok), k);
  }
  return m;
}

}  // namespace pcat
