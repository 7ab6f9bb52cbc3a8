#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pcat {

/// Interned object identifier. Only meaningful relative to the Alphabet that
/// produced it.
struct Symbol {
  std::uint32_t id = 0;
  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

/// Per-system symbol table. Display names are unique and interning is a
/// bijection between ids and names.
class Alphabet {
 public:
  Symbol intern(std::string_view name);
  std::optional<Symbol> find(std::string_view name) const;
  Symbol at(std::string_view name) const;  // throws std::out_of_range
  const std::string& name(Symbol s) const { return names_.at(s.id); }
  std::size_t size() const { return names_.size(); }
  std::vector<Symbol> symbols() const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

using Count = std::uint64_t;

/// Finite multiset over interned symbols, stored as a sorted vector of
/// (symbol, count) with no zero entries.
class Multiset {
 public:
  using Entry = std::pair<Symbol, Count>;

  Multiset() = default;
  Multiset(std::initializer_list<Entry> entries);

  Count count(Symbol s) const;
  Count total() const;
  bool empty() const { return entries_.empty(); }
  std::span<const Entry> entries() const { return entries_; }

  /// Throws std::overflow_error if a count would wrap.
  void add(Symbol s, Count k = 1);
  void add_all(const Multiset& other);
  /// Throws std::underflow_error if `other` is not contained in *this.
  void subtract(const Multiset& other);
  /// True iff other ≤ *this pointwise.
  bool contains(const Multiset& other) const;
  /// Largest k with k·other ≤ *this; other must be non-empty.
  Count times_contained(const Multiset& other) const;

  friend bool operator==(const Multiset&, const Multiset&) = default;
  friend auto operator<=>(const Multiset& a, const Multiset& b) {
    return a.entries_ <=> b.entries_;
  }

 private:
  std::vector<Entry> entries_;
};

Multiset ms_add(const Multiset& m, Symbol s, Count k);
std::optional<Multiset> ms_subtract(const Multiset& m, const Multiset& n);
bool ms_leq(const Multiset& m, const Multiset& n);

/// Ordered vector of counts over a declared output alphabet.
struct ParikhVector {
  std::vector<Count> values;

  Count sum() const;
  friend auto operator<=>(const ParikhVector&, const ParikhVector&) = default;
};

/// Projection of m onto `order`; symbols outside `order` are dropped.
ParikhVector parikh(const Multiset& m, std::span<const Symbol> order);

/// `(2,1)` style rendering.
std::string to_string(const ParikhVector& v);

/// Canonical text: `sym^k` tokens sorted by display name, `^1` elided,
/// empty multiset written `-`.
std::string to_text(const Multiset& m, const Alphabet& alphabet);

/// Inverse of to_text; unknown names are interned.
Multiset multiset_from_text(std::string_view text, Alphabet& alphabet);

}  // namespace pcat
