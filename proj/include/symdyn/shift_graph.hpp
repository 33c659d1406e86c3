#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace symdyn {

using SymbolId = std::uint32_t;

// A finite word placed at coordinates base_index .. base_index + size() - 1.
struct Word {
  int base_index = 0;
  std::vector<SymbolId> letters;

  std::size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }
  SymbolId front() const { return letters.front(); }
  SymbolId back() const { return letters.back(); }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;
};

// Directed graph of symbols; the bi-infinite admissible paths form the
// topological Markov shift. Immutable once built.
class ShiftGraph {
 public:
  // Validates names and edges; every symbol needs an incoming and an
  // outgoing edge.
  static ShiftGraph build(const std::vector<std::string>& symbol_names,
                          const std::vector<std::pair<std::string, std::string>>& edge_pairs);
  static ShiftGraph from_adjacency(const std::vector<std::string>& symbol_names,
                                   const std::vector<std::vector<SymbolId>>& successors);

  std::size_t size() const { return names_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::string& name(SymbolId s) const { return names_[s]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<SymbolId> find(const std::string& name) const;

  bool has_edge(SymbolId from, SymbolId to) const { return adjacency_[from * size() + to] != 0; }
  const std::vector<SymbolId>& successors(SymbolId s) const { return out_[s]; }
  const std::vector<SymbolId>& predecessors(SymbolId s) const { return in_[s]; }

  // True when every symbol name is a single character, so words print
  // without separators.
  bool single_char_names() const { return single_char_; }

 private:
  ShiftGraph() = default;
  void finalize();

  std::vector<std::string> names_;
  std::map<std::string, SymbolId> index_;
  std::vector<std::vector<SymbolId>> out_;
  std::vector<std::vector<SymbolId>> in_;
  std::vector<std::uint8_t> adjacency_;
  std::size_t edge_count_ = 0;
  bool single_char_ = true;
};

bool is_admissible(const ShiftGraph& g, std::span<const SymbolId> letters);
inline bool is_admissible(const ShiftGraph& g, const Word& w) { return is_admissible(g, w.letters); }

// Admissible as a cycle: the closing edge back() -> front() also exists.
bool is_admissible_cycle(const ShiftGraph& g, std::span<const SymbolId> letters);

enum class ComponentKind { Irreducible, Trivial };

struct Component {
  std::vector<SymbolId> symbols;  // sorted
  ComponentKind kind = ComponentKind::Trivial;
  unsigned period = 0;            // 0 for trivial components

  bool contains(SymbolId s) const;
};

struct ComponentDecomposition {
  std::vector<Component> components;

  std::vector<const Component*> irreducible() const;
  const Component* component_of(SymbolId s) const;
};

ComponentDecomposition maximal_irreducible_components(const ShiftGraph& g);

// gcd of cycle lengths through any symbol of an irreducible component.
unsigned component_period(const ShiftGraph& g, std::span<const SymbolId> component);

// True when the symbols are mutually reachable inside the set and the set
// carries at least one cycle.
bool is_irreducible(const ShiftGraph& g, std::span<const SymbolId> symbols);

// Depth-first enumeration of the admissible words (w0 .. w_{n-1}) with
// w0 = base and w_{n-1} -> w0 an edge. Each enumerator is independent.
class CycleEnumerator {
 public:
  CycleEnumerator(const ShiftGraph& g, SymbolId base, std::size_t length);

  // Writes the next cycle into out; false when exhausted.
  bool next(Word& out);

 private:
  const ShiftGraph* graph_;
  SymbolId base_;
  std::size_t length_;
  std::vector<SymbolId> path_;
  std::vector<std::size_t> cursor_;
  bool started_ = false;
  bool done_ = false;
};

std::vector<Word> enumerate_cycles(const ShiftGraph& g, SymbolId base, std::size_t length);

// Callback form used by the partition-function sums; letters are passed
// as a span over internal storage.
template <class Fn>
void for_each_cycle(const ShiftGraph& g, SymbolId base, std::size_t length, Fn&& fn) {
  CycleEnumerator it(g, base, length);
  Word w;
  while (it.next(w)) fn(std::span<const SymbolId>(w.letters));
}

// Visits every admissible word of the given length that starts at `first`.
template <class Fn>
void for_each_path(const ShiftGraph& g, SymbolId first, std::size_t length, Fn&& fn) {
  if (length == 0) return;
  std::vector<SymbolId> path{first};
  std::vector<std::size_t> cursor{0};
  path.reserve(length);
  cursor.reserve(length);
  if (length == 1) {
    fn(std::span<const SymbolId>(path));
    return;
  }
  while (!path.empty()) {
    const auto& succ = g.successors(path.back());
    if (cursor.back() >= succ.size()) {
      path.pop_back();
      cursor.pop_back();
      continue;
    }
    SymbolId next = succ[cursor.back()++];
    path.push_back(next);
    if (path.size() == length) {
      fn(std::span<const SymbolId>(path));
      path.pop_back();
    } else {
      cursor.push_back(0);
    }
  }
}

// All admissible words of the given length, in lexicographic order.
std::vector<std::vector<SymbolId>> admissible_words(const ShiftGraph& g, std::size_t length);

}  // namespace symdyn
