#include "symdyn/shift_graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "symdyn/error.hpp"

namespace symdyn {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateSymbol: return "DuplicateSymbol";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::StrandedSymbol: return "StrandedSymbol";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::TrivialSymbol: return "TrivialSymbol";
    case ErrorKind::InadmissibleWord: return "InadmissibleWord";
    case ErrorKind::BadAnchor: return "BadAnchor";
    case ErrorKind::WordMismatch: return "WordMismatch";
    case ErrorKind::StemMismatch: return "StemMismatch";
    case ErrorKind::BaseMismatch: return "BaseMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::PartitionInvalid: return "PartitionInvalid";
    case ErrorKind::SegmentMismatch: return "SegmentMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InputError: return "InputError";
    case ErrorKind::CapacityExceeded: return "CapacityExceeded";
  }
  return "Error";
}

ShiftGraph ShiftGraph::build(const std::vector<std::string>& symbol_names,
                             const std::vector<std::pair<std::string, std::string>>& edge_pairs) {
  ShiftGraph g;
  g.names_ = symbol_names;
  for (SymbolId i = 0; i < symbol_names.size(); ++i) {
    if (!g.index_.emplace(symbol_names[i], i).second)
      throw Error(ErrorKind::DuplicateSymbol, "symbol '" + symbol_names[i] + "' declared twice");
  }
  const std::size_t n = symbol_names.size();
  g.adjacency_.assign(n * n, 0);
  for (const auto& [from, to] : edge_pairs) {
    auto f = g.find(from);
    if (!f) throw Error(ErrorKind::UnknownSymbol, "edge references unknown symbol '" + from + "'");
    auto t = g.find(to);
    if (!t) throw Error(ErrorKind::UnknownSymbol, "edge references unknown symbol '" + to + "'");
    g.adjacency_[*f * n + *t] = 1;
  }
  g.finalize();
  return g;
}

ShiftGraph ShiftGraph::from_adjacency(const std::vector<std::string>& symbol_names,
                                      const std::vector<std::vector<SymbolId>>& successors) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (SymbolId s = 0; s < successors.size(); ++s)
    for (SymbolId t : successors[s]) {
      if (t >= symbol_names.size())
        throw Error(ErrorKind::UnknownSymbol, "successor index out of range");
      edges.emplace_back(symbol_names.at(s), symbol_names[t]);
    }
  return build(symbol_names, edges);
}

void ShiftGraph::finalize() {
  const std::size_t n = names_.size();
  out_.assign(n, {});
  in_.assign(n, {});
  edge_count_ = 0;
  for (SymbolId a = 0; a < n; ++a)
    for (SymbolId b = 0; b < n; ++b)
      if (adjacency_[a * n + b]) {
        out_[a].push_back(b);
        in_[b].push_back(a);
        ++edge_count_;
      }
  for (SymbolId s = 0; s < n; ++s) {
    if (out_[s].empty() || in_[s].empty())
      throw Error(ErrorKind::StrandedSymbol,
                  "symbol '" + names_[s] + "' has no " + (out_[s].empty() ? "outgoing" : "incoming") +
                      " edge, so no bi-infinite chain passes through it");
  }
  single_char_ = std::all_of(names_.begin(), names_.end(), [](const std::string& s) { return s.size() == 1; });
}

std::optional<SymbolId> ShiftGraph::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool is_admissible(const ShiftGraph& g, std::span<const SymbolId> letters) {
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (letters[i] >= g.size()) return false;
    if (i > 0 && !g.has_edge(letters[i - 1], letters[i])) return false;
  }
  return true;
}

bool is_admissible_cycle(const ShiftGraph& g, std::span<const SymbolId> letters) {
  return !letters.empty() && is_admissible(g, letters) && g.has_edge(letters.back(), letters.front());
}

bool Component::contains(SymbolId s) const {
  return std::binary_search(symbols.begin(), symbols.end(), s);
}

std::vector<const Component*> ComponentDecomposition::irreducible() const {
  std::vector<const Component*> out;
  for (const auto& c : components)
    if (c.kind == ComponentKind::Irreducible) out.push_back(&c);
  return out;
}

const Component* ComponentDecomposition::component_of(SymbolId s) const {
  for (const auto& c : components)
    if (c.contains(s)) return &c;
  return nullptr;
}

namespace {

// Iterative Tarjan; returns component index per symbol.
std::vector<int> strongly_connected(const ShiftGraph& g, int& count) {
  const int n = static_cast<int>(g.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int next_index = 0;
  count = 0;
  struct Frame {
    int v;
    std::size_t edge;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> calls{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!calls.empty()) {
      Frame& f = calls.back();
      const auto& succ = g.successors(static_cast<SymbolId>(f.v));
      if (f.edge < succ.size()) {
        int w = static_cast<int>(succ[f.edge++]);
        if (index[w] < 0) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          calls.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      int v = f.v;
      calls.pop_back();
      if (!calls.empty()) low[calls.back().v] = std::min(low[calls.back().v], low[v]);
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
    }
  }
  return comp;
}

}  // namespace

unsigned component_period(const ShiftGraph& g, std::span<const SymbolId> component) {
  if (!is_irreducible(g, component))
    throw Error(ErrorKind::NotIrreducible, "symbol set is not an irreducible component");
  std::vector<SymbolId> members(component.begin(), component.end());
  std::sort(members.begin(), members.end());
  auto inside = [&](SymbolId s) { return std::binary_search(members.begin(), members.end(), s); };

  // BFS levels from one symbol; period = gcd of (level[u] + 1 - level[v]) over edges.
  std::vector<long> level(g.size(), -1);
  std::queue<SymbolId> q;
  level[members.front()] = 0;
  q.push(members.front());
  while (!q.empty()) {
    SymbolId u = q.front();
    q.pop();
    for (SymbolId v : g.successors(u))
      if (inside(v) && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
  }
  long period = 0;
  for (SymbolId u : members)
    for (SymbolId v : g.successors(u))
      if (inside(v)) period = std::gcd(period, std::labs(level[u] + 1 - level[v]));
  return static_cast<unsigned>(period);
}

bool is_irreducible(const ShiftGraph& g, std::span<const SymbolId> symbols) {
  if (symbols.empty()) return false;
  std::vector<char> inside(g.size(), 0);
  for (SymbolId s : symbols) {
    if (s >= g.size()) return false;
    inside[s] = 1;
  }
  auto reach = [&](bool forward) {
    std::vector<char> seen(g.size(), 0);
    std::vector<SymbolId> todo{symbols.front()};
    seen[symbols.front()] = 1;
    std::size_t count = 1;
    while (!todo.empty()) {
      SymbolId u = todo.back();
      todo.pop_back();
      for (SymbolId v : forward ? g.successors(u) : g.predecessors(u))
        if (inside[v] && !seen[v]) {
          seen[v] = 1;
          ++count;
          todo.push_back(v);
        }
    }
    return count;
  };
  if (reach(true) != symbols.size() || reach(false) != symbols.size()) return false;
  if (symbols.size() == 1) return g.has_edge(symbols.front(), symbols.front());
  return true;
}

ComponentDecomposition maximal_irreducible_components(const ShiftGraph& g) {
  int count = 0;
  std::vector<int> comp = strongly_connected(g, count);
  std::vector<std::vector<SymbolId>> groups(count);
  for (SymbolId s = 0; s < g.size(); ++s) groups[comp[s]].push_back(s);
  // Order components by smallest member so output does not depend on DFS order.
  std::sort(groups.begin(), groups.end());
  ComponentDecomposition out;
  for (auto& members : groups) {
    bool returns = members.size() > 1 || g.has_edge(members.front(), members.front());
    if (returns) {
      Component c{members, ComponentKind::Irreducible, 0};
      c.period = component_period(g, c.symbols);
      out.components.push_back(std::move(c));
    } else {
      out.components.push_back(Component{members, ComponentKind::Trivial, 0});
    }
  }
  return out;
}

CycleEnumerator::CycleEnumerator(const ShiftGraph& g, SymbolId base, std::size_t length)
    : graph_(&g), base_(base), length_(length) {
  if (length == 0) throw Error(ErrorKind::InvalidArgument, "cycle length must be at least 1");
  if (base >= g.size()) throw Error(ErrorKind::UnknownSymbol, "base symbol out of range");
}

bool CycleEnumerator::next(Word& out) {
  if (done_) return false;
  if (!started_) {
    started_ = true;
    path_ = {base_};
    cursor_ = {0};
    path_.reserve(length_);
    if (length_ == 1) {
      done_ = true;
      if (!graph_->has_edge(base_, base_)) return false;
      out.base_index = 0;
      out.letters = path_;
      return true;
    }
  }
  while (!path_.empty()) {
    const auto& succ = graph_->successors(path_.back());
    if (cursor_.back() >= succ.size()) {
      path_.pop_back();
      cursor_.pop_back();
      continue;
    }
    SymbolId next = succ[cursor_.back()++];
    if (path_.size() + 1 == length_) {
      if (graph_->has_edge(next, base_)) {
        out.base_index = 0;
        out.letters = path_;
        out.letters.push_back(next);
        return true;
      }
      continue;
    }
    path_.push_back(next);
    cursor_.push_back(0);
  }
  done_ = true;
  return false;
}

std::vector<Word> enumerate_cycles(const ShiftGraph& g, SymbolId base, std::size_t length) {
  std::vector<Word> out;
  CycleEnumerator it(g, base, length);
  Word w;
  while (it.next(w)) out.push_back(w);
  return out;
}

std::vector<std::vector<SymbolId>> admissible_words(const ShiftGraph& g, std::size_t length) {
  std::vector<std::vector<SymbolId>> out;
  for (SymbolId s = 0; s < g.size(); ++s)
    for_each_path(g, s, length, [&](std::span<const SymbolId> w) { out.emplace_back(w.begin(), w.end()); });
  return out;
}

}  // namespace symdyn
