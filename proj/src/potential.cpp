#include "symdyn/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "symdyn/error.hpp"

namespace symdyn {

double HolderData::tail_budget(int n) const {
  return constant * std::pow(ratio, n) / (1.0 - ratio);
}

namespace {

std::string describe(const ShiftGraph& g, std::span<const SymbolId> w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i && !g.single_char_names()) s += ' ';
    s += w[i] < g.size() ? g.name(w[i]) : "?";
  }
  return s;
}

}  // namespace

std::uint64_t LocallyConstantPotential::encode(Window w) const {
  std::uint64_t key = 0;
  const std::uint64_t base = graph_->size();
  for (SymbolId s : w) key = key * base + s;
  return key;
}

void LocallyConstantPotential::build_index() {
  const double bits = std::log2(static_cast<double>(std::max<std::size_t>(graph_->size(), 2))) *
                      static_cast<double>(window_length());
  if (bits > 62.0) throw Error(ErrorKind::InvalidArgument, "potential window too long for this alphabet");
  index_.clear();
  index_.reserve(windows_.size());
  for (std::size_t i = 0; i < windows_.size(); ++i) index_.emplace(encode(windows_[i]), i);
}

LocallyConstantPotential LocallyConstantPotential::from_function(std::shared_ptr<const ShiftGraph> graph,
                                                                 int past_window, int future_window,
                                                                 const ValueFn& fn) {
  if (past_window < 0 || future_window < 0)
    throw Error(ErrorKind::InvalidArgument, "potential windows must be nonnegative");
  LocallyConstantPotential p;
  p.graph_ = std::move(graph);
  p.past_ = past_window;
  p.future_ = future_window;
  p.windows_ = admissible_words(*p.graph_, p.window_length());
  p.values_.reserve(p.windows_.size());
  for (const auto& w : p.windows_) {
    double v = fn(w);
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "potential value is not finite");
    p.values_.push_back(v);
  }
  p.build_index();
  return p;
}

LocallyConstantPotential LocallyConstantPotential::from_table(
    std::shared_ptr<const ShiftGraph> graph, int past_window, int future_window,
    const std::map<std::vector<SymbolId>, double>& values, std::optional<double> fill) {
  const std::size_t len = static_cast<std::size_t>(past_window + future_window + 1);
  for (const auto& [w, v] : values) {
    if (w.size() != len)
      throw Error(ErrorKind::InadmissibleWord,
                  "window '" + describe(*graph, w) + "' has length " + std::to_string(w.size()) +
                      ", expected " + std::to_string(len));
    if (!is_admissible(*graph, w))
      throw Error(ErrorKind::InadmissibleWord, "window '" + describe(*graph, w) + "' is not admissible");
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "potential value is not finite");
  }
  const ShiftGraph& g = *graph;
  return from_function(std::move(graph), past_window, future_window, [&](Window w) {
    auto it = values.find(std::vector<SymbolId>(w.begin(), w.end()));
    if (it != values.end()) return it->second;
    if (!fill) throw Error(ErrorKind::InputError, "no value for window '" + describe(g, w) + "' and no default");
    return *fill;
  });
}

LocallyConstantPotential LocallyConstantPotential::constant(std::shared_ptr<const ShiftGraph> graph, double c) {
  return from_function(std::move(graph), 0, 0, [c](Window) { return c; });
}

std::optional<double> LocallyConstantPotential::try_value(Window window) const {
  if (window.size() != window_length()) return std::nullopt;
  for (SymbolId s : window)
    if (s >= graph_->size()) return std::nullopt;
  auto it = index_.find(encode(window));
  if (it == index_.end()) return std::nullopt;
  return values_[it->second];
}

double LocallyConstantPotential::operator()(Window window) const {
  auto v = try_value(window);
  if (!v) throw Error(ErrorKind::InadmissibleWord, "window '" + describe(*graph_, window) + "' is not admissible");
  return *v;
}

double LocallyConstantPotential::at(std::span<const SymbolId> seq, std::size_t center) const {
  if (center < static_cast<std::size_t>(past_) || center + future_ >= seq.size())
    throw Error(ErrorKind::InvalidArgument, "sequence too short to evaluate the potential");
  return (*this)(seq.subspan(center - past_, window_length()));
}

double LocallyConstantPotential::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

LocallyConstantPotential LocallyConstantPotential::plus_constant(double c) const {
  LocallyConstantPotential p = *this;
  for (double& v : p.values_) v += c;
  return p;
}

LocallyConstantPotential LocallyConstantPotential::scaled(double factor) const {
  LocallyConstantPotential p = *this;
  for (double& v : p.values_) v *= factor;
  if (p.holder_) p.holder_->constant *= std::abs(factor);
  return p;
}

LocallyConstantPotential LocallyConstantPotential::widened(int past_window, int future_window) const {
  if (past_window < past_ || future_window < future_)
    throw Error(ErrorKind::InvalidArgument, "widened window must contain the original window");
  const std::size_t offset = static_cast<std::size_t>(past_window - past_);
  auto out = from_function(graph_, past_window, future_window,
                           [&](Window w) { return (*this)(w.subspan(offset, window_length())); });
  out.holder_ = holder_;
  return out;
}

LocallyConstantPotential add_coboundary(const LocallyConstantPotential& pot, const std::vector<double>& u) {
  if (u.size() != pot.graph().size()) throw Error(ErrorKind::InvalidArgument, "coboundary needs one value per symbol");
  const int a = std::max(pot.past_window(), 1);
  const int b = pot.future_window();
  return LocallyConstantPotential::from_function(pot.graph_ptr(), a, b, [&](std::span<const SymbolId> w) {
    return pot.at(w, static_cast<std::size_t>(a)) + u[w[a]] - u[w[a - 1]];
  });
}

namespace {

void require_cycle(const ShiftGraph& g, std::span<const SymbolId> cycle) {
  if (!is_admissible_cycle(g, cycle))
    throw Error(ErrorKind::InadmissibleWord, "word is not an admissible cycle");
}

// Window of the periodic extension around coordinate `coord`.
std::vector<SymbolId> periodic_window(std::span<const SymbolId> cycle, long coord, int past, int future) {
  const long p = static_cast<long>(cycle.size());
  std::vector<SymbolId> w;
  w.reserve(static_cast<std::size_t>(past + future + 1));
  for (long i = coord - past; i <= coord + future; ++i) w.push_back(cycle[static_cast<std::size_t>(((i % p) + p) % p)]);
  return w;
}

}  // namespace

double birkhoff_sum_backward(const LocallyConstantPotential& pot, std::span<const SymbolId> cycle, std::size_t n) {
  require_cycle(pot.graph(), cycle);
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "Birkhoff sum needs n >= 1");
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    s += pot(periodic_window(cycle, -static_cast<long>(k), pot.past_window(), pot.future_window()));
  return s;
}

double birkhoff_sum_forward(const LocallyConstantPotential& pot, std::span<const SymbolId> cycle, std::size_t n) {
  require_cycle(pot.graph(), cycle);
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "Birkhoff sum needs n >= 1");
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    s += pot(periodic_window(cycle, static_cast<long>(k), pot.past_window(), pot.future_window()));
  return s;
}

double periodic_sum(const LocallyConstantPotential& pot, std::span<const SymbolId> cycle) {
  // Unchecked fast path used inside the partition-function loops.
  const std::size_t p = cycle.size();
  const std::size_t len = pot.window_length();
  std::vector<SymbolId> w(len);
  double s = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < len; ++i) {
      long idx = static_cast<long>(j) - pot.past_window() + static_cast<long>(i);
      long m = static_cast<long>(p);
      w[i] = cycle[static_cast<std::size_t>(((idx % m) + m) % m)];
    }
    s += pot(w);
  }
  return s;
}

namespace {

double grouped_spread(const LocallyConstantPotential& pot, std::size_t from, std::size_t to) {
  std::map<std::vector<SymbolId>, std::pair<double, double>> range;
  const auto& ws = pot.windows();
  const auto& vs = pot.values();
  for (std::size_t i = 0; i < ws.size(); ++i) {
    std::vector<SymbolId> key(ws[i].begin() + static_cast<long>(from), ws[i].begin() + static_cast<long>(to));
    auto [it, fresh] = range.try_emplace(std::move(key), vs[i], vs[i]);
    if (!fresh) {
      it->second.first = std::min(it->second.first, vs[i]);
      it->second.second = std::max(it->second.second, vs[i]);
    }
  }
  double spread = 0.0;
  for (const auto& [k, r] : range) spread = std::max(spread, r.second - r.first);
  return spread;
}

}  // namespace

double variation(const LocallyConstantPotential& pot, int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "variation depth must be nonnegative");
  const int a = pot.past_window();
  const int b = pot.future_window();
  if (n >= std::max(a, b)) return 0.0;
  const std::size_t from = static_cast<std::size_t>(a - std::min(n, a));
  const std::size_t to = static_cast<std::size_t>(a + std::min(n, b) + 1);
  return grouped_spread(pot, from, to);
}

double past_variation(const LocallyConstantPotential& pot, int k) {
  if (pot.future_window() != 0)
    throw Error(ErrorKind::InvalidArgument, "one-sided variation needs a past-only potential");
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "variation depth must be nonnegative");
  const std::size_t len = pot.window_length();
  if (static_cast<std::size_t>(k) >= len) return 0.0;
  return grouped_spread(pot, len - static_cast<std::size_t>(k), len);
}

HolderData fit_past_holder(const LocallyConstantPotential& pot, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::InvalidArgument, "Holder ratio must lie in (0,1)");
  HolderData h{0.0, ratio};
  for (int k = 1; k < static_cast<int>(pot.window_length()); ++k)
    h.constant = std::max(h.constant, past_variation(pot, k) / std::pow(ratio, k));
  return h;
}

AnchorMap lexicographic_anchors(const ShiftGraph& g, std::size_t length) {
  if (length == 0) throw Error(ErrorKind::InvalidArgument, "anchor length must be at least 1");
  AnchorMap anchors(g.size());
  for (SymbolId s = 0; s < g.size(); ++s) {
    // Greedy smallest successor is lexicographically minimal: no symbol is a dead end.
    std::vector<SymbolId> w{s};
    while (w.size() < length) w.push_back(g.successors(w.back()).front());
    anchors[s] = std::move(w);
  }
  return anchors;
}

SinaiReduction sinai_reduce(const LocallyConstantPotential& pot) {
  return sinai_reduce(pot, lexicographic_anchors(pot.graph(), static_cast<std::size_t>(pot.future_window()) + 1));
}

SinaiReduction sinai_reduce(const LocallyConstantPotential& pot, const AnchorMap& anchors) {
  const ShiftGraph& g = pot.graph();
  const int a = pot.past_window();
  const int b = pot.future_window();
  if (anchors.size() != g.size()) throw Error(ErrorKind::BadAnchor, "need one anchor per symbol");
  for (SymbolId s = 0; s < g.size(); ++s) {
    const auto& y = anchors[s];
    if (y.empty() || y.front() != s)
      throw Error(ErrorKind::BadAnchor, "anchor for '" + g.name(s) + "' must start at that symbol");
    if (y.size() < static_cast<std::size_t>(b) + 1)
      throw Error(ErrorKind::BadAnchor, "anchor for '" + g.name(s) + "' is shorter than the future window");
    if (!is_admissible(g, y)) throw Error(ErrorKind::BadAnchor, "anchor for '" + g.name(s) + "' is not admissible");
  }

  auto complete = [&](std::span<const SymbolId> past_part) {
    std::vector<SymbolId> x(past_part.begin(), past_part.end());
    const auto& y = anchors[x.back()];
    x.insert(x.end(), y.begin() + 1, y.begin() + 1 + b);
    return x;
  };

  if (b == 0) {
    // Already past-only: A vanishes and phi* = phi.
    return SinaiReduction{pot, LocallyConstantPotential::constant(pot.graph_ptr(), 0.0), anchors, 0.0};
  }

  // A depends on coordinates -(a+b-1) .. b.
  const int center = a + b - 1;
  auto transfer = LocallyConstantPotential::from_function(
      pot.graph_ptr(), center, b, [&](std::span<const SymbolId> x) {
        auto star = complete(x.first(static_cast<std::size_t>(center) + 1));
        double s = 0.0;
        for (int n = 0; n < b; ++n) {
          const std::size_t c = static_cast<std::size_t>(center - n);
          s += pot.at(star, c) - pot.at(x, c);
        }
        return s;
      });

  const int star_past = a + b;
  auto past_potential = LocallyConstantPotential::from_function(
      pot.graph_ptr(), star_past, 0, [&](std::span<const SymbolId> u) {
        auto x = complete(u);
        const std::size_t c = static_cast<std::size_t>(star_past);
        return pot.at(x, c) + transfer.at(x, c) - transfer.at(x, c - 1);
      });
  if (pot.holder()) past_potential.set_holder(*pot.holder());

  return SinaiReduction{std::move(past_potential), transfer, anchors, transfer.sup_norm()};
}

double cohomology_residual(const LocallyConstantPotential& pot, const SinaiReduction& red) {
  const int a = pot.past_window();
  const int b = pot.future_window();
  if (b == 0) return 0.0;
  const std::size_t c = static_cast<std::size_t>(a + b);
  double worst = 0.0;
  for (const auto& x : admissible_words(pot.graph(), static_cast<std::size_t>(a + 2 * b + 1))) {
    double lhs = pot.at(x, c) + red.transfer.at(x, c) - red.transfer.at(x, c - 1);
    double rhs = red.past_potential.at(x, c);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace symdyn
