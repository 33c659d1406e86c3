#include "symdyn/leaf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "symdyn/error.hpp"
#include "symdyn/numeric.hpp"

namespace symdyn {

double LeafMeasure::consistency_defect() const {
  double worst = 0.0;
  for (auto it = masses.begin(); it != masses.end(); ++it) {
    const auto& w = it->first;
    double children = 0.0;
    bool any = false;
    for (auto jt = std::next(it); jt != masses.end(); ++jt) {
      const auto& v = jt->first;
      if (v.size() < w.size() || !std::equal(w.begin(), w.end(), v.begin())) break;
      if (v.size() == w.size() + 1) {
        children += jt->second;
        any = true;
      }
    }
    if (any) worst = std::max(worst, std::abs(it->second - children));
  }
  return worst;
}

LeafFamily LeafFamily::build(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                             const PerronOptions& options) {
  auto red = sinai_reduce(pot);
  LeafFamily f;
  f.model_ = std::make_shared<const RecodedModel>(recode_depth_one(red.past_potential, component));
  f.potential_ = std::make_shared<const LocallyConstantPotential>(pot);
  f.spectral_ = perron_data(*f.model_, options);
  f.normalized_ = normalized_potential(*f.model_, f.spectral_);
  f.totals_ = f.spectral_.harmonic;
  f.transfer_sup_norm_ = red.transfer_sup_norm;
  if (pot.holder()) f.holder_ratio_ = pot.holder()->ratio;
  return f;
}

LeafFamily LeafFamily::with_totals(std::vector<double> psi) const {
  if (psi.size() != model_->size()) throw Error(ErrorKind::InvalidArgument, "need one total per block");
  for (double v : psi)
    if (!(v > 0.0)) throw Error(ErrorKind::InvalidArgument, "totals must be positive");
  LeafFamily f = *this;
  f.totals_ = std::move(psi);
  for (std::size_t r = 0; r < model_->size(); ++r) {
    const auto& edges = model_->edges(r);
    LogSumExp row;
    for (const auto& e : edges) row.add(e.potential + std::log(f.totals_[e.to]));
    for (std::size_t j = 0; j < edges.size(); ++j)
      f.normalized_.log_kernel[r][j] = edges[j].potential + std::log(f.totals_[edges[j].to]) - row.log_value();
  }
  return f;
}

std::size_t LeafFamily::stem_block(const Stem& stem) const {
  const auto& g = model_->base_graph();
  if (stem.letters.size() < model_->block_length())
    throw Error(ErrorKind::InvalidArgument, "stem has " + std::to_string(stem.letters.size()) +
                                                " letters; at least " + std::to_string(model_->block_length()) +
                                                " are needed");
  if (!is_admissible(g, stem.letters)) throw Error(ErrorKind::InadmissibleWord, "stem is not admissible");
  auto b = model_->find_block(stem.letters);
  if (!b) throw Error(ErrorKind::InadmissibleWord, "stem leaves the component");
  return *b;
}

double LeafFamily::total(const Stem& stem) const { return totals_[stem_block(stem)]; }

std::optional<std::pair<std::size_t, double>> LeafFamily::kernel_step(std::size_t block, SymbolId letter) const {
  const auto& edges = model_->edges(block);
  for (std::size_t j = 0; j < edges.size(); ++j)
    if (model_->last_symbol(edges[j].to) == letter) return std::make_pair(edges[j].to, normalized_.log_kernel[block][j]);
  return std::nullopt;
}

double LeafFamily::probability(const Stem& stem, std::span<const SymbolId> w) const {
  if (w.empty()) throw Error(ErrorKind::InvalidArgument, "future word must be nonempty");
  std::size_t r = stem_block(stem);
  if (w.front() != stem.letters.back())
    throw Error(ErrorKind::WordMismatch, "future word starts with '" + model_->base_graph().name(w.front()) +
                                             "' but the stem ends in '" +
                                             model_->base_graph().name(stem.letters.back()) + "'");
  double log_p = 0.0;
  for (std::size_t k = 1; k < w.size(); ++k) {
    auto step = kernel_step(r, w[k]);
    if (!step) return 0.0;
    r = step->first;
    log_p += step->second;
  }
  return std::exp(log_p);
}

double LeafFamily::mass(const Stem& stem, std::span<const SymbolId> w) const {
  return totals_[stem_block(stem)] * probability(stem, w);
}

LeafMeasure LeafFamily::leaf(const Stem& stem, std::size_t depth) const {
  LeafMeasure out;
  out.stem = stem;
  const std::size_t start = stem_block(stem);
  out.total = totals_[start];
  if (depth == 0) return out;
  std::vector<SymbolId> w{stem.letters.back()};
  std::function<void(std::size_t, double)> visit = [&](std::size_t block, double log_p) {
    out.masses.emplace(w, out.total * std::exp(log_p));
    if (w.size() == depth) return;
    const auto& edges = model_->edges(block);
    for (std::size_t j = 0; j < edges.size(); ++j) {
      w.push_back(model_->last_symbol(edges[j].to));
      visit(edges[j].to, log_p + normalized_.log_kernel[block][j]);
      w.pop_back();
    }
  };
  visit(start, 0.0);
  return out;
}

std::vector<std::vector<SymbolId>> LeafFamily::future_words(SymbolId first, std::size_t length) const {
  const auto& comp = model_->component();
  std::vector<std::vector<SymbolId>> out;
  if (!std::binary_search(comp.begin(), comp.end(), first)) return out;
  for_each_path(model_->base_graph(), first, length, [&](std::span<const SymbolId> w) {
    if (std::all_of(w.begin(), w.end(), [&](SymbolId s) { return std::binary_search(comp.begin(), comp.end(), s); }))
      out.emplace_back(w.begin(), w.end());
  });
  return out;
}

std::vector<Stem> LeafFamily::block_stems() const {
  std::vector<Stem> out;
  for (std::size_t i = 0; i < model_->size(); ++i) out.push_back(Stem{model_->block(i)});
  return out;
}

double pushforward_invariance_residual(const LeafFamily& family, const Stem& stem, std::size_t depth) {
  if (depth == 0) throw Error(ErrorKind::InvalidArgument, "depth must be at least 1");
  const auto& model = family.model();
  const std::size_t r = family.stem_block(stem);
  const double pressure = family.pressure();
  double worst = 0.0;
  for (const auto& e : model.edges(r)) {
    const Stem next{model.block(e.to)};
    const SymbolId c0 = model.last_symbol(e.to);
    for (std::size_t len = 1; len <= depth; ++len) {
      for (const auto& c : family.future_words(c0, len)) {
        std::vector<SymbolId> lifted{stem.letters.back()};
        lifted.insert(lifted.end(), c.begin(), c.end());
        double lhs = family.mass(stem, lifted);
        double rhs = std::exp(e.potential - pressure) * family.mass(next, c);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
  }
  return worst;
}

double pushforward_invariance_residual(const LeafFamily& family, std::size_t depth) {
  double worst = 0.0;
  for (const auto& s : family.block_stems()) worst = std::max(worst, pushforward_invariance_residual(family, s, depth));
  return worst;
}

HolonomyReport holonomy_ratio_check(const LeafFamily& family, const Stem& r, const Stem& r_tilde, std::size_t depth) {
  if (r.letters.empty() || r_tilde.letters.empty() || r.letters.back() != r_tilde.letters.back())
    throw Error(ErrorKind::StemMismatch, "holonomy needs two stems ending in the same symbol");
  HolonomyReport out;
  const std::size_t shortest = std::min(r.letters.size(), r_tilde.letters.size());
  while (out.agreement < shortest &&
         r.letters[r.letters.size() - 1 - out.agreement] == r_tilde.letters[r_tilde.letters.size() - 1 - out.agreement])
    ++out.agreement;

  out.gamma = family.holder_ratio();
  const int m = static_cast<int>(family.model().block_length());
  for (int k = 1; k <= m + 1; ++k)
    out.constant = std::max(out.constant, normalized_variation(family.model(), family.normalized(), k) /
                                              std::pow(out.gamma, k));
  out.bound = std::pow(std::exp(out.constant / (1.0 - out.gamma)), std::pow(out.gamma, static_cast<double>(out.agreement)));

  for (std::size_t len = 1; len <= depth; ++len)
    for (const auto& w : family.future_words(r.letters.back(), len)) {
      double a = family.probability(r, w);
      double b = family.probability(r_tilde, w);
      if (a == 0.0 && b == 0.0) continue;
      double ratio = b / a;
      out.max_ratio = std::max({out.max_ratio, ratio, 1.0 / ratio});
    }
  return out;
}

std::optional<double> CylinderMeasureTable::mass(const Word& w) const {
  auto it = masses_.find(w);
  if (it == masses_.end()) return std::nullopt;
  return it->second;
}

double CylinderMeasureTable::total() const {
  double s = 0.0;
  for (const auto& [w, m] : masses_)
    if (w.base_index == 0 && w.size() == 1) s += m;
  return s;
}

double CylinderMeasureTable::shift_invariance_defect() const {
  double worst = 0.0;
  for (const auto& [w, m] : masses_) {
    if (w.base_index != 0) continue;
    for (int k : {-1, 1}) {
      auto other = mass(Word{k, w.letters});
      if (other) worst = std::max(worst, std::abs(*other - m));
    }
  }
  return worst;
}

double CylinderMeasureTable::consistency_defect() const {
  double worst = 0.0;
  for (auto it = masses_.begin(); it != masses_.end(); ++it) {
    const Word& w = it->first;
    if (w.size() >= depth_) continue;
    double children = 0.0;
    for (auto jt = std::next(it); jt != masses_.end(); ++jt) {
      const Word& v = jt->first;
      if (v.base_index != w.base_index || v.size() < w.size() ||
          !std::equal(w.letters.begin(), w.letters.end(), v.letters.begin()))
        break;
      if (v.size() == w.size() + 1) children += jt->second;
    }
    worst = std::max(worst, std::abs(it->second - children));
  }
  return worst;
}

double equilibrium_mass(const LeafFamily& family, const Word& cylinder) {
  if (cylinder.empty()) throw Error(ErrorKind::InvalidArgument, "cylinder must be nonempty");
  const auto& model = family.model();
  const auto& g = model.base_graph();
  const auto& comp = model.component();
  const long m = static_cast<long>(model.block_length());
  const long k = cylinder.base_index;
  const long n = static_cast<long>(cylinder.size());
  const long lo = std::min(k, -(m - 1));
  const long hi = std::max(k + n - 1, 0L);
  const double pressure = family.pressure();
  const auto& p = family.spectral().conformal;

  // Fill coordinates lo..hi; pinned where the cylinder says so.
  auto pinned = [&](long c) -> std::optional<SymbolId> {
    if (c >= k && c < k + n) return cylinder.letters[static_cast<std::size_t>(c - k)];
    return std::nullopt;
  };
  std::vector<SymbolId> x;
  double total = 0.0;
  std::function<void()> fill = [&]() {
    const long c = lo + static_cast<long>(x.size());
    if (c > hi) {
      // Past part: conformal weight of the stem ending at coordinate 0.
      auto first = model.find_block(std::span<const SymbolId>(x).first(static_cast<std::size_t>(m)));
      if (!first) return;
      std::size_t block = *first;
      double log_w = std::log(p[block]);
      for (long t = lo + m; t <= 0; ++t) {
        auto e = model.step(block, x[static_cast<std::size_t>(t - lo)]);
        if (!e) return;
        log_w += e->potential - pressure;
        block = e->to;
      }
      Stem stem{model.block(block)};
      std::span<const SymbolId> future(x.begin() + (0 - lo), x.end());
      total += std::exp(log_w) * family.mass(stem, future);
      return;
    }
    auto candidates = [&]() -> std::vector<SymbolId> {
      if (auto s = pinned(c)) return {*s};
      if (x.empty()) return comp;
      return g.successors(x.back());
    }();
    for (SymbolId s : candidates) {
      if (!std::binary_search(comp.begin(), comp.end(), s)) continue;
      if (!x.empty() && !g.has_edge(x.back(), s)) continue;
      x.push_back(s);
      fill();
      x.pop_back();
    }
  };
  fill();
  return total;
}

CylinderMeasureTable assemble_equilibrium(const LeafFamily& family, std::size_t depth, unsigned threads,
                                          std::size_t max_cylinders) {
  if (depth == 0) throw Error(ErrorKind::InvalidArgument, "depth must be at least 1");
  std::vector<Word> keys;
  for (std::size_t len = 1; len <= depth; ++len) {
    for (SymbolId s : family.model().component()) {
      for (auto& w : family.future_words(s, len)) {
        for (int base : {-1, 0, 1}) {
          keys.push_back(Word{base, w});
          if (keys.size() > max_cylinders)
            throw Error(ErrorKind::CapacityExceeded, "more than " + std::to_string(max_cylinders) +
                                                         " cylinders requested; lower --depth");
        }
      }
    }
  }
  std::vector<double> values(keys.size());
  parallel_for(keys.size(), threads, [&](std::size_t i) { values[i] = equilibrium_mass(family, keys[i]); });
  CylinderMeasureTable table;
  table.depth_ = depth;
  for (std::size_t i = 0; i < keys.size(); ++i) table.masses_.emplace(std::move(keys[i]), values[i]);
  return table;
}

GibbsReport gibbs_bound_check(const CylinderMeasureTable& table, const LeafFamily& family, std::size_t depth) {
  const auto& model = family.model();
  const std::size_t m = model.block_length();
  const double pressure = family.pressure();
  GibbsReport out;
  double c_psi = 1.0;
  for (double v : family.totals()) c_psi = std::max({c_psi, v, 1.0 / v});
  out.certificate = c_psi * c_psi * std::exp(2.0 * family.transfer_sup_norm());

  std::map<std::size_t, std::pair<double, double>> by_block;
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& [w, mass] : table.masses()) {
    if (w.base_index != 0 || w.size() < m || w.size() > depth) continue;
    auto first = model.find_block(std::span<const SymbolId>(w.letters).first(m));
    if (!first) continue;
    std::size_t block = *first;
    double s = 0.0;
    for (std::size_t i = m; i < w.size(); ++i) {
      auto e = model.step(block, w.letters[i]);
      s += e->potential - pressure;
      block = e->to;
    }
    double ratio = mass / std::exp(s);
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
    auto [it, fresh] = by_block.try_emplace(*first, ratio, ratio);
    if (!fresh) {
      it->second.first = std::min(it->second.first, ratio);
      it->second.second = std::max(it->second.second, ratio);
    }
  }
  for (const auto& [b, r] : by_block) out.worst_spread = std::max(out.worst_spread, r.second / r.first);
  return out;
}

EntropyReport entropy_pressure_identity(const LeafFamily& family) {
  const auto& model = family.model();
  const auto& p = family.spectral().conformal;
  const auto& psi = family.totals();
  EntropyReport out;
  out.pressure = family.pressure();
  for (std::size_t r = 0; r < model.size(); ++r) {
    const double pi = p[r] * psi[r];
    for (double lq : family.normalized().log_kernel[r]) out.entropy -= pi * std::exp(lq) * lq;
  }
  const auto& pot = family.potential();
  const std::size_t len = pot.window_length();
  for (SymbolId s : model.component())
    for (const auto& w : family.future_words(s, len)) out.integral += equilibrium_mass(family, Word{0, w}) * pot(w);
  out.residual = std::abs(out.entropy + out.integral - out.pressure);
  return out;
}

double uniqueness_residual(const LeafFamily& family, std::size_t depth) {
  const auto& model = family.model();
  const double pressure = family.pressure();
  // Invariance law read right to left: mu_R([R0 c]) = e^{phi(R c0) - P} mu_{R c0}([c]).
  std::function<double(std::size_t, std::span<const SymbolId>)> rebuilt = [&](std::size_t block,
                                                                               std::span<const SymbolId> w) {
    if (w.size() == 1) return family.totals()[block];
    auto e = model.step(block, w[1]);
    if (!e) return 0.0;
    return std::exp(e->potential - pressure) * rebuilt(e->to, w.subspan(1));
  };
  double worst = 0.0;
  for (std::size_t r = 0; r < model.size(); ++r) {
    Stem stem{model.block(r)};
    for (std::size_t len = 1; len <= depth; ++len)
      for (const auto& w : family.future_words(stem.letters.back(), len)) {
        double built = family.mass(stem, w);
        if (built == 0.0) continue;
        worst = std::max(worst, std::abs(rebuilt(r, w) / built - 1.0));
      }
  }
  return worst;
}

}  // namespace symdyn
