#include "symdyn/ledrappier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "symdyn/error.hpp"

namespace symdyn {

ConformalFamily build_conformal_family(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                       const PerronOptions& options) {
  const int a = pot.past_window();
  const int b = pot.future_window();
  const int L = std::max(a + b, 1);
  const std::size_t own = pot.window_length();
  auto shifted = LocallyConstantPotential::from_function(
      pot.graph_ptr(), L, 0, [&](std::span<const SymbolId> w) { return pot(w.first(own)); });

  ConformalFamily f;
  f.model_ = std::make_shared<const RecodedModel>(recode_depth_one(shifted, component));
  f.shifted_ = std::make_shared<const LocallyConstantPotential>(std::move(shifted));
  auto spectral = perron_data(*f.model_, options);
  f.pressure_ = spectral.pressure;
  f.rho_ = spectral.harmonic;
  double total = 0.0;
  for (double v : f.rho_) total += v;
  for (double& v : f.rho_) v /= total;
  return f;
}

double ConformalFamily::shifted_potential(std::span<const SymbolId> window) const { return (*shifted_)(window); }

double ConformalFamily::mass(std::span<const SymbolId> w) const {
  const std::size_t L = model_->block_length();
  if (w.empty()) throw Error(ErrorKind::InvalidArgument, "cylinder must be nonempty");
  const auto& comp = model_->component();
  for (SymbolId s : w)
    if (!std::binary_search(comp.begin(), comp.end(), s)) return 0.0;
  if (!is_admissible(graph(), w)) return 0.0;
  if (w.size() < L) {
    std::vector<SymbolId> ext(w.begin(), w.end());
    double sum = 0.0;
    std::function<void()> extend = [&]() {
      if (ext.size() == L) {
        sum += mass(ext);
        return;
      }
      for (SymbolId s : graph().successors(ext.back())) {
        if (!std::binary_search(comp.begin(), comp.end(), s)) continue;
        ext.push_back(s);
        extend();
        ext.pop_back();
      }
    };
    extend();
    return sum;
  }
  double log_m = 0.0;
  for (std::size_t j = 0; j + L < w.size(); ++j) log_m += (*shifted_)(w.subspan(j, L + 1)) - pressure_;
  auto last = model_->find_block(w.last(L));
  if (!last) return 0.0;
  return std::exp(log_m) * rho_[*last];
}

std::map<std::vector<SymbolId>, double> ConformalFamily::masses(std::size_t depth) const {
  std::map<std::vector<SymbolId>, double> out;
  for (SymbolId s : component())
    for (std::size_t len = 1; len <= depth; ++len)
      for_each_path(graph(), s, len, [&](std::span<const SymbolId> w) {
        double m = mass(w);
        if (m > 0.0) out.emplace(std::vector<SymbolId>(w.begin(), w.end()), m);
      });
  return out;
}

double conformality_residual(const ConformalFamily& family, std::size_t depth) {
  const std::size_t L = family.block_length();
  double worst = 0.0;
  for (const auto& [sw, m_sw] : family.masses(depth)) {
    if (sw.size() < L + 1) continue;
    std::span<const SymbolId> w(sw.begin() + 1, sw.end());
    double predicted = std::exp(family.shifted_potential(std::span<const SymbolId>(sw).first(L + 1)) -
                                family.pressure()) *
                       family.mass(w);
    worst = std::max(worst, std::abs(m_sw - predicted) / m_sw);
  }
  return worst;
}

DensityReport density_bounds(const LeafFamily& leaves, const Stem& stem, const ConformalFamily& family,
                             std::size_t depth) {
  if (&leaves.model().base_graph() != &family.graph() || leaves.model().component() != family.component())
    throw Error(ErrorKind::BaseMismatch, "leaf family and reference family live on different components");
  if (stem.letters.empty() || !std::binary_search(family.component().begin(), family.component().end(),
                                                  stem.letters.back()))
    throw Error(ErrorKind::BaseMismatch, "stem does not end in a symbol of the reference family");

  DensityReport out;
  const double L = static_cast<double>(family.block_length());
  const double e = 2.0 * leaves.transfer_sup_norm() + (L + 1.0) * leaves.potential().sup_norm() +
                   std::abs(L - 1.0) * std::abs(family.pressure());
  const auto [psi_min, psi_max] = std::minmax_element(leaves.totals().begin(), leaves.totals().end());
  const auto [rho_min, rho_max] = std::minmax_element(family.rho().begin(), family.rho().end());
  out.upper_certificate = std::exp(e) * *psi_max / *rho_min;
  out.lower_certificate = std::exp(-e) * *psi_min / *rho_max;

  const SymbolId w0 = stem.letters.back();
  const double total = leaves.total(stem);
  const double head = family.mass(std::span<const SymbolId>(&w0, 1));
  out.inf_ratio = out.normalized_inf = std::numeric_limits<double>::infinity();
  for (std::size_t len = 1; len <= depth; ++len)
    for (const auto& w : leaves.future_words(w0, len)) {
      double mu = leaves.mass(stem, w);
      double m = family.mass(w);
      if (mu == 0.0 && m == 0.0) continue;
      double r = mu / m;
      out.inf_ratio = std::min(out.inf_ratio, r);
      out.sup_ratio = std::max(out.sup_ratio, r);
      double nr = (mu / total) / (m / head);
      out.normalized_inf = std::min(out.normalized_inf, nr);
      out.normalized_sup = std::max(out.normalized_sup, nr);
    }
  return out;
}

double conformal_continuity_defect(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                   double delta, std::size_t depth, unsigned seed) {
  std::mt19937 rng(seed);
  // Equal numbers of +delta and -delta, so the move is never a pure constant.
  std::vector<double> signs(pot.windows().size());
  for (std::size_t i = 0; i < signs.size(); ++i) signs[i] = i % 2 ? -delta : delta;
  std::shuffle(signs.begin(), signs.end(), rng);
  std::map<std::vector<SymbolId>, double> shift;
  for (std::size_t i = 0; i < signs.size(); ++i) shift[pot.windows()[i]] = signs[i];
  auto moved = LocallyConstantPotential::from_function(pot.graph_ptr(), pot.past_window(), pot.future_window(),
                                                       [&](std::span<const SymbolId> w) {
                                                         return pot(w) + shift.at(std::vector<SymbolId>(w.begin(), w.end()));
                                                       });
  auto before = build_conformal_family(pot, component);
  auto after = build_conformal_family(moved, component);
  double worst = 0.0;
  for (SymbolId s : before.component())
    for_each_path(before.graph(), s, depth, [&](std::span<const SymbolId> w) {
      double m0 = before.mass(w);
      double m1 = after.mass(w);
      if (m0 > 0.0 && m1 > 0.0) worst = std::max(worst, std::abs(std::log(m1 / m0)));
    });
  return worst;
}

}  // namespace symdyn
