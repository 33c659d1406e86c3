#include "symdyn/ruelle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "symdyn/error.hpp"

namespace symdyn {

std::string_view to_string(RecurrenceClass c) {
  switch (c) {
    case RecurrenceClass::PositiveRecurrent: return "PositiveRecurrent";
    case RecurrenceClass::NullRecurrent: return "NullRecurrent";
    case RecurrenceClass::Transient: return "Transient";
    case RecurrenceClass::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

std::size_t RecodedModel::edge_count() const {
  std::size_t n = 0;
  for (const auto& e : edges_) n += e.size();
  return n;
}

std::optional<std::size_t> RecodedModel::find_block(std::span<const SymbolId> letters) const {
  if (letters.size() < block_length_) return std::nullopt;
  auto it = index_.find(std::vector<SymbolId>(letters.end() - static_cast<long>(block_length_), letters.end()));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RecodedModel::Edge> RecodedModel::step(std::size_t block, SymbolId letter) const {
  for (const auto& e : edges_[block])
    if (blocks_[e.to].back() == letter) return e;
  return std::nullopt;
}

std::vector<std::size_t> RecodedModel::blocks_ending_in(SymbolId s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i].back() == s) out.push_back(i);
  return out;
}

RecodedModel recode_depth_one(const LocallyConstantPotential& past_potential, std::span<const SymbolId> component) {
  if (past_potential.future_window() != 0)
    throw Error(ErrorKind::InvalidArgument, "recoding needs a past-only potential; run the Sinai reduction first");
  const ShiftGraph& g = past_potential.graph();
  RecodedModel model;
  model.base_ = past_potential.graph_ptr();
  model.component_.assign(component.begin(), component.end());
  std::sort(model.component_.begin(), model.component_.end());
  model.block_length_ = static_cast<std::size_t>(std::max(past_potential.past_window(), 1));

  std::vector<char> inside(g.size(), 0);
  for (SymbolId s : model.component_) inside.at(s) = 1;
  auto in_component = [&](std::span<const SymbolId> w) {
    return std::all_of(w.begin(), w.end(), [&](SymbolId s) { return inside[s] != 0; });
  };

  for (SymbolId s : model.component_)
    for_each_path(g, s, model.block_length_, [&](std::span<const SymbolId> w) {
      if (in_component(w)) model.blocks_.emplace_back(w.begin(), w.end());
    });
  std::sort(model.blocks_.begin(), model.blocks_.end());
  for (std::size_t i = 0; i < model.blocks_.size(); ++i) model.index_.emplace(model.blocks_[i], i);

  const std::size_t window = past_potential.window_length();
  model.edges_.resize(model.blocks_.size());
  std::vector<SymbolId> ext(model.block_length_ + 1);
  for (std::size_t i = 0; i < model.blocks_.size(); ++i) {
    const auto& b = model.blocks_[i];
    std::copy(b.begin(), b.end(), ext.begin());
    for (SymbolId s : g.successors(b.back())) {
      if (!inside[s]) continue;
      ext.back() = s;
      auto to = model.find_block(std::span<const SymbolId>(ext).subspan(1));
      if (!to) continue;
      double v = past_potential(std::span<const SymbolId>(ext).last(window));
      model.edges_[i].push_back({*to, v});
    }
  }

  std::vector<std::string> names;
  names.reserve(model.blocks_.size());
  for (const auto& b : model.blocks_) {
    std::string name;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (k && !g.single_char_names()) name += '.';
      name += g.name(b[k]);
    }
    names.push_back(std::move(name));
  }
  std::vector<std::vector<SymbolId>> succ(model.blocks_.size());
  for (std::size_t i = 0; i < model.blocks_.size(); ++i)
    for (const auto& e : model.edges_[i]) succ[i].push_back(static_cast<SymbolId>(e.to));
  model.block_graph_ = std::make_shared<const ShiftGraph>(ShiftGraph::from_adjacency(names, succ));
  return model;
}

std::vector<double> apply_ruelle(const RecodedModel& model, std::span<const double> h) {
  if (h.size() != model.size()) throw Error(ErrorKind::InvalidArgument, "vector size does not match block count");
  std::vector<double> out(model.size(), 0.0);
  for (std::size_t r = 0; r < model.size(); ++r)
    for (const auto& e : model.edges(r)) out[r] += std::exp(e.potential) * h[e.to];
  return out;
}

std::vector<double> apply_ruelle_dual(const RecodedModel& model, std::span<const double> p) {
  if (p.size() != model.size()) throw Error(ErrorKind::InvalidArgument, "vector size does not match block count");
  std::vector<double> out(model.size(), 0.0);
  for (std::size_t r = 0; r < model.size(); ++r)
    for (const auto& e : model.edges(r)) out[e.to] += p[r] * std::exp(e.potential);
  return out;
}

namespace {

struct PowerResult {
  std::vector<double> vec;
  double eigenvalue;
  double residual;
  std::size_t iterations;
};

// Power iteration on W + shift I, which is primitive whenever W is
// irreducible; the Collatz-Wielandt quotients bracket the Perron root.
PowerResult power_iterate(const RecodedModel& model, bool transpose, const PerronOptions& opt) {
  const std::size_t n = model.size();
  auto apply = [&](const std::vector<double>& x) {
    return transpose ? apply_ruelle_dual(model, x) : apply_ruelle(model, x);
  };
  double shift = 0.0;
  {
    std::vector<double> ones(n, 1.0);
    auto rows = apply(ones);
    for (double r : rows) shift += r;
    shift /= static_cast<double>(n);
  }
  std::vector<double> x(n, 1.0);
  double lambda = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < opt.max_iterations; ++it) {
    auto wx = apply(x);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, xmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double q = wx[i] / x[i];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
      xmax = std::max(xmax, x[i]);
    }
    lambda = 0.5 * (lo + hi);
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(wx[i] - lambda * x[i]));
    residual /= lambda * xmax;
    if (residual < opt.tolerance) break;
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = wx[i] + shift * x[i];
      norm = std::max(norm, x[i]);
    }
    for (double& v : x) v /= norm;
  }
  if (residual >= opt.tolerance)
    throw Error(ErrorKind::NoConvergence, "power iteration did not reach the residual target within " +
                                              std::to_string(opt.max_iterations) + " iterations");
  return {x, lambda, residual, it};
}

}  // namespace

SpectralData perron_data(const RecodedModel& model, const PerronOptions& options) {
  if (model.size() == 0 || !is_irreducible(model.block_graph(), [&] {
        std::vector<SymbolId> all(model.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<SymbolId>(i);
        return all;
      }()))
    throw Error(ErrorKind::NotIrreducible, "block graph is not irreducible");

  auto right = power_iterate(model, false, options);
  auto left = power_iterate(model, true, options);

  SpectralData out;
  out.pressure = std::log(right.eigenvalue);
  out.iterations = right.iterations + left.iterations;
  out.harmonic_residual = right.residual;
  out.conformal_residual = left.residual;

  double psum = 0.0;
  for (double v : left.vec) psum += v;
  out.conformal = left.vec;
  for (double& v : out.conformal) v /= psum;
  double dot = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) dot += out.conformal[i] * right.vec[i];
  out.harmonic = right.vec;
  for (double& v : out.harmonic) v /= dot;

  if (model.size() <= options.dense_check_limit) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<long>(model.size()), static_cast<long>(model.size()));
    for (std::size_t r = 0; r < model.size(); ++r)
      for (const auto& e : model.edges(r)) w(static_cast<long>(r), static_cast<long>(e.to)) += std::exp(e.potential);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(w, false);
    double best = -std::numeric_limits<double>::infinity();
    for (long i = 0; i < solver.eigenvalues().size(); ++i) best = std::max(best, solver.eigenvalues()[i].real());
    out.dense_check_error = std::abs(best - right.eigenvalue) / right.eigenvalue;
  }
  return out;
}

double NormalizedPotential::kernel(std::size_t block, std::size_t edge_index) const {
  return std::exp(log_kernel[block][edge_index]);
}

double NormalizedPotential::row_sum_defect() const {
  double worst = 0.0;
  for (const auto& row : log_kernel) {
    double s = 0.0;
    for (double v : row) s += std::exp(v);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

NormalizedPotential normalized_potential(const RecodedModel& model, const SpectralData& spectral) {
  NormalizedPotential out;
  out.log_kernel.resize(model.size());
  for (std::size_t r = 0; r < model.size(); ++r)
    for (const auto& e : model.edges(r))
      out.log_kernel[r].push_back(e.potential + std::log(spectral.harmonic[e.to]) -
                                  std::log(spectral.harmonic[r]) - spectral.pressure);
  return out;
}

std::vector<double> log_harmonic_regularity(const SpectralData& spectral, const RecodedModel& model) {
  const std::size_t m = model.block_length();
  std::vector<double> out;
  for (std::size_t k = 0; k <= m; ++k) {
    std::map<std::vector<SymbolId>, std::pair<double, double>> range;
    for (std::size_t i = 0; i < model.size(); ++i) {
      const auto& b = model.block(i);
      std::vector<SymbolId> key(b.end() - static_cast<long>(k), b.end());
      double v = std::log(spectral.harmonic[i]);
      auto [it, fresh] = range.try_emplace(std::move(key), v, v);
      if (!fresh) {
        it->second.first = std::min(it->second.first, v);
        it->second.second = std::max(it->second.second, v);
      }
    }
    double spread = 0.0;
    for (const auto& [key, r] : range) spread = std::max(spread, r.second - r.first);
    out.push_back(spread);
  }
  return out;
}

double normalized_variation(const RecodedModel& model, const NormalizedPotential& normalized, int k) {
  const std::size_t m = model.block_length();
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "variation depth must be nonnegative");
  if (static_cast<std::size_t>(k) > m) return 0.0;
  std::map<std::vector<SymbolId>, std::pair<double, double>> range;
  for (std::size_t r = 0; r < model.size(); ++r) {
    const auto& edges = model.edges(r);
    for (std::size_t j = 0; j < edges.size(); ++j) {
      std::vector<SymbolId> window = model.block(r);
      window.push_back(model.last_symbol(edges[j].to));
      std::vector<SymbolId> key(window.end() - k, window.end());
      double v = normalized.log_kernel[r][j];
      auto [it, fresh] = range.try_emplace(std::move(key), v, v);
      if (!fresh) {
        it->second.first = std::min(it->second.first, v);
        it->second.second = std::max(it->second.second, v);
      }
    }
  }
  double spread = 0.0;
  for (const auto& [key, r] : range) spread = std::max(spread, r.second - r.first);
  return spread;
}

}  // namespace symdyn
