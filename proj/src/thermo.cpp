#include "symdyn/thermo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "symdyn/error.hpp"
#include "symdyn/numeric.hpp"

namespace symdyn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<SymbolId> component_containing(const ShiftGraph& g, SymbolId base) {
  if (base >= g.size()) throw Error(ErrorKind::UnknownSymbol, "base symbol out of range");
  auto dec = maximal_irreducible_components(g);
  const Component* c = dec.component_of(base);
  if (!c || c->kind != ComponentKind::Irreducible)
    throw Error(ErrorKind::TrivialSymbol, "symbol '" + g.name(base) + "' lies on no cycle");
  return c->symbols;
}

void require_irreducible(const ShiftGraph& g, std::span<const SymbolId> component) {
  if (!is_irreducible(g, component)) throw Error(ErrorKind::NotIrreducible, "symbol set is not an irreducible component");
}

Eigen::MatrixXd weight_matrix(const RecodedModel& model, double pressure) {
  const long n = static_cast<long>(model.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < model.size(); ++r)
    for (const auto& e : model.edges(r))
      w(static_cast<long>(r), static_cast<long>(e.to)) += std::exp(e.potential - pressure);
  return w;
}

RecodedModel reduced_model(const LocallyConstantPotential& pot, std::span<const SymbolId> component) {
  auto red = sinai_reduce(pot);
  return recode_depth_one(red.past_potential, component);
}

// Weighted cycle sum kept as a LogSumExp so integer counts stay exact.
LogSumExp partition_sum(const LocallyConstantPotential& pot, SymbolId base, std::size_t n) {
  const ShiftGraph& g = pot.graph();
  component_containing(g, base);
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "cycle length must be at least 1");

  const std::size_t a = static_cast<std::size_t>(pot.past_window());
  const std::size_t b = static_cast<std::size_t>(pot.future_window());
  LogSumExp acc;
  if (n < a + b + 1) {
    for_each_cycle(g, base, n, [&](std::span<const SymbolId> c) { acc.add(periodic_sum(pot, c)); });
    return acc;
  }

  // Depth-first over cycles; windows lying inside the path are summed on
  // the way down, the a + b windows that wrap around are added at the leaf.
  const std::size_t len = a + b + 1;
  std::vector<SymbolId> path{base};
  std::vector<std::size_t> cursor{0};
  std::vector<double> running{len == 1 ? pot(std::span<const SymbolId>(path)) : 0.0};
  std::vector<SymbolId> wrap(len);
  auto leaf_sum = [&]() {
    double s = running.back();
    for (std::size_t j = 0; j < n; ++j) {
      if (j >= a && j + b <= n - 1) continue;
      for (std::size_t i = 0; i < len; ++i) wrap[i] = path[(j + n + i - a) % n];
      s += pot(wrap);
    }
    return s;
  };
  if (n == 1) {
    if (g.has_edge(base, base)) acc.add(leaf_sum());
    return acc;
  }
  while (!path.empty()) {
    const auto& succ = g.successors(path.back());
    if (cursor.back() >= succ.size()) {
      path.pop_back();
      cursor.pop_back();
      running.pop_back();
      continue;
    }
    SymbolId next = succ[cursor.back()++];
    path.push_back(next);
    const std::size_t i = path.size() - 1;
    double s = running.back();
    if (i >= a + b) s += pot(std::span<const SymbolId>(path).subspan(i - a - b, len));
    if (path.size() == n) {
      if (g.has_edge(next, base)) {
        running.push_back(s);
        acc.add(leaf_sum());
        running.pop_back();
      }
      path.pop_back();
    } else {
      running.push_back(s);
      cursor.push_back(0);
    }
  }
  return acc;
}

}  // namespace

double log_partition_function(const LocallyConstantPotential& pot, SymbolId base, std::size_t n) {
  return partition_sum(pot, base, n).log_value();
}

double partition_function(const LocallyConstantPotential& pot, SymbolId base, std::size_t n) {
  return partition_sum(pot, base, n).value();
}

double log_partition_function_transfer(const LocallyConstantPotential& pot, SymbolId base, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "cycle length must be at least 1");
  auto component = component_containing(pot.graph(), base);
  auto model = reduced_model(pot, component);
  Eigen::MatrixXd w = weight_matrix(model, 0.0);
  Eigen::MatrixXd m = w;
  double log_scale = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    m = m * w;
    double top = m.maxCoeff();
    if (top > 0.0) {
      m /= top;
      log_scale += std::log(top);
    }
  }
  double diag = 0.0;
  for (std::size_t i : model.blocks_ending_in(base)) diag += m(static_cast<long>(i), static_cast<long>(i));
  return diag > 0.0 ? std::log(diag) + log_scale : kNegInf;
}

std::vector<double> log_partition_sequence(const LocallyConstantPotential& pot, SymbolId base, std::size_t nmax,
                                           unsigned threads) {
  std::vector<double> out(nmax, kNegInf);
  parallel_for(nmax, threads, [&](std::size_t i) { out[i] = log_partition_function(pot, base, i + 1); });
  return out;
}

std::string_view to_string(PressureEstimate::Method m) {
  return m == PressureEstimate::Method::ExactSpectral ? "exact-spectral" : "sequence-extrapolation";
}

PressureEstimate gurevich_pressure(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                   const PerronOptions& options) {
  require_irreducible(pot.graph(), component);
  auto model = reduced_model(pot, component);
  auto spectral = perron_data(model, options);
  PressureEstimate out;
  out.value = spectral.pressure;
  out.method = PressureEstimate::Method::ExactSpectral;
  out.error_bound = std::max(spectral.harmonic_residual, spectral.conformal_residual);
  return out;
}

PressureEstimate extrapolated_pressure(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                       std::size_t nmax) {
  require_irreducible(pot.graph(), component);
  const std::size_t d = component_period(pot.graph(), component);
  if (nmax < 2 * d) throw Error(ErrorKind::InvalidArgument, "need at least two multiples of the period");
  const SymbolId base = *std::min_element(component.begin(), component.end());

  auto model = reduced_model(pot, component);
  Eigen::MatrixXd w = weight_matrix(model, 0.0);
  const auto starts = model.blocks_ending_in(base);
  std::vector<double> log_z(nmax + 1, kNegInf);
  Eigen::MatrixXd m = w;
  double log_scale = 0.0;
  for (std::size_t n = 1; n <= nmax; ++n) {
    if (n > 1) {
      m = m * w;
      double top = m.maxCoeff();
      m /= top;
      log_scale += std::log(top);
    }
    double diag = 0.0;
    for (std::size_t i : starts) diag += m(static_cast<long>(i), static_cast<long>(i));
    if (diag > 0.0) log_z[n] = std::log(diag) + log_scale;
  }

  PressureEstimate out;
  out.method = PressureEstimate::Method::SequenceExtrapolation;
  for (std::size_t n = 1; n <= nmax; ++n)
    if (std::isfinite(log_z[n])) out.partial_sequence.emplace_back(n, log_z[n] / static_cast<double>(n));

  std::vector<double> ratios;
  for (std::size_t n = 2 * d; n <= nmax; n += d)
    if (std::isfinite(log_z[n]) && std::isfinite(log_z[n - d]))
      ratios.push_back((log_z[n] - log_z[n - d]) / static_cast<double>(d));
  if (ratios.empty()) throw Error(ErrorKind::NoConvergence, "no periodic orbits along multiples of the period");
  out.value = ratios.back();
  if (ratios.size() >= 2) out.error_bound = std::abs(ratios.back() - ratios[ratios.size() - 2]);
  return out;
}

std::vector<double> first_return_terms(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                       SymbolId base, double pressure, std::size_t nmax) {
  require_irreducible(pot.graph(), component);
  auto model = reduced_model(pot, component);
  const std::size_t nb = model.size();
  std::vector<char> at_base(nb, 0);
  for (std::size_t i : model.blocks_ending_in(base)) at_base[i] = 1;

  std::vector<double> terms(nmax, 0.0);
  std::vector<double> v(nb), next(nb);
  for (std::size_t start : model.blocks_ending_in(base)) {
    std::fill(v.begin(), v.end(), 0.0);
    v[start] = 1.0;
    for (std::size_t n = 1; n <= nmax; ++n) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t r = 0; r < nb; ++r) {
        if (v[r] == 0.0) continue;
        for (const auto& e : model.edges(r)) next[e.to] += v[r] * std::exp(e.potential - pressure);
      }
      terms[n - 1] += next[start];
      for (std::size_t r = 0; r < nb; ++r)
        if (at_base[r]) next[r] = 0.0;
      std::swap(v, next);
    }
  }
  return terms;
}

RecurrenceReport classify_recurrence(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                     double pressure, std::size_t nmax) {
  if (!std::isfinite(pressure)) throw Error(ErrorKind::InvalidArgument, "pressure must be finite");
  require_irreducible(pot.graph(), component);
  const SymbolId base = *std::min_element(component.begin(), component.end());

  RecurrenceReport out;
  auto model = reduced_model(pot, component);
  Eigen::MatrixXd w = weight_matrix(model, pressure);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(w.rows(), w.cols());
  double sum = 0.0;
  for (std::size_t n = 1; n <= nmax; ++n) {
    m = m * w;
    for (std::size_t i : model.blocks_ending_in(base)) sum += m(static_cast<long>(i), static_cast<long>(i));
    out.recurrence_partial_sums.push_back(sum);
  }
  auto first = first_return_terms(pot, component, base, pressure, nmax);
  double plain = 0.0, weighted = 0.0;
  for (std::size_t n = 1; n <= nmax; ++n) {
    plain += first[n - 1];
    weighted += static_cast<double>(n) * first[n - 1];
    out.first_return_partial_sums.push_back(plain);
    out.positive_recurrence_partial_sums.push_back(weighted);
  }
  // A finite irreducible component carries a Perron eigenvector pair with
  // finite pairing, which is positive recurrence.
  out.recurrence = RecurrenceClass::PositiveRecurrent;
  out.evidence = "finite irreducible component (" + std::to_string(component.size()) +
                 " symbols): Perron-Frobenius data exist, exact";
  return out;
}

PeriodicSumReport periodic_point_sum(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                     double pressure, std::size_t nmax, std::size_t fit_from) {
  require_irreducible(pot.graph(), component);
  auto model = reduced_model(pot, component);
  Eigen::MatrixXd w = weight_matrix(model, pressure);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(w.rows(), w.cols());
  PeriodicSumReport out;
  double sum = 0.0;
  for (std::size_t n = 1; n <= nmax; ++n) {
    m = m * w;
    double t = m.trace();
    sum += t;
    out.terms.push_back(t);
    out.partial_sums.push_back(sum);
  }
  std::vector<double> xs, ys;
  for (std::size_t n = std::max<std::size_t>(fit_from, 1); n <= nmax; ++n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(out.partial_sums[n - 1]);
  }
  if (xs.size() >= 2) out.growth_slope = fit_slope(xs, ys);
  return out;
}

RenewalModel renewal_truncation(const RenewalWeights& w, int depth) {
  if (depth < 0) throw Error(ErrorKind::InvalidArgument, "truncation depth must be nonnegative");
  std::vector<std::string> names;
  for (int i = 0; i <= depth; ++i) names.push_back(std::to_string(i));
  std::vector<std::vector<SymbolId>> succ(static_cast<std::size_t>(depth) + 1);
  for (int n = 0; n <= depth; ++n) succ[0].push_back(static_cast<SymbolId>(n));
  for (int n = 1; n <= depth; ++n) succ[static_cast<std::size_t>(n)].push_back(static_cast<SymbolId>(n - 1));
  auto graph = std::make_shared<const ShiftGraph>(ShiftGraph::from_adjacency(names, succ));
  auto pot = LocallyConstantPotential::from_function(graph, 0, 1, [&](std::span<const SymbolId> x) {
    if (x[0] != 0) return 0.0;
    double p = w.weight(static_cast<int>(x[1]) + 1);
    if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "renewal weights must be positive");
    return std::log(p);
  });
  return RenewalModel{graph, std::move(pot)};
}

RenewalClassification classify_renewal(const RenewalWeights& w, int depth) {
  auto model = renewal_truncation(w, depth);
  std::vector<SymbolId> all(model.graph->size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<SymbolId>(i);

  RenewalClassification out;
  out.depth = depth;
  out.truncated_pressure = gurevich_pressure(model.potential, all).value;
  // Evaluating the first-return series at x = radius means pressure -log(radius).
  auto terms = first_return_terms(model.potential, all, 0, -std::log(w.radius), static_cast<std::size_t>(depth) + 1);
  for (double t : terms) out.truncated_total += t;

  const double tol = 1e-12;
  const double tail = w.tail ? w.tail(depth + 1) : std::numeric_limits<double>::infinity();
  if (out.truncated_total > 1.0 + tol) {
    out.recurrence = RecurrenceClass::PositiveRecurrent;
    out.evidence = "truncated first-return series exceeds 1 at the radius, so the generating equation has a root inside it";
  } else if (out.truncated_total + tail < 1.0 - tol) {
    out.recurrence = RecurrenceClass::Transient;
    out.evidence = "truncated series plus tail bound stays below 1 at the radius";
  } else if (w.closed_form_total) {
    const double total = *w.closed_form_total;
    if (total < out.truncated_total - tol || total > out.truncated_total + tail + tol) {
      out.evidence = "closed-form total inconsistent with the truncation and tail bound";
    } else if (std::abs(total - 1.0) <= tol) {
      if (w.mean_finite) {
        out.recurrence = *w.mean_finite ? RecurrenceClass::PositiveRecurrent : RecurrenceClass::NullRecurrent;
        out.evidence = "closed-form total equals 1 at the radius; mean return time " +
                       std::string(*w.mean_finite ? "finite" : "infinite");
      } else {
        out.evidence = "closed-form total equals 1 but no mean-return certificate was given";
      }
    } else if (total < 1.0) {
      out.recurrence = RecurrenceClass::Transient;
      out.evidence = "closed-form total below 1 at the radius";
    } else {
      out.recurrence = RecurrenceClass::PositiveRecurrent;
      out.evidence = "closed-form total above 1 at the radius";
    }
  } else {
    out.evidence = "truncation and tail bound do not separate the series from 1";
  }
  return out;
}

}  // namespace symdyn
