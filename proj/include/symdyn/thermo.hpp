#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "symdyn/potential.hpp"
#include "symdyn/ruelle.hpp"
#include "symdyn/shift_graph.hpp"

namespace symdyn {

// log Z_n(phi, base): log of the sum over period-n points in [base] of
// exp(phi_n). Enumerates cycles directly; -inf when there are none.
double log_partition_function(const LocallyConstantPotential& pot, SymbolId base, std::size_t n);
double partition_function(const LocallyConstantPotential& pot, SymbolId base, std::size_t n);

// Same quantity from powers of the recoded transfer matrix (rescaled to
// stay in range). Independent of the enumeration route.
double log_partition_function_transfer(const LocallyConstantPotential& pot, SymbolId base, std::size_t n);

// log Z_1 .. log Z_nmax by enumeration, one task per n.
std::vector<double> log_partition_sequence(const LocallyConstantPotential& pot, SymbolId base, std::size_t nmax,
                                           unsigned threads = 1);

struct PressureEstimate {
  enum class Method { ExactSpectral, SequenceExtrapolation };
  double value = 0.0;
  Method method = Method::ExactSpectral;
  std::vector<std::pair<std::size_t, double>> partial_sequence;  // (n, log Z_n / n)
  std::optional<double> error_bound;
};

std::string_view to_string(PressureEstimate::Method m);

// Sinai reduction, recoding and Perron root on one irreducible component.
PressureEstimate gurevich_pressure(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                   const PerronOptions& options = {});

// Growth rate of log Z_n through the smallest symbol of the component,
// sampled along multiples of the period. The value is the last ratio
// estimate (log Z_N - log Z_{N-d}) / d and the error indicator its change
// from the previous one.
PressureEstimate extrapolated_pressure(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                       std::size_t nmax);

struct RecurrenceReport {
  RecurrenceClass recurrence = RecurrenceClass::Undetermined;
  std::vector<double> recurrence_partial_sums;           // sum_{n<=N} e^{-nP} Z_n
  std::vector<double> positive_recurrence_partial_sums;  // sum_{n<=N} n e^{-nP} Z*_n (first returns)
  std::vector<double> first_return_partial_sums;         // sum_{n<=N} e^{-nP} Z*_n
  std::string evidence;
};

// Weighted sum over first-return loops of length n at base, for n = 1..nmax
// (entry n-1), each term scaled by e^{-nP}.
std::vector<double> first_return_terms(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                       SymbolId base, double pressure, std::size_t nmax);

RecurrenceReport classify_recurrence(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                     double pressure, std::size_t nmax);

struct PeriodicSumReport {
  std::vector<double> terms;         // sum over period-n points of e^{phi_n - nP}
  std::vector<double> partial_sums;  // nondecreasing
  double growth_slope = 0.0;         // least-squares slope of the partial sums over the fit range
};

// The fit uses n in [fit_from, nmax].
PeriodicSumReport periodic_point_sum(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                     double pressure, std::size_t nmax, std::size_t fit_from = 1);

// Renewal shift truncated at depth N: states 0..N, edges 0 -> n and
// n+1 -> n, so the loops returning to 0 have lengths 1..N+1. weight(k) is
// the first-return weight p_k of the loop of length k.
struct RenewalWeights {
  std::function<double(int)> weight;
  double radius = 1.0;                                  // radius of convergence of sum p_k x^k
  std::function<double(int)> tail;                      // bound on sum_{k>K} p_k radius^k
  std::optional<double> closed_form_total;              // sum_k p_k radius^k, when known
  std::optional<bool> mean_finite;                      // whether sum_k k p_k radius^k < infinity
};

struct RenewalModel {
  std::shared_ptr<const ShiftGraph> graph;
  LocallyConstantPotential potential;
};

RenewalModel renewal_truncation(const RenewalWeights& w, int depth);

struct RenewalClassification {
  int depth = 0;
  double truncated_pressure = 0.0;
  double truncated_total = 0.0;  // first-return series of the truncation at the radius
  RecurrenceClass recurrence = RecurrenceClass::Undetermined;
  std::string evidence;
};

// Classifies the full renewal shift from one truncation plus the caller's
// tail bound and closed-form data.
RenewalClassification classify_renewal(const RenewalWeights& w, int depth);

}  // namespace symdyn
