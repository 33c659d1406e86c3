#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "symdyn/shift_graph.hpp"

namespace symdyn {

// Var_n(phi) <= constant * ratio^n.
struct HolderData {
  double constant = 0.0;
  double ratio = 0.5;

  // Summed tail of the variation bound from depth n on: C * theta^n / (1 - theta).
  double tail_budget(int n) const;
};

// phi(x) = value(x_{-past} .. x_{future}); one value per admissible window.
class LocallyConstantPotential {
 public:
  using Window = std::span<const SymbolId>;
  using ValueFn = std::function<double(Window)>;

  static LocallyConstantPotential from_function(std::shared_ptr<const ShiftGraph> graph, int past_window,
                                                int future_window, const ValueFn& fn);
  // Keys must be admissible windows of length past + future + 1. Missing
  // windows take `fill` when given, otherwise construction fails.
  static LocallyConstantPotential from_table(std::shared_ptr<const ShiftGraph> graph, int past_window,
                                             int future_window,
                                             const std::map<std::vector<SymbolId>, double>& values,
                                             std::optional<double> fill);
  static LocallyConstantPotential constant(std::shared_ptr<const ShiftGraph> graph, double c);

  int past_window() const { return past_; }
  int future_window() const { return future_; }
  std::size_t window_length() const { return static_cast<std::size_t>(past_ + future_ + 1); }

  const ShiftGraph& graph() const { return *graph_; }
  const std::shared_ptr<const ShiftGraph>& graph_ptr() const { return graph_; }

  // Value on an admissible window; throws InadmissibleWord otherwise.
  double operator()(Window window) const;
  std::optional<double> try_value(Window window) const;

  // Evaluates phi at the point whose coordinate 0 sits at seq[center].
  double at(std::span<const SymbolId> seq, std::size_t center) const;

  const std::vector<std::vector<SymbolId>>& windows() const { return windows_; }
  const std::vector<double>& values() const { return values_; }
  double sup_norm() const;

  const std::optional<HolderData>& holder() const { return holder_; }
  void set_holder(HolderData h) { holder_ = h; }

  LocallyConstantPotential plus_constant(double c) const;
  LocallyConstantPotential scaled(double factor) const;
  // Same function expressed on a wider window.
  LocallyConstantPotential widened(int past_window, int future_window) const;

 private:
  LocallyConstantPotential() = default;
  std::uint64_t encode(Window w) const;
  void build_index();

  std::shared_ptr<const ShiftGraph> graph_;
  int past_ = 0;
  int future_ = 0;
  std::vector<std::vector<SymbolId>> windows_;  // lexicographic
  std::vector<double> values_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::optional<HolderData> holder_;
};

// phi + u(x_0) - u(x_{-1}) for a symbol function u.
LocallyConstantPotential add_coboundary(const LocallyConstantPotential& pot, const std::vector<double>& u);

// Birkhoff sums along the periodic extension of an admissible cycle, with
// coordinate 0 at cycle[0]. Backward: sum_{k<n} phi(f^{-k} S); forward:
// sum_{k<n} phi(f^k S). Over a whole number of periods the two agree.
double birkhoff_sum_backward(const LocallyConstantPotential& pot, std::span<const SymbolId> cycle, std::size_t n);
double birkhoff_sum_forward(const LocallyConstantPotential& pot, std::span<const SymbolId> cycle, std::size_t n);

// Sum of phi over one full period of the cycle.
double periodic_sum(const LocallyConstantPotential& pot, std::span<const SymbolId> cycle);

// sup |phi(x) - phi(y)| over x, y agreeing on coordinates -n..n.
double variation(const LocallyConstantPotential& pot, int n);

// One-sided version for past-only potentials: x, y agree on their last k
// letters (coordinates -(k-1)..0). k = 0 gives the full oscillation.
double past_variation(const LocallyConstantPotential& pot, int k);

// Smallest C with past_variation(k) <= C * ratio^k for all k >= 1.
HolderData fit_past_holder(const LocallyConstantPotential& pot, double ratio);

// anchors[s] is a future word starting at s used to complete pasts.
using AnchorMap = std::vector<std::vector<SymbolId>>;

// Lexicographically smallest admissible continuation of the given length
// from each symbol.
AnchorMap lexicographic_anchors(const ShiftGraph& g, std::size_t length);

struct SinaiReduction {
  LocallyConstantPotential past_potential;  // window (a + b, 0)
  LocallyConstantPotential transfer;        // A on coordinates -(a+b-1) .. b
  AnchorMap anchors;
  double transfer_sup_norm = 0.0;
};

// phi* = phi + A - A o f^{-1} with A(x) = sum_{n>=0} phi(f^{-n} x*) - phi(f^{-n} x),
// where x* keeps the past of x and follows the anchor of x_0 in the future.
SinaiReduction sinai_reduce(const LocallyConstantPotential& pot, const AnchorMap& anchors);
SinaiReduction sinai_reduce(const LocallyConstantPotential& pot);

// max |phi(x) + A(x) - A(f^{-1}x) - phi*(x)| over all admissible words
// long enough to determine every term.
double cohomology_residual(const LocallyConstantPotential& pot, const SinaiReduction& red);

}  // namespace symdyn
