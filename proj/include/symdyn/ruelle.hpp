#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symdyn/potential.hpp"
#include "symdyn/shift_graph.hpp"

namespace symdyn {

enum class RecurrenceClass { PositiveRecurrent, NullRecurrent, Transient, Undetermined };
std::string_view to_string(RecurrenceClass c);

// Higher-block presentation: blocks are admissible m-words of one
// irreducible component, block edges are the admissible (m+1)-words, and
// each edge carries the past-only potential evaluated on that window.
class RecodedModel {
 public:
  struct Edge {
    std::size_t to;
    double potential;  // phi* on the (m+1)-window
  };

  std::size_t block_length() const { return block_length_; }
  std::size_t size() const { return blocks_.size(); }
  const std::vector<SymbolId>& block(std::size_t i) const { return blocks_[i]; }
  SymbolId last_symbol(std::size_t i) const { return blocks_[i].back(); }
  const std::vector<Edge>& edges(std::size_t i) const { return edges_[i]; }
  std::size_t edge_count() const;

  std::optional<std::size_t> find_block(std::span<const SymbolId> letters) const;
  // Block reached from `block` by appending `letter`, with the edge potential.
  std::optional<Edge> step(std::size_t block, SymbolId letter) const;

  const ShiftGraph& base_graph() const { return *base_; }
  const ShiftGraph& block_graph() const { return *block_graph_; }
  const std::vector<SymbolId>& component() const { return component_; }

  // Blocks whose last letter is s.
  std::vector<std::size_t> blocks_ending_in(SymbolId s) const;

 private:
  friend RecodedModel recode_depth_one(const LocallyConstantPotential&, std::span<const SymbolId>);
  RecodedModel() = default;

  std::shared_ptr<const ShiftGraph> base_;
  std::vector<SymbolId> component_;
  std::size_t block_length_ = 1;
  std::vector<std::vector<SymbolId>> blocks_;
  std::map<std::vector<SymbolId>, std::size_t> index_;
  std::vector<std::vector<Edge>> edges_;
  std::shared_ptr<const ShiftGraph> block_graph_;
};

// Requires a past-only potential. Blocks have length max(past window, 1).
RecodedModel recode_depth_one(const LocallyConstantPotential& past_potential, std::span<const SymbolId> component);

// (L h)(R) = sum over one-letter extensions S of R of e^{phi(S)} h(S).
std::vector<double> apply_ruelle(const RecodedModel& model, std::span<const double> h);
// (p L)(S) = sum over R extending to S of p(R) e^{phi(R -> S)}.
std::vector<double> apply_ruelle_dual(const RecodedModel& model, std::span<const double> p);

struct PerronOptions {
  double tolerance = 1e-13;
  std::size_t max_iterations = 1'000'000;
  std::size_t dense_check_limit = 64;
};

struct SpectralData {
  double pressure = 0.0;
  std::vector<double> harmonic;   // psi, right eigenvector
  std::vector<double> conformal;  // p, left eigenvector, sums to 1
  RecurrenceClass recurrence = RecurrenceClass::PositiveRecurrent;
  double harmonic_residual = 0.0;   // max |L psi - e^P psi| / (e^P max psi)
  double conformal_residual = 0.0;  // same for p
  std::optional<double> dense_check_error;
  std::size_t iterations = 0;
};

// Perron root and eigenvectors by shifted power iteration; normalized with
// sum(p) = 1 and p . psi = 1.
SpectralData perron_data(const RecodedModel& model, const PerronOptions& options = {});

// phi~ = phi + log psi - log psi o sigma - P on every block edge, stored in
// the same layout as model.edges().
struct NormalizedPotential {
  std::vector<std::vector<double>> log_kernel;

  double kernel(std::size_t block, std::size_t edge_index) const;
  // max over blocks of |sum_edges e^{phi~} - 1|.
  double row_sum_defect() const;
};

NormalizedPotential normalized_potential(const RecodedModel& model, const SpectralData& spectral);

// Var_k(log psi) for k = 0 .. block_length: spread of log psi over blocks
// sharing their last k letters.
std::vector<double> log_harmonic_regularity(const SpectralData& spectral, const RecodedModel& model);

// Spread of phi~ over block edges whose (m+1)-letter windows share their
// last k letters; the one-sided variation of phi~ on the component.
double normalized_variation(const RecodedModel& model, const NormalizedPotential& normalized, int k);

}  // namespace symdyn
