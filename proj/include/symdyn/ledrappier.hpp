#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "symdyn/leaf.hpp"
#include "symdyn/potential.hpp"
#include "symdyn/ruelle.hpp"

namespace symdyn {

// Reference masses on future cylinders [w0 .. wn] (coordinates 0..n).
// The potential is read in the future-shifted form v(x) = phi(f^a x), which
// depends on x_0 .. x_{a+b}; with L = max(a+b, 1),
//   m([w]) = exp(sum_{j=0}^{n-L} (v(w_j .. w_{j+L}) - P)) * rho(w_{n-L+1} .. w_n)
// for |w| >= L, where rho is the right Perron vector of the future block
// matrix, scaled so the one-letter cylinders sum to 1. Shorter words sum
// their extensions.
class ConformalFamily {
 public:
  std::size_t block_length() const { return model_->block_length(); }
  double pressure() const { return pressure_; }
  const std::vector<SymbolId>& component() const { return model_->component(); }
  const ShiftGraph& graph() const { return model_->base_graph(); }
  const std::vector<double>& rho() const { return rho_; }

  // v on a window of L + 1 letters.
  double shifted_potential(std::span<const SymbolId> window) const;
  double mass(std::span<const SymbolId> w) const;

  std::map<std::vector<SymbolId>, double> masses(std::size_t depth) const;

 private:
  friend ConformalFamily build_conformal_family(const LocallyConstantPotential&, std::span<const SymbolId>,
                                                const PerronOptions&);
  ConformalFamily() = default;

  std::shared_ptr<const RecodedModel> model_;
  std::shared_ptr<const LocallyConstantPotential> shifted_;  // past-only form of v, window (L, 0)
  std::vector<double> rho_;
  double pressure_ = 0.0;
};

ConformalFamily build_conformal_family(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                       const PerronOptions& options = {});

// max over s -> w with |w| >= L, |s w| <= depth of
// |m([s w]) - e^{v(s w0 .. w_{L-1}) - P} m([w])| / m([s w]).
double conformality_residual(const ConformalFamily& family, std::size_t depth);

struct DensityReport {
  double inf_ratio = 0.0;
  double sup_ratio = 0.0;
  // Ratios after dividing the leaf by its total and the reference by m([w0]).
  double normalized_inf = 0.0;
  double normalized_sup = 0.0;
  double lower_certificate = 0.0;
  double upper_certificate = 0.0;
  bool within() const {
    return inf_ratio > 0.0 && inf_ratio >= lower_certificate * (1.0 - 1e-12) &&
           sup_ratio <= upper_certificate * (1.0 + 1e-12);
  }
};

// Ratios leaf([w]) / m([w]) over the leaf's words of length 1..depth.
// Certificate: exp(+-E) * (psi extreme / rho extreme) with
// E = 2 ||A|| + (L + 1) ||phi|| + |L - 1| |P|.
DensityReport density_bounds(const LeafFamily& leaves, const Stem& stem, const ConformalFamily& family,
                             std::size_t depth);

// Largest |log| change of any depth-D reference mass after moving every
// potential value by +-delta (signs from the seed).
double conformal_continuity_defect(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                                   double delta, std::size_t depth, unsigned seed);

}  // namespace symdyn
