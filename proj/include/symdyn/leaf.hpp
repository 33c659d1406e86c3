#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "symdyn/potential.hpp"
#include "symdyn/ruelle.hpp"
#include "symdyn/shift_graph.hpp"

namespace symdyn {

// A finite past ending at coordinate 0. Only its last block_length letters
// matter to any leaf quantity.
struct Stem {
  std::vector<SymbolId> letters;
};

struct LeafMeasure {
  Stem stem;
  double total = 0.0;                                 // psi(stem)
  std::map<std::vector<SymbolId>, double> masses;     // future words w, w0 = stem end

  // max |mass(w) - sum_s mass(w s)| over stored words whose children are stored.
  double consistency_defect() const;
};

// The leaf measures mu_R = psi(R) * phat_R, where phat_R([w]) is the product
// of the normalized kernel along w.
class LeafFamily {
 public:
  static LeafFamily build(const LocallyConstantPotential& pot, std::span<const SymbolId> component,
                          const PerronOptions& options = {});

  // Same model and pressure with totals replaced by `psi`; kernel rows are
  // rebuilt from e^{phi} psi and renormalized. Used to probe the invariance
  // law with a non-harmonic choice.
  LeafFamily with_totals(std::vector<double> psi) const;

  const RecodedModel& model() const { return *model_; }
  const SpectralData& spectral() const { return spectral_; }
  const NormalizedPotential& normalized() const { return normalized_; }
  const LocallyConstantPotential& potential() const { return *potential_; }
  double pressure() const { return spectral_.pressure; }
  double transfer_sup_norm() const { return transfer_sup_norm_; }
  double holder_ratio() const { return holder_ratio_; }
  const std::vector<double>& totals() const { return totals_; }

  // Block index of the stem; throws on inadmissible or too-short stems.
  std::size_t stem_block(const Stem& stem) const;

  double total(const Stem& stem) const;
  // phat_R([w]); 0 when stem.w leaves the component. WordMismatch when w0
  // is not the stem's last letter.
  double probability(const Stem& stem, std::span<const SymbolId> w) const;
  double mass(const Stem& stem, std::span<const SymbolId> w) const;
  // Log-weight of one normalized step from block r by appending `letter`;
  // nullopt when the step is not admissible.
  std::optional<std::pair<std::size_t, double>> kernel_step(std::size_t block, SymbolId letter) const;

  // Leaf masses for every admissible future word of length 1..depth.
  LeafMeasure leaf(const Stem& stem, std::size_t depth) const;

  // Admissible words of the given length inside the component starting at `first`.
  std::vector<std::vector<SymbolId>> future_words(SymbolId first, std::size_t length) const;

  // Every block as a stem.
  std::vector<Stem> block_stems() const;

 private:
  LeafFamily() = default;

  std::shared_ptr<const RecodedModel> model_;
  std::shared_ptr<const LocallyConstantPotential> potential_;
  SpectralData spectral_;
  NormalizedPotential normalized_;
  std::vector<double> totals_;
  double transfer_sup_norm_ = 0.0;
  double holder_ratio_ = 0.5;
};

// max over blocks R and future words c of length 1..depth of
// |mu_R([R0 c]) - e^{phi(R c0) - P} mu_{R c0}([c])|.
double pushforward_invariance_residual(const LeafFamily& family, const Stem& stem, std::size_t depth);
double pushforward_invariance_residual(const LeafFamily& family, std::size_t depth);

struct HolonomyReport {
  std::size_t agreement = 0;  // common trailing letters of the stems
  double max_ratio = 1.0;     // max over w of max(r, 1/r), r = phat_R'([w]) / phat_R([w])
  double constant = 0.0;      // C with Var_k(phi~) <= C gamma^k
  double gamma = 0.5;
  double bound = 1.0;         // exp(C / (1 - gamma))^(gamma^agreement)
  bool within() const { return max_ratio <= bound * (1.0 + 1e-12); }
};

HolonomyReport holonomy_ratio_check(const LeafFamily& family, const Stem& r, const Stem& r_tilde, std::size_t depth);

// Two-sided cylinder masses of the assembled measure, keyed by (base index,
// word). Base indices -1, 0 and 1 are stored for every word.
class CylinderMeasureTable {
 public:
  std::size_t depth() const { return depth_; }
  std::size_t size() const { return masses_.size(); }
  const std::map<Word, double>& masses() const { return masses_; }
  std::optional<double> mass(const Word& w) const;

  // Sum of one-letter cylinders at base 0.
  double total() const;
  double shift_invariance_defect() const;
  double consistency_defect() const;

 private:
  friend CylinderMeasureTable assemble_equilibrium(const LeafFamily&, std::size_t, unsigned, std::size_t);
  std::size_t depth_ = 0;
  std::map<Word, double> masses_;
};

// nu([w]_k) = sum over pasts compatible with the cylinder of
// p(past) * mu_{stem}(future part).
double equilibrium_mass(const LeafFamily& family, const Word& cylinder);

CylinderMeasureTable assemble_equilibrium(const LeafFamily& family, std::size_t depth, unsigned threads = 1,
                                          std::size_t max_cylinders = 10'000'000);

struct GibbsReport {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double worst_spread = 1.0;  // max over leading blocks of max/min ratio
  double certificate = 1.0;   // C_psi^2 * e^{2 ||A||}
  bool within() const { return worst_spread <= certificate * (1.0 + 1e-12); }
};

// Ratio nu([W]) / e^{phi*_k(W) - kP} over base-0 cylinders with at least
// block_length letters, where the k Birkhoff terms are the block transitions
// inside W.
GibbsReport gibbs_bound_check(const CylinderMeasureTable& table, const LeafFamily& family, std::size_t depth);

struct EntropyReport {
  double entropy = 0.0;
  double integral = 0.0;  // of the original potential
  double pressure = 0.0;
  double residual = 0.0;
};

EntropyReport entropy_pressure_identity(const LeafFamily& family);

// Masses rebuilt only from the totals and the invariance law, compared to
// the product formula: max |rebuilt / constructed - 1|.
double uniqueness_residual(const LeafFamily& family, std::size_t depth);

}  // namespace symdyn
