#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "symdyn/leaf.hpp"
#include "symdyn/potential.hpp"
#include "symdyn/shift_graph.hpp"

namespace symdyn {

using IntMatrix2 = std::array<std::array<long, 2>, 2>;
using Vec2 = std::array<double, 2>;

// Axis-aligned box in eigencoordinates (u along the unstable direction).
struct Rectangle {
  double center_u = 0.0;
  double center_s = 0.0;
  double unstable_extent = 0.0;  // full width in u
  double stable_extent = 0.0;    // full height in s

  double u_lo() const { return center_u - unstable_extent / 2; }
  double u_hi() const { return center_u + unstable_extent / 2; }
  double s_lo() const { return center_s - stable_extent / 2; }
  double s_hi() const { return center_s + stable_extent / 2; }
};

struct Transition {
  SymbolId to = 0;
  std::array<long, 2> translation{};  // integer vector added after applying the matrix
};

class LinearToralModel {
 public:
  // Validates hyperbolicity, the Markov crossing property, total area and
  // irreducibility; throws PartitionInvalid otherwise.
  static LinearToralModel create(const IntMatrix2& matrix, std::vector<Rectangle> rectangles);

  const IntMatrix2& matrix() const { return matrix_; }
  double lambda() const { return lambda_; }
  double stable_eigenvalue() const { return mu_; }
  const Vec2& unstable_direction() const { return eu_; }
  const Vec2& stable_direction() const { return es_; }
  const std::vector<Rectangle>& rectangles() const { return rects_; }
  const std::vector<std::vector<Transition>>& transitions() const { return transitions_; }
  const std::shared_ptr<const ShiftGraph>& graph() const { return graph_; }
  const Transition* transition(SymbolId from, SymbolId to) const;

  Vec2 to_eigen(const Vec2& x) const;
  Vec2 from_eigen(const Vec2& us) const;
  double total_area() const;

  // Rectangle containing the torus point; ties go to the smallest index.
  SymbolId locate(const Vec2& x) const;

 private:
  LinearToralModel() = default;

  IntMatrix2 matrix_{};
  double lambda_ = 0.0;
  double mu_ = 0.0;
  Vec2 eu_{}, es_{};
  std::array<std::array<double, 2>, 2> inverse_{};  // standard -> eigen
  std::vector<Rectangle> rects_;
  std::vector<std::vector<Transition>> transitions_;
  std::shared_ptr<const ShiftGraph> graph_;
};

// Five-rectangle partition of [[2,1],[1,1]]: the two squares of side
// a = phi/c and b = 1/c tiling the torus, cut into strips of full stable
// height.
std::vector<Rectangle> default_cat_partition();

struct CatmapInstance {
  LinearToralModel model;
  LocallyConstantPotential potential;  // constant -t log lambda
  double t = 1.0;
};

CatmapInstance build_catmap_model(double t);

// Piece of unstable leaf starting at `anchor` (eigencoordinates) of the
// given length along e_u.
struct UnstableSegment {
  Vec2 anchor{};
  double length = 0.0;
};

// The segment that crosses rectangle r in the unstable direction at mid height.
UnstableSegment crossing_segment(const LinearToralModel& model, SymbolId r);

// Length of the points of `segment` whose forward itinerary follows w.
double unstable_cylinder_arclength(const LinearToralModel& model, const UnstableSegment& segment,
                                   std::span<const SymbolId> w);

// max over words of length 1..depth of |phat(w) / (|J_w| / |J_{w0}|) - 1|.
double srb_comparison(const CatmapInstance& instance, const LeafFamily& family, std::size_t depth,
                      unsigned threads = 1);

struct PeriodicCountCheck {
  std::size_t n = 0;
  long long formula = 0;            // lambda^n + lambda^-n - 2 = tr(A^n) - 2
  std::size_t symbolic_cycles = 0;  // period-n words of the shift
  std::size_t coded_points = 0;     // distinct torus points coded by those words
};

// Counts the distinct points x = (A^n - I)^{-1}(-K) mod Z^2 obtained from
// every period-n cycle, with exact integer arithmetic.
PeriodicCountCheck periodic_point_count(const LinearToralModel& model, std::size_t n, unsigned threads = 1);

struct PeriodicDivergence {
  std::vector<double> terms;  // #Fix(f^n) lambda^-n
  std::vector<double> partial_sums;
  double slope = 0.0;  // least squares over n in [fit_from, nmax]
  std::vector<PeriodicCountCheck> checks;
};

PeriodicDivergence periodic_sum_divergence(const LinearToralModel& model, std::size_t nmax, std::size_t fit_from = 5,
                                           std::size_t check_upto = 12, unsigned threads = 1);

}  // namespace symdyn
