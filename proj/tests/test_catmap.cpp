#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "oracles.hpp"
#include "symdyn/catmap.hpp"
#include "symdyn/error.hpp"
#include "symdyn/thermo.hpp"

using namespace symdyn;

namespace {

std::vector<SymbolId> all_symbols(const ShiftGraph& g) {
  std::vector<SymbolId> v(g.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Itinerary of the segment point at parameter s, found by applying the
// matrix to torus points and locating each image.
std::vector<SymbolId> itinerary(const LinearToralModel& m, const UnstableSegment& seg, double s, std::size_t n) {
  Vec2 x = m.from_eigen({seg.anchor[0] + s, seg.anchor[1]});
  std::vector<SymbolId> out;
  const auto& a = m.matrix();
  for (std::size_t k = 0; k < n; ++k) {
    x = {x[0] - std::floor(x[0]), x[1] - std::floor(x[1])};
    out.push_back(m.locate(x));
    x = {a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]};
  }
  return out;
}

// Arclength of {s : itinerary(s) starts with w}: scan a fine grid and
// bisect each change of itinerary down to rounding.
double arclength_oracle(const LinearToralModel& m, const UnstableSegment& seg, const std::vector<SymbolId>& w) {
  const std::size_t grid = 6000;
  const std::size_t n = w.size();
  // Keep away from the endpoints, which sit on rectangle boundaries.
  const double eps = 1e-13;
  std::vector<double> cuts{0.0};
  std::vector<std::vector<SymbolId>> labels;
  double prev_s = eps;
  auto prev = itinerary(m, seg, prev_s, n);
  labels.push_back(prev);
  for (std::size_t i = 1; i <= grid; ++i) {
    const double s = i == grid ? seg.length - eps : seg.length * static_cast<double>(i) / grid;
    auto cur = itinerary(m, seg, s, n);
    if (cur != prev) {
      double lo = prev_s, hi = s;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (itinerary(m, seg, mid, n) == prev ? lo : hi) = mid;
      }
      cuts.push_back(0.5 * (lo + hi));
      labels.push_back(cur);
    }
    prev = cur;
    prev_s = s;
  }
  cuts.push_back(seg.length);
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == w) total += cuts[i + 1] - cuts[i];
  return total;
}

}  // namespace

TEST_CASE("cat map pressure and potential") {
  const double log_lambda = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  for (double t : {0.0, 0.5, 1.0, 2.0}) {
    auto inst = build_catmap_model(t);
    for (double v : inst.potential.values()) CHECK(v == doctest::Approx(-t * log_lambda).epsilon(1e-15));
    const double p = gurevich_pressure(inst.potential, all_symbols(*inst.model.graph())).value;
    CHECK(std::abs(p - (1.0 - t) * log_lambda) < 1e-10);
  }
  CHECK_THROWS_AS(build_catmap_model(2.5), Error);
}

TEST_CASE("partition structure") {
  auto inst = build_catmap_model(1.0);
  const auto& m = inst.model;
  CHECK(m.rectangles().size() == 5);
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.lambda() * m.stable_eigenvalue() == doctest::Approx(1.0).epsilon(1e-14));
  // Each image crosses whole rectangles whose widths add up to lambda times the original.
  for (SymbolId i = 0; i < 5; ++i) {
    double width = 0.0;
    for (const auto& t : m.transitions()[i]) width += m.rectangles()[t.to].unstable_extent;
    CHECK(width == doctest::Approx(m.lambda() * m.rectangles()[i].unstable_extent).epsilon(1e-12));
  }
  auto broken = default_cat_partition();
  broken.pop_back();
  try {
    LinearToralModel::create({{{2, 1}, {1, 1}}}, broken);
    FAIL("expected PartitionInvalid");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PartitionInvalid);
  }
  CHECK_THROWS_AS(LinearToralModel::create({{{1, 1}, {0, 1}}}, default_cat_partition()), Error);
}

TEST_CASE("unstable arclengths") {
  auto inst = build_catmap_model(1.0);
  const auto& m = inst.model;
  const auto& g = *m.graph();
  for (SymbolId r = 0; r < 5; ++r) {
    auto seg = crossing_segment(m, r);
    CHECK(unstable_cylinder_arclength(m, seg, std::vector<SymbolId>{r}) == doctest::Approx(m.rectangles()[r].unstable_extent).epsilon(1e-14));
    for (std::size_t n = 1; n <= 5; ++n)
      for (const auto& w : admissible_words(g, n)) {
        if (w[0] != r) continue;
        double children = 0.0;
        for (SymbolId s : g.successors(w.back())) {
          auto ws = w;
          ws.push_back(s);
          children += unstable_cylinder_arclength(m, seg, ws);
        }
        CHECK(std::abs(children - unstable_cylinder_arclength(m, seg, w)) < 1e-12);
      }
  }
  try {
    unstable_cylinder_arclength(m, crossing_segment(m, 0), std::vector<SymbolId>{1});
    FAIL("expected SegmentMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SegmentMismatch);
  }
}

TEST_CASE("arclengths match direct iteration of the matrix") {
  auto inst = build_catmap_model(1.0);
  const auto& m = inst.model;
  const auto& g = *m.graph();
  for (SymbolId r : {SymbolId{0}, SymbolId{3}}) {
    auto seg = crossing_segment(m, r);
    for (std::size_t n = 2; n <= 5; ++n)
      for (const auto& w : admissible_words(g, n)) {
        if (w[0] != r) continue;
        CHECK(std::abs(unstable_cylinder_arclength(m, seg, w) - arclength_oracle(m, seg, w)) < 1e-10);
      }
  }
}

TEST_CASE("SRB comparison") {
  auto inst = build_catmap_model(1.0);
  const auto all = all_symbols(*inst.model.graph());
  auto fam = LeafFamily::build(inst.potential, all);
  CHECK(srb_comparison(inst, fam, 1) < 1e-14);
  CHECK(srb_comparison(inst, fam, 10, 4) < 1e-8);
  // A constant potential gives the same normalized kernel for every t.
  auto zero = LeafFamily::build(build_catmap_model(0.0).potential, all);
  for (const auto& stem : fam.block_stems())
    for (const auto& [w, p] : fam.leaf(stem, 5).masses)
      CHECK(zero.probability(stem, w) == doctest::Approx(fam.probability(stem, w)).epsilon(1e-12));
}

TEST_CASE("periodic points") {
  auto inst = build_catmap_model(1.0);
  const auto& m = inst.model;
  const auto& g = *m.graph();
  auto one = periodic_point_count(m, 1);
  CHECK(one.formula == 1);
  CHECK(one.coded_points == 1);

  // |det(A^n - I)| from integer matrix powers.
  long long p[2][2] = {{1, 0}, {0, 1}};
  for (std::size_t n = 1; n <= 12; ++n) {
    long long q[2][2] = {{2 * p[0][0] + p[1][0], 2 * p[0][1] + p[1][1]}, {p[0][0] + p[1][0], p[0][1] + p[1][1]}};
    std::memcpy(p, q, sizeof p);
    const long long det = std::llabs((p[0][0] - 1) * (p[1][1] - 1) - p[0][1] * p[1][0]);
    auto c = periodic_point_count(m, n, 2);
    CHECK(c.formula == det);
    CHECK(static_cast<long long>(c.coded_points) == det);
    if (n <= 8) {
      std::size_t brute = 0;
      oracle::brute_words(g, n, true, [&](const std::vector<SymbolId>&) { ++brute; });
      CHECK(c.symbolic_cycles == brute);
      // The coding double-counts the fixed point on the partition boundary.
      CHECK(static_cast<long long>(brute) == det + 2);
    }
  }

  auto div = periodic_sum_divergence(m, 15, 5, 12, 2);
  for (std::size_t i = 1; i < div.terms.size(); ++i) {
    CHECK(div.terms[i] > div.terms[i - 1]);
    CHECK(div.terms[i] < 1.0);
  }
  CHECK(std::abs(div.slope - 1.0) < 0.05);
}
