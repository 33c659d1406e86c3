#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "symdyn/catmap.hpp"
#include "symdyn/error.hpp"
#include "symdyn/ledrappier.hpp"

using namespace symdyn;

namespace {

std::vector<SymbolId> all_symbols(const ShiftGraph& g) {
  std::vector<SymbolId> v(g.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<SymbolId> word(const ShiftGraph& g, const std::string& s) {
  std::vector<SymbolId> w;
  for (char c : s) w.push_back(*g.find(std::string(1, c)));
  return w;
}

}  // namespace

TEST_CASE("uniform reference masses on the full 2-shift") {
  auto full = oracle::full_shift(2);
  auto cf = build_conformal_family(LocallyConstantPotential::constant(full, 0.0), all_symbols(*full));
  CHECK(cf.pressure() == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(cf.mass(word(*full, "a")) == doctest::Approx(0.5).epsilon(1e-13));
  for (std::size_t n = 1; n <= 8; ++n)
    for (const auto& w : admissible_words(*full, n))
      CHECK(cf.mass(w) == doctest::Approx(std::ldexp(1.0, 1 - static_cast<int>(n)) * cf.mass(std::vector<SymbolId>{w[0]})).epsilon(1e-12));
}

TEST_CASE("geometric potential of the cat map scales by 1/lambda") {
  auto inst = build_catmap_model(1.0);
  const auto& g = *inst.model.graph();
  auto cf = build_conformal_family(inst.potential, all_symbols(g));
  CHECK(std::abs(cf.pressure()) < 1e-10);
  for (std::size_t n = 1; n <= 6; ++n)
    for (const auto& w : admissible_words(g, n + 1)) {
      std::vector<SymbolId> tail(w.begin() + 1, w.end());
      CHECK(cf.mass(w) == doctest::Approx(cf.mass(tail) / inst.model.lambda()).epsilon(1e-12));
    }
}

TEST_CASE("conformality on random potentials") {
  std::mt19937 rng(23);
  for (int seed = 0; seed < 20; ++seed) {
    auto g = oracle::random_irreducible(rng, 2 + seed % 5);
    auto pot = oracle::random_potential(rng, g, seed % 2, (seed / 2) % 2);
    auto cf = build_conformal_family(pot, all_symbols(*g));
    CHECK(conformality_residual(cf, 8) < 1e-12);
    double total = 0.0;
    for (SymbolId s = 0; s < g->size(); ++s) total += cf.mass(std::vector<SymbolId>{s});
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("density envelope") {
  auto full = oracle::full_shift(2);
  auto pot = LocallyConstantPotential::constant(full, 0.0);
  auto leaves = LeafFamily::build(pot, all_symbols(*full));
  auto cf = build_conformal_family(pot, all_symbols(*full));
  auto d = density_bounds(leaves, Stem{word(*full, "ab")}, cf, 8);
  CHECK(d.sup_ratio == doctest::Approx(d.inf_ratio).epsilon(1e-12));
  CHECK(d.within());

  auto gm = oracle::golden_mean();
  auto gpot = LocallyConstantPotential::constant(gm, 0.0);
  auto gl = LeafFamily::build(gpot, all_symbols(*gm));
  auto gc = build_conformal_family(gpot, all_symbols(*gm));
  for (const auto& stem : gl.block_stems()) {
    auto r = density_bounds(gl, stem, gc, 10);
    CHECK(r.within());
    CHECK(r.inf_ratio <= r.sup_ratio);
  }

  std::mt19937 rng(61);
  for (int seed = 0; seed < 10; ++seed) {
    auto g = oracle::random_irreducible(rng, 4);
    auto p = oracle::random_potential(rng, g, 1, 1);
    auto l = LeafFamily::build(p, all_symbols(*g));
    auto c = build_conformal_family(p, all_symbols(*g));
    for (const auto& stem : l.block_stems()) CHECK(density_bounds(l, stem, c, 6).within());
  }
}

TEST_CASE("cat map leaves are the reference masses") {
  auto inst = build_catmap_model(1.0);
  const auto& g = *inst.model.graph();
  auto leaves = LeafFamily::build(inst.potential, all_symbols(g));
  auto cf = build_conformal_family(inst.potential, all_symbols(g));
  for (const auto& stem : leaves.block_stems()) {
    auto r = density_bounds(leaves, stem, cf, 8);
    CHECK(std::abs(r.normalized_inf - 1.0) < 1e-8);
    CHECK(std::abs(r.normalized_sup - 1.0) < 1e-8);
  }
}

TEST_CASE("continuity in the potential") {
  std::mt19937 rng(71);
  for (int seed = 0; seed < 5; ++seed) {
    auto g = oracle::random_irreducible(rng, 3);
    auto pot = oracle::random_potential(rng, g, 0, 1);
    const double delta = 1e-6;
    const double defect = conformal_continuity_defect(pot, all_symbols(*g), delta, 8, static_cast<unsigned>(seed));
    CHECK(defect > 0.0);
    CHECK(defect <= 2 * 8 * delta);
  }
}

TEST_CASE("families on different components do not mix") {
  auto g = oracle::graph({"a", "b", "c"}, {{"a", "b"}, {"b", "a"}, {"b", "c"}, {"c", "c"}});
  auto pot = LocallyConstantPotential::constant(g, 0.0);
  auto leaves = LeafFamily::build(pot, std::vector<SymbolId>{0, 1});
  auto cf = build_conformal_family(pot, std::vector<SymbolId>{2});
  try {
    density_bounds(leaves, Stem{word(*g, "ab")}, cf, 4);
    FAIL("expected BaseMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BaseMismatch);
  }
}
