#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "symdyn/error.hpp"
#include "symdyn/potential.hpp"

using namespace symdyn;

namespace {

std::vector<SymbolId> word(const ShiftGraph& g, const std::string& s) {
  std::vector<SymbolId> w;
  for (char c : s) w.push_back(*g.find(std::string(1, c)));
  return w;
}

LocallyConstantPotential pair_potential(std::shared_ptr<const ShiftGraph> g, const std::map<std::string, double>& v) {
  std::map<std::vector<SymbolId>, double> t;
  for (const auto& [k, x] : v) t[word(*g, k)] = x;
  return LocallyConstantPotential::from_table(g, 0, 1, t, std::nullopt);
}

// A(x) = sum_{n<b} phi(f^{-n} x*) - phi(f^{-n} x) with x given on
// coordinates -(a+b-1) .. b and x* following the anchor of x_0.
double transfer_series(const LocallyConstantPotential& pot, const AnchorMap& anchors, const std::vector<SymbolId>& x) {
  const int a = pot.past_window(), b = pot.future_window();
  const int zero = a + b - 1;  // index of coordinate 0
  std::vector<SymbolId> star(x.begin(), x.begin() + zero + 1);
  const auto& y = anchors[x[static_cast<std::size_t>(zero)]];
  for (int j = 1; j <= b; ++j) star.push_back(y[static_cast<std::size_t>(j)]);
  double s = 0.0;
  for (int n = 0; n < b; ++n) {
    const int c = zero - n;
    std::vector<SymbolId> w1(star.begin() + c - a, star.begin() + c + b + 1);
    std::vector<SymbolId> w2(x.begin() + c - a, x.begin() + c + b + 1);
    s += pot(w1) - pot(w2);
  }
  return s;
}

}  // namespace

TEST_CASE("periodic sums of simple potentials") {
  auto full = oracle::full_shift(2);
  auto c = LocallyConstantPotential::constant(full, 0.7);
  for (std::size_t n = 1; n <= 5; ++n)
    for (const auto& w : enumerate_cycles(*full, 0, n))
      CHECK(birkhoff_sum_backward(c, w.letters, n) == doctest::Approx(0.7 * n).epsilon(1e-14));

  auto ind = LocallyConstantPotential::from_function(full, 0, 0, [](std::span<const SymbolId> w) { return w[0] == 0 ? 1.0 : 0.0; });
  CHECK(birkhoff_sum_backward(ind, word(*full, "ab"), 2) == 1.0);

  auto gm = oracle::golden_mean();
  auto pot = pair_potential(gm, {{"aa", 0.3}, {"ab", -1.1}, {"ba", 0.8}});
  // Backward windows of the periodic point aab: x_0 x_1 = aa, x_{-1} x_0 = ba, x_{-2} x_{-1} = ab.
  CHECK(birkhoff_sum_backward(pot, word(*gm, "aab"), 3) == doctest::Approx(0.3 + 0.8 - 1.1).epsilon(1e-14));
  CHECK(birkhoff_sum_forward(pot, word(*gm, "aab"), 3) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("constant potential reduces to itself") {
  auto gm = oracle::golden_mean();
  auto red = sinai_reduce(LocallyConstantPotential::constant(gm, -0.4));
  CHECK(red.transfer_sup_norm == 0.0);
  CHECK(red.past_potential.past_window() == 0);
  for (double v : red.past_potential.values()) CHECK(v == -0.4);
}

TEST_CASE("pair potential on the 2-shift matches the hand expansion") {
  auto full = oracle::full_shift(2);
  auto g = pair_potential(full, {{"aa", 0.25}, {"ab", -0.5}, {"ba", 1.5}, {"bb", 0.125}});
  auto red = sinai_reduce(g);
  // Lexicographic anchors continue every symbol with 'a'.
  const SymbolId y = 0;
  CHECK(red.anchors[1] == std::vector<SymbolId>{1, y});
  CHECK(red.past_potential.past_window() == 1);
  CHECK(red.past_potential.future_window() == 0);
  for (SymbolId xm1 = 0; xm1 < 2; ++xm1)
    for (SymbolId x0 = 0; x0 < 2; ++x0) {
      const double expect = g(std::vector<SymbolId>{x0, y}) + g(std::vector<SymbolId>{xm1, x0}) -
                            g(std::vector<SymbolId>{xm1, y});
      CHECK(red.past_potential(std::vector<SymbolId>{xm1, x0}) == doctest::Approx(expect).epsilon(1e-15));
      // A(x_0 x_1) = g(x_0 y) - g(x_0 x_1).
      CHECK(red.transfer(std::vector<SymbolId>{xm1, x0}) ==
            doctest::Approx(g(std::vector<SymbolId>{xm1, y}) - g(std::vector<SymbolId>{xm1, x0})).epsilon(1e-15));
    }
  for (std::size_t n = 1; n <= 2; ++n)
    for (SymbolId s = 0; s < 2; ++s)
      for (const auto& w : enumerate_cycles(*full, s, n))
        CHECK(oracle::backward_sum(g, w.letters) ==
              doctest::Approx(oracle::backward_sum(red.past_potential, w.letters)).epsilon(1e-14));
}

TEST_CASE("Sinai reduction on random windows") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = oracle::random_irreducible(rng, 2 + trial % 4);
    const int a = trial % 3, b = (trial / 3) % 3;
    auto pot = oracle::random_potential(rng, g, a, b);
    auto red = sinai_reduce(pot);
    CHECK(red.past_potential.future_window() == 0);
    CHECK(red.past_potential.past_window() <= a + b);
    CHECK(cohomology_residual(pot, red) < 1e-12);
    if (b > 0) {
      CHECK(red.transfer.past_window() == a + b - 1);
      CHECK(red.transfer.future_window() == b);
      for (std::size_t i = 0; i < red.transfer.windows().size(); ++i)
        CHECK(std::abs(red.transfer.values()[i] - transfer_series(pot, red.anchors, red.transfer.windows()[i])) < 1e-14);
    }
    CHECK(red.transfer_sup_norm <= 2.0 * b * pot.sup_norm() + 1e-14);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 6; ++n)
      for (SymbolId s = 0; s < g->size(); ++s)
        for (const auto& w : enumerate_cycles(*g, s, n))
          worst = std::max(worst, std::abs(oracle::backward_sum(pot, w.letters) -
                                           oracle::backward_sum(red.past_potential, w.letters)));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("explicit anchors are validated") {
  auto gm = oracle::golden_mean();
  auto pot = pair_potential(gm, {{"aa", 0.3}, {"ab", -1.1}, {"ba", 0.8}});
  AnchorMap bad{word(*gm, "aa"), word(*gm, "bb")};
  CHECK_THROWS_AS(sinai_reduce(pot, bad), Error);
  AnchorMap shortage{word(*gm, "a"), word(*gm, "ba")};
  CHECK_THROWS_AS(sinai_reduce(pot, shortage), Error);
  AnchorMap other{word(*gm, "ab"), word(*gm, "ba")};
  auto red = sinai_reduce(pot, other);
  CHECK(cohomology_residual(pot, red) < 1e-14);
  // The choice of anchors changes phi* only by a coboundary.
  auto lex = sinai_reduce(pot);
  for (std::size_t n = 1; n <= 6; ++n)
    for (const auto& w : enumerate_cycles(*gm, 0, n))
      CHECK(oracle::backward_sum(red.past_potential, w.letters) ==
            doctest::Approx(oracle::backward_sum(lex.past_potential, w.letters)).epsilon(1e-13));
}

TEST_CASE("variation") {
  auto full = oracle::full_shift(3);
  std::mt19937 rng(3);
  auto pot = oracle::random_potential(rng, full, 0, 1);
  CHECK(variation(pot, 1) == 0.0);
  double spread = 0.0;
  for (SymbolId x0 = 0; x0 < 3; ++x0) {
    double lo = 1e9, hi = -1e9;
    for (SymbolId x1 = 0; x1 < 3; ++x1) {
      lo = std::min(lo, pot(std::vector<SymbolId>{x0, x1}));
      hi = std::max(hi, pot(std::vector<SymbolId>{x0, x1}));
    }
    spread = std::max(spread, hi - lo);
  }
  CHECK(variation(pot, 0) == doctest::Approx(spread).epsilon(1e-15));
  auto c = LocallyConstantPotential::constant(full, 2.0);
  for (int n = 0; n < 4; ++n) CHECK(variation(c, n) == 0.0);
}

TEST_CASE("coboundaries leave periodic sums alone") {
  std::mt19937 rng(9);
  auto g = oracle::random_irreducible(rng, 4);
  auto pot = oracle::random_potential(rng, g, 1, 0);
  std::vector<double> u{0.3, -0.7, 1.2, 0.05};
  auto moved = add_coboundary(pot, u);
  for (std::size_t n = 1; n <= 6; ++n)
    for (const auto& w : enumerate_cycles(*g, 0, n))
      CHECK(oracle::backward_sum(moved, w.letters) ==
            doctest::Approx(oracle::backward_sum(pot, w.letters)).epsilon(1e-13));
}

TEST_CASE("missing window without default is an input error") {
  auto gm = oracle::golden_mean();
  std::map<std::vector<SymbolId>, double> t{{word(*gm, "aa"), 1.0}};
  try {
    LocallyConstantPotential::from_table(gm, 0, 1, t, std::nullopt);
    FAIL("expected InputError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InputError);
  }
  auto filled = LocallyConstantPotential::from_table(gm, 0, 1, t, 0.5);
  CHECK(filled(word(*gm, "ab")) == 0.5);
}
