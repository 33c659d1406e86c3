#pragma once

// Test-side reference computations. Nothing here calls into the library's
// numerical routines; graphs and potentials are only used as data.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "symdyn/potential.hpp"
#include "symdyn/shift_graph.hpp"

namespace oracle {

using symdyn::LocallyConstantPotential;
using symdyn::ShiftGraph;
using symdyn::SymbolId;

using Matrix = std::vector<std::vector<double>>;

inline std::shared_ptr<const ShiftGraph> graph(const std::vector<std::string>& names,
                                               const std::vector<std::pair<std::string, std::string>>& edges) {
  return std::make_shared<const ShiftGraph>(ShiftGraph::build(names, edges));
}

inline std::shared_ptr<const ShiftGraph> golden_mean() { return graph({"a", "b"}, {{"a", "a"}, {"a", "b"}, {"b", "a"}}); }

inline std::shared_ptr<const ShiftGraph> full_shift(int k) {
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < k; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
  for (auto& x : names)
    for (auto& y : names) edges.emplace_back(x, y);
  return graph(names, edges);
}

// Hamiltonian cycle through a random permutation plus extra edges with
// probability p; always irreducible.
inline std::shared_ptr<const ShiftGraph> random_irreducible(std::mt19937& rng, int k, double p = 0.35) {
  std::vector<std::string> names;
  for (int i = 0; i < k; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<bool>> adj(k, std::vector<bool>(k, false));
  for (int i = 0; i < k; ++i) adj[perm[i]][perm[(i + 1) % k]] = true;
  std::bernoulli_distribution coin(p);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (coin(rng)) adj[i][j] = true;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (adj[i][j]) edges.emplace_back(names[i], names[j]);
  return graph(names, edges);
}

inline LocallyConstantPotential random_potential(std::mt19937& rng, std::shared_ptr<const ShiftGraph> g, int a,
                                                 int b, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::map<std::vector<SymbolId>, double> table;
  std::vector<std::vector<SymbolId>> words;
  const std::size_t len = static_cast<std::size_t>(a + b + 1);
  // Brute-force admissible words in lexicographic order.
  std::vector<SymbolId> w(len, 0);
  const std::size_t k = g->size();
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; i + 1 < len; ++i) ok = ok && g->has_edge(w[i], w[i + 1]);
    if (ok) table[w] = u(rng);
    std::size_t i = len;
    while (i > 0 && ++w[i - 1] == k) w[--i] = 0;
    if (i == 0) break;
  }
  return LocallyConstantPotential::from_table(g, a, b, table, std::nullopt);
}

inline Matrix adjacency(const ShiftGraph& g) {
  Matrix m(g.size(), std::vector<double>(g.size(), 0.0));
  for (SymbolId i = 0; i < g.size(); ++i)
    for (SymbolId j = 0; j < g.size(); ++j) m[i][j] = g.has_edge(i, j) ? 1.0 : 0.0;
  return m;
}

inline Matrix multiply(const Matrix& x, const Matrix& y) {
  const std::size_t n = x.size();
  Matrix z(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (x[i][k] != 0.0)
        for (std::size_t j = 0; j < n; ++j) z[i][j] += x[i][k] * y[k][j];
  return z;
}

inline Matrix power(const Matrix& m, std::size_t n) {
  Matrix r(m.size(), std::vector<double>(m.size(), 0.0));
  for (std::size_t i = 0; i < m.size(); ++i) r[i][i] = 1.0;
  for (std::size_t k = 0; k < n; ++k) r = multiply(r, m);
  return r;
}

// Every word of the given length over the alphabet, kept when admissible
// (and, for cycles, when the closing edge exists).
inline void brute_words(const ShiftGraph& g, std::size_t len, bool cyclic,
                        const std::function<void(const std::vector<SymbolId>&)>& fn) {
  const std::size_t k = g.size();
  std::vector<SymbolId> w(len, 0);
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; i + 1 < len && ok; ++i) ok = g.has_edge(w[i], w[i + 1]);
    if (ok && cyclic) ok = g.has_edge(w.back(), w.front());
    if (ok) fn(w);
    std::size_t i = len;
    while (i > 0 && ++w[i - 1] == k) w[--i] = 0;
    if (i == 0) break;
  }
}

// Value of phi at coordinate j of the periodic sequence with period word c.
inline double periodic_value(const LocallyConstantPotential& pot, const std::vector<SymbolId>& c, long j) {
  const long n = static_cast<long>(c.size());
  std::vector<SymbolId> win;
  for (long t = j - pot.past_window(); t <= j + pot.future_window(); ++t) win.push_back(c[((t % n) + n) % n]);
  return pot(win);
}

// sum_{k<n} phi(f^{-k} x) on the periodic point.
inline double backward_sum(const LocallyConstantPotential& pot, const std::vector<SymbolId>& c) {
  double s = 0.0;
  for (long k = 0; k < static_cast<long>(c.size()); ++k) s += periodic_value(pot, c, -k);
  return s;
}

// Z_n(base) by brute force over every n-word.
inline double partition_brute(const LocallyConstantPotential& pot, SymbolId base, std::size_t n) {
  double z = 0.0;
  brute_words(pot.graph(), n, true, [&](const std::vector<SymbolId>& w) {
    if (w[0] == base) z += std::exp(backward_sum(pot, w));
  });
  return z;
}

// Determinant by Gaussian elimination with partial pivoting.
inline double determinant(Matrix m) {
  const std::size_t n = m.size();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (m[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r][c] / m[c][c];
      for (std::size_t j = c; j < n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  return det;
}

// Largest real root of det(x I - W) for a nonnegative irreducible W: scan
// down from the row-sum bound to the first sign change, then bisect.
inline double perron_root_charpoly(const Matrix& w) {
  const std::size_t n = w.size();
  auto charpoly = [&](double x) {
    Matrix m = w;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m[i][j] = -m[i][j];
      m[i][i] += x;
    }
    return determinant(m);
  };
  double hi = 0.0;
  for (const auto& row : w) hi = std::max(hi, std::accumulate(row.begin(), row.end(), 0.0));
  hi = hi * 1.001 + 1e-9;
  double lo = hi;
  const double step = hi / 4000.0;
  const double sign_hi = charpoly(hi) > 0 ? 1.0 : -1.0;
  while (lo > 0.0) {
    const double next = lo - step;
    if ((charpoly(next) > 0 ? 1.0 : -1.0) != sign_hi) {
      double a = next, b = lo;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if ((charpoly(mid) > 0 ? 1.0 : -1.0) == sign_hi)
          b = mid;
        else
          a = mid;
      }
      return 0.5 * (a + b);
    }
    lo = next;
  }
  return 0.0;
}

// Transfer matrix on symbols for a (0,1) or (1,0) potential: entry (i,j) is
// e^{phi(ij)}.
inline Matrix symbol_transfer(const LocallyConstantPotential& pot) {
  const auto& g = pot.graph();
  Matrix m(g.size(), std::vector<double>(g.size(), 0.0));
  for (SymbolId i = 0; i < g.size(); ++i)
    for (SymbolId j : g.successors(i)) m[i][j] = std::exp(pot(std::vector<SymbolId>{i, j}));
  return m;
}

// Right and left Perron vectors by plain power iteration on W + I.
inline std::pair<std::vector<double>, std::vector<double>> perron_vectors(const Matrix& w) {
  const std::size_t n = w.size();
  std::vector<double> r(n, 1.0), l(n, 1.0);
  for (int it = 0; it < 200000; ++it) {
    std::vector<double> r2(n, 0.0), l2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        r2[i] += w[i][j] * r[j];
        l2[j] += l[i] * w[i][j];
      }
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] += r[i];
      l2[i] += l[i];
    }
    const double sr = std::accumulate(r2.begin(), r2.end(), 0.0);
    const double sl = std::accumulate(l2.begin(), l2.end(), 0.0);
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff = std::max(diff, std::abs(r2[i] / sr - r[i]) + std::abs(l2[i] / sl - l[i]));
      r[i] = r2[i] / sr;
      l[i] = l2[i] / sl;
    }
    if (diff < 1e-16 && it > 10) break;
  }
  return {r, l};
}

// Stationary Markov chain of the Doob transform for a (0,1) potential:
// P(i,j) = W(i,j) r(j) / (lambda r(i)), pi(i) = l(i) r(i) / (l . r).
struct MarkovChain {
  std::vector<double> stationary;
  Matrix kernel;

  double cylinder(const std::vector<SymbolId>& w) const {
    double m = stationary[w[0]];
    for (std::size_t i = 0; i + 1 < w.size(); ++i) m *= kernel[w[i]][w[i + 1]];
    return m;
  }
};

inline MarkovChain doob_chain(const Matrix& w) {
  const double lambda = perron_root_charpoly(w);
  auto [r, l] = perron_vectors(w);
  const std::size_t n = w.size();
  MarkovChain mc;
  mc.kernel.assign(n, std::vector<double>(n, 0.0));
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += l[i] * r[i];
  for (std::size_t i = 0; i < n; ++i) {
    mc.stationary.push_back(l[i] * r[i] / dot);
    for (std::size_t j = 0; j < n; ++j) mc.kernel[i][j] = w[i][j] * r[j] / (lambda * r[i]);
  }
  return mc;
}

// phi_m(x) = sum_{k<m} theta^k c(x_{-k}), window (m-1, 0).
inline LocallyConstantPotential deepening_window(std::shared_ptr<const ShiftGraph> g, const std::vector<double>& c,
                                                 int m, double theta) {
  return LocallyConstantPotential::from_function(g, m - 1, 0, [&, m, theta](std::span<const SymbolId> w) {
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += std::pow(theta, k) * c[w[w.size() - 1 - static_cast<std::size_t>(k)]];
    return s;
  });
}

}  // namespace oracle
