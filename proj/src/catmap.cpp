#include "symdyn/catmap.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "symdyn/error.hpp"
#include "symdyn/numeric.hpp"

namespace symdyn {

namespace {

constexpr double kPad = 1e-9;
constexpr long kSearch = 4;

IntMatrix2 multiply(const IntMatrix2& x, const IntMatrix2& y) {
  IntMatrix2 z{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) z[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
  return z;
}

IntMatrix2 power(const IntMatrix2& a, std::size_t n) {
  IntMatrix2 out{{{1, 0}, {0, 1}}};
  for (std::size_t k = 0; k < n; ++k) out = multiply(out, a);
  return out;
}

Vec2 normalized(Vec2 v) {
  double n = std::hypot(v[0], v[1]);
  return {v[0] / n, v[1] / n};
}

Vec2 eigenvector(const IntMatrix2& a, double nu) {
  if (a[0][1] != 0) return normalized({static_cast<double>(a[0][1]), nu - static_cast<double>(a[0][0])});
  return normalized({nu - static_cast<double>(a[1][1]), static_cast<double>(a[1][0])});
}

}  // namespace

LinearToralModel LinearToralModel::create(const IntMatrix2& matrix, std::vector<Rectangle> rectangles) {
  const long det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
  const long trace = matrix[0][0] + matrix[1][1];
  if (det != 1 && det != -1) throw Error(ErrorKind::PartitionInvalid, "matrix determinant must be +-1");
  if (trace <= 2) throw Error(ErrorKind::PartitionInvalid, "matrix trace must exceed 2");
  if (rectangles.empty()) throw Error(ErrorKind::PartitionInvalid, "partition has no rectangles");

  LinearToralModel m;
  m.matrix_ = matrix;
  const double tr = static_cast<double>(trace);
  m.lambda_ = (tr + std::sqrt(tr * tr - 4.0 * static_cast<double>(det))) / 2.0;
  m.mu_ = static_cast<double>(det) / m.lambda_;
  m.eu_ = eigenvector(matrix, m.lambda_);
  m.es_ = eigenvector(matrix, m.mu_);
  if (m.eu_[0] < 0) m.eu_ = {-m.eu_[0], -m.eu_[1]};
  if (m.es_[1] < 0) m.es_ = {-m.es_[0], -m.es_[1]};
  const double vdet = m.eu_[0] * m.es_[1] - m.es_[0] * m.eu_[1];
  m.inverse_ = {{{m.es_[1] / vdet, -m.es_[0] / vdet}, {-m.eu_[1] / vdet, m.eu_[0] / vdet}}};
  for (const auto& r : rectangles)
    if (!(r.unstable_extent > 0.0 && r.stable_extent > 0.0))
      throw Error(ErrorKind::PartitionInvalid, "rectangle extents must be positive");
  m.rects_ = std::move(rectangles);

  const double area = m.total_area();
  if (std::abs(area - 1.0) > kPad)
    throw Error(ErrorKind::PartitionInvalid, "rectangle areas sum to " + std::to_string(area) + ", not 1");

  const std::size_t n = m.rects_.size();
  m.transitions_.assign(n, {});
  std::vector<std::vector<SymbolId>> succ(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Rectangle& r = m.rects_[i];
    const double iu0 = m.lambda_ * r.u_lo(), iu1 = m.lambda_ * r.u_hi();
    const double is0 = std::min(m.mu_ * r.s_lo(), m.mu_ * r.s_hi());
    const double is1 = std::max(m.mu_ * r.s_lo(), m.mu_ * r.s_hi());
    double covered = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const Rectangle& t = m.rects_[j];
      for (long k1 = -kSearch; k1 <= kSearch; ++k1)
        for (long k2 = -kSearch; k2 <= kSearch; ++k2) {
          Vec2 d = m.to_eigen({static_cast<double>(k1), static_cast<double>(k2)});
          const double u0 = iu0 + d[0], u1 = iu1 + d[0], s0 = is0 + d[1], s1 = is1 + d[1];
          const double ou = std::min(u1, t.u_hi()) - std::max(u0, t.u_lo());
          const double os = std::min(s1, t.s_hi()) - std::max(s0, t.s_lo());
          if (ou <= kPad || os <= kPad) continue;
          const bool full = u0 <= t.u_lo() + kPad && u1 >= t.u_hi() - kPad && s0 >= t.s_lo() - kPad &&
                            s1 <= t.s_hi() + kPad;
          if (!full)
            throw Error(ErrorKind::PartitionInvalid, "image of rectangle " + std::to_string(i) +
                                                         " meets rectangle " + std::to_string(j) +
                                                         " without crossing it");
          if (std::find(succ[i].begin(), succ[i].end(), static_cast<SymbolId>(j)) != succ[i].end())
            throw Error(ErrorKind::PartitionInvalid, "image of rectangle " + std::to_string(i) +
                                                         " crosses rectangle " + std::to_string(j) + " twice");
          succ[i].push_back(static_cast<SymbolId>(j));
          m.transitions_[i].push_back(Transition{static_cast<SymbolId>(j), {k1, k2}});
          covered += ou;
        }
    }
    if (std::abs(covered - (iu1 - iu0)) > kPad)
      throw Error(ErrorKind::PartitionInvalid, "image of rectangle " + std::to_string(i) +
                                                   " is not covered by full crossings");
  }

  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(n <= 10 ? std::to_string(i) : "R" + std::to_string(i));
  try {
    m.graph_ = std::make_shared<const ShiftGraph>(ShiftGraph::from_adjacency(names, succ));
  } catch (const Error& e) {
    throw Error(ErrorKind::PartitionInvalid, std::string("induced graph invalid: ") + e.what());
  }
  std::vector<SymbolId> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<SymbolId>(i);
  if (!is_irreducible(*m.graph_, all)) throw Error(ErrorKind::PartitionInvalid, "induced shift is not irreducible");
  return m;
}

const Transition* LinearToralModel::transition(SymbolId from, SymbolId to) const {
  for (const auto& t : transitions_[from])
    if (t.to == to) return &t;
  return nullptr;
}

Vec2 LinearToralModel::to_eigen(const Vec2& x) const {
  return {inverse_[0][0] * x[0] + inverse_[0][1] * x[1], inverse_[1][0] * x[0] + inverse_[1][1] * x[1]};
}

Vec2 LinearToralModel::from_eigen(const Vec2& us) const {
  return {us[0] * eu_[0] + us[1] * es_[0], us[0] * eu_[1] + us[1] * es_[1]};
}

double LinearToralModel::total_area() const {
  // Eigencoordinates are orthonormal only for symmetric matrices; scale by |det V|.
  const double vdet = std::abs(eu_[0] * es_[1] - es_[0] * eu_[1]);
  double a = 0.0;
  for (const auto& r : rects_) a += r.unstable_extent * r.stable_extent;
  return a * vdet;
}

SymbolId LinearToralModel::locate(const Vec2& x) const {
  const Vec2 base{x[0] - std::floor(x[0]), x[1] - std::floor(x[1])};
  for (std::size_t i = 0; i < rects_.size(); ++i)
    for (long k1 = -kSearch; k1 <= kSearch; ++k1)
      for (long k2 = -kSearch; k2 <= kSearch; ++k2) {
        Vec2 us = to_eigen({base[0] + static_cast<double>(k1), base[1] + static_cast<double>(k2)});
        const Rectangle& r = rects_[i];
        if (us[0] >= r.u_lo() - 1e-12 && us[0] <= r.u_hi() + 1e-12 && us[1] >= r.s_lo() - 1e-12 &&
            us[1] <= r.s_hi() + 1e-12)
          return static_cast<SymbolId>(i);
      }
  throw Error(ErrorKind::PartitionInvalid, "point not covered by the partition");
}

std::vector<Rectangle> default_cat_partition() {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  const double lambda = g * g;
  const double c = std::sqrt(g * g + 1.0);
  const double a = g / c;
  const double b = 1.0 / c;
  auto strip = [](double u0, double u1, double s0, double s1) {
    return Rectangle{(u0 + u1) / 2, (s0 + s1) / 2, u1 - u0, s1 - s0};
  };
  return {
      strip(0.0, a / lambda, 0.0, a),
      strip(a / lambda, 2 * a / lambda, 0.0, a),
      strip(2 * a / lambda, a, 0.0, a),
      strip(a, a + a / lambda, a - b, a),
      strip(a + a / lambda, a + b, a - b, a),
  };
}

CatmapInstance build_catmap_model(double t) {
  if (!(t >= 0.0 && t <= 2.0)) throw Error(ErrorKind::InvalidArgument, "t must lie in [0, 2]");
  auto model = LinearToralModel::create(IntMatrix2{{{2, 1}, {1, 1}}}, default_cat_partition());
  auto pot = LocallyConstantPotential::constant(model.graph(), -t * std::log(model.lambda()));
  return CatmapInstance{std::move(model), std::move(pot), t};
}

UnstableSegment crossing_segment(const LinearToralModel& model, SymbolId r) {
  const Rectangle& rect = model.rectangles().at(r);
  return UnstableSegment{{rect.u_lo(), rect.center_s}, rect.unstable_extent};
}

double unstable_cylinder_arclength(const LinearToralModel& model, const UnstableSegment& segment,
                                   std::span<const SymbolId> w) {
  if (w.empty()) throw Error(ErrorKind::InvalidArgument, "word must be nonempty");
  if (!is_admissible(*model.graph(), w)) throw Error(ErrorKind::InadmissibleWord, "word is not admissible");
  const Rectangle& first = model.rectangles()[w.front()];
  if (std::abs(segment.anchor[0] - first.u_lo()) > kPad || std::abs(segment.length - first.unstable_extent) > kPad ||
      segment.anchor[1] < first.s_lo() - kPad || segment.anchor[1] > first.s_hi() + kPad)
    throw Error(ErrorKind::SegmentMismatch, "segment does not cross rectangle " + std::to_string(w.front()));

  const Rectangle& last = model.rectangles()[w.back()];
  double lo = last.u_lo(), hi = last.u_hi();
  for (std::size_t j = w.size() - 1; j-- > 0;) {
    const Transition* t = model.transition(w[j], w[j + 1]);
    const double du = model.to_eigen({static_cast<double>(t->translation[0]),
                                      static_cast<double>(t->translation[1])})[0];
    const Rectangle& r = model.rectangles()[w[j]];
    lo = std::max((lo - du) / model.lambda(), r.u_lo());
    hi = std::min((hi - du) / model.lambda(), r.u_hi());
    if (hi <= lo) return 0.0;
  }
  return hi - lo;
}

double srb_comparison(const CatmapInstance& instance, const LeafFamily& family, std::size_t depth, unsigned threads) {
  const auto& model = instance.model;
  const std::size_t n = model.rectangles().size();
  std::vector<double> worst(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    const Stem stem{{static_cast<SymbolId>(i)}};
    const auto seg = crossing_segment(model, static_cast<SymbolId>(i));
    for (std::size_t len = 1; len <= depth; ++len)
      for (const auto& w : family.future_words(static_cast<SymbolId>(i), len)) {
        double leaf = family.probability(stem, w);
        double arc = unstable_cylinder_arclength(model, seg, w) / seg.length;
        worst[i] = std::max(worst[i], std::abs(leaf / arc - 1.0));
      }
  });
  return *std::max_element(worst.begin(), worst.end());
}

PeriodicCountCheck periodic_point_count(const LinearToralModel& model, std::size_t n, unsigned threads) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "period must be at least 1");
  const IntMatrix2& a = model.matrix();
  const IntMatrix2 an = power(a, n);
  // (I - A^n) x = K, solved as adj(I - A^n) K / det over the integers.
  const __int128 m00 = 1 - an[0][0], m01 = -an[0][1], m10 = -an[1][0], m11 = 1 - an[1][1];
  __int128 det = m00 * m11 - m01 * m10;
  const __int128 sign = det < 0 ? -1 : 1;
  det *= sign;

  const auto& g = *model.graph();
  std::vector<std::vector<std::pair<long long, long long>>> found(g.size());
  std::vector<std::size_t> cycles(g.size(), 0);
  parallel_for(g.size(), threads, [&](std::size_t base) {
    for_each_cycle(g, static_cast<SymbolId>(base), n, [&](std::span<const SymbolId> c) {
      __int128 k0 = 0, k1 = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const auto& t = model.transition(c[j], c[(j + 1) % n])->translation;
        const __int128 x = a[0][0] * k0 + a[0][1] * k1 + t[0];
        const __int128 y = a[1][0] * k0 + a[1][1] * k1 + t[1];
        k0 = x;
        k1 = y;
      }
      __int128 p0 = sign * (m11 * k0 - m01 * k1);
      __int128 p1 = sign * (-m10 * k0 + m00 * k1);
      p0 %= det;
      p1 %= det;
      if (p0 < 0) p0 += det;
      if (p1 < 0) p1 += det;
      found[base].emplace_back(static_cast<long long>(p0), static_cast<long long>(p1));
      ++cycles[base];
    });
  });
  std::set<std::pair<long long, long long>> points;
  PeriodicCountCheck out;
  out.n = n;
  out.formula = static_cast<long long>(det);
  for (std::size_t b = 0; b < g.size(); ++b) {
    points.insert(found[b].begin(), found[b].end());
    out.symbolic_cycles += cycles[b];
  }
  out.coded_points = points.size();
  return out;
}

PeriodicDivergence periodic_sum_divergence(const LinearToralModel& model, std::size_t nmax, std::size_t fit_from,
                                           std::size_t check_upto, unsigned threads) {
  if (nmax == 0) throw Error(ErrorKind::InvalidArgument, "nmax must be at least 1");
  if (nmax > 40) throw Error(ErrorKind::InvalidArgument, "nmax above 40 overflows the exact fixed-point count");
  PeriodicDivergence out;
  const long det = model.matrix()[0][0] * model.matrix()[1][1] - model.matrix()[0][1] * model.matrix()[1][0];
  double sum = 0.0;
  for (std::size_t n = 1; n <= nmax; ++n) {
    const IntMatrix2 an = power(model.matrix(), n);
    const long trace = an[0][0] + an[1][1];
    const long det_n = (det == 1 || n % 2 == 0) ? 1 : -1;
    const double fix = static_cast<double>(std::labs(1 - trace + det_n));
    const double term = fix * std::pow(model.lambda(), -static_cast<double>(n));
    sum += term;
    out.terms.push_back(term);
    out.partial_sums.push_back(sum);
  }
  std::vector<double> xs, ys;
  for (std::size_t n = std::max<std::size_t>(fit_from, 1); n <= nmax; ++n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(out.partial_sums[n - 1]);
  }
  if (xs.size() >= 2) out.slope = fit_slope(xs, ys);
  for (std::size_t n = 1; n <= std::min(check_upto, nmax); ++n) out.checks.push_back(periodic_point_count(model, n, threads));
  return out;
}

}  // namespace symdyn
