#pragma once

// Named example geometries. Every entry is built from expressions on an
// affine chart; parameters arrive as a string->double map (integer-valued
// where the construction needs integers).

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rcpos/geometry.hpp"

namespace rcpos {

struct CatalogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// -- builders -------------------------------------------------------------------

/// O(1) on P^m in an affine chart: weight log(1 + sum |t_j|^2).
/// Curvature at the origin is the identity.
inline LineBundle makeFubiniStudyLine(int m = 1) {
  if (m < 1) throw CatalogError("fubini-study-line: m >= 1");
  std::vector<Expr> terms{Expr(1.0)};
  for (int j = 1; j <= m; ++j)
    terms.push_back(Expr(Var::base(j)) * Expr(Var::baseBar(j)));
  return LineBundle(logFn(sum(std::move(terms))), Dims{m, 0, {}});
}

/// O(a) + O(b) on P^1 in the affine chart:
/// H = diag((1+|t|^2)^{-a}, (1+|t|^2)^{-b}). Curvature at 0 is diag(a, b).
inline BundleMetric makeSplit(int a, int b) {
  Expr base = Expr(1.0) + Expr(Var::base(1)) * Expr(Var::baseBar(1));
  std::vector<Expr> h = {powi(base, -a), Expr(0.0), Expr(0.0), powi(base, -b)};
  return BundleMetric(1, 2, std::move(h));
}

/// Seeded polynomial frame change of the split metric:
/// H_eps = (I + eps Q(t))^* H_0 (I + eps Q(t)), Q quadratic in t with
/// coefficients drawn from the seed. Congruent to H_0, so positive definite
/// for any eps; curvature differs from the split model at order eps.
inline BundleMetric makePerturbedSplit(int a, int b, double eps, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Expr t(Var::base(1));
  auto q = [&] {
    return Expr(Cx(coef(rng), coef(rng))) + Expr(Cx(coef(rng), coef(rng))) * t +
           Expr(Cx(coef(rng), coef(rng))) * t * t;
  };
  std::vector<Expr> qi(4);  // I + eps*Q, row-major 2x2
  for (int i = 0; i < 4; ++i) {
    qi[i] = Expr(eps) * q();
    if (i == 0 || i == 3) qi[i] = Expr(1.0) + qi[i];
  }
  BundleMetric h0 = makeSplit(a, b);
  std::vector<Expr> h(4, Expr(0.0));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      std::vector<Expr> terms;
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          terms.push_back(bar(qi[static_cast<std::size_t>(c) * 2 + i]) *
                          h0.entryExpr(c, d) * qi[static_cast<std::size_t>(d) * 2 + j]);
      h[static_cast<std::size_t>(i) * 2 + j] = sum(std::move(terms));
    }
  return BundleMetric(1, 2, std::move(h));
}

/// Trivial bundle with the constant metric: zero curvature.
inline BundleMetric makeFlat(int r = 2, int m = 1) {
  std::vector<Expr> h(static_cast<std::size_t>(r) * r, Expr(0.0));
  for (int i = 0; i < r; ++i) h[static_cast<std::size_t>(i) * r + i] = Expr(1.0);
  return BundleMetric(m, r, std::move(h));
}

/// Bundle over a zero-dimensional base. Positivity notions degenerate here
/// (there are no tangent directions); checks must flag this rather than
/// report a verdict.
inline BundleMetric makePoint(int r = 2) { return makeFlat(r, 0); }

// -- registry --------------------------------------------------------------------

enum class EntryKind { Line, Bundle };

struct CatalogEntry {
  std::string name;
  std::string summary;
  EntryKind kind;
  std::map<std::string, double> defaults;
  std::function<LineBundle(const std::map<std::string, double>&)> line;
  std::function<BundleMetric(const std::map<std::string, double>&)> bundle;
};

namespace detail {

inline int intParam(const std::map<std::string, double>& ps, const std::string& k) {
  double v = ps.at(k);
  int i = static_cast<int>(std::llround(v));
  if (std::abs(v - i) > 1e-9) throw CatalogError("parameter " + k + " must be an integer");
  return i;
}

}  // namespace detail

inline const std::vector<CatalogEntry>& catalogEntries() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> es;
    es.push_back({"fubini-study-line",
                  "O(1) on P^m, weight log(1 + |t|^2); curvature identity at 0",
                  EntryKind::Line,
                  {{"m", 1}},
                  [](const auto& ps) { return makeFubiniStudyLine(detail::intParam(ps, "m")); },
                  nullptr});
    es.push_back({"split",
                  "O(a) + O(b) on P^1 with the Fubini-Study powers metric",
                  EntryKind::Bundle,
                  {{"a", 2}, {"b", -1}},
                  nullptr,
                  [](const auto& ps) {
                    return makeSplit(detail::intParam(ps, "a"), detail::intParam(ps, "b"));
                  }});
    es.push_back({"perturbed-split",
                  "split metric conjugated by I + eps*Q(t), Q seeded quadratic",
                  EntryKind::Bundle,
                  {{"a", 2}, {"b", -1}, {"eps", 0.05}, {"seed", 1}},
                  nullptr,
                  [](const auto& ps) {
                    return makePerturbedSplit(detail::intParam(ps, "a"),
                                              detail::intParam(ps, "b"), ps.at("eps"),
                                              static_cast<std::uint64_t>(
                                                  detail::intParam(ps, "seed")));
                  }});
    es.push_back({"flat",
                  "trivial rank-r bundle, constant metric, zero curvature",
                  EntryKind::Bundle,
                  {{"r", 2}, {"m", 1}},
                  nullptr,
                  [](const auto& ps) {
                    return makeFlat(detail::intParam(ps, "r"), detail::intParam(ps, "m"));
                  }});
    es.push_back({"point",
                  "rank-r bundle over a zero-dimensional base; degenerate verdicts",
                  EntryKind::Bundle,
                  {{"r", 2}},
                  nullptr,
                  [](const auto& ps) { return makePoint(detail::intParam(ps, "r")); }});
    return es;
  }();
  return entries;
}

inline const CatalogEntry& findEntry(const std::string& name) {
  for (const auto& e : catalogEntries())
    if (e.name == name) return e;
  throw CatalogError("unknown example: " + name);
}

/// Entry parameters = defaults overridden by the supplied map. Unknown keys
/// are rejected so typos cannot silently fall back to defaults.
inline std::map<std::string, double> entryParams(const CatalogEntry& e,
                                                 const std::map<std::string, double>& overrides) {
  std::map<std::string, double> ps = e.defaults;
  for (const auto& [k, v] : overrides) {
    if (!ps.count(k)) throw CatalogError("example " + e.name + " has no parameter " + k);
    ps[k] = v;
  }
  return ps;
}

}  // namespace rcpos
