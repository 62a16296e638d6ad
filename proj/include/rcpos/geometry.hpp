#pragma once

// Curvature of Hermitian metrics from symbolic weights. Line bundles are
// described by a real weight phi (metric e^{-phi}), vector bundles by a
// matrix of entry expressions H_ab(t, tb). All derivatives are exact
// Wirtinger derivatives of the expression trees, cached per derivative word.
//
// Sign convention: for a line bundle, Theta_{jk} = d_j d_kbar phi, so the
// Fubini-Study weight log(1 + |t|^2) has positive curvature. The bundle
// curvature below reduces to that convention at rank 1.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rcpos/expr.hpp"
#include "rcpos/linalg.hpp"

namespace rcpos {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Coordinate list (t_1..t_m, z_1..z_n), the row/column order used by every
/// Hessian in the library.
inline std::vector<Var> coordList(const Dims& d) {
  std::vector<Var> vs;
  for (int j = 1; j <= d.m; ++j) vs.push_back(Var::base(j));
  for (int j = 1; j <= d.n; ++j) vs.push_back(Var::fiber(j));
  return vs;
}

/// Expression with memoized derivatives. Derivative words are canonicalized
/// by sorting (partials commute), so each mixed derivative is built once.
class WeightJet {
 public:
  WeightJet() = default;
  WeightJet(Expr phi, Dims dims)
      : dims_(std::move(dims)), cache_(std::make_shared<Cache>()) {
    (*cache_)[{}] = std::move(phi);
  }

  const Dims& dims() const { return dims_; }
  const Expr& phi() const { return cache_->at({}); }

  /// d_{word} phi, word entries are coordinates (possibly barred).
  const Expr& deriv(std::vector<Var> word) const {
    std::sort(word.begin(), word.end(), [](const Var& a, const Var& b) {
      if (a.kind != b.kind) return a.kind < b.kind;
      return a.index < b.index;
    });
    auto key = keyOf(word);
    auto it = cache_->find(key);
    if (it != cache_->end()) return it->second;
    // build from the longest cached prefix
    Expr e = phi();
    std::size_t have = 0;
    for (std::size_t k = word.size(); k > 0; --k) {
      auto pit = cache_->find(keyOf({word.begin(), word.begin() + k}));
      if (pit != cache_->end()) {
        e = pit->second;
        have = k;
        break;
      }
    }
    for (std::size_t k = have; k < word.size(); ++k) {
      e = derivative(e, word[k]);
      (*cache_)[keyOf({word.begin(), word.begin() + k + 1})] = e;
    }
    return cache_->at(key);
  }

  Cx evalDeriv(const std::vector<Var>& word, const Point& p) const {
    return eval(deriv(word), p);
  }

 private:
  using Cache = std::map<std::string, Expr>;
  static std::string keyOf(const std::vector<Var>& word) {
    std::string k;
    for (const Var& v : word) {
      k += v.text();
      k += '.';
    }
    return k;
  }

  Dims dims_;
  std::shared_ptr<Cache> cache_;  // shared so copies reuse work
};

/// Full mixed Hessian [d_a d_bbar phi] over the coordinate list, row a,
/// column b. Hermitian at conjugate-consistent points.
inline HermMatrix hessian(const WeightJet& jet, const Point& p) {
  std::vector<Var> cs = coordList(jet.dims());
  int n = static_cast<int>(cs.size());
  MatC h(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      h(a, b) = jet.evalDeriv({cs[a], cs[b].barred()}, p);
  return HermMatrix(h);
}

/// Line bundle over an m-dim base, optionally with n fiber directions when
/// the weight lives on a fibered total space.
struct LineBundle {
  WeightJet jet;
  LineBundle() = default;
  LineBundle(Expr phi, Dims dims) : jet(std::move(phi), std::move(dims)) {}
  const Dims& dims() const { return jet.dims(); }
};

inline HermMatrix curvatureLine(const LineBundle& lb, const Point& p) {
  return hessian(lb.jet, p);
}

// --- vector bundles ----------------------------------------------------------------

/// Hermitian metric on a rank-r bundle over an m-dim base chart: entry
/// expressions H_ab in t/tb. Conjugate symmetry (H_ba = bar(H_ab)) is a
/// validated property of the inputs, checked on construction.
class BundleMetric {
 public:
  BundleMetric() = default;
  BundleMetric(int m, int r, std::vector<Expr> entries, std::vector<std::string> params = {})
      : m_(m), r_(r), dims_{m, 0, std::move(params)} {
    if (r <= 0 || m < 0 || entries.size() != static_cast<std::size_t>(r) * r)
      throw GeometryError("BundleMetric: need r*r entry expressions");
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        const Expr& hab = entries[static_cast<std::size_t>(a) * r + b];
        const Expr& hba = entries[static_cast<std::size_t>(b) * r + a];
        if (cmp(bar(hab), hba) != 0)
          throw GeometryError("BundleMetric: entries are not conjugate-symmetric at (" +
                              std::to_string(a) + "," + std::to_string(b) + ")");
      }
    jets_.reserve(entries.size());
    for (auto& e : entries) jets_.emplace_back(std::move(e), dims_);
  }

  int baseDim() const { return m_; }
  int rank() const { return r_; }
  const Dims& dims() const { return dims_; }
  const WeightJet& entry(int a, int b) const {
    return jets_[static_cast<std::size_t>(a) * r_ + b];
  }
  const Expr& entryExpr(int a, int b) const { return entry(a, b).phi(); }

  MatC evalH(const Point& p) const {
    MatC h(r_, r_);
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b) h(a, b) = eval(entry(a, b).phi(), p);
    return h;
  }

  /// Entrywise derivative d_{word} H as a matrix.
  MatC evalDeriv(const std::vector<Var>& word, const Point& p) const {
    MatC h(r_, r_);
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b) h(a, b) = entry(a, b).evalDeriv(word, p);
    return h;
  }

 private:
  int m_ = 0, r_ = 0;
  Dims dims_;
  std::vector<WeightJet> jets_;
};

/// Chern curvature data of (E, H) at a point: the metric and the m*m grid of
/// endomorphisms Theta_{jk} = H^{-1}(d_kbar H)H^{-1}(d_j H) - H^{-1}(d_kbar d_j H).
struct BundleCurvature {
  int m = 0, r = 0;
  MatC H;                   // r x r, Hermitian positive definite
  std::vector<MatC> theta;  // index j*m + k, each r x r
  const MatC& at(int j, int k) const { return theta[static_cast<std::size_t>(j) * m + k]; }
};

inline BundleCurvature curvatureBundle(const BundleMetric& bm, const Point& p) {
  BundleCurvature c;
  c.m = bm.baseDim();
  c.r = bm.rank();
  c.H = bm.evalH(p);
  HermMatrix hcheck(c.H);  // validates hermiticity at this point
  c.H = hcheck.mat();
  Eigen::LLT<MatC> llt(c.H);
  if (llt.info() != Eigen::Success)
    throw GeometryError("curvatureBundle: metric not positive definite at sample point");
  c.theta.resize(static_cast<std::size_t>(c.m) * c.m);
  std::vector<MatC> dH(c.m), dHb(c.m);
  for (int j = 0; j < c.m; ++j) {
    dH[j] = bm.evalDeriv({Var::base(j + 1)}, p);
    dHb[j] = bm.evalDeriv({Var::baseBar(j + 1)}, p);
  }
  for (int j = 0; j < c.m; ++j)
    for (int k = 0; k < c.m; ++k) {
      MatC dd = bm.evalDeriv({Var::base(j + 1), Var::baseBar(k + 1)}, p);
      c.theta[static_cast<std::size_t>(j) * c.m + k] =
          llt.solve(dHb[k]) * llt.solve(dH[j]) - llt.solve(dd);
    }
  return c;
}

/// M(u)_{jk} = <Theta_{jk} u, u>_H = u* (H Theta_{jk}) u. Hermitian in (j,k);
/// RC-positivity of the pair (u fixed) asks for a tangent direction v with
/// v* M(u) v > 0.
inline HermMatrix mMatrix(const BundleCurvature& c, const VecC& u) {
  MatC m(c.m, c.m);
  for (int j = 0; j < c.m; ++j)
    for (int k = 0; k < c.m; ++k)
      m(j, k) = (u.adjoint() * c.H * c.at(j, k) * u)(0, 0);
  return HermMatrix(m);
}

/// K(v) = sum_{jk} v_j vbar_k H Theta_{jk}, the curvature pairing in a fixed
/// tangent direction, as a Hermitian form on the fiber. Uniform RC-positivity
/// asks for v with K(v) positive definite against H.
inline HermMatrix kMatrix(const BundleCurvature& c, const VecC& v) {
  MatC k = MatC::Zero(c.r, c.r);
  for (int j = 0; j < c.m; ++j)
    for (int l = 0; l < c.m; ++l) k += v[j] * std::conj(v[l]) * (c.H * c.at(j, l));
  return HermMatrix(k);
}

// --- induced weight on P(E^*) --------------------------------------------------------

namespace detail {

/// Symbolic adjugate and determinant for r <= 3.
inline std::pair<std::vector<Expr>, Expr> adjugateAndDet(const BundleMetric& bm) {
  int r = bm.rank();
  auto h = [&](int a, int b) { return bm.entryExpr(a, b); };
  if (r == 1) return {{Expr(1.0)}, h(0, 0)};
  if (r == 2) {
    Expr det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
    return {{h(1, 1), Expr(0.0) - h(0, 1), Expr(0.0) - h(1, 0), h(0, 0)}, det};
  }
  if (r == 3) {
    auto c2 = [&](int a0, int a1, int b0, int b1) {
      return h(a0, b0) * h(a1, b1) - h(a0, b1) * h(a1, b0);
    };
    Expr det = h(0, 0) * c2(1, 2, 1, 2) - h(0, 1) * (h(1, 0) * h(2, 2) - h(1, 2) * h(2, 0)) +
               h(0, 2) * (h(1, 0) * h(2, 1) - h(1, 1) * h(2, 0));
    std::vector<Expr> adj(9, Expr(0.0));
    // adj(H)_{ab} = cofactor C_{ba} = (-1)^{a+b} minor_{ba}
    auto minor = [&](int i, int j) {
      int r0 = i == 0 ? 1 : 0, r1 = i == 2 ? 1 : 2;
      int c0 = j == 0 ? 1 : 0, c1 = j == 2 ? 1 : 2;
      return h(r0, c0) * h(r1, c1) - h(r0, c1) * h(r1, c0);
    };
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        Expr m = minor(b, a);
        adj[static_cast<std::size_t>(a) * 3 + b] = ((a + b) % 2 == 0) ? m : Expr(0.0) - m;
      }
    return {adj, det};
  }
  throw GeometryError("induced weight needs the symbolic inverse; implemented for rank <= 3");
}

}  // namespace detail

/// The affine charts of P(E^*) with the weight of the induced metric on
/// O_{P(E^*)}(1). On chart ell the homogeneous fiber coordinate is
/// zeta = (z_1, .., 1 at slot ell, .., z_{r-1}) and
///   phi(t, z) = log( zeta^T H(t)^{-1} zetabar ).
/// Overlap cocycle: phi^{ell'}(t, z') = phi^{ell}(t, z) - log|zeta_{ell'}|^2.
struct InducedWeightFamily {
  int m = 0, r = 0;
  std::vector<LineBundle> charts;  // size r, dims {m, r-1}
};

inline InducedWeightFamily inducedLineWeight(const BundleMetric& bm) {
  auto [adj, det] = detail::adjugateAndDet(bm);
  int r = bm.rank();
  InducedWeightFamily fam;
  fam.m = bm.baseDim();
  fam.r = r;
  Dims cd{bm.baseDim(), r - 1, bm.dims().params};
  for (int ell = 0; ell < r; ++ell) {
    // zeta components as expressions: slot ell is 1, others are z_1..z_{r-1}
    std::vector<Expr> zeta, zetab;
    int zi = 1;
    for (int a = 0; a < r; ++a) {
      if (a == ell) {
        zeta.push_back(Expr(1.0));
        zetab.push_back(Expr(1.0));
      } else {
        zeta.push_back(Expr(Var::fiber(zi)));
        zetab.push_back(Expr(Var::fiberBar(zi)));
        ++zi;
      }
    }
    std::vector<Expr> terms;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        terms.push_back(zeta[a] * adj[static_cast<std::size_t>(a) * r + b] * zetab[b]);
    Expr phi = logFn(sum(std::move(terms))) - logFn(det);
    fam.charts.emplace_back(std::move(phi), cd);
  }
  return fam;
}

/// Sampled validation of the family: each chart weight is real at
/// conjugate-consistent points and the overlap cocycle identity holds.
/// Deterministic in the seed; throws GeometryError on failure.
inline void validateInducedFamily(const InducedWeightFamily& fam,
                                  int samplesPerChart = 200, std::uint64_t seed = 2,
                                  double tol = 1e-9) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rad(0.1, 0.9);
  std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
  auto draw = [&] { return std::polar(rad(rng), ang(rng)); };
  int r = fam.r;
  for (int ell = 0; ell < r; ++ell) {
    const LineBundle& lb = fam.charts[static_cast<std::size_t>(ell)];
    for (int s = 0; s < samplesPerChart; ++s) {
      std::vector<Cx> t, z;
      for (int j = 0; j < fam.m; ++j) t.push_back(draw());
      for (int j = 0; j + 1 < r; ++j) z.push_back(draw());
      Point p = conjugatePoint(t, z);
      Cx v = eval(lb.jet.phi(), p);
      if (std::abs(v.imag()) > tol * std::max(1.0, std::abs(v)))
        throw GeometryError("induced weight not real at a sample point");

      // homogeneous coordinates of the same point, then re-chart
      std::vector<Cx> zeta(static_cast<std::size_t>(r));
      int zi = 0;
      for (int a = 0; a < r; ++a) zeta[static_cast<std::size_t>(a)] = (a == ell) ? Cx(1.0) : z[zi++];
      for (int ell2 = 0; ell2 < r; ++ell2) {
        if (ell2 == ell) continue;
        Cx pivot = zeta[static_cast<std::size_t>(ell2)];
        if (std::abs(pivot) < 0.05) continue;  // stay away from the chart boundary
        std::vector<Cx> z2;
        for (int a = 0; a < r; ++a)
          if (a != ell2) z2.push_back(zeta[static_cast<std::size_t>(a)] / pivot);
        Point p2 = conjugatePoint(t, z2);
        Cx v2 = eval(fam.charts[static_cast<std::size_t>(ell2)].jet.phi(), p2);
        Cx expect = v - std::log(std::norm(pivot));
        if (std::abs(v2 - expect) > tol * std::max(1.0, std::abs(expect)))
          throw GeometryError("induced weight cocycle identity failed on overlap");
      }
    }
  }
}

/// Sampled validation of a bundle metric: Hermitian positive definite at
/// conjugate-consistent samples in the polydisc.
inline void validateMetric(const BundleMetric& bm, int samples = 200, std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rad(0.0, 0.9);
  std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
  for (int s = 0; s < samples; ++s) {
    std::vector<Cx> t;
    for (int j = 0; j < bm.baseDim(); ++j) t.push_back(std::polar(rad(rng), ang(rng)));
    Point p = conjugatePoint(t);
    HermMatrix h(bm.evalH(p));  // throws if not Hermitian
    if (!isPosDef(h)) throw GeometryError("metric not positive definite at a sample point");
  }
}

}  // namespace rcpos
