#pragma once

// The four curvature-positivity notions and their searches.
//
// Pairing convention: F(u, v) = sum_{jk} v_j vbar_k u* (H Theta_{jk}) u,
// real for Hermitian data. Quadratic forms in v use the v_j vbar_k ordering
// throughout (so the maximizer of a form G is the conjugate of the top
// eigenvector of G).
//
// Inner problems (best v for fixed u, worst u for fixed v) are solved exactly
// by eigendecomposition; only the outer direction is searched, by a
// quasirandom sphere grid plus Nelder-Mead refinement. Computed margins
// therefore satisfy uniform <= plain RC exactly, whatever the sampling.

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "rcpos/geometry.hpp"
#include "rcpos/sampling.hpp"

namespace rcpos {

enum class Verdict { Positive, NotPositive, Degenerate };

inline const char* verdictName(Verdict v) {
  switch (v) {
    case Verdict::Positive: return "positive";
    case Verdict::NotPositive: return "not-positive";
    case Verdict::Degenerate: return "degenerate";
  }
  return "?";
}

struct SearchOptions {
  int gridPoints = 4096;
  int nmMaxIter = 200;
  double nmShrinkTol = 1e-10;
  int fiberSamples = 256;  // per chart, weak notions
  std::uint64_t seed = 0;
};

struct PointVerdict {
  std::vector<Cx> basePoint;
  double margin = 0.0;
  VecC primary;    // direction attaining the margin (u for rc, v for uniform)
  VecC secondary;  // exact inner witness paired with primary
  int chart = -1;  // weak notions: chart of the worst fiber sample
};

struct PositivityResult {
  std::string notion;
  Verdict verdict = Verdict::Degenerate;
  double margin = 0.0;
  std::vector<PointVerdict> points;
  std::string note;
};

// --- exact inner solves ---------------------------------------------------------

/// max over unit v of F(u, v) = lambda_max(M(u)); optionally the maximizing v.
inline double rcValueAt(const BundleCurvature& c, const VecC& u, VecC* bestV = nullptr) {
  EigResult e = eigHerm(mMatrix(c, u));
  if (bestV) *bestV = e.vectors.col(e.values.size() - 1).conjugate();
  return e.values[e.values.size() - 1];
}

/// min over H-unit u of F(u, v) = smallest eigenvalue of the pencil
/// (K(v), H); optionally the minimizing u.
inline double uniformValueAt(const BundleCurvature& c, const VecC& v, VecC* worstU = nullptr) {
  EigResult e = pencilEig(kMatrix(c, v), HermMatrix(c.H));
  if (worstU) *worstU = e.vectors.col(0);
  return e.values[0];
}

// --- sphere search helpers --------------------------------------------------------

namespace detail {

inline VecC packUnit(const std::vector<double>& x, int dim) {
  VecC v(dim);
  for (int j = 0; j < dim; ++j) v[j] = Cx(x[2 * j], x[2 * j + 1]);
  double n = v.norm();
  if (n < 1e-12) return VecC();  // caller treats as invalid
  return v / n;
}

inline std::vector<double> unpackUnit(const VecC& v) {
  std::vector<double> x(2 * static_cast<std::size_t>(v.size()));
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    x[2 * static_cast<std::size_t>(j)] = v[j].real();
    x[2 * static_cast<std::size_t>(j) + 1] = v[j].imag();
  }
  return x;
}

/// Grid + Nelder-Mead minimization of f over the complex unit sphere.
/// Deterministic in (gridPoints, seed). Returns {min value, argmin}.
template <class F>
std::pair<double, VecC> minimizeOnSphere(const F& f, int dim, const SearchOptions& opt,
                                         std::uint64_t seedOffset) {
  double best = std::numeric_limits<double>::infinity();
  VecC bestV;
  for (const VecC& v : unitSphereGrid(dim, opt.gridPoints, opt.seed + seedOffset)) {
    double val = f(v);
    if (val < best) {
      best = val;
      bestV = v;
    }
  }
  NelderMeadOptions nm;
  nm.maxIter = opt.nmMaxIter;
  nm.shrinkTol = opt.nmShrinkTol;
  auto obj = [&](const std::vector<double>& x) {
    VecC v = packUnit(x, dim);
    if (v.size() == 0) return std::numeric_limits<double>::infinity();
    return f(v);
  };
  NelderMeadResult r = nelderMead(obj, unpackUnit(bestV), nm);
  if (r.value < best) {
    VecC v = packUnit(r.x, dim);
    if (v.size() != 0) {
      best = r.value;
      bestV = v;
    }
  }
  return {best, bestV};
}

template <class F>
std::pair<double, VecC> maximizeOnSphere(const F& f, int dim, const SearchOptions& opt,
                                         std::uint64_t seedOffset) {
  auto neg = [&](const VecC& v) { return -f(v); };
  auto [val, v] = minimizeOnSphere(neg, dim, opt, seedOffset);
  return {-val, v};
}

inline PositivityResult finish(std::string notion, std::vector<PointVerdict> pts,
                               std::string note = {}) {
  PositivityResult r;
  r.notion = std::move(notion);
  r.points = std::move(pts);
  r.note = std::move(note);
  if (r.points.empty()) {
    r.verdict = Verdict::Degenerate;
    return r;
  }
  r.margin = std::numeric_limits<double>::infinity();
  for (const auto& p : r.points) r.margin = std::min(r.margin, p.margin);
  r.verdict = r.margin > 0.0 ? Verdict::Positive : Verdict::NotPositive;
  return r;
}

inline PositivityResult degenerate(std::string notion, std::string why) {
  PositivityResult r;
  r.notion = std::move(notion);
  r.verdict = Verdict::Degenerate;
  r.margin = 0.0;
  r.note = std::move(why);
  return r;
}

}  // namespace detail

// --- RC positivity -------------------------------------------------------------------

struct DataMargin {
  double margin = 0.0;
  VecC primary;    // u for rc, v for uniform
  VecC secondary;  // exact inner witness paired with primary
};

/// min_{H-unit u} max_{unit v} F(u, v) on raw curvature data.
inline DataMargin rcMarginData(const BundleCurvature& c, const SearchOptions& opt = {}) {
  MatC hall = sqrtPsd(HermMatrix(c.H));
  Eigen::LLT<MatC> llt(c.H);
  MatC hinvHalf = llt.solve(hall);  // H^{-1/2}, since H^{-1} H^{1/2} = H^{-1/2}
  auto f = [&](const VecC& ut) { return rcValueAt(c, hinvHalf * ut); };
  auto [val, ut] = detail::minimizeOnSphere(f, c.r, opt, 101);
  DataMargin dm;
  dm.margin = val;
  dm.primary = hinvHalf * ut;  // H-unit fiber vector
  rcValueAt(c, dm.primary, &dm.secondary);
  return dm;
}

/// max_{unit v} min_{H-unit u} F(u, v) on raw curvature data.
inline DataMargin uniformMarginData(const BundleCurvature& c, const SearchOptions& opt = {}) {
  auto f = [&](const VecC& v) { return uniformValueAt(c, v); };
  auto [val, v] = detail::maximizeOnSphere(f, c.m, opt, 211);
  DataMargin dm;
  dm.margin = val;
  dm.primary = v;
  uniformValueAt(c, v, &dm.secondary);
  return dm;
}

/// Seeded random curvature dataset: H positive definite and endomorphism
/// blocks satisfying (H Theta_{jk})* = H Theta_{kj}, so every pairing is
/// real. Not derived from any metric.
inline BundleCurvature randomCurvatureData(int m, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto rnd = [&](int rows, int cols) {
    MatC a(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) a(i, j) = Cx(g(rng), g(rng));
    return a;
  };
  BundleCurvature c;
  c.m = m;
  c.r = r;
  MatC b = rnd(r, r);
  c.H = b * b.adjoint() + 0.2 * MatC::Identity(r, r);
  Eigen::LLT<MatC> llt(c.H);
  c.theta.assign(static_cast<std::size_t>(m) * m, MatC());
  for (int j = 0; j < m; ++j)
    for (int k = j; k < m; ++k) {
      MatC s = rnd(r, r);
      if (k == j) s = 0.5 * (s + s.adjoint().eval());
      c.theta[static_cast<std::size_t>(j) * m + k] = llt.solve(s);
      c.theta[static_cast<std::size_t>(k) * m + j] = llt.solve(s.adjoint());
    }
  return c;
}

/// margin(t) = min_{H-unit u} max_{unit v} F(u, v). Positive iff every fiber
/// vector sees some positively curved direction.
inline PositivityResult rcCheck(const BundleMetric& bm,
                                const std::vector<std::vector<Cx>>& basePoints,
                                const SearchOptions& opt = {}) {
  if (bm.baseDim() == 0)
    return detail::degenerate("rc", "no tangent directions over a point base");
  std::vector<PointVerdict> pts;
  for (const auto& t : basePoints) {
    BundleCurvature c = curvatureBundle(bm, conjugatePoint(t));
    DataMargin dm = rcMarginData(c, opt);
    PointVerdict pv;
    pv.basePoint = t;
    pv.margin = dm.margin;
    pv.primary = std::move(dm.primary);
    pv.secondary = std::move(dm.secondary);
    pts.push_back(std::move(pv));
  }
  return detail::finish("rc", std::move(pts));
}

/// margin(t) = max_{unit v} min_{H-unit u} F(u, v). Positive iff one tangent
/// direction works for every fiber vector.
inline PositivityResult uniformRcCheck(const BundleMetric& bm,
                                       const std::vector<std::vector<Cx>>& basePoints,
                                       const SearchOptions& opt = {}) {
  if (bm.baseDim() == 0)
    return detail::degenerate("uniform-rc", "no tangent directions over a point base");
  std::vector<PointVerdict> pts;
  for (const auto& t : basePoints) {
    BundleCurvature c = curvatureBundle(bm, conjugatePoint(t));
    DataMargin dm = uniformMarginData(c, opt);
    PointVerdict pv;
    pv.basePoint = t;
    pv.margin = dm.margin;
    pv.primary = std::move(dm.primary);
    pv.secondary = std::move(dm.secondary);
    pts.push_back(std::move(pv));
  }
  return detail::finish("uniform-rc", std::move(pts));
}

// --- weak notions on P(E^*) --------------------------------------------------------

namespace detail {

/// Area-uniform fiber samples in the unit polydisc of C^d (d = r-1).
inline std::vector<std::vector<Cx>> fiberSamples(int d, int count, std::uint64_t seed) {
  std::vector<std::vector<Cx>> out;
  if (d == 0) {
    out.push_back({});  // single fiber point: P^0
    return out;
  }
  KroneckerSeq seq(2 * d, seed);
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    std::vector<double> x = seq.next();
    std::vector<Cx> z(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      z[static_cast<std::size_t>(j)] =
          std::polar(std::sqrt(x[2 * j]), 6.283185307179586 * x[2 * j + 1]);
    out.push_back(std::move(z));
  }
  return out;
}

struct FiberSampleData {
  int chart = 0;
  std::vector<Cx> z;
  double fiberMin = 0.0;   // smallest eigenvalue of the fiber block
  double kthEig = 0.0;     // r-th largest eigenvalue of the full Hessian
  bool hasG = false;
  MatC G;                  // horizontal Schur form, m x m, when fiber block is PD
};

inline std::vector<FiberSampleData> collectFiberData(const InducedWeightFamily& fam,
                                                     const std::vector<Cx>& t,
                                                     const SearchOptions& opt) {
  std::vector<FiberSampleData> data;
  int d = fam.r - 1;
  int full = fam.m + d;
  for (int ell = 0; ell < fam.r; ++ell) {
    auto zs = fiberSamples(d, opt.fiberSamples, opt.seed + 977 + static_cast<std::uint64_t>(ell));
    for (auto& z : zs) {
      FiberSampleData fd;
      fd.chart = ell;
      fd.z = z;
      Point p = conjugatePoint(t, fd.z);
      HermMatrix hess = hessian(fam.charts[static_cast<std::size_t>(ell)].jet, p);
      EigResult eig = eigHerm(hess);
      fd.kthEig = eig.values[full - fam.r];  // r-th largest of `full` values
      if (d == 0) {
        fd.fiberMin = std::numeric_limits<double>::infinity();
      } else {
        MatC fb = hess.mat().bottomRightCorner(d, d);
        fd.fiberMin = minEig(HermMatrix(fb));
        if (fd.fiberMin > 0.0 && fam.m > 0) {
          fd.G = schurComplement(hess.mat(), d);
          fd.hasG = true;
        }
      }
      if (d == 0 && fam.m > 0) {
        fd.G = hess.mat();
        fd.hasG = true;
      }
      data.push_back(std::move(fd));
    }
  }
  return data;
}

}  // namespace detail

/// Weak RC positivity: the induced weight on P(E^*) is positive along fibers
/// and its full Hessian has at least r positive eigenvalues at every sampled
/// fiber point. margin = min over samples of
/// min(r-th largest eigenvalue, fiber-block minimum).
inline PositivityResult weakRcCheck(const BundleMetric& bm,
                                    const std::vector<std::vector<Cx>>& basePoints,
                                    const SearchOptions& opt = {}) {
  int r = bm.rank();
  int full = bm.baseDim() + r - 1;
  if (full < r)
    return detail::degenerate(
        "weak-rc", "total space dimension below rank: no room for r positive eigenvalues");
  InducedWeightFamily fam = inducedLineWeight(bm);
  std::vector<PointVerdict> pts;
  for (const auto& t : basePoints) {
    auto data = detail::collectFiberData(fam, t, opt);
    PointVerdict pv;
    pv.basePoint = t;
    pv.margin = std::numeric_limits<double>::infinity();
    for (const auto& fd : data) {
      double m = std::min(fd.kthEig, fd.fiberMin);
      if (m < pv.margin) {
        pv.margin = m;
        pv.chart = fd.chart;
        pv.primary = Eigen::Map<const VecC>(fd.z.data(), static_cast<Eigen::Index>(fd.z.size()));
      }
    }
    pts.push_back(std::move(pv));
  }
  return detail::finish("weak-rc", std::move(pts));
}

/// Uniform weak positivity of an arbitrary chart family of weights (the
/// induced O(1) weight, or a twist of it): fiber positivity plus one base
/// direction v whose horizontal form v* G(z) v stays positive over the whole
/// fiber. margin = min(fiber margin, max_v min_z quadForm(G(z), v)).
inline PositivityResult uniformWeakFamilyCheck(const InducedWeightFamily& fam,
                                               const std::vector<std::vector<Cx>>& basePoints,
                                               const SearchOptions& opt = {},
                                               const std::string& notion = "uniform-weak-rc") {
  if (fam.m == 0)
    return detail::degenerate(notion, "no tangent directions over a point base");
  std::vector<PointVerdict> pts;
  for (const auto& t : basePoints) {
    auto data = detail::collectFiberData(fam, t, opt);
    double fiberMargin = std::numeric_limits<double>::infinity();
    for (const auto& fd : data) fiberMargin = std::min(fiberMargin, fd.fiberMin);

    PointVerdict pv;
    pv.basePoint = t;
    if (fiberMargin <= 0.0) {
      // no Schur form where the fiber block degenerates; the fiber margin
      // already decides the verdict
      pv.margin = fiberMargin;
      pts.push_back(std::move(pv));
      continue;
    }
    auto worstOverFiber = [&](const VecC& v) {
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& fd : data)
        if (fd.hasG) worst = std::min(worst, quadForm(fd.G, v));
      return worst;
    };
    auto [val, v] = detail::maximizeOnSphere(worstOverFiber, fam.m, opt, 307);
    pv.margin = std::min(val, fiberMargin);
    pv.primary = v;
    // record the fiber point where v is worst
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& fd : data) {
      if (!fd.hasG) continue;
      double q = quadForm(fd.G, v);
      if (q < worst) {
        worst = q;
        pv.chart = fd.chart;
        pv.secondary =
            Eigen::Map<const VecC>(fd.z.data(), static_cast<Eigen::Index>(fd.z.size()));
      }
    }
    pts.push_back(std::move(pv));
  }
  return detail::finish(notion, std::move(pts));
}

inline PositivityResult uniformWeakRcCheck(const BundleMetric& bm,
                                           const std::vector<std::vector<Cx>>& basePoints,
                                           const SearchOptions& opt = {}) {
  if (bm.baseDim() == 0)
    return detail::degenerate("uniform-weak-rc", "no tangent directions over a point base");
  return uniformWeakFamilyCheck(inducedLineWeight(bm), basePoints, opt);
}

// --- witness re-evaluation -------------------------------------------------------------

/// Recompute the exact inner solve at a reported witness; confirms that a
/// stored direction reproduces the stored margin.
inline double reevaluateRcWitness(const BundleMetric& bm, const std::vector<Cx>& t,
                                  const VecC& u) {
  BundleCurvature c = curvatureBundle(bm, conjugatePoint(t));
  return rcValueAt(c, u);
}

inline double reevaluateUniformWitness(const BundleMetric& bm, const std::vector<Cx>& t,
                                       const VecC& v) {
  BundleCurvature c = curvatureBundle(bm, conjugatePoint(t));
  return uniformValueAt(c, v);
}

}  // namespace rcpos
