#pragma once

// Direct images of twists of the tautological line bundle on P(E^*) for a
// rank-2 bundle E over a base chart. The fiber is one projective line,
// covered by two affine charts glued along |w| = 1 (the glue radius is a
// method parameter). Sections are the monomial coefficients of dw up to
// degree k; their Gram matrix in the twisted induced weight is the metric on
// the direct image, S^k E tensor det E (or S^k E with the extra determinant
// twist in the weight). Curvature in the base comes from finite differences
// of the Gram family with Richardson extrapolation, and verifyTheorem ties
// the uniform weak positivity of the twisted weight to the uniform RC margin
// of the direct image at one base point.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "rcpos/geometry.hpp"
#include "rcpos/linalg.hpp"
#include "rcpos/positivity.hpp"
#include "rcpos/sampling.hpp"

namespace rcpos {

struct DirectImageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class FibrationModel {
 public:
  FibrationModel(BundleMetric e, int k, bool skeOnly = false)
      : e_(std::move(e)), k_(k), skeOnly_(skeOnly) {
    if (e_.rank() != 2) throw DirectImageError("FibrationModel: rank-2 metrics only");
    if (k_ < 0) throw DirectImageError("FibrationModel: twist k must be nonnegative");
    if (e_.baseDim() < 1)
      throw DirectImageError("FibrationModel: needs a positive-dimensional base");
  }

  const BundleMetric& metric() const { return e_; }
  int k() const { return k_; }
  bool skeOnly() const { return skeOnly_; }
  int baseDim() const { return e_.baseDim(); }
  int rank() const { return k_ + 1; }  // dimension of the direct image

 private:
  BundleMetric e_;
  int k_ = 0;
  bool skeOnly_ = false;
};

/// The weight family whose pushforward is computed: (k+2) times the induced
/// O(1) weight, plus log det H for the plain symmetric power.
inline InducedWeightFamily twistedFamily(const FibrationModel& mod) {
  const BundleMetric& e = mod.metric();
  InducedWeightFamily base = inducedLineWeight(e);
  Expr det = e.entryExpr(0, 0) * e.entryExpr(1, 1) - e.entryExpr(0, 1) * e.entryExpr(1, 0);
  InducedWeightFamily fam;
  fam.m = base.m;
  fam.r = base.r;
  for (const auto& lb : base.charts) {
    Expr phi = Expr(static_cast<double>(mod.k() + 2)) * lb.jet.phi();
    if (mod.skeOnly()) phi = phi + logFn(det);
    fam.charts.emplace_back(std::move(phi), lb.dims());
  }
  return fam;
}

// --- Gram integrals ------------------------------------------------------------------

struct GramOptions {
  int radialNodes = 64;  // per chart
  int angularNodes = 64;
  double glueRadius = 1.0;  // chart 0 covers |w| <= glueRadius
};

struct GramResult {
  MatC gram;       // (k+1) x (k+1), Hermitian positive definite
  MatC chartInner; // chart-0 contribution
  MatC chartOuter; // chart-1 contribution
  double relError = 0.0;  // node-halving estimate
  double det = 0.0;       // det H(t)
};

namespace detail {

/// Numeric adjugate and determinant of the rank-2 metric at a base point.
struct FiberWeight {
  Cx a00, a01, a10, a11;
  double det = 0.0;
};

inline FiberWeight fiberWeight(const BundleMetric& e, const std::vector<Cx>& t) {
  MatC h = e.evalH(conjugatePoint(t));
  HermMatrix hh(h);
  if (!isPosDef(hh)) throw DirectImageError("metric not positive definite at base point");
  FiberWeight d;
  d.a00 = hh.mat()(1, 1);
  d.a11 = hh.mat()(0, 0);
  d.a01 = -hh.mat()(0, 1);
  d.a10 = -hh.mat()(1, 0);
  d.det = (hh.mat()(0, 0) * hh.mat()(1, 1) - hh.mat()(0, 1) * hh.mat()(1, 0)).real();
  return d;
}

/// One chart's Gram contribution over the disc of the given radius.
/// chart 0: zeta = (1, w), sections w^a; chart 1: zeta = (v, 1), the section
/// w^a dw pulls back to (a sign times) v^{k-a} dv.
inline MatC chartGram(const FiberWeight& d, int chart, int k, double radius, int nRad,
                      int nAng) {
  QuadRule rad = gaussLegendre(nRad, 0.0, radius);
  QuadRule ang = gaussLegendre(nAng, 0.0, 2.0 * std::numbers::pi);
  int dim = k + 1;
  MatC g = MatC::Zero(dim, dim);
  std::vector<Cx> pw(static_cast<std::size_t>(k) + 1);
  for (std::size_t i = 0; i < rad.nodes.size(); ++i) {
    double rho = rad.nodes[i];
    double rho2 = rho * rho;
    for (std::size_t j = 0; j < ang.nodes.size(); ++j) {
      Cx w = std::polar(rho, ang.nodes[j]);
      double q = chart == 0 ? d.a00.real() + 2.0 * (d.a10 * w).real() + d.a11.real() * rho2
                            : d.a00.real() * rho2 + 2.0 * (d.a01 * w).real() + d.a11.real();
      if (!(q > 0.0)) throw DirectImageError("chartGram: weight degenerates on the fiber");
      double base = d.det / q;
      double f = 1.0;
      for (int p = 0; p < k + 2; ++p) f *= base;
      double wgt = rad.weights[i] * ang.weights[j] * rho * f;
      pw[0] = Cx(1.0);
      for (int a = 1; a <= k; ++a) pw[static_cast<std::size_t>(a)] = pw[a - 1] * w;
      for (int a = 0; a <= k; ++a)
        for (int b = 0; b <= k; ++b) {
          Cx fa = chart == 0 ? pw[static_cast<std::size_t>(a)] : pw[static_cast<std::size_t>(k - a)];
          Cx fb = chart == 0 ? pw[static_cast<std::size_t>(b)] : pw[static_cast<std::size_t>(k - b)];
          g(a, b) += wgt * fa * std::conj(fb);
        }
    }
  }
  return g;
}

struct GramParts {
  MatC inner, outer;
  // Hermitian projection applied here so stencil points get the same roundoff
  // treatment as the center; a constant family then differences to exact zero.
  MatC total() const {
    MatC g = inner + outer;
    return 0.5 * (g + g.adjoint().eval());
  }
};

inline GramParts gramParts(const FiberWeight& d, int k, bool skeOnly, const GramOptions& opt,
                           int nRad, int nAng) {
  if (!(opt.glueRadius > 0.0)) throw DirectImageError("glue radius must be positive");
  GramParts p;
  p.inner = chartGram(d, 0, k, opt.glueRadius, nRad, nAng);
  p.outer = chartGram(d, 1, k, 1.0 / opt.glueRadius, nRad, nAng);
  if (skeOnly) {
    p.inner /= d.det;
    p.outer /= d.det;
  }
  return p;
}

/// Gram without the error estimate; used at finite-difference stencil points.
inline MatC gramPlain(const FibrationModel& mod, const std::vector<Cx>& t,
                      const GramOptions& opt) {
  FiberWeight d = fiberWeight(mod.metric(), t);
  return gramParts(d, mod.k(), mod.skeOnly(), opt, opt.radialNodes, opt.angularNodes).total();
}

}  // namespace detail

/// Gram matrix of the monomial sections at a base point, with a node-halving
/// error estimate and per-chart contributions.
inline GramResult gramAt(const FibrationModel& mod, const std::vector<Cx>& t,
                         const GramOptions& opt = {}) {
  if (opt.radialNodes < 8 || opt.angularNodes < 8)
    throw DirectImageError("gramAt: needs at least 8 nodes per direction");
  detail::FiberWeight d = detail::fiberWeight(mod.metric(), t);
  detail::GramParts parts =
      detail::gramParts(d, mod.k(), mod.skeOnly(), opt, opt.radialNodes, opt.angularNodes);
  MatC full = parts.total();
  MatC half = detail::gramParts(d, mod.k(), mod.skeOnly(), opt, opt.radialNodes / 2,
                                opt.angularNodes / 2)
                  .total();
  GramResult r;
  r.gram = HermMatrix(full).mat();
  if (!isPosDef(HermMatrix(r.gram))) throw DirectImageError("gramAt: Gram not positive definite");
  r.chartInner = std::move(parts.inner);
  r.chartOuter = std::move(parts.outer);
  r.relError = (full - half).norm() / full.norm();
  r.det = d.det;
  return r;
}

// --- curvature of the direct image ------------------------------------------------------

struct CurvatureV {
  BundleCurvature data;    // Richardson-extrapolated blocks over the center Gram
  BundleCurvature coarse;  // step h
  BundleCurvature fine;    // step h/2
  double residual = 0.0;   // max relative block change from h to h/2
  double gramError = 0.0;  // quadrature estimate at the center
  double h = 0.0;
};

namespace detail {

struct GramDerivs {
  std::vector<MatC> d1;               // d/dx_a, axes x_1, y_1, .., x_m, y_m
  std::vector<std::vector<MatC>> d2;  // mixed second partials
};

/// Central differences on the 3^(2m) grid, restricted to the offsets the
/// Wirtinger assembly actually consumes: singles along every real axis and
/// corner pairs across distinct complex coordinates (same-coordinate pairs
/// cancel identically in d_j d_kbar).
inline GramDerivs gramStencil(const FibrationModel& mod, const std::vector<Cx>& t,
                              const MatC& center, double h, const GramOptions& opt) {
  int m = mod.baseDim();
  int ax = 2 * m;
  auto shifted = [&](int a, double da, int b, double db) {
    std::vector<Cx> tt = t;
    tt[static_cast<std::size_t>(a / 2)] += a % 2 == 0 ? Cx(da) : Cx(0.0, da);
    if (b >= 0) tt[static_cast<std::size_t>(b / 2)] += b % 2 == 0 ? Cx(db) : Cx(0.0, db);
    return tt;
  };
  GramDerivs dv;
  dv.d1.resize(static_cast<std::size_t>(ax));
  dv.d2.assign(static_cast<std::size_t>(ax),
               std::vector<MatC>(static_cast<std::size_t>(ax),
                                 MatC::Zero(center.rows(), center.cols())));
  std::vector<MatC> plus(static_cast<std::size_t>(ax)), minus(static_cast<std::size_t>(ax));
  for (int a = 0; a < ax; ++a) {
    plus[static_cast<std::size_t>(a)] = gramPlain(mod, shifted(a, h, -1, 0.0), opt);
    minus[static_cast<std::size_t>(a)] = gramPlain(mod, shifted(a, -h, -1, 0.0), opt);
    dv.d1[static_cast<std::size_t>(a)] =
        (plus[static_cast<std::size_t>(a)] - minus[static_cast<std::size_t>(a)]) / (2.0 * h);
    dv.d2[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] =
        (plus[static_cast<std::size_t>(a)] - 2.0 * center + minus[static_cast<std::size_t>(a)]) /
        (h * h);
  }
  for (int a = 0; a < ax; ++a)
    for (int b = a + 1; b < ax; ++b) {
      if (a / 2 == b / 2) continue;  // cancels in the assembly
      MatC pp = gramPlain(mod, shifted(a, h, b, h), opt);
      MatC pm = gramPlain(mod, shifted(a, h, b, -h), opt);
      MatC mp = gramPlain(mod, shifted(a, -h, b, h), opt);
      MatC mm = gramPlain(mod, shifted(a, -h, b, -h), opt);
      MatC mixed = (pp - pm - mp + mm) / (4.0 * h * h);
      dv.d2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = mixed;
      dv.d2[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = std::move(mixed);
    }
  return dv;
}

inline BundleCurvature curvatureFromDerivs(const FibrationModel& mod, const MatC& center,
                                           const GramDerivs& dv) {
  int m = mod.baseDim();
  BundleCurvature c;
  c.m = m;
  c.r = mod.rank();
  c.H = center;
  Eigen::LLT<MatC> llt(center);
  if (llt.info() != Eigen::Success)
    throw DirectImageError("curvatureV: center Gram not positive definite");
  c.theta.assign(static_cast<std::size_t>(m) * m, MatC());
  const Cx I(0.0, 1.0);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      const MatC& xj = dv.d1[static_cast<std::size_t>(2 * j)];
      const MatC& yj = dv.d1[static_cast<std::size_t>(2 * j + 1)];
      const MatC& xk = dv.d1[static_cast<std::size_t>(2 * k)];
      const MatC& yk = dv.d1[static_cast<std::size_t>(2 * k + 1)];
      MatC dj = 0.5 * (xj - I * yj);     // d_j H
      MatC dkbar = 0.5 * (xk + I * yk);  // d_kbar H
      MatC mix = 0.25 * (dv.d2[static_cast<std::size_t>(2 * j)][static_cast<std::size_t>(2 * k)] +
                         dv.d2[static_cast<std::size_t>(2 * j + 1)][static_cast<std::size_t>(2 * k + 1)] +
                         I * (dv.d2[static_cast<std::size_t>(2 * j)][static_cast<std::size_t>(2 * k + 1)] -
                              dv.d2[static_cast<std::size_t>(2 * j + 1)][static_cast<std::size_t>(2 * k)]));
      c.theta[static_cast<std::size_t>(j) * m + k] =
          llt.solve(dkbar * llt.solve(dj)) - llt.solve(mix);
    }
  return c;
}

}  // namespace detail

/// Chern curvature of the Gram family at a base point, by central
/// differences at steps h and h/2 with Richardson extrapolation.
inline CurvatureV curvatureV(const FibrationModel& mod, const std::vector<Cx>& t,
                             double h0 = 1e-3, const GramOptions& opt = {}) {
  if (!(h0 > 0.0)) throw DirectImageError("curvatureV: step must be positive");
  GramResult center = gramAt(mod, t, opt);
  detail::GramDerivs coarse = detail::gramStencil(mod, t, center.gram, h0, opt);
  detail::GramDerivs fine = detail::gramStencil(mod, t, center.gram, h0 / 2.0, opt);
  CurvatureV cv;
  cv.coarse = detail::curvatureFromDerivs(mod, center.gram, coarse);
  cv.fine = detail::curvatureFromDerivs(mod, center.gram, fine);
  cv.data = cv.fine;
  int m = mod.baseDim();
  for (int q = 0; q < m * m; ++q) {
    cv.data.theta[static_cast<std::size_t>(q)] =
        (4.0 * cv.fine.theta[static_cast<std::size_t>(q)] -
         cv.coarse.theta[static_cast<std::size_t>(q)]) /
        3.0;
    double scale = std::max(1.0, cv.data.theta[static_cast<std::size_t>(q)].norm());
    cv.residual = std::max(cv.residual, (cv.fine.theta[static_cast<std::size_t>(q)] -
                                         cv.coarse.theta[static_cast<std::size_t>(q)])
                                                .norm() /
                                            (3.0 * scale));
  }
  cv.gramError = center.relError;
  cv.h = h0;
  return cv;
}

// --- hypothesis vs conclusion at one base point -------------------------------------------

struct TheoremOptions {
  SearchOptions search{};
  GramOptions quad{};
  double h0 = 1e-3;
  double gateFactor = 10.0;
};

struct TheoremReport {
  // hypothesis: uniform weak positivity of the twisted weight at t0
  double fiberMargin = 0.0;       // min eigenvalue of the fiber block over samples
  double hypothesisMargin = 0.0;  // uniform weak margin of the twisted weight
  VecC hypothesisWitness;         // base direction
  int hypothesisChart = -1;
  // conclusion: uniform RC margin of the direct image at t0
  double conclusionMargin = 0.0;
  VecC conclusionWitness;
  double marginCoarse = 0.0;  // same witness, step-h curvature
  double marginFine = 0.0;    // same witness, step-h/2 curvature
  double pencilShiftRel = 0.0;
  double noiseFloor = 0.0;
  double quadratureError = 0.0;
  double stencilResidual = 0.0;
  double h = 0.0;
  bool gated = false;           // hypothesis clears gateFactor times the noise floor
  bool implicationHolds = true; // gated implies a positive conclusion margin
};

/// Hypothesis and conclusion of the pointwise statement: if the twisted
/// weight is uniformly weakly positive at t0 (clearing the numerical noise
/// floor), the direct image must be uniformly RC positive there. A gated
/// hypothesis with a nonpositive conclusion margin is a genuine violation.
inline TheoremReport verifyTheorem(const FibrationModel& mod, const std::vector<Cx>& t0,
                                   const TheoremOptions& opt = {}) {
  TheoremReport rep;
  rep.h = opt.h0;

  InducedWeightFamily fam = twistedFamily(mod);
  auto samples = detail::collectFiberData(fam, t0, opt.search);
  rep.fiberMargin = std::numeric_limits<double>::infinity();
  for (const auto& fd : samples) rep.fiberMargin = std::min(rep.fiberMargin, fd.fiberMin);
  PositivityResult hyp = uniformWeakFamilyCheck(fam, {t0}, opt.search, "uniform-weak-twist");
  rep.hypothesisMargin = hyp.margin;
  if (!hyp.points.empty()) {
    rep.hypothesisWitness = hyp.points[0].primary;
    rep.hypothesisChart = hyp.points[0].chart;
  }

  CurvatureV cv = curvatureV(mod, t0, opt.h0, opt.quad);
  DataMargin dm = uniformMarginData(cv.data, opt.search);
  rep.conclusionMargin = dm.margin;
  rep.conclusionWitness = dm.primary;
  rep.marginCoarse = uniformValueAt(cv.coarse, dm.primary);
  rep.marginFine = uniformValueAt(cv.fine, dm.primary);
  rep.quadratureError = cv.gramError;
  rep.stencilResidual = cv.residual;

  HermMatrix gram(cv.data.H);
  VecR pc = pencilEig(kMatrix(cv.coarse, dm.primary), gram).values;
  VecR pf = pencilEig(kMatrix(cv.fine, dm.primary), gram).values;
  double scale = std::max(pc.cwiseAbs().maxCoeff(), pf.cwiseAbs().maxCoeff());
  scale = std::max(scale, 1e-12);
  rep.pencilShiftRel = (pf - pc).cwiseAbs().maxCoeff() / scale;

  // noise floor: the finite-difference shift of the margin itself, plus
  // quadrature error amplified through the second-derivative stencil
  EigResult ge = eigHerm(gram);
  double cond = ge.values[ge.values.size() - 1] / ge.values[0];
  double hFine = opt.h0 / 2.0;
  double quadNoise = 4.0 * cv.gramError * cond * cond / (hFine * hFine);
  rep.noiseFloor = std::abs(rep.marginFine - rep.marginCoarse) + quadNoise;
  rep.gated = rep.hypothesisMargin > opt.gateFactor * rep.noiseFloor;
  rep.implicationHolds = !rep.gated || rep.conclusionMargin > 0.0;
  return rep;
}

}  // namespace rcpos
