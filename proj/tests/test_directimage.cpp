#include <catch2/catch_amalgamated.hpp>

#include "rcpos/catalog.hpp"
#include "rcpos/directimage.hpp"

#include <functional>
#include <numbers>

using namespace rcpos;

namespace {

constexpr double kPi = std::numbers::pi;

double simpsonThird(const std::function<double(double)>& f, double a, double b) {
  return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

double adaptiveSimpson(const std::function<double(double)>& f, double a, double b, double tol,
                       double whole, int depth) {
  double m = 0.5 * (a + b);
  double left = simpsonThird(f, a, m), right = simpsonThird(f, m, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptiveSimpson(f, a, m, 0.5 * tol, left, depth - 1) +
         adaptiveSimpson(f, m, b, 0.5 * tol, right, depth - 1);
}

double adaptiveSimpson(const std::function<double(double)>& f, double a, double b,
                       double tol = 1e-12) {
  return adaptiveSimpson(f, a, b, tol, simpsonThird(f, a, b), 40);
}

/// Independent 1-D oracle for diagonal metrics H = diag(h1, h2): the Gram is
/// diagonal and each entry reduces to radial integrals over the two charts.
double radialOracle(double h1, double h2, int k, int a) {
  double det = h1 * h2;
  auto inner = [&](double rho) {
    double q = h2 + h1 * rho * rho;
    double f = 1.0;
    for (int p = 0; p < k + 2; ++p) f *= det / q;
    return std::pow(rho, 2 * a + 1) * f;
  };
  auto outer = [&](double rho) {
    double q = h2 * rho * rho + h1;
    double f = 1.0;
    for (int p = 0; p < k + 2; ++p) f *= det / q;
    return std::pow(rho, 2 * (k - a) + 1) * f;
  };
  return 2.0 * kPi * (adaptiveSimpson(inner, 0.0, 1.0) + adaptiveSimpson(outer, 0.0, 1.0));
}

}  // namespace

TEST_CASE("trivial bundle Gram matches the closed values") {
  BundleMetric flat = makeFlat(2, 1);

  GramResult k0 = gramAt(FibrationModel(flat, 0), {Cx(0.0)});
  REQUIRE(k0.gram.rows() == 1);
  REQUIRE(k0.gram(0, 0).real() == Catch::Approx(kPi).epsilon(1e-10));
  REQUIRE(k0.chartInner(0, 0).real() == Catch::Approx(kPi / 2).epsilon(1e-10));
  REQUIRE(k0.chartOuter(0, 0).real() == Catch::Approx(kPi / 2).epsilon(1e-10));

  GramResult k1 = gramAt(FibrationModel(flat, 1), {Cx(0.2, -0.1)});
  REQUIRE(k1.gram(0, 0).real() == Catch::Approx(kPi / 2).epsilon(1e-10));
  REQUIRE(k1.gram(1, 1).real() == Catch::Approx(kPi / 2).epsilon(1e-10));
  REQUIRE(std::abs(k1.gram(0, 1)) < 1e-12);
  REQUIRE(k1.chartInner(0, 0).real() == Catch::Approx(3.0 * kPi / 8).epsilon(1e-10));
  REQUIRE(k1.chartOuter(0, 0).real() == Catch::Approx(kPi / 8).epsilon(1e-10));

  GramResult k2 = gramAt(FibrationModel(flat, 2), {Cx(0.0)});
  REQUIRE(k2.gram(0, 0).real() == Catch::Approx(kPi / 3).epsilon(1e-10));
  REQUIRE(k2.gram(1, 1).real() == Catch::Approx(kPi / 6).epsilon(1e-10));
  REQUIRE(k2.gram(2, 2).real() == Catch::Approx(kPi / 3).epsilon(1e-10));
}

TEST_CASE("Gram agrees with the radial adaptive oracle") {
  // trivial metric
  for (int k : {0, 1}) {
    GramResult g = gramAt(FibrationModel(makeFlat(2, 1), k), {Cx(0.0)});
    for (int a = 0; a <= k; ++a)
      REQUIRE(g.gram(a, a).real() ==
              Catch::Approx(radialOracle(1.0, 1.0, k, a)).epsilon(1e-8));
  }
  // a genuinely varying split metric away from the origin
  double u = 1.0 + 0.4 * 0.4;
  double h1 = std::pow(u, -2.0), h2 = std::pow(u, -1.0);
  for (int k : {0, 1, 2}) {
    GramResult g = gramAt(FibrationModel(makeSplit(2, 1), k), {Cx(0.4)});
    for (int a = 0; a <= k; ++a) {
      REQUIRE(g.gram(a, a).real() ==
              Catch::Approx(radialOracle(h1, h2, k, a)).epsilon(1e-8));
      for (int b = 0; b <= k; ++b)
        if (b != a) REQUIRE(std::abs(g.gram(a, b)) < 1e-12);
    }
  }
}

TEST_CASE("split k = 0 Gram has the closed form") {
  for (auto [a, b] : {std::pair{1, 1}, {2, 1}, {2, -1}}) {
    FibrationModel mod(makeSplit(a, b), 0);
    for (Cx t : {Cx(0.0), Cx(0.3, 0.2)}) {
      double x = std::norm(t);
      double expect = kPi * std::pow(1.0 + x, -(a + b));
      GramResult g = gramAt(mod, {t});
      REQUIRE(g.gram(0, 0).real() == Catch::Approx(expect).epsilon(1e-8));
    }
  }
}

TEST_CASE("node doubling and chart splitting do not move the Gram") {
  FibrationModel mod(makeSplit(2, 1), 1);
  std::vector<Cx> t = {Cx(0.3, -0.2)};
  GramResult base = gramAt(mod, t);
  REQUIRE(base.relError < 1e-8);

  GramOptions dense;
  dense.radialNodes = 128;
  dense.angularNodes = 128;
  GramResult fine = gramAt(mod, t, dense);
  REQUIRE((base.gram - fine.gram).norm() < 1e-10 * fine.gram.norm());

  for (double glue : {0.7, 1.4}) {
    GramOptions opt;
    opt.glueRadius = glue;
    GramResult moved = gramAt(mod, t, opt);
    REQUIRE((base.gram - moved.gram).norm() < 1e-9 * base.gram.norm());
  }
}

TEST_CASE("Gram off the split family stays Hermitian positive definite") {
  FibrationModel mod(makePerturbedSplit(2, 1, 0.05, 4), 1);
  GramResult g = gramAt(mod, {Cx(0.25, 0.35)});
  REQUIRE(isPosDef(HermMatrix(g.gram)));
  REQUIRE(g.relError < 1e-8);
}

TEST_CASE("deterministic evaluation") {
  FibrationModel mod(makeSplit(2, 1), 1);
  GramResult a = gramAt(mod, {Cx(0.1, 0.2)});
  GramResult b = gramAt(mod, {Cx(0.1, 0.2)});
  REQUIRE(a.gram == b.gram);
  CurvatureV ca = curvatureV(mod, {Cx(0.1, 0.2)});
  CurvatureV cb = curvatureV(mod, {Cx(0.1, 0.2)});
  REQUIRE(ca.data.theta[0] == cb.data.theta[0]);
}

TEST_CASE("determinant twist curvature equals the degree sum") {
  for (auto [a, b] : {std::pair{1, 1}, {2, 1}}) {
    FibrationModel mod(makeSplit(a, b), 0);
    for (Cx t : {Cx(0.0), Cx(0.3)}) {
      CurvatureV cv = curvatureV(mod, {t});
      double x = std::norm(t);
      double expect = (a + b) / ((1.0 + x) * (1.0 + x));
      REQUIRE(cv.data.theta[0](0, 0).real() == Catch::Approx(expect).margin(1e-3));
      REQUIRE(cv.residual < 1e-2);
      REQUIRE(cv.gramError < 1e-8);
    }
  }
}

TEST_CASE("flat family has exactly zero curvature") {
  CurvatureV cv = curvatureV(FibrationModel(makeFlat(2, 1), 1), {Cx(0.1)});
  REQUIRE(cv.data.theta[0].norm() < 1e-12);
}

TEST_CASE("plain symmetric power of degree zero is the trivial bundle") {
  // S^0 E = O: the determinant twist in the weight cancels the Gram exactly
  FibrationModel mod(makeSplit(2, 1), 0, true);
  GramResult g0 = gramAt(mod, {Cx(0.0)});
  GramResult g1 = gramAt(mod, {Cx(0.45, -0.3)});
  REQUIRE(g0.gram(0, 0).real() == Catch::Approx(kPi).epsilon(1e-8));
  REQUIRE(g1.gram(0, 0).real() == Catch::Approx(kPi).epsilon(1e-8));
  CurvatureV cv = curvatureV(mod, {Cx(0.2)});
  REQUIRE(std::abs(cv.data.theta[0](0, 0)) < 1e-6);
}

TEST_CASE("model validation") {
  REQUIRE_THROWS_AS(FibrationModel(makeFlat(3, 1), 0), DirectImageError);
  REQUIRE_THROWS_AS(FibrationModel(makeFlat(2, 1), -1), DirectImageError);
  REQUIRE_THROWS_AS(FibrationModel(makePoint(2), 0), DirectImageError);
  GramOptions opt;
  opt.radialNodes = 4;
  REQUIRE_THROWS_AS(gramAt(FibrationModel(makeFlat(2, 1), 0), {Cx(0.0)}, opt),
                    DirectImageError);
}

TEST_CASE("verifyTheorem passes on an ample balanced split") {
  FibrationModel mod(makeSplit(1, 1), 1);
  TheoremReport rep = verifyTheorem(mod, {Cx(0.0)});
  REQUIRE(rep.fiberMargin > 0.5);
  REQUIRE(rep.hypothesisMargin > 0.5);
  REQUIRE(rep.gated);
  // E tensor det E = O(3) + O(3): uniform margin 3 at the origin
  REQUIRE(rep.conclusionMargin == Catch::Approx(3.0).margin(1e-3));
  REQUIRE(rep.implicationHolds);
  REQUIRE(rep.pencilShiftRel < 0.01);
  REQUIRE(std::abs(rep.marginFine - rep.conclusionMargin) < 0.01 * rep.conclusionMargin);
}

TEST_CASE("verifyTheorem is honest about a mixed-split hypothesis") {
  FibrationModel mod(makeSplit(2, -1), 0);
  TheoremReport rep = verifyTheorem(mod, {Cx(0.0)});
  REQUIRE(rep.hypothesisMargin < 0.0);
  REQUIRE_FALSE(rep.gated);
  // det E = O(1) is still positive; the implication is vacuous here
  REQUIRE(rep.conclusionMargin == Catch::Approx(1.0).margin(1e-3));
  REQUIRE(rep.implicationHolds);
}

TEST_CASE("verifyTheorem can carry a negative conclusion") {
  FibrationModel mod(makeSplit(-1, -1), 0);
  TheoremReport rep = verifyTheorem(mod, {Cx(0.0)});
  REQUIRE(rep.hypothesisMargin < 0.0);
  REQUIRE_FALSE(rep.gated);
  REQUIRE(rep.conclusionMargin == Catch::Approx(-2.0).margin(1e-3));
  REQUIRE(rep.implicationHolds);
}

TEST_CASE("plain symmetric power keeps a positive conclusion on an ample split") {
  FibrationModel mod(makeSplit(2, 1), 1, true);
  TheoremReport rep = verifyTheorem(mod, {Cx(0.0)});
  // S^1 E = O(2) + O(1): uniform margin 1
  REQUIRE(rep.conclusionMargin == Catch::Approx(1.0).margin(1e-3));
  REQUIRE(rep.implicationHolds);
}
