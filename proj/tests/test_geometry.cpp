#include <catch2/catch_amalgamated.hpp>

#include "rcpos/catalog.hpp"
#include "rcpos/geometry.hpp"

#include <random>

using namespace rcpos;

namespace {

Point basePoint(Cx t) { return conjugatePoint({t}); }

Point mixedPoint(std::vector<Cx> t, std::vector<Cx> z) {
  return conjugatePoint(std::move(t), std::move(z));
}

}  // namespace

TEST_CASE("WeightJet caches canonical derivative words") {
  Dims d{1, 1, {}};
  WeightJet jet(parse("log(1 + t1*tb1 + z1*zb1)", d), d);
  const Expr& a = jet.deriv({Var::base(1), Var::baseBar(1)});
  const Expr& b = jet.deriv({Var::baseBar(1), Var::base(1)});  // same word, sorted
  CHECK(&a == &b);
  const Expr& again = jet.deriv({Var::base(1), Var::baseBar(1)});
  CHECK(&a == &again);
}

TEST_CASE("Fubini-Study line curvature") {
  SECTION("identity at the origin for m = 1, 2, 3") {
    for (int m : {1, 2, 3}) {
      LineBundle fs = makeFubiniStudyLine(m);
      Point p = conjugatePoint(std::vector<Cx>(m, Cx(0.0)));
      HermMatrix th = curvatureLine(fs, p);
      CHECK((th.mat() - MatC::Identity(m, m)).norm() < 1e-14);
    }
  }

  SECTION("closed form (1+|t|^2)^{-2} away from the origin, m = 1") {
    LineBundle fs = makeFubiniStudyLine(1);
    for (Cx t : {Cx(0.3, 0.0), Cx(0.5, -0.2), Cx(0.0, 0.9)}) {
      double x = std::norm(t);
      HermMatrix th = curvatureLine(fs, basePoint(t));
      CHECK(std::abs(th(0, 0) - Cx(1.0 / ((1.0 + x) * (1.0 + x)))) < 1e-14);
    }
  }

  SECTION("m = 2 closed form: (1+|t|^2)delta - tbar_j t_k, all over (1+|t|^2)^2") {
    LineBundle fs = makeFubiniStudyLine(2);
    Cx t1(0.4, 0.1), t2(-0.2, 0.3);
    Point p = conjugatePoint({t1, t2});
    double s = 1.0 + std::norm(t1) + std::norm(t2);
    MatC want(2, 2);
    want << s - std::norm(t1), -std::conj(t1) * t2, -std::conj(t2) * t1, s - std::norm(t2);
    want /= s * s;
    CHECK((curvatureLine(fs, p).mat() - want).norm() < 1e-13);
  }
}

TEST_CASE("split bundle curvature has the closed form diag(a,b)/(1+|t|^2)^2") {
  for (auto [a, b] : {std::pair{2, -1}, {1, 1}, {3, 0}}) {
    BundleMetric e = makeSplit(a, b);
    for (Cx t : {Cx(0.0), Cx(0.4, 0.3), Cx(-0.7, 0.1)}) {
      BundleCurvature c = curvatureBundle(e, basePoint(t));
      double f = 1.0 / std::pow(1.0 + std::norm(t), 2);
      MatC want = MatC::Zero(2, 2);
      want(0, 0) = a * f;
      want(1, 1) = b * f;
      CHECK((c.at(0, 0) - want).norm() < 1e-12);
    }
  }
}

TEST_CASE("rank-1 bundle curvature agrees with the line route") {
  // H = (1+|t|^2)^{-1} = e^{-phi} with phi the Fubini-Study weight
  Dims d{1, 0, {}};
  BundleMetric e(1, 1, {parse("(1 + t1*tb1)^-1", d)});
  LineBundle fs = makeFubiniStudyLine(1);
  for (Cx t : {Cx(0.0), Cx(0.5, 0.5), Cx(-0.3, 0.8)}) {
    Point p = basePoint(t);
    Cx viaBundle = curvatureBundle(e, p).at(0, 0)(0, 0);
    Cx viaLine = curvatureLine(fs, p)(0, 0);
    CHECK(std::abs(viaBundle - viaLine) < 1e-13);
  }
}

TEST_CASE("pairing matrices are consistent") {
  BundleMetric e = makePerturbedSplit(2, -1, 0.3, 9);
  BundleCurvature c = curvatureBundle(e, basePoint(Cx(0.2, -0.4)));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int s = 0; s < 20; ++s) {
    VecC u(2), v(1);
    u << Cx(g(rng), g(rng)), Cx(g(rng), g(rng));
    v << Cx(g(rng), g(rng));
    HermMatrix mu = mMatrix(c, u);
    HermMatrix kv = kMatrix(c, v);
    // sum_{jk} M(u)_{jk} v_j vbar_k == u* K(v) u
    Cx lhs(0.0);
    for (int j = 0; j < 1; ++j)
      for (int k = 0; k < 1; ++k) lhs += mu(j, k) * v[j] * std::conj(v[k]);
    Cx rhs = (u.adjoint() * kv.mat() * u)(0, 0);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("flat and point bundles have zero curvature") {
  BundleMetric flat = makeFlat(3, 2);
  BundleCurvature c = curvatureBundle(flat, conjugatePoint({Cx(0.1), Cx(0.7, 0.2)}));
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) CHECK(c.at(j, k).norm() == 0.0);

  BundleMetric pt = makePoint(2);
  BundleCurvature cp = curvatureBundle(pt, conjugatePoint({}));
  CHECK(cp.m == 0);
  CHECK(cp.theta.empty());
}

TEST_CASE("metric validation") {
  CHECK_NOTHROW(validateMetric(makeSplit(2, -1)));
  CHECK_NOTHROW(validateMetric(makePerturbedSplit(2, -1, 0.05, 1)));

  // conjugate-asymmetric entries are rejected at construction
  Dims d{1, 0, {}};
  std::vector<Expr> bad = {parse("1", d), parse("t1", d), parse("t1", d), parse("1", d)};
  CHECK_THROWS_AS(BundleMetric(1, 2, std::move(bad)), GeometryError);
}

TEST_CASE("induced weight on P(E^*)") {
  SECTION("split rank 2: chart-0 weight is log((1+x)^a + |z|^2 (1+x)^b)") {
    BundleMetric e = makeSplit(2, -1);
    InducedWeightFamily fam = inducedLineWeight(e);
    REQUIRE(fam.charts.size() == 2);
    Cx t(0.3, -0.2), z(0.7, 0.4);
    double x = std::norm(t);
    Point p = mixedPoint({t}, {z});
    double want = std::log(std::pow(1 + x, 2) + std::norm(z) * std::pow(1 + x, -1));
    CHECK(std::abs(eval(fam.charts[0].jet.phi(), p) - Cx(want)) < 1e-12);
    // chart 1 swaps the roles: zeta = (z, 1)
    double want1 = std::log(std::norm(z) * std::pow(1 + x, 2) + std::pow(1 + x, -1));
    CHECK(std::abs(eval(fam.charts[1].jet.phi(), p) - Cx(want1)) < 1e-12);
  }

  SECTION("family validation: cocycle and reality") {
    CHECK_NOTHROW(validateInducedFamily(inducedLineWeight(makeSplit(2, -1))));
    CHECK_NOTHROW(validateInducedFamily(inducedLineWeight(makePerturbedSplit(2, -1, 0.1, 4))));
  }

  SECTION("flat bundle induces the fiberwise Fubini-Study weight") {
    BundleMetric e = makeFlat(2, 1);
    InducedWeightFamily fam = inducedLineWeight(e);
    Point p = mixedPoint({Cx(0.5, 0.1)}, {Cx(0.3, -0.6)});
    HermMatrix h = hessian(fam.charts[0].jet, p);
    // base block and mixed block vanish; fiber block is FS in z
    CHECK(std::abs(h(0, 0)) < 1e-13);
    CHECK(std::abs(h(0, 1)) < 1e-13);
    double x = std::norm(Cx(0.3, -0.6));
    CHECK(std::abs(h(1, 1) - Cx(1.0 / ((1 + x) * (1 + x)))) < 1e-13);
  }

  SECTION("rank 3 goes through the symbolic adjugate") {
    std::vector<Expr> h(9, Expr(0.0));
    Dims d{1, 0, {}};
    h[0] = parse("(1 + t1*tb1)^-2", d);
    h[4] = parse("(1 + t1*tb1)^-1", d);
    h[8] = parse("1 + t1*tb1", d);
    BundleMetric e(1, 3, std::move(h));
    InducedWeightFamily fam = inducedLineWeight(e);
    REQUIRE(fam.charts.size() == 3);
    CHECK_NOTHROW(validateInducedFamily(fam, 60));

    // diagonal metric: chart-0 weight is log(sum_a |zeta_a|^2 / H_aa)
    Cx t(0.2, 0.5), z1(0.4, 0.0), z2(-0.1, 0.3);
    double x = std::norm(t);
    Point p = mixedPoint({t}, {z1, z2});
    double want = std::log(std::pow(1 + x, 2) + std::norm(z1) * (1 + x) +
                           std::norm(z2) / (1 + x));
    CHECK(std::abs(eval(fam.charts[0].jet.phi(), p) - Cx(want)) < 1e-12);
  }

  SECTION("rank 4 is rejected with a clear message") {
    CHECK_THROWS_AS(inducedLineWeight(makeFlat(4, 1)), GeometryError);
  }
}

TEST_CASE("catalog registry") {
  CHECK(findEntry("split").kind == EntryKind::Bundle);
  CHECK(findEntry("fubini-study-line").kind == EntryKind::Line);
  CHECK_THROWS_AS(findEntry("nope"), CatalogError);

  const CatalogEntry& split = findEntry("split");
  auto ps = entryParams(split, {{"a", 3}});
  CHECK(ps.at("a") == 3);
  CHECK(ps.at("b") == -1);
  CHECK_THROWS_AS(entryParams(split, {{"q", 1}}), CatalogError);

  BundleMetric e = split.bundle(ps);
  CHECK(e.rank() == 2);

  // every bundle entry instantiates at defaults and validates
  for (const auto& entry : catalogEntries()) {
    if (entry.kind != EntryKind::Bundle) continue;
    BundleMetric bm = entry.bundle(entry.defaults);
    CHECK_NOTHROW(validateMetric(bm, 50));
  }
}
