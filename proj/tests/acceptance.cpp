// Acceptance gate: ten end-to-end criteria with stated tolerances and time
// budgets, one PASS/FAIL line each. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rcpos/catalog.hpp"
#include "rcpos/config.hpp"
#include "rcpos/directimage.hpp"
#include "rcpos/fibration.hpp"
#include "rcpos/positivity.hpp"
#include "rcpos/runner.hpp"
#include "rcpos/sampling.hpp"

using namespace rcpos;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

VecC randomVec(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  VecC v(d);
  for (int q = 0; q < d; ++q) v[q] = Cx(g(rng), g(rng));
  return v;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

// ---- criterion 1: horizontal form vs bordered determinants --------------------------

Outcome schurVsBordered() {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    int m = 1 + t % 3, n = 1 + (t / 3) % 3;
    FibrationJet j = FibrationJet::random(m, n, 2100 + static_cast<std::uint64_t>(t));
    SplitCurvature sc = splitCurvature(j);
    Cx detA = j.fiberFiber.determinant();
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        Cx ratio = borderedDet(j, a, b) / detA;
        worst = std::max(worst,
                         std::abs(ratio - sc.G(a, b)) / std::max(1.0, std::abs(ratio)));
      }
  }
  return {worst <= 1e-10, fmt("100 jets, max rel dev %.2e (tol 1e-10)", worst)};
}

// ---- criterion 2: closed-form lift infimum and the completed square ------------------

Outcome liftInfimum() {
  std::mt19937_64 rng(22);
  double worstLift = 0.0, worstSquare = 0.0;
  for (int t = 0; t < 100; ++t) {
    int m = 1 + t % 3, n = 1 + (t / 3) % 3;
    FibrationJet j = FibrationJet::random(m, n, 2200 + static_cast<std::uint64_t>(t));
    VecC v = randomVec(m, rng);
    LiftMinimum lm = minOverLifts(j, v);
    worstLift = std::max(worstLift,
                         std::abs(lm.numeric - lm.value) / std::max(1.0, std::abs(lm.value)));
    CompletingSquare cs = completingSquare(j, randomVec(n, rng));
    worstSquare = std::max(worstSquare, std::abs(cs.theta - cs.schur - cs.normSq) /
                                            std::max(1.0, std::abs(cs.theta)));
  }
  bool pass = worstLift <= 1e-6 && worstSquare <= 1e-10;
  return {pass, fmt("100 jets, lift dev %.2e (tol 1e-6), square dev %.2e (tol 1e-10)",
                    worstLift, worstSquare)};
}

// ---- criterion 3: wedge coefficient, formula vs exterior algebra ---------------------

Outcome wedgePaths() {
  std::mt19937_64 rng(23);
  double worst = 0.0;
  const std::pair<int, int> shapes[] = {{1, 1}, {2, 1}, {1, 2}, {2, 2}};
  for (auto [m, n] : shapes)
    for (int t = 0; t < 50; ++t) {
      FibrationJet j = FibrationJet::random(
          m, n, 2300 + static_cast<std::uint64_t>(100 * m + 10 * n + t), false);
      MatC b(m, m);
      for (int r = 0; r < m; ++r) b.row(r) = randomVec(m, rng).transpose();
      HermMatrix beta(MatC(b * b.adjoint() + 0.3 * MatC::Identity(m, m)));
      WedgeResult w = wedgeFormula(j, beta);
      if (!w.bruteAvailable) return {false, "brute-force path unavailable"};
      worst = std::max(worst,
                       std::abs(w.formula - w.bruteForce) / std::max(1.0, std::abs(w.formula)));
    }
  return {worst <= 1e-9, fmt("50 jets x 4 shapes, max rel dev %.2e (tol 1e-9)", worst)};
}

// ---- criterion 4: spectral clamp route on constructed families -----------------------

Outcome spectralClamp() {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> pos(0.5, 2.0), neg(-2.0, -0.5);
  double worstGap = std::numeric_limits<double>::infinity();
  for (int k : {1, 2}) {
    int m = 3, n = 2;
    std::vector<FibrationJet> jets;
    for (int s = 0; s < 8; ++s) {
      MatC g = MatC::Zero(m, m);
      for (int q = 0; q < m; ++q) g(q, q) = q < k ? pos(rng) : neg(rng);
      MatC f(n, n);
      for (int r = 0; r < n; ++r) f.row(r) = randomVec(n, rng).transpose();
      MatC fiber = f * f.adjoint() + 0.3 * MatC::Identity(n, n);
      MatC cross(m, n);
      for (int a = 0; a < m; ++a) cross.row(a) = randomVec(n, rng).transpose();
      FibrationJet j;
      j.m = m;
      j.n = n;
      j.fiberFiber = fiber;
      j.baseFiber = cross;
      j.baseBase = g + cross * fiber.llt().solve(cross.adjoint());
      jets.push_back(std::move(j));
    }
    Lemma41Report rep = lemma41Check(jets, k, HermMatrix(MatC::Identity(m, m)));
    if (!(rep.hypothesisOk && rep.condA && rep.condB && rep.condC))
      return {false, "a clamp-route condition failed for k = " + std::to_string(k)};
    worstGap = std::min(worstGap, rep.minSubsetSumOverall - rep.eps * (1.0 - 1e-6));
  }
  return {worstGap >= 0.0,
          fmt("k in {1,2}, min subset-sum clears eps(1 - 1e-6) by %.2e", worstGap)};
}

// ---- criterion 5: two-sided square identity ------------------------------------------

Outcome twoSidedIdentity() {
  std::mt19937_64 rng(25);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    int n = 1 + t % 3;
    MatC b(n, n);
    for (int r = 0; r < n; ++r) b.row(r) = randomVec(n, rng).transpose();
    HermMatrix a(MatC(b * b.adjoint() + 0.2 * MatC::Identity(n, n)));
    VecC phi1 = randomVec(n, rng), b1 = randomVec(n, rng);
    std::normal_distribution<double> g;
    Identity410 r = identity410(a, phi1, Cx(g(rng), g(rng)), b1, g(rng));
    worst = std::max(worst, std::abs(r.lhs - r.rhs) / std::max(1.0, std::abs(r.lhs)));
  }
  return {worst <= 1e-10, fmt("100 instances, max rel dev %.2e (tol 1e-10)", worst)};
}

// ---- criterion 6: curvature engine vs the closed Fubini-Study form --------------------

Outcome curvatureOracle() {
  LineBundle lb = makeFubiniStudyLine(1);
  BundleMetric asBundle(1, 1, {expFn(-lb.jet.phi())});
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> d(-0.8, 0.8);
  double worstLine = 0.0, worstDual = 0.0;
  for (int s = 0; s < 50; ++s) {
    Cx z(d(rng), d(rng));
    Point p = conjugatePoint({z});
    double expect = 1.0 / std::pow(1.0 + std::norm(z), 2.0);
    double line = curvatureLine(lb, p).mat()(0, 0).real();
    worstLine = std::max(worstLine, std::abs(line - expect));
    BundleCurvature c = curvatureBundle(asBundle, p);
    worstDual = std::max(worstDual, std::abs(c.at(0, 0)(0, 0) - Cx(line)));
  }
  bool pass = worstLine <= 1e-12 && worstDual <= 1e-12;
  return {pass, fmt("50 points, line dev %.2e, dual-route dev %.2e (tol 1e-12)", worstLine,
                    worstDual)};
}

// ---- criterion 7: direct-image Gram vs radial quadrature, degree sum ------------------

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

double radialOracle(int k, int a) {
  // trivial metric: q = 1 + rho^2 on both charts
  auto inner = [&](double rho) {
    double q = 1.0 + rho * rho, f = 1.0;
    for (int p = 0; p < k + 2; ++p) f /= q;
    return std::pow(rho, 2 * a + 1) * f;
  };
  auto outer = [&](double rho) {
    double q = rho * rho + 1.0, f = 1.0;
    for (int p = 0; p < k + 2; ++p) f /= q;
    return std::pow(rho, 2 * (k - a) + 1) * f;
  };
  double tol = 1e-12;
  return 2.0 * std::numbers::pi *
         (adaptiveSimpson(inner, 0.0, 1.0, tol, simpsonThird(inner, 0.0, 1.0), 40) +
          adaptiveSimpson(outer, 0.0, 1.0, tol, simpsonThird(outer, 0.0, 1.0), 40));
}

Outcome directImageOracle() {
  double worstGram = 0.0;
  for (int k : {0, 1}) {
    GramResult g = gramAt(FibrationModel(makeFlat(2, 1), k), {Cx(0.0)});
    for (int a = 0; a <= k; ++a) {
      double oracle = radialOracle(k, a);
      worstGram = std::max(worstGram, std::abs(g.gram(a, a).real() - oracle) / oracle);
    }
  }
  double worstDegree = 0.0;
  for (auto [a, b] : {std::pair{1, 1}, {2, 1}, {2, -1}}) {
    CurvatureV cv = curvatureV(FibrationModel(makeSplit(a, b), 0), {Cx(0.0)});
    worstDegree = std::max(worstDegree, std::abs(cv.data.theta[0](0, 0).real() - (a + b)));
  }
  bool pass = worstGram <= 1e-8 && worstDegree <= 1e-3;
  return {pass, fmt("gram dev %.2e (tol 1e-8), degree-sum dev %.2e (tol 1e-3)", worstGram,
                    worstDegree)};
}

// ---- criterion 8: gated hypothesis forces a positive conclusion ------------------------

Outcome theoremSweep() {
  std::vector<BundleMetric> metrics;
  metrics.push_back(makeSplit(1, 1));
  metrics.push_back(makeSplit(1, 2));
  for (std::uint64_t s = 1; s <= 5; ++s) metrics.push_back(makePerturbedSplit(1, 2, 0.05, s));

  std::mt19937_64 rng(28);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  int gatedCount = 0, total = 0;
  double worstShift = 0.0, minGatedConclusion = std::numeric_limits<double>::infinity();
  for (const BundleMetric& bm : metrics)
    for (int k : {0, 1, 2}) {
      FibrationModel mod(bm, k);
      for (int s = 0; s < 5; ++s) {
        std::vector<Cx> t0 = {Cx(d(rng), d(rng))};
        TheoremReport rep = verifyTheorem(mod, t0);
        ++total;
        worstShift = std::max(worstShift, rep.pencilShiftRel);
        if (rep.gated) {
          ++gatedCount;
          minGatedConclusion = std::min(minGatedConclusion, rep.conclusionMargin);
          if (!(rep.conclusionMargin > 0.0))
            return {false, "gated case with nonpositive conclusion margin"};
        }
      }
    }
  bool pass = gatedCount > 0 && worstShift < 0.01;
  return {pass, fmt("105 cases, %g gated, min gated conclusion %.3f", double(gatedCount),
                    minGatedConclusion) +
                    fmt(", max eigenvalue shift on halving %.2e (tol 1e-2)", worstShift)};
}

// ---- criterion 9: classifier minimax sanity --------------------------------------------

Outcome minimaxSanity() {
  for (std::uint64_t s = 0; s < 100; ++s) {
    int m = 1 + static_cast<int>(s % 3), r = 1 + static_cast<int>(s % 4);
    BundleCurvature c = randomCurvatureData(m, r, 2900 + s);
    if (uniformMarginData(c).margin > rcMarginData(c).margin + 1e-12)
      return {false, "uniform margin exceeded rc margin on dataset " + std::to_string(s)};
  }

  std::mt19937_64 rng(29);
  int flips = 0, used = 0;
  for (int trial = 0; trial < 50; ++trial) {
    BundleCurvature c = randomCurvatureData(2, 2, 3000 + static_cast<std::uint64_t>(trial));
    DataMargin rc1 = rcMarginData(c), u1 = uniformMarginData(c);
    if (std::abs(rc1.margin) < 1e-8 || std::abs(u1.margin) < 1e-8) continue;
    MatC a(2, 2);
    for (int r = 0; r < 2; ++r) a.row(r) = randomVec(2, rng).transpose();
    MatC l = a / std::max(1.0, a.operatorNorm()) + 2.0 * MatC::Identity(2, 2);
    BundleCurvature tc = c;
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        MatC sum = MatC::Zero(2, 2);
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) sum += l(p, j) * std::conj(l(q, k)) * c.at(p, q);
        tc.theta[static_cast<std::size_t>(j) * 2 + k] = sum;
      }
    ++used;
    if (rcMarginData(tc).margin * rc1.margin <= 0.0) ++flips;
    if (uniformMarginData(tc).margin * u1.margin <= 0.0) ++flips;
  }
  if (flips > 0) return {false, fmt("%g sign flips under base changes", double(flips))};

  BundleCurvature c = randomCurvatureData(2, 2, 77);
  DataMargin rc = rcMarginData(c);
  MatC hinvHalf = c.H.llt().solve(sqrtPsd(HermMatrix(c.H)));
  double gridMin = std::numeric_limits<double>::infinity();
  for (const VecC& ut : unitSphereGrid(2, 20000, 555))
    gridMin = std::min(gridMin, rcValueAt(c, hinvHalf * ut));
  bool oracleOk = rc.margin <= gridMin + 1e-12 &&
                  std::abs(rc.margin - gridMin) < 1e-3 * std::max(1.0, std::abs(gridMin));
  return {oracleOk, fmt("100 datasets ordered, %g usable base changes sign-stable, ",
                        double(used)) +
                        fmt("grid oracle gap %.2e (tol 1e-3)", std::abs(rc.margin - gridMin))};
}

// ---- criterion 10: determinism of report bodies ----------------------------------------

Outcome determinism() {
  std::vector<RunConfig> cfgs;
  {
    RunConfig c;
    c.command = "classify";
    c.example = "perturbed-split";
    c.pointCount = 2;
    c.seed = 31;
    cfgs.push_back(c);
  }
  {
    RunConfig c;
    c.command = "identities";
    c.trials = 20;
    c.seed = 32;
    cfgs.push_back(c);
  }
  {
    RunConfig c;
    c.command = "fibration-check";
    c.trials = 10;
    c.k = 1;
    c.seed = 33;
    cfgs.push_back(c);
  }
  {
    RunConfig c;
    c.command = "direct-image";
    c.example = "split";
    c.params = {{"a", 1.0}, {"b", 1.0}};
    c.k = 1;
    c.pointCount = 1;
    c.seed = 34;
    cfgs.push_back(c);
  }
  {
    RunConfig c;
    c.command = "examples";
    cfgs.push_back(c);
  }
  for (const RunConfig& c : cfgs) {
    std::string a = reportBodyText(run(c));
    std::string b = reportBodyText(run(c));
    if (a != b) return {false, "body bytes differ for '" + c.command + "'"};
  }
  return {true, "all five commands byte-identical on rerun"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budgetSec;
    Outcome (*fn)();
  };
  const Criterion criteria[] = {
      {"schur-vs-bordered-determinant", 1.0, &schurVsBordered},
      {"lift-infimum-and-completed-square", 10.0, &liftInfimum},
      {"wedge-formula-vs-exterior-algebra", 30.0, &wedgePaths},
      {"spectral-clamp-route", 5.0, &spectralClamp},
      {"two-sided-square-identity", 1.0, &twoSidedIdentity},
      {"curvature-engine-oracle", 30.0, &curvatureOracle},
      {"direct-image-oracle", 60.0, &directImageOracle},
      {"uniform-positivity-of-twisted-powers", 600.0, &theoremSweep},
      {"classifier-minimax-sanity", 60.0, &minimaxSanity},
      {"report-determinism", 60.0, &determinism},
  };

  int failures = 0;
  int idx = 0;
  for (const auto& c : criteria) {
    ++idx;
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool timeOk = sec <= c.budgetSec;
    bool pass = o.pass && timeOk;
    std::printf("C%-2d %s %s: %s [%.2f s, budget %.0f s]\n", idx, pass ? "PASS" : "FAIL",
                c.name, o.detail.c_str(), sec, c.budgetSec);
    if (!pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failing\n", failures);
  else std::printf("all criteria pass\n");
  return failures;
}
