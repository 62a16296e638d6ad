#pragma once

// Pointwise fibration machinery on Hessian "jets": the horizontal/vertical
// curvature split, completing-the-square over lifts, bordered determinants,
// the wedge identity with a brute-force exterior-algebra cross path, the
// smooth-clamp spectral construction, and the two-sided quadratic identity
// used in the direct-image curvature estimate.

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rcpos/geometry.hpp"
#include "rcpos/linalg.hpp"
#include "rcpos/sampling.hpp"

namespace rcpos {

struct FibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Second-order data of a weight at one point of a fibration chart:
/// blocks of the mixed Hessian in coordinates (t_1..t_m, z_1..z_n).
struct FibrationJet {
  int m = 0, n = 0;
  MatC baseBase;    // (phi_{i jbar})      m x m
  MatC baseFiber;   // (phi_{i mubar})     m x n
  MatC fiberFiber;  // (phi_{la mubar})    n x n

  MatC assemble() const {
    MatC h(m + n, m + n);
    h.topLeftCorner(m, m) = baseBase;
    h.topRightCorner(m, n) = baseFiber;
    h.bottomLeftCorner(n, m) = baseFiber.adjoint();
    h.bottomRightCorner(n, n) = fiberFiber;
    return h;
  }

  /// Validated Hermitian assembly (checks the diagonal blocks).
  HermMatrix assembleChecked() const { return HermMatrix(assemble()); }

  static FibrationJet fromWeight(const WeightJet& jet, const Point& p) {
    const Dims& d = jet.dims();
    HermMatrix h = hessian(jet, p);
    FibrationJet j;
    j.m = d.m;
    j.n = d.n;
    j.baseBase = h.mat().topLeftCorner(d.m, d.m);
    j.baseFiber = h.mat().topRightCorner(d.m, d.n);
    j.fiberFiber = h.mat().bottomRightCorner(d.n, d.n);
    return j;
  }

  /// Seeded random jet; fiberPd makes the fiber block positive definite.
  static FibrationJet random(int m, int n, std::uint64_t seed, bool fiberPd = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    auto rnd = [&](int rows, int cols) {
      MatC a(rows, cols);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = Cx(g(rng), g(rng));
      return a;
    };
    FibrationJet j;
    j.m = m;
    j.n = n;
    MatC bb = rnd(m, m);
    j.baseBase = 0.5 * (bb + bb.adjoint().eval());
    j.baseFiber = rnd(m, n);
    MatC ff = rnd(n, n);
    if (fiberPd)
      j.fiberFiber = ff * ff.adjoint() + 0.1 * MatC::Identity(n, n);
    else
      j.fiberFiber = 0.5 * (ff + ff.adjoint().eval());
    return j;
  }
};

// --- horizontal / vertical split ------------------------------------------------

struct SplitCurvature {
  MatC G;           // horizontal form, m x m Hermitian
  MatC V;           // the fiber block itself
  MatC liftCoeffs;  // n x m: delta z_la = dz_la + sum_i liftCoeffs(la,i) dt_i
};

/// G_{ij} = phi_{i jbar} - sum phi_{i mubar} phi^{la mubar} phi_{la jbar},
/// computed as the Schur complement of the fiber block.
inline SplitCurvature splitCurvature(const FibrationJet& j) {
  if (j.n == 0) {
    return {j.baseBase, MatC::Zero(0, 0), MatC::Zero(0, j.m)};
  }
  Eigen::LLT<MatC> llt(j.fiberFiber);
  if (llt.info() != Eigen::Success)
    throw FibrationError("splitCurvature: fiber block not positive definite");
  SplitCurvature s;
  s.V = j.fiberFiber;
  s.G = j.m == 0 ? MatC::Zero(0, 0) : schurComplement(j.assemble(), j.n);
  s.liftCoeffs = llt.solve(j.baseFiber.adjoint()).conjugate();
  return s;
}

// --- lifts and completing the square ----------------------------------------------

struct LiftMinimum {
  double value = 0.0;    // v* G v, the closed-form infimum over lifts
  VecC lift;             // minimizing fiber component a
  double numeric = 0.0;  // independent Nelder-Mead minimum
  bool unbounded = false;
};

/// Full Hessian pairing of the lifted tangent (v, a) in the v_j vbar_k
/// convention.
inline double liftPairing(const FibrationJet& j, const VecC& v, const VecC& a) {
  VecC xi(j.m + j.n);
  xi.head(j.m) = v;
  xi.tail(j.n) = a;
  return quadForm(j.assemble(), xi);
}

/// Infimum over lifts a of Theta(v~, v~bar), attained at a = -liftCoeffs v.
/// An indefinite fiber block makes the infimum -infinity (reported, not
/// thrown). The closed form is cross-checked against a direct numerical
/// minimization; disagreement beyond tol throws.
inline LiftMinimum minOverLifts(const FibrationJet& j, const VecC& v,
                                const NelderMeadOptions& nmOpt = {.maxIter = 800},
                                double tol = 1e-6) {
  LiftMinimum out;
  if (j.n == 0) {
    out.value = out.numeric = quadForm(j.baseBase, v);
    out.lift = VecC();
    return out;
  }
  if (minEig(HermMatrix(j.fiberFiber)) <= 0.0) {
    out.unbounded = true;
    out.value = out.numeric = -std::numeric_limits<double>::infinity();
    return out;
  }
  SplitCurvature s = splitCurvature(j);
  out.value = quadForm(s.G, v);
  out.lift = -(s.liftCoeffs * v);

  auto obj = [&](const std::vector<double>& x) {
    VecC a(j.n);
    for (int q = 0; q < j.n; ++q) a[q] = Cx(x[2 * q], x[2 * q + 1]);
    return liftPairing(j, v, a);
  };
  NelderMeadOptions nm = nmOpt;
  nm.initialStep = 0.5;
  NelderMeadResult r = nelderMead(obj, std::vector<double>(2 * static_cast<std::size_t>(j.n), 0.0), nm);
  out.numeric = r.value;
  double scale = std::max(1.0, std::abs(out.value));
  if (std::abs(out.numeric - out.value) > tol * scale)
    throw FibrationError("minOverLifts: numerical minimum disagrees with the closed form");
  return out;
}

struct CompletingSquare {
  double theta = 0.0;   // Theta(v~, v~bar) for v = e_1 and the given lift a
  double schur = 0.0;   // G_{11}
  double normSq = 0.0;  // || sqrt(A^{-1}) phi_1 + sqrt(A) abar ||^2
};

/// Exact decomposition of the pairing at lift a along e_1: the Schur value
/// plus a square norm, so theta = schur + normSq identically.
inline CompletingSquare completingSquare(const FibrationJet& j, const VecC& a) {
  if (j.m < 1) throw FibrationError("completingSquare: needs a base direction");
  CompletingSquare cs;
  VecC e1 = VecC::Zero(j.m);
  e1[0] = Cx(1.0);
  cs.theta = liftPairing(j, e1, a);
  if (j.n == 0) {
    cs.schur = j.baseBase(0, 0).real();
    cs.normSq = 0.0;
    return cs;
  }
  SplitCurvature s = splitCurvature(j);
  cs.schur = s.G(0, 0).real();
  VecC phi1 = j.baseFiber.row(0).adjoint();  // (phi_{la 1bar})_la
  HermMatrix A(j.fiberFiber);
  MatC sqrtA = sqrtPsd(A);
  MatC Ainv = A.mat().llt().solve(MatC::Identity(j.n, j.n));
  MatC sqrtAinv = sqrtPsd(HermMatrix(Ainv));
  VecC w = sqrtAinv * phi1 + sqrtA * a.conjugate();
  cs.normSq = w.squaredNorm();
  return cs;
}

// --- bordered determinant and the wedge identity --------------------------------------

/// det of the (n+1)x(n+1) matrix with corner phi_{t_i tbar_j}, borders
/// phi_{t_i zbar}, phi_{z tbar_j}, and the fiber block.
inline Cx borderedDet(const FibrationJet& j, int i, int jj) {
  if (i < 0 || i >= j.m || jj < 0 || jj >= j.m)
    throw FibrationError("borderedDet: index out of range");
  MatC mm(j.n + 1, j.n + 1);
  mm(0, 0) = j.baseBase(i, jj);
  mm.block(0, 1, 1, j.n) = j.baseFiber.row(i);
  mm.block(1, 0, j.n, 1) = j.baseFiber.row(jj).adjoint();
  mm.bottomRightCorner(j.n, j.n) = j.fiberFiber;
  return mm.determinant();
}

namespace detail {

/// Dense multivector over the exterior algebra on 2N real generators:
/// dx_A -> bit 2A, dxbar_A -> bit 2A+1; coefficients indexed by bitmask
/// relative to ascending-bit order.
struct Multivector {
  int gens = 0;
  std::vector<Cx> coef;  // size 1 << gens
  explicit Multivector(int g) : gens(g), coef(std::size_t(1) << g, Cx(0.0)) {}
};

inline int wedgeSignMasks(unsigned a, unsigned b) {
  // sign of merging ascending list b after ascending list a: for each bit of
  // b, count bits of a above it
  int inv = 0;
  for (unsigned bit = 0; bit < 32; ++bit)
    if (b & (1u << bit)) inv += __builtin_popcount(a >> (bit + 1));
  return (inv % 2 == 0) ? 1 : -1;
}

inline Multivector wedge(const Multivector& x, const Multivector& y) {
  Multivector r(x.gens);
  for (unsigned a = 0; a < x.coef.size(); ++a) {
    if (x.coef[a] == Cx(0.0)) continue;
    for (unsigned b = 0; b < y.coef.size(); ++b) {
      if (y.coef[b] == Cx(0.0) || (a & b)) continue;
      r.coef[a | b] += static_cast<double>(wedgeSignMasks(a, b)) * x.coef[a] * y.coef[b];
    }
  }
  return r;
}

/// The (1,1)-form i * sum coeff_{AB} dx_A wedge dxbar_B over the first
/// `dim` coordinates of an N-coordinate space.
inline Multivector oneOneForm(const MatC& coeff, int nCoords) {
  Multivector mv(2 * nCoords);
  for (int a = 0; a < coeff.rows(); ++a)
    for (int b = 0; b < coeff.cols(); ++b) {
      if (coeff(a, b) == Cx(0.0)) continue;
      unsigned bitA = 1u << (2 * a);
      unsigned bitB = 1u << (2 * b + 1);
      double sign = (2 * a < 2 * b + 1) ? 1.0 : -1.0;  // order dx_A, dxbar_B
      mv.coef[bitA | bitB] += sign * Cx(0.0, 1.0) * coeff(a, b);
    }
  return mv;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace detail

struct WedgeResult {
  double formula = 0.0;     // closed-formula coefficient
  double bruteForce = 0.0;  // exterior-algebra coefficient
  bool bruteAvailable = false;
};

/// Coefficient of Theta^{n+1} wedge beta^{m-1} relative to the reference top
/// form prod_A (i dx_A wedge dxbar_A). Path (i): the closed formula
/// (n+1)!(m-1)! sum beta^{i jbar} det M(i jbar) det(beta). Path (ii): brute
/// force in the exterior algebra, available for m+n <= 4; the two must agree
/// to tol relative.
inline WedgeResult wedgeFormula(const FibrationJet& j, const HermMatrix& beta,
                                double tol = 1e-9) {
  if (beta.rows() != j.m) throw FibrationError("wedgeFormula: beta must be m x m");
  if (!isPosDef(beta)) throw FibrationError("wedgeFormula: beta must be positive definite");
  WedgeResult out;

  MatC dets(j.m, j.m);
  for (int a = 0; a < j.m; ++a)
    for (int b = 0; b < j.m; ++b) dets(a, b) = borderedDet(j, a, b);
  MatC betaInv = beta.mat().inverse();
  Cx det = beta.mat().determinant();
  out.formula = detail::factorial(j.n + 1) * detail::factorial(j.m - 1) *
                ((dets * betaInv).trace() * det).real();

  int N = j.m + j.n;
  if (N > 4) return out;  // formula-only mode
  out.bruteAvailable = true;

  MatC full = j.assemble();
  detail::Multivector theta = detail::oneOneForm(full, N);
  MatC betaFull = MatC::Zero(N, N);
  betaFull.topLeftCorner(j.m, j.m) = beta.mat();
  detail::Multivector betaMv = detail::oneOneForm(betaFull, N);

  detail::Multivector prod = theta;
  for (int q = 1; q < j.n + 1; ++q) prod = detail::wedge(prod, theta);
  for (int q = 0; q < j.m - 1; ++q) prod = detail::wedge(prod, betaMv);

  Cx top = prod.coef[(std::size_t(1) << (2 * N)) - 1];
  Cx iN(1.0);
  for (int q = 0; q < N; ++q) iN *= Cx(0.0, 1.0);
  Cx rel = top / iN;
  if (std::abs(rel.imag()) > 1e-9 * std::max(1.0, std::abs(rel)))
    throw FibrationError("wedgeFormula: brute-force coefficient is not real");
  out.bruteForce = rel.real();

  double scale = std::max({1.0, std::abs(out.formula), std::abs(out.bruteForce)});
  if (std::abs(out.formula - out.bruteForce) > tol * scale)
    throw FibrationError("wedgeFormula: closed formula and brute force disagree");
  return out;
}

// --- smooth clamp and the spectral construction ----------------------------------------

/// C-infinity spectral clamp:
/// psi(x) = x for x >= A, psi(x) = B/eps for x <= 0, psi(x) >= x between,
/// realized as a smoothstep blend. A and B come from sampled pencil spectra.
struct SmoothClamp {
  double A = 0.0, B = 0.0, eps = 0.0;

  double operator()(double x) const {
    auto f = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    double fa = f(x / A);
    double fb = f(1.0 - x / A);
    if (fb == 0.0) return x;            // x >= A: identically x
    if (fa == 0.0) return B / eps;      // x <= 0: identically B/eps
    double s = fa / (fa + fb);
    return s * x + (1.0 - s) * (B / eps);
  }
};

/// Builds the clamp from per-sample pencil spectra (each list is the m
/// eigenvalues of (G, beta0) at one sample): A = inf of the (m-k+1)-th
/// smallest, B = sup of max |gamma_j|, eps = 1/(m-k+1). The eigenvalue-count
/// hypothesis requires A > 0; the four defining invariants are validated on
/// a 1000-point grid.
inline SmoothClamp psiEpsilonBuild(const std::vector<std::vector<double>>& gammaSamples,
                                   int k) {
  if (gammaSamples.empty()) throw FibrationError("psiEpsilonBuild: no samples");
  int m = static_cast<int>(gammaSamples.front().size());
  if (k < 1 || k > m) throw FibrationError("psiEpsilonBuild: k must be in 1..m");
  SmoothClamp psi;
  psi.eps = 1.0 / (m - k + 1);
  psi.A = std::numeric_limits<double>::infinity();
  psi.B = 0.0;
  for (std::size_t s = 0; s < gammaSamples.size(); ++s) {
    std::vector<double> g = gammaSamples[s];
    if (static_cast<int>(g.size()) != m)
      throw FibrationError("psiEpsilonBuild: inconsistent sample sizes");
    std::sort(g.begin(), g.end());
    double kth = g[static_cast<std::size_t>(m - k)];
    if (kth <= 0.0)
      throw FibrationError("psiEpsilonBuild: hypothesis fails at sample " + std::to_string(s) +
                           " ((m-k+1)-th smallest eigenvalue " + std::to_string(kth) + ")");
    psi.A = std::min(psi.A, kth);
    for (double v : g) psi.B = std::max(psi.B, std::abs(v));
  }
  if (!(psi.B > 0.0)) throw FibrationError("psiEpsilonBuild: degenerate spectra (B = 0)");

  // validate the defining invariants on a grid
  double lo = -1.5 * psi.B - 1.0, hi = 1.5 * (psi.A + psi.B) + 1.0;
  for (int q = 0; q < 1000; ++q) {
    double x = lo + (hi - lo) * q / 999.0;
    double y = psi(x);
    if (!(y > 0.0)) throw FibrationError("psiEpsilonBuild: clamp not positive");
    if (x >= psi.A && y != x) throw FibrationError("psiEpsilonBuild: clamp not identity above A");
    if (x <= 0.0 && y != psi.B / psi.eps)
      throw FibrationError("psiEpsilonBuild: clamp not constant below 0");
    if (x >= 0.0 && x <= psi.A && y < x)
      throw FibrationError("psiEpsilonBuild: clamp below identity on [0, A]");
  }
  return psi;
}

/// With the pencil decomposition G w_j = gamma_j beta0 w_j (W beta0-unitary),
/// returns beta = beta0 W diag(psi(gamma)) W* beta0, so the pencil (G, beta)
/// has eigenvalues gamma_j / psi(gamma_j). Positive definite by psi > 0.
inline HermMatrix applySpectral(const HermMatrix& g, const HermMatrix& beta0,
                                const SmoothClamp& psi, VecR* gammaOut = nullptr) {
  EigResult p = pencilEig(g, beta0);
  if (gammaOut) *gammaOut = p.values;
  VecR psis(p.values.size());
  for (Eigen::Index q = 0; q < p.values.size(); ++q) psis[q] = psi(p.values[q]);
  MatC w = p.vectors;
  MatC beta = beta0.mat() * w * psis.asDiagonal() * w.adjoint() * beta0.mat();
  return HermMatrix(beta);
}

// --- eigenvalue counts to a positive reference form, end to end ----------------------

struct Lemma41Sample {
  int posFull = 0;            // positive eigenvalues of the full Hessian
  int posG = 0;               // positive eigenvalues of G
  bool condA = false;         // posFull >= n + k
  bool condB = false;         // posG >= k
  double minSubsetSum = 0.0;  // smallest (m-k+1)-sum of pencil (G, beta) eigenvalues
  double wedgeFormulaValue = 0.0;  // k = 1 and m+n <= 4 only
  double wedgeBruteValue = 0.0;
  bool wedgeChecked = false;
};

struct Lemma41Report {
  int m = 0, n = 0, k = 1;
  double eps = 0.0, Ainf = 0.0, Bsup = 0.0;
  bool hypothesisOk = false;
  int failingSample = -1;
  std::string failure;
  std::vector<Lemma41Sample> samples;
  double minSubsetSumOverall = 0.0;
  bool condA = false, condB = false, condC = false;
  bool wedgeSignAgree = true;
  double betaVariation = 0.0;     // max relative deviation of beta across samples
  bool betaFiberConstant = false;
};

/// Conditions A and B (inertia counts of the full form and of G) at every
/// sample, then the constructive route to condition C: psi_eps from the
/// sampled pencil spectra, beta per sample by the spectral construction, and
/// the minimum (m-k+1)-eigenvalue sum of (G, beta), which the construction
/// bounds below by eps. For k = 1 the wedge-sign
/// criterion is cross-checked on both wedge paths where brute force is
/// feasible.
inline Lemma41Report lemma41Check(const std::vector<FibrationJet>& jets, int k,
                                  const HermMatrix& beta0, double tol = 1e-6) {
  if (jets.empty()) throw FibrationError("lemma41Check: no samples");
  Lemma41Report rep;
  rep.m = jets.front().m;
  rep.n = jets.front().n;
  rep.k = k;
  if (k < 1 || k > rep.m) throw FibrationError("lemma41Check: k must be in 1..m");
  rep.eps = 1.0 / (rep.m - k + 1);

  std::vector<MatC> gs;
  std::vector<std::vector<double>> gammas;
  for (std::size_t s = 0; s < jets.size(); ++s) {
    const FibrationJet& j = jets[s];
    if (j.m != rep.m || j.n != rep.n)
      throw FibrationError("lemma41Check: inconsistent jet dimensions");
    if (j.n > 0 && minEig(HermMatrix(j.fiberFiber)) <= 0.0) {
      rep.failingSample = static_cast<int>(s);
      rep.failure = "fiber block not positive definite at sample " + std::to_string(s);
      return rep;
    }
    Lemma41Sample ls;
    SplitCurvature sc = splitCurvature(j);
    gs.push_back(sc.G);
    SignCount full = signCount(j.assembleChecked());
    SignCount horiz = signCount(HermMatrix(sc.G));
    ls.posFull = full.positive;
    ls.posG = horiz.positive;
    ls.condA = full.positive >= j.n + k;
    ls.condB = horiz.positive >= k;
    rep.samples.push_back(ls);
    EigResult pe = pencilEig(HermMatrix(sc.G), beta0);
    std::vector<double> g(pe.values.data(), pe.values.data() + pe.values.size());
    gammas.push_back(std::move(g));
  }
  rep.condA = true;
  rep.condB = true;
  for (const auto& ls : rep.samples) {
    rep.condA = rep.condA && ls.condA;
    rep.condB = rep.condB && ls.condB;
  }

  SmoothClamp psi;
  try {
    psi = psiEpsilonBuild(gammas, k);
  } catch (const FibrationError& e) {
    rep.failure = e.what();
    for (std::size_t s = 0; s < gammas.size(); ++s) {
      std::vector<double> g = gammas[s];
      std::sort(g.begin(), g.end());
      if (g[static_cast<std::size_t>(rep.m - k)] <= 0.0) {
        rep.failingSample = static_cast<int>(s);
        break;
      }
    }
    return rep;
  }
  rep.hypothesisOk = true;
  rep.eps = psi.eps;
  rep.Ainf = psi.A;
  rep.Bsup = psi.B;

  std::vector<MatC> betas;
  rep.minSubsetSumOverall = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < jets.size(); ++s) {
    HermMatrix beta = applySpectral(HermMatrix(gs[s]), beta0, psi);
    betas.push_back(beta.mat());
    EigResult pe = pencilEig(HermMatrix(gs[s]), beta);
    double sum = 0.0;
    for (int q = 0; q < rep.m - k + 1; ++q) sum += pe.values[q];
    rep.samples[s].minSubsetSum = sum;
    rep.minSubsetSumOverall = std::min(rep.minSubsetSumOverall, sum);

    if (k == 1 && rep.m + rep.n <= 4) {
      WedgeResult w = wedgeFormula(jets[s], beta);
      rep.samples[s].wedgeFormulaValue = w.formula;
      rep.samples[s].wedgeBruteValue = w.bruteForce;
      rep.samples[s].wedgeChecked = true;
      bool sumPos = sum > 0.0;
      if ((w.formula > 0.0) != sumPos || (w.bruteAvailable && (w.bruteForce > 0.0) != sumPos))
        rep.wedgeSignAgree = false;
    }
  }
  rep.condC = rep.minSubsetSumOverall >= rep.eps * (1.0 - tol);

  MatC mean = MatC::Zero(rep.m, rep.m);
  for (const auto& b : betas) mean += b;
  mean /= static_cast<double>(betas.size());
  double mnorm = std::max(1e-300, mean.norm());
  for (const auto& b : betas)
    rep.betaVariation = std::max(rep.betaVariation, (b - mean).norm() / mnorm);
  rep.betaFiberConstant = rep.betaVariation < 1e-9;
  return rep;
}

// --- the two-sided square identity ------------------------------------------------------

struct Identity410 {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Two-sided evaluation of the quadratic identity
///   |u_z|^2 phi_{11} + 2 Re(u_z sum conj(B1) conj(phi1)) + quadForm(A, B1)
///   = |u_z|^2 (phi_{11} - phi1* A^{-1} phi1)
///     + || sqrt(A^{-1}) phi1 conj(u_z) + sqrt(A) conj(B1) ||^2.
/// Throws if the two sides disagree beyond tol relative.
inline Identity410 identity410(const HermMatrix& a, const VecC& phi1, Cx uz, const VecC& b1,
                               double phi11, double tol = 1e-10) {
  if (!isPosDef(a)) throw FibrationError("identity410: A must be positive definite");
  Identity410 r;
  Cx cross(0.0);
  for (Eigen::Index q = 0; q < phi1.size(); ++q)
    cross += std::conj(b1[q]) * std::conj(phi1[q]);
  r.lhs = std::norm(uz) * phi11 + 2.0 * (uz * cross).real() + quadForm(a.mat(), b1);

  MatC ainv = a.mat().llt().solve(MatC::Identity(a.rows(), a.rows()));
  double sub = (phi1.adjoint() * ainv * phi1)(0, 0).real();
  VecC w = sqrtPsd(HermMatrix(ainv)) * phi1 * std::conj(uz) + sqrtPsd(a) * b1.conjugate();
  r.rhs = std::norm(uz) * (phi11 - sub) + w.squaredNorm();

  double scale = std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)});
  if (std::abs(r.lhs - r.rhs) > tol * scale)
    throw FibrationError("identity410: two-sided evaluation mismatch");
  return r;
}

}  // namespace rcpos
