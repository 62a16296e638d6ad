#pragma once

// Dense Hermitian kernels used by the curvature and positivity code.
// Factorizations are delegated to Eigen; this layer owns the Hermitian
// validation, the shared zero threshold, and the pencil/Schur contracts the
// rest of the library relies on.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace rcpos {

using Cx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;

struct LinalgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Relative tolerance used everywhere a matrix is tested against a property
/// (hermiticity, positive definiteness, eigenvalue sign counting).
inline constexpr double kHermTol = 1e-9;

inline double opNormEstimate(const MatC& m) {
  // Frobenius norm upper-bounds the spectral norm; good enough for thresholds.
  return m.norm();
}

/// Hermitian matrix with validated symmetry. Construction checks
/// ||M - M*|| <= tol * ||M|| and stores the symmetrized part, so downstream
/// solvers see an exactly Hermitian input.
class HermMatrix {
 public:
  HermMatrix() = default;

  explicit HermMatrix(const MatC& m, double tol = kHermTol) {
    if (m.rows() != m.cols()) throw LinalgError("HermMatrix: not square");
    double scale = std::max(1.0, opNormEstimate(m));
    double dev = (m - m.adjoint()).norm();
    if (dev > tol * scale)
      throw LinalgError("HermMatrix: asymmetry " + std::to_string(dev) +
                        " exceeds tolerance");
    m_ = 0.5 * (m + m.adjoint().eval());
  }

  static HermMatrix zero(int n) { return HermMatrix(MatC::Zero(n, n)); }
  static HermMatrix identity(int n) { return HermMatrix(MatC::Identity(n, n)); }

  const MatC& mat() const { return m_; }
  int rows() const { return static_cast<int>(m_.rows()); }
  Cx operator()(int i, int j) const { return m_(i, j); }

 private:
  MatC m_;
};

struct EigResult {
  VecR values;  // ascending
  MatC vectors; // columns, unitary
};

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
inline EigResult eigHerm(const HermMatrix& a) {
  Eigen::SelfAdjointEigenSolver<MatC> es(a.mat());
  if (es.info() != Eigen::Success) throw LinalgError("eigHerm: solver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Generalized eigenvalues of the pencil (A, B) with B Hermitian positive
/// definite: A v = lambda B v, eigenvalues ascending, vectors B-orthonormal.
inline EigResult pencilEig(const HermMatrix& a, const HermMatrix& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatC> es(a.mat(), b.mat());
  if (es.info() != Eigen::Success)
    throw LinalgError("pencilEig: solver failed (is B positive definite?)");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline bool isPosDef(const HermMatrix& a) {
  Eigen::LLT<MatC> llt(a.mat());
  return llt.info() == Eigen::Success;
}

/// Hermitian square root of a positive semidefinite matrix. Small negative
/// eigenvalues within the shared threshold are clamped to zero; anything
/// worse is an error.
inline MatC sqrtPsd(const HermMatrix& a) {
  EigResult e = eigHerm(a);
  double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
  VecR roots(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    double v = e.values[i];
    if (v < -kHermTol * scale)
      throw LinalgError("sqrtPsd: matrix has a negative eigenvalue " + std::to_string(v));
    roots[i] = std::sqrt(std::max(v, 0.0));
  }
  return e.vectors * roots.asDiagonal() * e.vectors.adjoint();
}

/// Schur complement of the trailing k-by-k block:
/// for M = [A B; B* D] with D the trailing block, returns A - B D^{-1} B*.
inline MatC schurComplement(const MatC& m, int k) {
  int n = static_cast<int>(m.rows());
  if (m.cols() != n || k <= 0 || k >= n)
    throw LinalgError("schurComplement: bad block size");
  int p = n - k;
  MatC a = m.topLeftCorner(p, p);
  MatC b = m.topRightCorner(p, k);
  MatC d = m.bottomRightCorner(k, k);
  Eigen::LLT<MatC> llt(d);
  if (llt.info() != Eigen::Success)
    throw LinalgError("schurComplement: trailing block not positive definite");
  return a - b * llt.solve(b.adjoint());
}

struct SignCount {
  int positive = 0;
  int negative = 0;
  int zero = 0;
  double posMargin = 0.0;  // smallest eigenvalue counted positive (0 if none)
  double negMargin = 0.0;  // largest eigenvalue counted negative (0 if none)
};

/// Counts eigenvalue signs against the relative threshold
/// tau = kHermTol * max(1, |lambda|_max).
inline SignCount signCount(const HermMatrix& a) {
  EigResult e = eigHerm(a);
  SignCount c;
  double scale = e.values.size() ? e.values.cwiseAbs().maxCoeff() : 0.0;
  double tau = kHermTol * std::max(1.0, scale);
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    double v = e.values[i];
    if (v > tau) {
      ++c.positive;
      if (c.posMargin == 0.0 || v < c.posMargin) c.posMargin = v;
    } else if (v < -tau) {
      ++c.negative;
      if (v > c.negMargin || c.negMargin == 0.0) c.negMargin = v;
    } else {
      ++c.zero;
    }
  }
  return c;
}

inline double minEig(const HermMatrix& a) { return eigHerm(a).values.minCoeff(); }
inline double maxEig(const HermMatrix& a) { return eigHerm(a).values.maxCoeff(); }

/// sum_{jk} G_{jk} v_j conj(v_k); real for Hermitian G. This index order is
/// the pairing convention used throughout.
inline double quadForm(const MatC& g, const VecC& v) {
  Cx s(0.0);
  for (Eigen::Index j = 0; j < g.rows(); ++j)
    for (Eigen::Index k = 0; k < g.cols(); ++k) s += g(j, k) * v[j] * std::conj(v[k]);
  return s.real();
}

/// Solve H x = b for Hermitian positive definite H.
inline VecC solvePd(const HermMatrix& h, const VecC& b) {
  Eigen::LLT<MatC> llt(h.mat());
  if (llt.info() != Eigen::Success) throw LinalgError("solvePd: not positive definite");
  return llt.solve(b);
}

inline MatC solvePd(const HermMatrix& h, const MatC& b) {
  Eigen::LLT<MatC> llt(h.mat());
  if (llt.info() != Eigen::Success) throw LinalgError("solvePd: not positive definite");
  return llt.solve(b);
}

}  // namespace rcpos
