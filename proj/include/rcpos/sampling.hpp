#pragma once

// Deterministic sampling utilities: Kronecker (R_d) quasirandom sequences,
// unit-sphere grids in C^r via the inverse normal CDF, Gauss-Legendre nodes,
// and a dimension-agnostic Nelder-Mead refiner. Everything here is pure and
// reproducible from its inputs.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rcpos/linalg.hpp"

namespace rcpos {

// --- Kronecker sequence ------------------------------------------------------

/// d-dimensional Kronecker sequence with the generalized golden ratio base:
/// x_k = frac(k * alpha + seed offset), alpha_j = phi_d^{-(j+1)} where phi_d
/// solves x^{d+1} = x + 1. Low-discrepancy and trivially deterministic.
class KroneckerSeq {
 public:
  KroneckerSeq(int dim, std::uint64_t seed = 0) : alpha_(dim), state_(dim) {
    if (dim <= 0) throw std::invalid_argument("KroneckerSeq: dim must be positive");
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (dim + 1));
    double a = 1.0 / phi;
    double val = a;
    for (int j = 0; j < dim; ++j) {
      alpha_[j] = val;
      val *= a;
    }
    // seed shifts the whole lattice; splitmix64 scrambles the per-axis offsets
    std::uint64_t s = seed;
    for (int j = 0; j < dim; ++j) {
      s += 0x9e3779b97f4a7c15ull;
      std::uint64_t x = s;
      x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
      x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
      x ^= x >> 31;
      state_[j] = 0.5 + static_cast<double>(x >> 11) * 0x1.0p-53;
      state_[j] -= std::floor(state_[j]);
    }
  }

  /// Next point in [0,1)^d.
  std::vector<double> next() {
    for (std::size_t j = 0; j < state_.size(); ++j) {
      state_[j] += alpha_[j];
      if (state_[j] >= 1.0) state_[j] -= 1.0;
    }
    return state_;
  }

 private:
  std::vector<double> alpha_;
  std::vector<double> state_;
};

// --- inverse normal CDF (Acklam) ----------------------------------------------

/// Inverse of the standard normal CDF, |relative error| < 1.2e-9 after one
/// Halley refinement step.
inline double invNormalCdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("invNormalCdf: p outside (0,1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // one Halley step against erfc for full double accuracy
  double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

// --- complex unit sphere grids ---------------------------------------------------

/// Deterministic grid of `count` unit vectors in C^r: Kronecker points in
/// [0,1)^{2r} mapped through the inverse normal CDF to a Gaussian, then
/// normalized. Equidistributes on the unit sphere S^{2r-1}.
inline std::vector<VecC> unitSphereGrid(int r, int count, std::uint64_t seed = 0) {
  if (r <= 0 || count <= 0) throw std::invalid_argument("unitSphereGrid: bad arguments");
  std::vector<VecC> pts;
  pts.reserve(static_cast<std::size_t>(count));
  KroneckerSeq seq(2 * r, seed);
  while (static_cast<int>(pts.size()) < count) {
    std::vector<double> u = seq.next();
    VecC v(r);
    for (int j = 0; j < r; ++j) {
      double re = invNormalCdf(std::min(std::max(u[2 * j], 1e-12), 1.0 - 1e-12));
      double im = invNormalCdf(std::min(std::max(u[2 * j + 1], 1e-12), 1.0 - 1e-12));
      v[j] = Cx(re, im);
    }
    double nrm = v.norm();
    if (nrm < 1e-8) continue;  // essentially impossible, but stay total
    pts.push_back(v / nrm);
  }
  return pts;
}

/// Fibonacci lattice on the real 2-sphere, returned as (x, y, z) triples.
/// Near-optimal equidistribution for large counts.
inline std::vector<std::array<double, 3>> fibonacciSphere(int count) {
  std::vector<std::array<double, 3>> pts;
  pts.reserve(static_cast<std::size_t>(count));
  const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    double zc = 1.0 - (2.0 * k + 1.0) / count;
    double rho = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    double th = ga * k;
    pts.push_back({rho * std::cos(th), rho * std::sin(th), zc});
  }
  return pts;
}

// --- Gauss-Legendre ---------------------------------------------------------------

struct QuadRule {
  std::vector<double> nodes;    // in (-1, 1)
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on Legendre
/// polynomials from the Chebyshev initial guess.
inline QuadRule gaussLegendre(int n) {
  if (n <= 0) throw std::invalid_argument("gaussLegendre: n must be positive");
  QuadRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

/// Same rule mapped to [a, b].
inline QuadRule gaussLegendre(int n, double a, double b) {
  QuadRule r = gaussLegendre(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

// --- Nelder-Mead -------------------------------------------------------------------

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int maxIter = 200;
  double shrinkTol = 1e-10;  // stop when simplex diameter falls below this
  double initialStep = 0.1;
};

/// Minimizes f over R^d from a starting point. Standard coefficients
/// (reflect 1, expand 2, contract 1/2, shrink 1/2).
inline NelderMeadResult nelderMead(const std::function<double(const std::vector<double>&)>& f,
                                   std::vector<double> start,
                                   const NelderMeadOptions& opt = {}) {
  const std::size_t d = start.size();
  std::vector<std::vector<double>> xs(d + 1, start);
  std::vector<double> fs(d + 1);
  for (std::size_t i = 0; i < d; ++i) xs[i + 1][i] += opt.initialStep;
  for (std::size_t i = 0; i <= d; ++i) fs[i] = f(xs[i]);

  NelderMeadResult res;
  std::vector<std::size_t> order(d + 1);
  for (int iter = 0; iter < opt.maxIter; ++iter) {
    res.iterations = iter + 1;
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::size_t best = order[0], worst = order[d], second = order[d ? d - 1 : 0];

    double diam = 0.0;
    for (std::size_t i = 1; i <= d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        diam = std::max(diam, std::abs(xs[order[i]][j] - xs[best][j]));
    if (diam < opt.shrinkTol) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += xs[i][j];
    }
    for (std::size_t j = 0; j < d; ++j) centroid[j] /= static_cast<double>(d);

    auto blend = [&](double c) {
      std::vector<double> p(d);
      for (std::size_t j = 0; j < d; ++j)
        p[j] = centroid[j] + c * (centroid[j] - xs[worst][j]);
      return p;
    };

    std::vector<double> xr = blend(1.0);
    double fr = f(xr);
    if (fr < fs[best]) {
      std::vector<double> xe = blend(2.0);
      double fe = f(xe);
      if (fe < fr) {
        xs[worst] = std::move(xe);
        fs[worst] = fe;
      } else {
        xs[worst] = std::move(xr);
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = std::move(xr);
      fs[worst] = fr;
    } else {
      std::vector<double> xc = blend(fr < fs[worst] ? 0.5 : -0.5);
      double fc = f(xc);
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = std::move(xc);
        fs[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < d; ++j)
            xs[i][j] = xs[best][j] + 0.5 * (xs[i][j] - xs[best][j]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  std::size_t bi = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (fs[i] < fs[bi]) bi = i;
  res.x = xs[bi];
  res.value = fs[bi];
  return res;
}

}  // namespace rcpos
