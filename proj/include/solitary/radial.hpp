#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "solitary/error.hpp"

namespace solitary {

/// Surface measure of the unit sphere S^{N-1} (2 for N = 1).
inline double sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

/// Cell-centred radial grid r_i = (i + 1/2) h on [0, n h]; quadrature weights
/// are the exact shell volumes.
struct RadialGrid {
  int dim = 3;
  int n = 0;
  double h = 0.0;

  RadialGrid() = default;
  RadialGrid(int dim_, int n_, double r_max) : dim(dim_), n(n_), h(r_max / n_) {}

  double r(int i) const { return (i + 0.5) * h; }
  double r_max() const { return n * h; }
  /// Volume of the spherical shell [i h, (i+1) h].
  double weight(int i) const {
    return sphere_area(dim) * (std::pow((i + 1) * h, dim) - std::pow(i * h, dim)) / dim;
  }
  /// Area of the sphere of radius i h (the inner face of cell i).
  double face_area(int i) const { return sphere_area(dim) * std::pow(i * h, dim - 1); }

  std::vector<double> weights() const {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = weight(i);
    return w;
  }
};

/// Solves a general tridiagonal system in place with partial pivoting
/// (the LAPACK dgtsv elimination). `sub` and `sup` have n-1 entries.
inline void solve_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                              std::vector<double> sup, std::span<double> b) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  require(sub.size() + 1 == n && sup.size() + 1 == n && b.size() == n, ErrorKind::InvalidInput,
          "tridiagonal size mismatch");
  std::vector<double> sup2(n > 2 ? n - 2 : 0, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(diag[i]) >= std::abs(sub[i])) {
      require(diag[i] != 0.0, ErrorKind::NonConvergence, "singular tridiagonal matrix");
      const double fact = sub[i] / diag[i];
      diag[i + 1] -= fact * sup[i];
      b[i + 1] -= fact * b[i];
      if (i + 2 < n) sup2[i] = 0.0;
    } else {
      const double fact = diag[i] / sub[i];
      diag[i] = sub[i];
      const double tmp = diag[i + 1];
      diag[i + 1] = sup[i] - fact * tmp;
      if (i + 2 < n) {
        sup2[i] = sup[i + 1];
        sup[i + 1] = -fact * sup2[i];
      }
      sup[i] = tmp;
      const double tb = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tb - fact * b[i + 1];
    }
  }
  require(diag[n - 1] != 0.0, ErrorKind::NonConvergence, "singular tridiagonal matrix");
  b[n - 1] /= diag[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - sup[n - 2] * b[n - 1]) / diag[n - 2];
  for (std::size_t k = n - 2; k-- > 0;) {
    b[k] = (b[k] - sup[k] * b[k + 1] - sup2[k] * b[k + 2]) / diag[k];
  }
}

/// Cubic Lagrange interpolation of an even radial function sampled on a
/// cell-centred grid. Values past the last node follow the decaying tail
/// u_last * exp(-kappa (r - r_last)) * (r_last / r)^((N-1)/2).
class RadialInterpolant {
 public:
  RadialInterpolant() = default;
  RadialInterpolant(RadialGrid grid, std::vector<double> samples, double decay_rate)
      : grid_(grid), u_(std::move(samples)), kappa_(decay_rate) {}

  double value(double r) const {
    double d;
    return eval(r, d, false);
  }

  /// Returns U(r) and stores U'(r) in `deriv`.
  double value_and_derivative(double r, double& deriv) const { return eval(r, deriv, true); }

  const RadialGrid& grid() const { return grid_; }
  std::span<const double> samples() const { return u_; }

 private:
  double node(int k) const {
    if (k < 0) return u_[-k - 1];
    if (k < grid_.n) return u_[k];
    return tail(grid_.r(k));
  }

  double tail(double r) const {
    const int last = grid_.n - 1;
    const double r_last = grid_.r(last);
    if (kappa_ <= 0.0) return 0.0;
    return u_[last] * std::exp(-kappa_ * (r - r_last)) *
           std::pow(r_last / r, 0.5 * (grid_.dim - 1));
  }

  double eval(double r, double& deriv, bool want_deriv) const {
    const double t = r / grid_.h - 0.5;
    if (t > grid_.n + 1.0) {
      const double v = tail(r);
      deriv = -(kappa_ + 0.5 * (grid_.dim - 1) / r) * v;
      return v;
    }
    const int i = static_cast<int>(std::floor(t));
    const double s = t - i;
    const double um = node(i - 1), u0 = node(i), u1 = node(i + 1), u2 = node(i + 2);
    const double wm = -s * (s - 1.0) * (s - 2.0) / 6.0;
    const double w0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    const double w1 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    const double w2 = (s + 1.0) * s * (s - 1.0) / 6.0;
    if (want_deriv) {
      const double dm = -(3.0 * s * s - 6.0 * s + 2.0) / 6.0;
      const double d0 = (3.0 * s * s - 4.0 * s - 1.0) / 2.0;
      const double d1 = -(3.0 * s * s - 2.0 * s - 2.0) / 2.0;
      const double d2 = (3.0 * s * s - 1.0) / 6.0;
      deriv = (dm * um + d0 * u0 + d1 * u1 + d2 * u2) / grid_.h;
    }
    return wm * um + w0 * u0 + w1 * u1 + w2 * u2;
  }

  RadialGrid grid_;
  std::vector<double> u_;
  double kappa_ = 0.0;
};

}  // namespace solitary
