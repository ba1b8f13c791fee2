#pragma once

// The profile transferred to a Cartesian grid, the real-linear operator
//   L v = Delta v + omega v - (2 f'(U^2) U^2 + f(U^2)) Re v - i f(U^2) Im v
// and the residuals of its three explicit kernel relations.

#include <algorithm>
#include <array>
#include <cmath>

#include "solitary/grid.hpp"
#include "solitary/profile.hpp"

namespace solitary {

/// U and grad U sampled on a Cartesian grid, with the profile centred at `origin`.
struct ProfileOnGrid {
  GridSpec grid;
  Vec3 origin{0.0, 0.0, 0.0};
  RealField u;
  std::array<RealField, 3> grad;
};

inline ProfileOnGrid transfer_profile(const Profile& prof, const GridSpec& grid,
                                      const Vec3& origin = {0.0, 0.0, 0.0}) {
  require(prof.dim() == grid.dim, ErrorKind::GridMismatch,
          "profile and grid dimensions differ");
  const auto interp = prof.interpolant();
  ProfileOnGrid out;
  out.grid = grid;
  out.origin = origin;
  out.u = RealField(grid);
  for (int a = 0; a < 3; ++a) out.grad[a] = RealField(grid);
  for_each_node(grid, [&](std::size_t idx, const Vec3& x) {
    Vec3 y{0.0, 0.0, 0.0};
    double r2 = 0.0;
    for (int a = 0; a < grid.dim; ++a) {
      y[a] = x[a] - origin[a];
      r2 += y[a] * y[a];
    }
    const double r = std::sqrt(r2);
    double du = 0.0;
    out.u.data[idx] = interp.value_and_derivative(r, du);
    if (r > 1e-14) {
      for (int a = 0; a < grid.dim; ++a) out.grad[a].data[idx] = du * y[a] / r;
    }
  });
  return out;
}

inline ComplexField as_complex(const RealField& f, cplx scale = 1.0) {
  ComplexField out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out.data[i] = scale * f.data[i];
  return out;
}

/// L v. Real-linear but not complex-linear.
inline ComplexField linearization_apply(const Profile& prof, const ProfileOnGrid& pg,
                                        const ComplexField& v) {
  require_same_grid(v.grid, pg.grid);
  ComplexField out = spectral_laplacian(v);
  const auto& nl = prof.nl;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = pg.u.data[i] * pg.u.data[i];
    const double re = v.data[i].real(), im = v.data[i].imag();
    out.data[i] += prof.omega * v.data[i] - cplx(nl.real_linear_coeff(s) * re, nl.f(s) * im);
  }
  return out;
}

struct KernelReport {
  /// ||L(iU)|| / ||U||
  double gauge = 0.0;
  /// max_j ||L(-d_j U)|| / ||grad U||
  double translation = 0.0;
  /// max_k ||L(i x_k U / 2) - i d_k U||
  double boost = 0.0;
  double max() const { return std::max({gauge, translation, boost}); }
};

/// Residuals of L(iU) = 0, L(d_j U) = 0 and L(i x_k U / 2) = i d_k U.
inline KernelReport kernel_check(const Profile& prof, const ProfileOnGrid& pg) {
  const auto& g = pg.grid;
  KernelReport rep;
  const double u_norm = l2_norm(pg.u);
  rep.gauge = l2_norm(linearization_apply(prof, pg, as_complex(pg.u, cplx(0.0, 1.0)))) / u_norm;

  double grad_sq = 0.0;
  for (int a = 0; a < g.dim; ++a) grad_sq += std::pow(l2_norm(pg.grad[a]), 2);
  const double grad_norm = std::sqrt(grad_sq);
  for (int a = 0; a < g.dim; ++a) {
    const auto lv = linearization_apply(prof, pg, as_complex(pg.grad[a], -1.0));
    rep.translation = std::max(rep.translation, l2_norm(lv) / grad_norm);

    ComplexField boost(g);
    for_each_node(g, [&](std::size_t idx, const Vec3& x) {
      boost.data[idx] = cplx(0.0, 0.5 * (x[a] - pg.origin[a]) * pg.u.data[idx]);
    });
    auto lb = linearization_apply(prof, pg, boost);
    for (std::size_t i = 0; i < lb.size(); ++i) lb.data[i] -= cplx(0.0, pg.grad[a].data[i]);
    rep.boost = std::max(rep.boost, l2_norm(lb));
  }
  return rep;
}

inline KernelReport kernel_check(const Profile& prof, const GridSpec& grid) {
  return kernel_check(prof, transfer_profile(prof, grid));
}

}  // namespace solitary
