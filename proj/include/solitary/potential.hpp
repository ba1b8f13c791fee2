#pragma once

// External potentials: zero, harmonic k|x|^2, a Gaussian well, and the
// singular inverse power A|x|^(-zeta), plus numerically computed cell
// averages for cells that touch the singular point.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "solitary/error.hpp"
#include "solitary/grid.hpp"

namespace solitary {

enum class PotentialKind { Zero, Harmonic, GaussianWell, InversePower };

inline const char* to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::Zero: return "zero";
    case PotentialKind::Harmonic: return "harmonic";
    case PotentialKind::GaussianWell: return "gaussian_well";
    case PotentialKind::InversePower: return "inverse_power";
  }
  return "unknown";
}

inline PotentialKind parse_potential_kind(const std::string& s) {
  if (s == "zero") return PotentialKind::Zero;
  if (s == "harmonic") return PotentialKind::Harmonic;
  if (s == "gaussian_well") return PotentialKind::GaussianWell;
  if (s == "inverse_power") return PotentialKind::InversePower;
  throw Error(ErrorKind::InvalidInput, "unknown potential kind '" + s + "'");
}

/// V(x) for one of four families:
///   harmonic       k |x|^2
///   gaussian_well  -A exp(-|x - c|^2 / (2 s^2))
///   inverse_power  A |x|^(-zeta), singular at the origin (A < 0 attracts)
struct PotentialSpec {
  PotentialKind kind = PotentialKind::Zero;
  double k = 0.0;
  double amplitude = 0.0;
  double width = 1.0;
  Vec3 center{0.0, 0.0, 0.0};
  double zeta = 1.0;

  static PotentialSpec zero() { return {}; }
  static PotentialSpec harmonic(double k) {
    PotentialSpec p;
    p.kind = PotentialKind::Harmonic;
    p.k = k;
    return p;
  }
  static PotentialSpec gaussian_well(double amplitude, double width, const Vec3& center) {
    PotentialSpec p;
    p.kind = PotentialKind::GaussianWell;
    p.amplitude = amplitude;
    p.width = width;
    p.center = center;
    return p;
  }
  static PotentialSpec inverse_power(double amplitude, double zeta) {
    PotentialSpec p;
    p.kind = PotentialKind::InversePower;
    p.amplitude = amplitude;
    p.zeta = zeta;
    return p;
  }

  bool singular() const { return kind == PotentialKind::InversePower; }

  /// Bound on every second partial derivative (regular kinds only).
  double h_V() const {
    switch (kind) {
      case PotentialKind::Zero: return 0.0;
      case PotentialKind::Harmonic: return 2.0 * std::abs(k);
      // |d_ij exp(-|y|^2/2s^2)| <= 1/s^2, attained by d_ii at y = 0.
      case PotentialKind::GaussianWell: return std::abs(amplitude) / (width * width);
      case PotentialKind::InversePower: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  /// Smallest far-field Lebesgue exponent m with V in L^m(|x| >= 1) for
  /// every larger m, together with the requirement m > N/2.
  double far_field_exponent(int dim) const {
    if (kind != PotentialKind::InversePower) return 0.5 * dim;
    return std::max(0.5 * dim, dim / zeta);
  }

  void validate(int dim) const {
    switch (kind) {
      case PotentialKind::Zero:
        break;
      case PotentialKind::Harmonic:
        require(std::isfinite(k), ErrorKind::InvalidInput, "harmonic k must be finite");
        break;
      case PotentialKind::GaussianWell:
        require(width > 0.0, ErrorKind::InvalidInput, "gaussian_well width must be positive");
        break;
      case PotentialKind::InversePower:
        require(zeta > 0.0 && zeta < 2.0, ErrorKind::InvalidInput,
                "inverse_power needs zeta in (0, 2)");
        require(zeta < dim - 1, ErrorKind::InvalidInput,
                "inverse_power needs zeta < N - 1 for a finite averaged force");
        require(amplitude != 0.0, ErrorKind::InvalidInput, "inverse_power amplitude must be nonzero");
        break;
    }
  }

  double value(const Vec3& x, int dim) const {
    switch (kind) {
      case PotentialKind::Zero: return 0.0;
      case PotentialKind::Harmonic: return k * norm2(x, dim);
      case PotentialKind::GaussianWell: {
        double d2 = 0.0;
        for (int a = 0; a < dim; ++a) d2 += (x[a] - center[a]) * (x[a] - center[a]);
        return -amplitude * std::exp(-0.5 * d2 / (width * width));
      }
      case PotentialKind::InversePower:
        if (zeta == 1.0) return amplitude / std::sqrt(norm2(x, dim));
        return amplitude * std::pow(norm2(x, dim), -0.5 * zeta);
    }
    return 0.0;
  }

  Vec3 gradient(const Vec3& x, int dim) const {
    Vec3 g{0.0, 0.0, 0.0};
    switch (kind) {
      case PotentialKind::Zero:
        break;
      case PotentialKind::Harmonic:
        for (int a = 0; a < dim; ++a) g[a] = 2.0 * k * x[a];
        break;
      case PotentialKind::GaussianWell: {
        double d2 = 0.0;
        for (int a = 0; a < dim; ++a) d2 += (x[a] - center[a]) * (x[a] - center[a]);
        const double s2 = width * width;
        const double e = amplitude * std::exp(-0.5 * d2 / s2) / s2;
        for (int a = 0; a < dim; ++a) g[a] = e * (x[a] - center[a]);
        break;
      }
      case PotentialKind::InversePower: {
        const double r2 = norm2(x, dim);
        const double c = zeta == 1.0 ? -amplitude / (r2 * std::sqrt(r2))
                                     : -amplitude * zeta * std::pow(r2, -0.5 * zeta - 1.0);
        for (int a = 0; a < dim; ++a) g[a] = c * x[a];
        break;
      }
    }
    return g;
  }

  static double norm2(const Vec3& x, int dim) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += x[a] * x[a];
    return s;
  }
};

namespace detail {

// 4-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 4> kGaussNodes{-0.8611363115940526, -0.3399810435848563,
                                                   0.3399810435848563, 0.8611363115940526};
inline constexpr std::array<double, 4> kGaussWeights{0.3478548451374538, 0.6521451548625461,
                                                     0.6521451548625461, 0.3478548451374538};

/// Integral of fn over the cube centre +- half in the first Dim coordinates,
/// subdividing any sub-cube that lies within four times its width of the origin.
/// `offset2` is a squared distance added to every gap (the normal offset of a face).
template <int Dim, class Fn>
double integrate_cube(const Fn& fn, const Vec3& centre, double half, double offset2, int depth) {
  double d2 = offset2;
  for (int a = 0; a < Dim; ++a) {
    const double gap = std::max(0.0, std::abs(centre[a]) - half);
    d2 += gap * gap;
  }
  if (depth > 0 && d2 < 64.0 * half * half) {
    const double h2 = 0.5 * half;
    double acc = 0.0;
    for (int corner = 0; corner < (1 << Dim); ++corner) {
      Vec3 c = centre;
      for (int a = 0; a < Dim; ++a) c[a] += ((corner >> a) & 1) ? h2 : -h2;
      acc += integrate_cube<Dim>(fn, c, h2, offset2, depth - 1);
    }
    return acc;
  }
  // Tensor Gauss-Legendre. At full depth the piece holding the singular point
  // is small enough that its share of the integral is negligible.
  constexpr int total = Dim == 1 ? 4 : 16;
  double acc = 0.0;
  for (int q = 0; q < total; ++q) {
    int rem = q;
    double w = 1.0;
    Vec3 x{0.0, 0.0, 0.0};
    for (int a = 0; a < Dim; ++a) {
      const int i = rem % 4;
      rem /= 4;
      x[a] = centre[a] + half * kGaussNodes[i];
      w *= kGaussWeights[i];
    }
    acc += w * fn(x);
  }
  return acc * std::pow(half, Dim);
}

/// Integral of V over the face {x_axis = level} of the cube centre +- half.
inline double face_integral(const PotentialSpec& pot, int dim, const Vec3& centre, double half,
                            int axis, double level, int depth) {
  Vec3 reduced{0.0, 0.0, 0.0};
  for (int a = 0, b = 0; a < dim; ++a)
    if (a != axis) reduced[b++] = centre[a];
  auto fn = [&](const Vec3& y) {
    Vec3 x{0.0, 0.0, 0.0};
    for (int a = 0, b = 0; a < dim; ++a) x[a] = a == axis ? level : y[b++];
    return pot.value(x, dim);
  };
  if (dim == 3) return integrate_cube<2>(fn, reduced, half, level * level, depth);
  return integrate_cube<1>(fn, reduced, half, level * level, depth);
}

/// Face integrals I[axis][side] of V over the 2N faces of the cube (side 0: lower face).
inline std::array<std::array<double, 2>, 3> face_integrals(const PotentialSpec& pot, int dim,
                                                           const Vec3& centre, double half,
                                                           int depth) {
  std::array<std::array<double, 2>, 3> out{};
  for (int a = 0; a < dim; ++a) {
    out[a][0] = face_integral(pot, dim, centre, half, a, centre[a] - half, depth);
    out[a][1] = face_integral(pot, dim, centre, half, a, centre[a] + half, depth);
  }
  return out;
}

}  // namespace detail

// Cell averages of the singular kind. Both reduce to integrals of V over the
// faces of the cell: grad V by the divergence theorem, and V itself because
// div(x V) = (N - zeta) V for V = A |x|^(-zeta).

/// Mean of V over the cube centre +- half. Finite because zeta < N.
inline double cell_average_value(const PotentialSpec& pot, int dim, const Vec3& centre, double half,
                                 int depth = 24) {
  require(pot.singular() && dim >= 2, ErrorKind::InvalidInput,
          "cell averages are defined for the inverse-power kind in N >= 2");
  const auto I = detail::face_integrals(pot, dim, centre, half, depth);
  double flux = 0.0;
  for (int a = 0; a < dim; ++a) flux += (centre[a] + half) * I[a][1] - (centre[a] - half) * I[a][0];
  return flux / (dim - pot.zeta) / std::pow(2.0 * half, dim);
}

/// Mean of grad V over the cube centre +- half. Finite because zeta + 1 < N.
inline Vec3 cell_average_gradient(const PotentialSpec& pot, int dim, const Vec3& centre, double half,
                                  int depth = 24) {
  require(pot.singular() && dim >= 2, ErrorKind::InvalidInput,
          "cell averages are defined for the inverse-power kind in N >= 2");
  const auto I = detail::face_integrals(pot, dim, centre, half, depth);
  Vec3 mean{0.0, 0.0, 0.0};
  const double vol = std::pow(2.0 * half, dim);
  for (int a = 0; a < dim; ++a) mean[a] = (I[a][1] - I[a][0]) / vol;
  return mean;
}

/// True when the cube centre +- half lies within one cell spacing of the origin.
inline bool near_singular_point(const Vec3& centre, double half, int dim) {
  for (int a = 0; a < dim; ++a)
    if (std::abs(centre[a]) > 3.0 * half) return false;
  return true;
}

/// V sampled on the PDE grid; nodes next to the singular point carry the
/// cell average of V instead of its (possibly infinite) point value.
inline RealField sample_potential(const PotentialSpec& pot, const GridSpec& g) {
  RealField out(g);
  const double half = 0.5 * g.dx();
  for_each_node(g, [&](std::size_t idx, const Vec3& x) {
    if (pot.singular() && near_singular_point(x, half, g.dim)) {
      out.data[idx] = cell_average_value(pot, g.dim, x, half);
    } else {
      out.data[idx] = pot.value(x, g.dim);
    }
  });
  return out;
}

}  // namespace solitary
