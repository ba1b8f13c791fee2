#pragma once

// Splitting of a field into a point of the soliton manifold plus an error w:
// tangent frames, the symplectic form, pairings, the zoomed gauge-free error
// w~, the four-term formula for d/dt w~ and numerical checks of the identities
// and bounds it satisfies.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "solitary/effective.hpp"
#include "solitary/grid.hpp"
#include "solitary/linearization.hpp"
#include "solitary/nls.hpp"
#include "solitary/potential.hpp"
#include "solitary/profile.hpp"
#include "solitary/scaling.hpp"

namespace solitary {

enum class FrameFlavor { eps_frame, zero_frame };

/// as_printed:  d/dxi_j -> (i/(2 eps)) x_j U_sigma,       d/dtheta -> (i/(2 eps)) U_sigma
/// direct:      d/dxi_j -> (i/(2 eps)) (x - a)_j U_sigma, d/dtheta -> (i/eps) U_sigma
enum class FrameConvention { as_printed, direct_derivative };

inline const char* to_string(FrameConvention c) {
  return c == FrameConvention::as_printed ? "as_printed" : "direct_derivative";
}

inline FrameConvention parse_frame_convention(const std::string& s) {
  if (s == "as_printed") return FrameConvention::as_printed;
  if (s == "direct_derivative") return FrameConvention::direct_derivative;
  throw Error(ErrorKind::InvalidInput, "unknown frame convention '" + s + "'");
}

/// Generators ordered a_1..a_N, xi_1..xi_N, theta.
struct TangentFrame {
  FrameFlavor flavor = FrameFlavor::eps_frame;
  FrameConvention convention = FrameConvention::as_printed;
  int dim = 3;
  std::vector<ComplexField> z;

  std::size_t size() const { return z.size(); }
};

/// Im int psi conj(phi) dx.
inline double symplectic_form(const ComplexField& psi, const ComplexField& phi) {
  require_same_grid(psi.grid, phi.grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    acc += psi.data[i].imag() * phi.data[i].real() - psi.data[i].real() * phi.data[i].imag();
  }
  return acc * psi.grid.cell_volume();
}

/// U_sigma with the phase theta (no omega_eps).
inline ComplexField soliton_field(const Profile& prof, const SolitonState& s,
                                  const ScalingParams& params, const GridSpec& grid) {
  return init_soliton_field(prof, s, params, grid);
}

/// Frame at sigma on the lab grid.
inline TangentFrame eps_frame(const SolitonState& s, const ScalingParams& params, const Profile& prof,
                              const GridSpec& grid, FrameConvention conv) {
  const int dim = params.dim;
  // Reuses the support check of the initial datum.
  const ComplexField u_sigma = soliton_field(prof, s, params, grid);
  const auto interp = prof.interpolant();
  const double eps = params.eps, eb = params.eps_beta();
  const double c_grad = params.eps_pow(params.gamma - params.beta);
  const double c_xi = 0.5 * params.eps_pow(params.gamma - 1.0);

  TangentFrame fr;
  fr.flavor = FrameFlavor::eps_frame;
  fr.convention = conv;
  fr.dim = dim;
  fr.z.assign(2 * dim + 1, ComplexField(grid));
  const cplx theta_coeff(0.0, conv == FrameConvention::as_printed ? 0.5 / eps : 1.0 / eps);
  for_each_node(grid, [&](std::size_t idx, const Vec3& x) {
    double r2 = 0.0, phase = 0.0;
    Vec3 y{0.0, 0.0, 0.0};
    for (int c = 0; c < dim; ++c) {
      y[c] = (x[c] - s.a[c]) / eb;
      r2 += y[c] * y[c];
      phase += 0.5 * (x[c] - s.a[c]) * s.xi[c];
    }
    const double r = std::sqrt(r2);
    double du = 0.0;
    const double u = interp.value_and_derivative(r, du);
    const cplx e = std::exp(cplx(0.0, (phase + s.theta) / eps));
    for (int c = 0; c < dim; ++c) {
      const double dj = r > 1e-14 ? du * y[c] / r : 0.0;
      fr.z[c].data[idx] = -cplx(c_grad * dj, c_xi * s.xi[c] * u) * e;
      const double lever = conv == FrameConvention::as_printed ? x[c] : x[c] - s.a[c];
      fr.z[dim + c].data[idx] = cplx(0.0, 0.5 * lever / eps) * u_sigma.data[idx];
    }
    fr.z[2 * dim].data[idx] = theta_coeff * u_sigma.data[idx];
  });
  return fr;
}

/// Frame at sigma = 0 with eps = 1: -d_j U, (i/2) x_j U, iU, on the grid of pg.
inline TangentFrame zero_frame(const ProfileOnGrid& pg) {
  const auto& g = pg.grid;
  const int dim = g.dim;
  TangentFrame fr;
  fr.flavor = FrameFlavor::zero_frame;
  fr.dim = dim;
  fr.z.assign(2 * dim + 1, ComplexField(g));
  for_each_node(g, [&](std::size_t idx, const Vec3& x) {
    const double u = pg.u.data[idx];
    for (int c = 0; c < dim; ++c) {
      fr.z[c].data[idx] = -pg.grad[c].data[idx];
      fr.z[dim + c].data[idx] = cplx(0.0, 0.5 * (x[c] - pg.origin[c]) * u);
    }
    fr.z[2 * dim].data[idx] = cplx(0.0, u);
  });
  return fr;
}

inline TangentFrame tangent_frame(const SolitonState& s, const ScalingParams& params,
                                  const Profile& prof, const GridSpec& grid, FrameFlavor flavor,
                                  FrameConvention conv = FrameConvention::as_printed) {
  if (flavor == FrameFlavor::zero_frame) return zero_frame(transfer_profile(prof, grid));
  return eps_frame(s, params, prof, grid, conv);
}

/// Per-generator relative L2 error of the frame against central differences
/// (U_{sigma + h e_j} - U_{sigma - h e_j}) / (2h).
inline std::vector<double> frame_difference_check(const SolitonState& s, const ScalingParams& params,
                                                  const Profile& prof, const GridSpec& grid,
                                                  FrameConvention conv, double h) {
  const int dim = params.dim;
  const auto fr = eps_frame(s, params, prof, grid, conv);
  std::vector<double> err(2 * dim + 1, 0.0);
  for (int j = 0; j < 2 * dim + 1; ++j) {
    SolitonState plus = s, minus = s;
    if (j < dim) {
      plus.a[j] += h;
      minus.a[j] -= h;
    } else if (j < 2 * dim) {
      plus.xi[j - dim] += h;
      minus.xi[j - dim] -= h;
    } else {
      plus.theta += h;
      minus.theta -= h;
    }
    ComplexField d = soliton_field(prof, plus, params, grid) - soliton_field(prof, minus, params, grid);
    d *= cplx(0.5 / h, 0.0);
    const double ref = l2_norm(d);
    d -= fr.z[j];
    err[j] = l2_norm(d) / ref;
  }
  return err;
}

/// (2N+1) x (2N+1) matrix of omega(z_i, z_j) over the frame at sigma.
inline Eigen::MatrixXd omega_sigma_matrix(const SolitonState& s, const ScalingParams& params,
                                          const Profile& prof, const GridSpec& grid,
                                          FrameConvention conv = FrameConvention::as_printed) {
  const auto fr = eps_frame(s, params, prof, grid, conv);
  const int m = static_cast<int>(fr.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) M(i, j) = symplectic_form(fr.z[i], fr.z[j]);
  return M;
}

/// 1/4 eps^(2 gamma + beta N - 1) rho [[0, -I, 0], [I, 0, 0], [0, 0, 0]].
inline Eigen::MatrixXd omega_sigma_block_form(const ScalingParams& params, double rho) {
  const int dim = params.dim;
  const double c = 0.25 * params.eps_pow(2.0 * params.gamma + params.beta * dim - 1.0) * rho;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * dim + 1, 2 * dim + 1);
  for (int j = 0; j < dim; ++j) {
    M(j, dim + j) = -c;
    M(dim + j, j) = c;
  }
  return M;
}

/// Number of singular values above rel_tol times the largest.
inline int numerical_rank(const Eigen::MatrixXd& M, double rel_tol = 1e-8) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  return rank;
}

/// w = e^{(i/eps) omega_eps} psi - U_sigma.
inline ComplexField compute_w(const ComplexField& psi, const SolitonState& s, const ScalingParams& params,
                              const Profile& prof) {
  ComplexField w = psi;
  w *= std::exp(cplx(0.0, s.omega_eps / params.eps));
  w -= soliton_field(prof, s, params, psi.grid);
  return w;
}

/// Zoomed coordinates x~ = (x - anchor) / eps^beta on the same nodes as the lab grid.
inline GridSpec zoom_grid(const GridSpec& lab, const Vec3& anchor, double eps_beta) {
  GridSpec z = lab;
  z.L = lab.L / eps_beta;
  for (int c = 0; c < lab.dim; ++c) z.center[c] = (lab.center[c] - anchor[c]) / eps_beta;
  return z;
}

inline Vec3 zoom_anchor(const GridSpec& lab, const GridSpec& zoom, double eps_beta) {
  require(lab.dim == zoom.dim && lab.n == zoom.n &&
              std::abs(zoom.L * eps_beta - lab.L) <= 1e-12 * lab.L,
          ErrorKind::GridMismatch, "zoom grid is not a dilation of the lab grid");
  Vec3 b{0.0, 0.0, 0.0};
  for (int c = 0; c < lab.dim; ++c) b[c] = lab.center[c] - eps_beta * zoom.center[c];
  return b;
}

/// w~(x~) = eps^(-gamma) e^{-(i/eps)(1/2 eps^beta x~.xi + theta)} w(a + eps^beta x~).
/// When the zoom anchor differs from a, w is shifted spectrally by a - anchor;
/// WindowClipped if the part of w that wraps around the box exceeds 1e-12 of
/// the soliton's charge.
inline ComplexField compute_w_tilde(const ComplexField& w, const SolitonState& s,
                                    const ScalingParams& params, const Profile& prof,
                                    const GridSpec& zoom) {
  const auto& lab = w.grid;
  const int dim = lab.dim;
  const double eb = params.eps_beta();
  const Vec3 anchor = zoom_anchor(lab, zoom, eb);
  Vec3 d{0.0, 0.0, 0.0};
  bool shifted = false;
  for (int c = 0; c < dim; ++c) {
    d[c] = s.a[c] - anchor[c];
    shifted = shifted || d[c] != 0.0;
  }
  const ComplexField* src = &w;
  ComplexField moved;
  if (shifted) {
    // Mass that the periodic shift would carry across the box edge.
    double wrapped = 0.0;
    for_each_node(lab, [&](std::size_t idx, const Vec3& x) {
      for (int c = 0; c < dim; ++c) {
        const double y = x[c] - d[c];
        if (y < lab.center[c] - lab.L || y >= lab.center[c] + lab.L) {
          wrapped += std::norm(w.data[idx]);
          break;
        }
      }
    });
    wrapped *= lab.cell_volume();
    if (wrapped > 1e-12 * params.charge_scale() * prof.rho) {
      throw Error(ErrorKind::WindowClipped, "the zoom window leaves the lab box where w is not negligible");
    }
    Vec3 back{0.0, 0.0, 0.0};
    for (int c = 0; c < dim; ++c) back[c] = -d[c];
    moved = spectral_translate(w, back);
    src = &moved;
  }
  const double amp = params.eps_pow(-params.gamma);
  ComplexField out(zoom);
  for_each_node(zoom, [&](std::size_t idx, const Vec3& xt) {
    double phase = s.theta;
    for (int c = 0; c < dim; ++c) phase += 0.5 * eb * xt[c] * s.xi[c];
    out.data[idx] = amp * std::exp(cplx(0.0, -phase / params.eps)) * src->data[idx];
  });
  return out;
}

struct PairingVector {
  double t = 0.0;
  FrameFlavor flavor = FrameFlavor::eps_frame;
  FrameConvention convention = FrameConvention::as_printed;
  std::vector<double> values;
};

inline PairingVector pairings(const ComplexField& field, const TangentFrame& frame, double t = 0.0) {
  PairingVector p;
  p.t = t;
  p.flavor = frame.flavor;
  p.convention = frame.convention;
  p.values.reserve(frame.size());
  for (const auto& z : frame.z) p.values.push_back(symplectic_form(field, z));
  return p;
}

/// One verified relation: lhs against rhs, pass when residual <= tolerance.
struct CheckResult {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline CheckResult make_check(std::string name, double lhs, double rhs, double residual, double tolerance) {
  return CheckResult{std::move(name), lhs, rhs, residual, tolerance, residual <= tolerance};
}

/// Lab pairings omega(w, z^eps_j) against the zoomed pairings omega(w~, z_{j,0}).
struct PairingRelationReport {
  FrameConvention convention = FrameConvention::as_printed;
  std::vector<double> lhs;
  /// Combination consistent with the frame convention.
  std::vector<double> rhs;
  /// The combination with the theta coefficient eps^(2 gamma + beta N - 1)
  /// and the a_j term in the xi block, whatever the convention.
  std::vector<double> rhs_printed;
  std::vector<double> residual;
  std::vector<double> residual_printed;
  double w_l2 = 0.0;

  double max_residual() const { return *std::max_element(residual.begin(), residual.end()); }
  double max_residual_printed() const {
    return *std::max_element(residual_printed.begin(), residual_printed.end());
  }
};

inline PairingRelationReport pairing_relation_from_pairings(const PairingVector& lab, const PairingVector& zoomed,
                                           const SolitonState& s, const ScalingParams& params,
                                           FrameConvention conv) {
  const int dim = params.dim;
  const double g2 = 2.0 * params.gamma, b = params.beta;
  const double c_a = params.eps_pow(g2 + b * (dim - 1));
  const double c_xi = params.eps_pow(g2 + b * (dim + 1) - 1.0);
  const double c_th = params.eps_pow(g2 + b * dim - 1.0);
  const double th0 = zoomed.values[2 * dim];
  const bool printed = conv == FrameConvention::as_printed;
  PairingRelationReport rep;
  rep.convention = conv;
  rep.lhs = lab.values;
  for (int j = 0; j < 2 * dim + 1; ++j) {
    double rhs = 0.0, lit = 0.0;
    if (j < dim) {
      rhs = c_a * zoomed.values[j] - 0.5 * c_th * s.xi[j] * th0;
      lit = rhs;
    } else if (j < 2 * dim) {
      lit = c_xi * zoomed.values[j] + 0.5 * c_th * s.a[j - dim] * th0;
      rhs = printed ? lit : c_xi * zoomed.values[j];
    } else {
      lit = c_th * th0;
      rhs = printed ? 0.5 * c_th * th0 : lit;
    }
    rep.rhs.push_back(rhs);
    rep.rhs_printed.push_back(lit);
    rep.residual.push_back(std::abs(lab.values[j] - rhs));
    rep.residual_printed.push_back(std::abs(lab.values[j] - lit));
  }
  return rep;
}

/// Both sides of the lab/zoom pairing relation for the lab field w at sigma.
inline PairingRelationReport verify_pairing_relation(const ComplexField& w, const SolitonState& s,
                                     const ScalingParams& params, const Profile& prof,
                                     const GridSpec& zoom, FrameConvention conv) {
  const auto lab = pairings(w, eps_frame(s, params, prof, w.grid, conv), s.t);
  const auto wt = compute_w_tilde(w, s, params, prof, zoom);
  const auto zoomed = pairings(wt, zero_frame(transfer_profile(prof, zoom)), s.t);
  auto rep = pairing_relation_from_pairings(lab, zoomed, s, params, conv);
  rep.w_l2 = l2_norm(w);
  return rep;
}

/// f(|U+w~|^2)(U+w~) - f(U^2)U - (2 f'(U^2) U^2 + f(U^2)) Re w~ - i f(U^2) Im w~.
inline ComplexField R_F_field(const ComplexField& wt, const RealField& u, const NonlinearitySpec& nl) {
  require_same_grid(wt.grid, u.grid);
  ComplexField out(wt.grid);
  for (std::size_t i = 0; i < wt.size(); ++i) {
    const double U = u.data[i];
    const double s = U * U;
    const cplx full = U + wt.data[i];
    const cplx v = wt.data[i];
    out.data[i] = nl.f(std::norm(full)) * full - nl.f(s) * U -
                  cplx(nl.real_linear_coeff(s) * v.real(), nl.f(s) * v.imag());
  }
  return out;
}

/// The four terms of d/dt w~ and their sum.
struct DtwParts {
  ComplexField I1, I2, I3, I4, total;
};

/// eps^beta x~ . v - R_V on the zoom grid.
inline RealField potential_mismatch_field(const SolitonState& s, const ScalingParams& params,
                                          const PotentialSpec& pot, const AveragingQuadrature& q,
                                          const GridSpec& zoom) {
  const double eb = params.eps_beta();
  const Vec3 v = v_of_t(s.a, eb, q, pot);
  RealField m = R_V_field(s.a, eb, pot, zoom);
  for_each_node(zoom, [&](std::size_t idx, const Vec3& xt) {
    double lin = 0.0;
    for (int c = 0; c < zoom.dim; ++c) lin += eb * xt[c] * v[c];
    m.data[idx] = lin - m.data[idx];
  });
  return m;
}

/// I1 = (i/eps)(eps^beta x~.v - R_V) U,  I2 = (i/eps)(eps^beta x~.v - R_V) w~,
/// I3 = i eps^(1-2 beta) L w~,          I4 = -i eps^(1-2 beta) R_F(w~).
inline DtwParts rhs_dtw_tilde(const ComplexField& wt, const SolitonState& s, const ScalingParams& params,
                              const Profile& prof, const ProfileOnGrid& pg, const PotentialSpec& pot,
                              const AveragingQuadrature& q) {
  require_same_grid(wt.grid, pg.grid);
  const auto& g = wt.grid;
  const double inv_eps = 1.0 / params.eps;
  const double c_lin = params.eps_pow(1.0 - 2.0 * params.beta);
  const RealField m = potential_mismatch_field(s, params, pot, q, g);
  DtwParts d{ComplexField(g), ComplexField(g), linearization_apply(prof, pg, wt),
             R_F_field(wt, pg.u, prof.nl), ComplexField(g)};
  for (std::size_t i = 0; i < wt.size(); ++i) {
    const cplx c(0.0, inv_eps * m.data[i]);
    d.I1.data[i] = c * pg.u.data[i];
    d.I2.data[i] = c * wt.data[i];
    d.I3.data[i] *= cplx(0.0, c_lin);
    d.I4.data[i] *= cplx(0.0, -c_lin);
    d.total.data[i] = d.I1.data[i] + d.I2.data[i] + d.I3.data[i] + d.I4.data[i];
  }
  return d;
}

/// Deterministic smooth random field: a sum of complex Gaussian bumps with
/// centres within `radius` of the grid centre, scaled to unit L2 norm.
inline ComplexField random_smooth_field(const GridSpec& g, std::mt19937_64& rng, int bumps = 4,
                                        double radius = 3.0) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  struct Bump {
    Vec3 c;
    double width;
    cplx coeff;
  };
  std::vector<Bump> bs;
  for (int b = 0; b < bumps; ++b) {
    Bump bump{{0.0, 0.0, 0.0}, 0.0, {}};
    for (int c = 0; c < g.dim; ++c) bump.c[c] = g.center[c] + radius * uni(rng);
    bump.width = 1.35 + 0.65 * uni(rng);
    bump.coeff = cplx(uni(rng), uni(rng));
    bs.push_back(bump);
  }
  ComplexField f = sample_complex(g, [&](const Vec3& x) {
    cplx acc(0.0, 0.0);
    for (const auto& b : bs) {
      double r2 = 0.0;
      for (int c = 0; c < g.dim; ++c) r2 += (x[c] - b.c[c]) * (x[c] - b.c[c]);
      acc += b.coeff * std::exp(-0.5 * r2 / (b.width * b.width));
    }
    return acc;
  });
  f *= cplx(1.0 / l2_norm(f), 0.0);
  return f;
}

/// f(x) + f(-x) about the grid centre, normalised to unit L2 norm.
inline ComplexField even_part(const ComplexField& f) {
  const auto& g = f.grid;
  ComplexField out(g);
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    auto j = g.unflatten(idx);
    std::size_t mirror = 0;
    for (int a = 0; a < g.dim; ++a) mirror = mirror * g.n + static_cast<std::size_t>((g.n - j[a]) % g.n);
    out.data[idx] = f.data[idx] + f.data[mirror];
  }
  out *= cplx(1.0 / l2_norm(out), 0.0);
  return out;
}

/// |int R_F(v) conj(phi)| / ||v||.
inline double remainder_ratio(const RealField& u, const NonlinearitySpec& nl, const ComplexField& v,
                       const ComplexField& phi) {
  return std::abs(inner(R_F_field(v, u, nl), phi)) / l2_norm(v);
}

struct RemainderProbeOptions {
  std::vector<double> amplitudes{1.0, 0.5, 0.25, 0.125};
  int n_samples = 6;
  std::uint64_t seed = 1;
  /// Restrict the samples to fields even about the grid centre.
  bool even = false;
  /// Slack on the fitted slope of log max-ratio against log amplitude.
  double slope_tolerance = 0.1;
};

struct RemainderEstimate {
  /// Largest ratio per amplitude, in the order of the amplitudes.
  std::vector<double> max_ratio;
  double C = 0.0;
  double slope = 0.0;
  /// Ratio does not grow as the amplitude shrinks.
  bool bounded = false;
};

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Sampled estimate of the constant C(phi, U) bounding |int R_F(v) conj phi| <= C ||v||
/// for ||v|| <= 1. The same random directions are reused at every amplitude.
inline std::vector<RemainderEstimate> remainder_bound_probe(const ProfileOnGrid& pg, const NonlinearitySpec& nl,
                                              const std::vector<ComplexField>& test_fields,
                                              const RemainderProbeOptions& opt) {
  require(!opt.amplitudes.empty() && opt.n_samples >= 1, ErrorKind::InvalidInput,
          "probe needs amplitudes and samples");
  for (double a : opt.amplitudes)
    require(a > 0.0 && a <= 1.0, ErrorKind::InvalidInput, "probe amplitudes must lie in (0, 1]");
  std::mt19937_64 rng(opt.seed);
  std::vector<ComplexField> dirs;
  for (int k = 0; k < opt.n_samples; ++k) {
    auto f = random_smooth_field(pg.grid, rng);
    dirs.push_back(opt.even ? even_part(f) : f);
  }
  std::vector<RemainderEstimate> out(test_fields.size());
  for (std::size_t t = 0; t < test_fields.size(); ++t) {
    std::vector<double> lx, ly;
    for (double amp : opt.amplitudes) {
      double best = 0.0;
      for (const auto& d : dirs) {
        ComplexField v = d;
        v *= cplx(amp, 0.0);
        best = std::max(best, remainder_ratio(pg.u, nl, v, test_fields[t]));
      }
      out[t].max_ratio.push_back(best);
      out[t].C = std::max(out[t].C, best);
      if (best > 0.0) {
        lx.push_back(std::log(amp));
        ly.push_back(std::log(best));
      }
    }
    out[t].slope = lx.size() >= 2 ? fit_slope(lx, ly) : 0.0;
    out[t].bounded = out[t].slope >= -opt.slope_tolerance;
  }
  return out;
}

/// omega(I1, z_{j,0}) against 1/2 eps^(beta-1) rho v_j + (1/(2 eps)) int R_V d_j(U^2)
/// for j <= N and 0 otherwise. With v the exact average the two terms cancel, so
/// the j <= N rows are relative to |first term| + (1/(2 eps)) int |R_V d_j(U^2)|.
/// Rows where that scale vanishes, and the j > N rows, are relative to the
/// Cauchy-Schwarz scale (1/eps)||(x~.v - R_V)U|| ||z_{j,0}||.
inline std::vector<CheckResult> forcing_pairing_check(const SolitonState& s, const ScalingParams& params,
                                               const Profile& prof, const ProfileOnGrid& pg,
                                               const PotentialSpec& pot, const AveragingQuadrature& q,
                                               double rel_tol = 1e-8, double zero_tol = 1e-9) {
  const auto& g = pg.grid;
  const int dim = g.dim;
  const double eps = params.eps, eb = params.eps_beta();
  const ComplexField zero(g);
  const auto parts = rhs_dtw_tilde(zero, s, params, prof, pg, pot, q);
  const auto fr = zero_frame(pg);
  const auto lhs = pairings(parts.I1, fr);
  const Vec3 v = v_of_t(s.a, eb, q, pot);
  const RealField rv = R_V_field(s.a, eb, pot, g);
  const double scale_i1 = l2_norm(parts.I1);
  std::vector<CheckResult> rows;
  for (int j = 0; j < 2 * dim + 1; ++j) {
    const double scale = scale_i1 * l2_norm(fr.z[j]);
    if (j < dim) {
      double integral = 0.0, integral_abs = 0.0;
      for (std::size_t i = 0; i < rv.size(); ++i) {
        const double f = rv.data[i] * 2.0 * pg.u.data[i] * pg.grad[j].data[i];
        integral += f;
        integral_abs += std::abs(f);
      }
      integral *= g.cell_volume();
      integral_abs *= g.cell_volume();
      const double v_term = 0.5 * params.eps_pow(params.beta - 1.0) * prof.rho * v[j];
      const double rhs = v_term + integral / (2.0 * eps);
      const double diff = std::abs(lhs.values[j] - rhs);
      const double terms = std::abs(v_term) + integral_abs / (2.0 * eps);
      const bool zero_row = terms <= zero_tol * scale;
      rows.push_back(zero_row ? make_check("forcing j=" + std::to_string(j + 1), lhs.values[j], rhs,
                                           diff / std::max(scale, 1e-300), zero_tol)
                              : make_check("forcing j=" + std::to_string(j + 1), lhs.values[j], rhs,
                                           diff / terms, rel_tol));
    } else {
      rows.push_back(make_check("forcing j=" + std::to_string(j + 1), lhs.values[j], 0.0,
                                std::abs(lhs.values[j]) / std::max(scale, 1e-300), zero_tol));
    }
  }
  return rows;
}

/// L2 norms of the profile moments entering the pairing bounds.
struct ProfileNorms {
  double x_gradU = 0.0;   // || |x| |grad U| ||
  double x2_U = 0.0;      // || |x|^2 U ||
  double x_U = 0.0;       // || |x| U ||
  double RV_gradU = 0.0;  // || R_V |grad U| ||
  double RV_xU = 0.0;     // || R_V |x| U ||
  double RV_U = 0.0;      // || R_V U ||
};

inline ProfileNorms profile_norms(const ProfileOnGrid& pg, const RealField& rv) {
  const auto& g = pg.grid;
  ProfileNorms m;
  for_each_node(g, [&](std::size_t idx, const Vec3& x) {
    double r2 = 0.0, grad2 = 0.0;
    for (int c = 0; c < g.dim; ++c) {
      const double y = x[c] - pg.origin[c];
      r2 += y * y;
      grad2 += pg.grad[c].data[idx] * pg.grad[c].data[idx];
    }
    const double u2 = pg.u.data[idx] * pg.u.data[idx];
    const double r2v = rv.data[idx] * rv.data[idx];
    m.x_gradU += r2 * grad2;
    m.x2_U += r2 * r2 * u2;
    m.x_U += r2 * u2;
    m.RV_gradU += r2v * grad2;
    m.RV_xU += r2v * r2 * u2;
    m.RV_U += r2v * u2;
  });
  const double dv = g.cell_volume();
  for (double* p : {&m.x_gradU, &m.x2_U, &m.x_U, &m.RV_gradU, &m.RV_xU, &m.RV_U}) *p = std::sqrt(*p * dv);
  return m;
}

struct ErrorPairingOptions {
  /// Largest tolerated kernel residual of the profile on the zoom grid.
  double kernel_tolerance = 1e-3;
  /// Tolerance of the I3 pairings, relative to eps^(1-2beta) ||w~|| ||z_{j,0}||.
  double linear_pairing_tolerance = 1e-6;
  /// Kernel residuals measured beforehand on an equivalent grid; computed here when null.
  const KernelReport* kernel = nullptr;
};

/// Pairing bounds for I2 and I4 and the I3 identities at one w~:
///   omega(I3, z_{j,0}) = {0, -eps^(1-2beta) omega(w~, z_{j-N,0}), 0}.
/// c_hat holds the (already inflated) remainder constant for each zero-frame generator.
inline std::vector<CheckResult> error_pairing_check(const ComplexField& wt, const SolitonState& s,
                                                 const ScalingParams& params, const Profile& prof,
                                                 const ProfileOnGrid& pg, const PotentialSpec& pot,
                                                 const AveragingQuadrature& q,
                                                 const std::vector<double>& c_hat,
                                                 const ErrorPairingOptions& opt = {}) {
  const auto& g = pg.grid;
  const int dim = g.dim;
  const double wt_norm = l2_norm(wt);
  require(wt_norm <= 1.0, ErrorKind::WindowViolation, "||w~|| exceeds 1");
  require(static_cast<int>(c_hat.size()) == 2 * dim + 1, ErrorKind::InvalidInput,
          "need one remainder constant per generator");
  const auto kr = opt.kernel ? *opt.kernel : kernel_check(prof, pg);
  if (kr.max() > opt.kernel_tolerance) {
    throw Error(ErrorKind::KernelResidualTooLarge, "profile kernel residual on the zoom grid is " +
                                                       std::to_string(kr.max()));
  }
  const double eps = params.eps, eb = params.eps_beta();
  const double c_lin = params.eps_pow(1.0 - 2.0 * params.beta);
  const double c_v = params.eps_pow(params.beta - 1.0);
  const auto parts = rhs_dtw_tilde(wt, s, params, prof, pg, pot, q);
  const auto fr = zero_frame(pg);
  const auto p2 = pairings(parts.I2, fr);
  const auto p3 = pairings(parts.I3, fr);
  const auto p4 = pairings(parts.I4, fr);
  const auto pw = pairings(wt, fr);
  const double vnorm = norm(v_of_t(s.a, eb, q, pot), dim);
  const auto m = profile_norms(pg, R_V_field(s.a, eb, pot, g));

  std::vector<CheckResult> rows;
  for (int j = 0; j < 2 * dim + 1; ++j) {
    const std::string tag = " j=" + std::to_string(j + 1);
    double bound2 = 0.0, rhs3 = 0.0;
    if (j < dim) {
      bound2 = wt_norm * (c_v * m.x_gradU * vnorm + m.RV_gradU / eps);
    } else if (j < 2 * dim) {
      bound2 = wt_norm * (0.5 * c_v * m.x2_U * vnorm + m.RV_xU / eps);
      // L(i x_k U / 2) = i d_k U with L as in I3 gives the minus sign.
      rhs3 = -c_lin * pw.values[j - dim];
    } else {
      bound2 = wt_norm * (0.5 * c_v * m.x_U * vnorm + m.RV_U / eps);
    }
    const double lhs2 = std::abs(p2.values[j]);
    rows.push_back(make_check("mismatch_bound" + tag, lhs2, bound2, lhs2 - bound2, 0.0));
    const double scale3 = c_lin * wt_norm * l2_norm(fr.z[j]);
    rows.push_back(make_check("linear_pairing" + tag, p3.values[j], rhs3,
                              scale3 > 0.0 ? std::abs(p3.values[j] - rhs3) / scale3 : 0.0,
                              opt.linear_pairing_tolerance));
    const double lhs4 = std::abs(p4.values[j]);
    const double bound4 = c_lin * c_hat[j] * wt_norm;
    rows.push_back(make_check("remainder_bound" + tag, lhs4, bound4, lhs4 - bound4, 0.0));
  }
  return rows;
}

/// Central differences of pairing time series.
struct GrowthReport {
  /// max over j and interior snapshots of |d/dt omega(w, z_j)|.
  double max_rate = 0.0;
  double rate_scale = 0.0;  // eps^(delta - 1)
  double ratio = 0.0;
  std::vector<double> max_rate_per_j;
};

inline GrowthReport growth_rates(const std::vector<PairingVector>& run, const ScalingParams& params) {
  if (run.size() < 3) throw Error(ErrorKind::TooFewSnapshots, "growth rates need at least 3 snapshots");
  const std::size_t m = run.front().values.size();
  GrowthReport g;
  g.max_rate_per_j.assign(m, 0.0);
  for (std::size_t i = 1; i + 1 < run.size(); ++i) {
    const double dt = run[i + 1].t - run[i - 1].t;
    for (std::size_t j = 0; j < m; ++j) {
      const double r = std::abs(run[i + 1].values[j] - run[i - 1].values[j]) / dt;
      g.max_rate_per_j[j] = std::max(g.max_rate_per_j[j], r);
      g.max_rate = std::max(g.max_rate, r);
    }
  }
  g.rate_scale = params.eps_pow(params.delta() - 1.0);
  g.ratio = g.max_rate / g.rate_scale;
  return g;
}

/// Per-snapshot inputs of the growth bound for ||w||^2.
struct NormSample {
  double t = 0.0;
  double w_l2 = 0.0;
  double v_norm = 0.0;
  double RV_U = 0.0;  // || R_V U || on the zoom grid
};

struct NormGrowthReport {
  std::vector<CheckResult> rows;
  /// max over snapshots of lhs / rhs.
  double tightest = 0.0;
  int violations = 0;
};

/// |d/dt ||w||^2| <= 4 eps^(gamma + beta N/2) ||w|| (1/2 eps^(beta-1) ||x U|| |v|
///                    + eps^(-1) ||R_V U|| + eps^(1-2beta) C), at interior snapshots.
inline NormGrowthReport norm_growth_bound_check(const std::vector<NormSample>& run, const ScalingParams& params,
                                     double x_U, double c_hat) {
  if (run.size() < 3) throw Error(ErrorKind::TooFewSnapshots, "the norm bound needs at least 3 snapshots");
  for (const auto& s : run)
    require(s.w_l2 <= 1.0, ErrorKind::WindowViolation, "||w|| exceeds 1 inside the window");
  const double pre = 4.0 * params.eps_pow(params.gamma + 0.5 * params.beta * params.dim);
  const double c_v = 0.5 * params.eps_pow(params.beta - 1.0);
  const double c_lin = params.eps_pow(1.0 - 2.0 * params.beta);
  NormGrowthReport rep;
  for (std::size_t i = 1; i + 1 < run.size(); ++i) {
    const auto& s = run[i];
    const double lhs = std::abs(run[i + 1].w_l2 * run[i + 1].w_l2 - run[i - 1].w_l2 * run[i - 1].w_l2) /
                       (run[i + 1].t - run[i - 1].t);
    const double rhs = pre * s.w_l2 * (c_v * x_U * s.v_norm + s.RV_U / params.eps + c_lin * c_hat);
    char name[64];
    std::snprintf(name, sizeof name, "norm growth t=%.6g", s.t);
    rep.rows.push_back(make_check(name, lhs, rhs, lhs - rhs, 0.0));
    if (!rep.rows.back().pass) ++rep.violations;
    if (rhs > 0.0) rep.tightest = std::max(rep.tightest, lhs / rhs);
  }
  return rep;
}

/// Residual of the solver's d/dt w~ (central difference of three snapshots
/// psi(t - h), psi(t), psi(t + h)) against the assembled right-hand side at t.
struct DtwCrossCheck {
  double residual = 0.0;     // || FD - RHS ||
  double fd_norm = 0.0;      // || FD ||
  double rhs_norm = 0.0;     // || RHS ||
  double wtilde_norm = 0.0;  // || w~(t) ||
};

inline DtwCrossCheck dtw_tilde_crosscheck(const std::array<const ComplexField*, 3>& psi,
                                          const std::array<SolitonState, 3>& states, double h,
                                          const ScalingParams& params, const Profile& prof,
                                          const PotentialSpec& pot, const AveragingQuadrature& q) {
  const auto& lab = psi[1]->grid;
  const GridSpec zoom = zoom_grid(lab, states[1].a, params.eps_beta());
  std::array<ComplexField, 3> wt;
  for (int k = 0; k < 3; ++k)
    wt[k] = compute_w_tilde(compute_w(*psi[k], states[k], params, prof), states[k], params, prof, zoom);
  const auto pg = transfer_profile(prof, zoom);
  const auto parts = rhs_dtw_tilde(wt[1], states[1], params, prof, pg, pot, q);
  ComplexField fd = wt[2] - wt[0];
  fd *= cplx(0.5 / h, 0.0);
  DtwCrossCheck out;
  out.fd_norm = l2_norm(fd);
  out.rhs_norm = l2_norm(parts.total);
  out.wtilde_norm = l2_norm(wt[1]);
  fd -= parts.total;
  out.residual = l2_norm(fd);
  return out;
}

}  // namespace solitary
