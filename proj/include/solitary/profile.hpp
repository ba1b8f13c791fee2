#pragma once

// Positive radial profiles U of  -Delta U + f(U^2) U - omega U = 0  with a
// prescribed squared L2 mass, plus their moment diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "solitary/error.hpp"
#include "solitary/nonlinearity.hpp"
#include "solitary/radial.hpp"

namespace solitary {

struct ProfileSpec {
  int dim = 3;
  double rho = 1.0;
  double r_max = 20.0;
  int n_r = 4096;
  double tol_residual = 1e-10;
  int max_iter = 20000;

  void validate() const {
    require(dim >= 1, ErrorKind::InvalidInput, "profile dimension must be >= 1");
    require(rho > 0.0, ErrorKind::InvalidInput, "profile mass rho must be positive");
    require(r_max > 0.0, ErrorKind::InvalidInput, "profile r_max must be positive");
    require(n_r >= 64, ErrorKind::InvalidInput, "profile needs n_r >= 64");
    require(tol_residual > 0.0, ErrorKind::InvalidInput, "tol_residual must be positive");
  }
};

/// The three decay norms  || |x| U^2 ||_1,  || |x|^2 U^2 ||_2,  || |x| |grad U| ||_2.
struct ProfileMoments {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  /// Largest fraction of any moment carried by the outer tenth of [0, r_max].
  double tail_fraction = 0.0;
  /// Set when tail_fraction exceeds 1e-6, i.e. r_max is probably too small.
  bool cutoff_warning = false;
};

struct Profile {
  RadialGrid grid;
  std::vector<double> u;
  double omega = 0.0;
  double rho = 0.0;
  NonlinearitySpec nl;
  ProfileMoments moments;
  double sup_norm = 0.0;
  int iterations = 0;
  double residual = 0.0;

  int dim() const { return grid.dim; }
  double r_max() const { return grid.r_max(); }

  RadialInterpolant interpolant() const {
    return RadialInterpolant(grid, u, omega < 0.0 ? std::sqrt(-omega) : 0.0);
  }

  /// Smallest radius beyond which U^2 stays below `rel` * max U^2.
  double support_radius(double rel = 1e-10) const {
    const double thresh = std::sqrt(rel) * sup_norm;
    for (int i = grid.n - 1; i >= 0; --i) {
      if (u[i] > thresh) return grid.r(std::min(i + 1, grid.n - 1));
    }
    return grid.r(0);
  }
};

namespace detail {

/// Coefficients of the finite-volume operator  -Delta_h  on the radial grid,
/// with U'(0) = 0 built in and a homogeneous Dirichlet ghost at r_max + h/2.
struct RadialLaplacian {
  std::vector<double> sub, diag, sup;
};

inline RadialLaplacian radial_neg_laplacian(const RadialGrid& g) {
  const int n = g.n;
  RadialLaplacian op;
  op.sub.assign(n - 1, 0.0);
  op.sup.assign(n - 1, 0.0);
  op.diag.assign(n, 0.0);
  // Finite-volume fluxes through the shell faces; the face at r = 0 has zero area.
  for (int i = 0; i < n; ++i) {
    const double scale = 1.0 / (g.h * g.weight(i));
    const double left = i == 0 ? 0.0 : g.face_area(i) * scale;
    const double right = g.face_area(i + 1) * scale;
    op.diag[i] = left + right;
    if (i > 0) op.sub[i - 1] = -left;
    if (i + 1 < n) op.sup[i] = -right;
  }
  return op;
}

inline std::vector<double> apply_operator(const RadialLaplacian& op, std::span<const double> u) {
  const std::size_t n = u.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = op.diag[i] * u[i];
    if (i > 0) acc += op.sub[i - 1] * u[i - 1];
    if (i + 1 < n) acc += op.sup[i] * u[i + 1];
    out[i] = acc;
  }
  return out;
}

inline double weighted_dot(std::span<const double> w, std::span<const double> a,
                           std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += w[i] * a[i] * b[i];
  return acc;
}

inline double mass(const RadialGrid& g, std::span<const double> u) {
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i) acc += g.weight(i) * u[i] * u[i];
  return acc;
}

inline void check_positive(std::span<const double> u, const char* stage) {
  for (double v : u) {
    if (!(v > 0.0)) throw Error(ErrorKind::SignViolation, std::string("profile lost positivity during ") + stage);
  }
}

inline std::vector<double> residual_vector(const RadialGrid& g, const RadialLaplacian& op,
                                           std::span<const double> u, double omega,
                                           const NonlinearitySpec& nl) {
  auto r = apply_operator(op, u);
  for (int i = 0; i < g.n; ++i) r[i] += nl.f(u[i] * u[i]) * u[i] - omega * u[i];
  return r;
}

inline double weighted_norm(const RadialGrid& g, std::span<const double> v) {
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i) acc += g.weight(i) * v[i] * v[i];
  return std::sqrt(acc);
}

/// omega = (int |grad U|^2 + int f(U^2) U^2) / rho on the discrete grid.
inline double rayleigh_omega(const RadialGrid& g, const RadialLaplacian& op,
                             std::span<const double> u, const NonlinearitySpec& nl) {
  const auto w = g.weights();
  const auto lu = apply_operator(op, u);
  double num = weighted_dot(w, u, lu);
  double m = 0.0;
  for (int i = 0; i < g.n; ++i) {
    num += w[i] * nl.f(u[i] * u[i]) * u[i] * u[i];
    m += w[i] * u[i] * u[i];
  }
  return num / m;
}

}  // namespace detail

/// Discrete energy  1/2 int [ |grad u|^2 + F(u^2) ]  on the radial grid.
inline double profile_energy(const RadialGrid& g, std::span<const double> u,
                             const NonlinearitySpec& nl) {
  const auto op = detail::radial_neg_laplacian(g);
  const auto w = g.weights();
  const auto lu = detail::apply_operator(op, u);
  double e = detail::weighted_dot(w, u, lu);
  for (int i = 0; i < g.n; ++i) e += w[i] * nl.F(u[i] * u[i]);
  return 0.5 * e;
}

inline double profile_energy(const Profile& prof) { return profile_energy(prof.grid, prof.u, prof.nl); }

/// || -Delta U + f(U^2) U - omega U ||_{L2} with the solver's own radial
/// finite-difference Laplacian.
inline double elliptic_residual(const Profile& prof, const NonlinearitySpec& nl) {
  const auto op = detail::radial_neg_laplacian(prof.grid);
  const auto r = detail::residual_vector(prof.grid, op, prof.u, prof.omega, nl);
  return detail::weighted_norm(prof.grid, r);
}

inline ProfileMoments profile_moments(const Profile& prof) {
  const auto& g = prof.grid;
  const auto& u = prof.u;
  const int n = g.n;
  double m1 = 0, m2 = 0, m3 = 0, t1 = 0, t2 = 0, t3 = 0;
  const double r_tail = 0.9 * g.r_max();
  for (int i = 0; i < n; ++i) {
    const double r = g.r(i);
    const double w = g.weight(i);
    const double left = i == 0 ? u[0] : u[i - 1];
    const double right = i + 1 < n ? u[i + 1] : 0.0;
    const double du = (right - left) / (2.0 * g.h);
    const double a = w * r * u[i] * u[i];
    const double b = w * std::pow(r, 4) * std::pow(u[i], 4);
    const double c = w * r * r * du * du;
    m1 += a;
    m2 += b;
    m3 += c;
    if (r > r_tail) {
      t1 += a;
      t2 += b;
      t3 += c;
    }
  }
  ProfileMoments mom;
  mom.m1 = m1;
  mom.m2 = std::sqrt(m2);
  mom.m3 = std::sqrt(m3);
  auto frac = [](double t, double m) { return m > 0.0 ? t / m : 0.0; };
  // m2 and m3 are square roots, so the tail share is measured on their squares.
  mom.tail_fraction = std::max({frac(t1, m1), frac(t2, m2), frac(t3, m3)});
  mom.cutoff_warning = mom.tail_fraction > 1e-6;
  return mom;
}

/// Builds a Profile from radial samples, deriving mass, sup norm and moments.
/// Without an explicit `omega` the discrete Rayleigh quotient is used.
inline Profile make_profile(RadialGrid grid, std::vector<double> u, const NonlinearitySpec& nl,
                            std::optional<double> omega = std::nullopt) {
  require(static_cast<int>(u.size()) == grid.n, ErrorKind::InvalidInput,
          "profile samples do not match the radial grid");
  Profile prof;
  prof.grid = grid;
  prof.u = std::move(u);
  prof.nl = nl;
  prof.rho = detail::mass(prof.grid, prof.u);
  prof.sup_norm = *std::max_element(prof.u.begin(), prof.u.end());
  prof.omega = omega ? *omega
                     : detail::rayleigh_omega(prof.grid, detail::radial_neg_laplacian(prof.grid),
                                              prof.u, nl);
  prof.moments = profile_moments(prof);
  prof.residual = elliptic_residual(prof, nl);
  return prof;
}

struct GradientFlowOptions {
  double tau = 1.0;
  double tau_max = 100.0;
  int max_iter = 20000;
  /// Stop once the elliptic residual (with the Rayleigh multiplier) is below
  /// `tol` times ||omega U||.
  double tol = 1e-2;
};

struct GradientFlowResult {
  std::vector<double> u;
  std::vector<double> energy;  // energy after each accepted step (index 0: start)
  std::vector<double> mass;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// The step size collapsed because the energy no longer decreases above round-off.
  bool stalled = false;
};

/// Projected gradient flow for  E(u) = 1/2 int [|grad u|^2 + F(u^2)]  on the
/// sphere  ||u||^2 = rho: a backward-Euler step in the Laplacian with the
/// nonlinearity explicit, followed by renormalisation. Steps that raise the
/// energy are rejected and retried with half the step.
inline GradientFlowResult gradient_flow(const RadialGrid& g, std::vector<double> u, double rho,
                                        const NonlinearitySpec& nl,
                                        const GradientFlowOptions& opt = {}) {
  const auto op = detail::radial_neg_laplacian(g);
  const auto w = g.weights();
  auto mass = [&](std::span<const double> v) { return detail::weighted_dot(w, v, v); };
  auto normalize = [&](std::vector<double>& v) {
    const double s = std::sqrt(rho / mass(v));
    for (double& x : v) x *= s;
  };
  auto energy = [&](std::span<const double> v) {
    const auto lv = detail::apply_operator(op, v);
    double e = detail::weighted_dot(w, v, lv);
    for (int i = 0; i < g.n; ++i) e += w[i] * nl.F(v[i] * v[i]);
    return 0.5 * e;
  };
  normalize(u);
  GradientFlowResult res;
  double e = energy(u);
  res.energy.push_back(e);
  res.mass.push_back(mass(u));
  double tau = opt.tau;
  std::vector<double> next(g.n), diag(g.n);
  for (int it = 0; it < opt.max_iter; ++it) {
    const double omega = detail::rayleigh_omega(g, op, u, nl);
    res.residual = detail::weighted_norm(g, detail::residual_vector(g, op, u, omega, nl));
    if (res.residual < opt.tol * std::abs(omega) * std::sqrt(rho)) {
      res.converged = true;
      break;
    }
    double e_next = 0.0;
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      for (int i = 0; i < g.n; ++i) {
        diag[i] = op.diag[i] + 1.0 / tau;
        next[i] = u[i] / tau - nl.f(u[i] * u[i]) * u[i];
      }
      solve_tridiagonal(op.sub, diag, op.sup, next);
      normalize(next);
      e_next = energy(next);
      if (e_next <= e + 1e-14 * std::abs(e)) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    detail::check_positive(next, "gradient flow");
    std::swap(u, next);
    e = e_next;
    res.energy.push_back(e);
    res.mass.push_back(mass(u));
    res.iterations = it + 1;
    tau = std::min(tau * 1.25, opt.tau_max);
  }
  res.u = std::move(u);
  return res;
}

namespace detail {

/// Petviashvili iteration for the ground state of  -Delta Q + Q = |coupling| Q^(2p+1)
/// (multiplier -1). Requires a focusing nonlinearity.
inline std::vector<double> petviashvili_ground_state(const RadialGrid& g, const NonlinearitySpec& nl) {
  require(nl.coupling < 0.0, ErrorKind::NonConvergence,
          "no positive decaying profile exists for a defocusing nonlinearity");
  auto op = radial_neg_laplacian(g);
  for (double& d : op.diag) d += 1.0;
  const auto w = g.weights();
  std::vector<double> u(g.n);
  for (int i = 0; i < g.n; ++i) u[i] = 2.0 * std::exp(-0.5 * g.r(i) * g.r(i));
  const double gamma = (2.0 * nl.p + 1.0) / (2.0 * nl.p);
  for (int it = 0; it < 500; ++it) {
    std::vector<double> nu(g.n);
    for (int i = 0; i < g.n; ++i) nu[i] = -nl.f(u[i] * u[i]) * u[i];
    const auto mu = apply_operator(op, u);
    const double s = weighted_dot(w, u, mu) / weighted_dot(w, u, nu);
    solve_tridiagonal(op.sub, op.diag, op.sup, nu);
    const double scale = std::pow(s, gamma);
    for (int i = 0; i < g.n; ++i) u[i] = scale * nu[i];
    if (std::abs(s - 1.0) < 1e-13) return u;
  }
  throw Error(ErrorKind::NonConvergence, "Petviashvili iteration did not converge");
}

/// Newton on the bordered system  { -Delta_h U + f(U^2)U - omega U = 0, |U|^2 = rho }.
inline int bordered_newton(const RadialGrid& g, std::vector<double>& u, double& omega, double rho,
                           const NonlinearitySpec& nl, double tol, int max_iter) {
  const auto op = radial_neg_laplacian(g);
  const auto w = g.weights();
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < max_iter; ++it) {
    auto r = residual_vector(g, op, u, omega, nl);
    const double m = mass(g, u);
    const double res = weighted_norm(g, r);
    if (res < tol && std::abs(m - rho) <= 1e-13 * rho) return it;
    // Round-off floor: stop once the residual no longer improves.
    if (res > 0.5 * best) {
      if (++stalled >= 3) return it;
    } else {
      stalled = 0;
    }
    best = std::min(best, res);
    std::vector<double> diag(op.diag);
    for (int i = 0; i < g.n; ++i) {
      const double s = u[i] * u[i];
      diag[i] += nl.real_linear_coeff(s) - omega;
    }
    std::vector<double> y1(g.n), y2(u);
    for (int i = 0; i < g.n; ++i) y1[i] = -r[i];
    solve_tridiagonal(op.sub, diag, op.sup, y1);
    solve_tridiagonal(op.sub, diag, op.sup, y2);
    double wuy1 = 0.0, wuy2 = 0.0;
    for (int i = 0; i < g.n; ++i) {
      wuy1 += w[i] * u[i] * y1[i];
      wuy2 += w[i] * u[i] * y2[i];
    }
    const double domega = (-(m - rho) - 2.0 * wuy1) / (2.0 * wuy2);
    for (int i = 0; i < g.n; ++i) u[i] += y1[i] + domega * y2[i];
    omega += domega;
  }
  return max_iter;
}

}  // namespace detail

/// Solves for the positive profile of mass rho.
///
/// Mass-subcritical powers (p < 2/N) run the projected gradient flow from a
/// Gaussian of mass rho, which converges to the constrained energy minimiser.
/// For p >= 2/N that flow has no minimiser to converge to, so the profile is
/// seeded from the multiplier -1 ground state rescaled to mass rho instead.
/// Both seeds are polished by Newton on the discrete equation and the mass
/// constraint. An `initial` guess that already satisfies both is returned
/// unchanged.
inline Profile solve_profile(const ProfileSpec& spec, const NonlinearitySpec& nl,
                             const std::vector<double>* initial = nullptr) {
  spec.validate();
  nl.validate(spec.dim);
  const RadialGrid g(spec.dim, spec.n_r, spec.r_max);
  const auto op = detail::radial_neg_laplacian(g);
  std::vector<double> u;
  int iterations = 0;

  if (initial) {
    require(static_cast<int>(initial->size()) == g.n, ErrorKind::InvalidInput,
            "initial profile has the wrong number of nodes");
    u = *initial;
    const double omega = detail::rayleigh_omega(g, op, u, nl);
    const double res = detail::weighted_norm(g, detail::residual_vector(g, op, u, omega, nl));
    if (res <= spec.tol_residual && std::abs(detail::mass(g, u) - spec.rho) <= 1e-10 * spec.rho) {
      detail::check_positive(u, "initialisation");
      Profile prof = make_profile(g, u, nl, omega);
      prof.iterations = 0;
      return prof;
    }
  }

  double omega = 0.0;
  const double critical_p = 2.0 / spec.dim;
  if (!initial && nl.p < critical_p) {
    // Gaussian seed with unit width, amplitude fitted to the mass.
    u.resize(g.n);
    for (int i = 0; i < g.n; ++i) u[i] = std::exp(-0.5 * g.r(i) * g.r(i));
    GradientFlowOptions opt;
    opt.max_iter = spec.max_iter;
    auto flow = gradient_flow(g, std::move(u), spec.rho, nl, opt);
    u = std::move(flow.u);
    iterations += flow.iterations;
    omega = detail::rayleigh_omega(g, op, u, nl);
  } else if (!initial) {
    // Ground state at multiplier -1 on a grid long enough for its e^{-r} tail.
    const RadialGrid gq(spec.dim, 8192, 40.0);
    const auto q = detail::petviashvili_ground_state(gq, nl);
    const double mq = detail::mass(gq, q);
    const double expo = 2.0 / nl.p - spec.dim;
    double lambda = 1.0;
    if (std::abs(expo) < 1e-12) {
      require(std::abs(spec.rho - mq) <= 1e-6 * mq, ErrorKind::NonConvergence,
              "mass-critical power: only rho = " + std::to_string(mq) + " admits a profile");
    } else {
      lambda = std::pow(spec.rho / mq, 1.0 / expo);
    }
    const RadialInterpolant qi(gq, q, 1.0);
    const double amp = std::pow(lambda, 1.0 / nl.p);
    u.resize(g.n);
    for (int i = 0; i < g.n; ++i) u[i] = amp * qi.value(lambda * g.r(i));
    omega = -lambda * lambda;
  } else {
    omega = detail::rayleigh_omega(g, op, u, nl);
  }
  detail::check_positive(u, "initialisation");

  iterations += detail::bordered_newton(g, u, omega, spec.rho, nl, 0.1 * spec.tol_residual, 60);
  detail::check_positive(u, "Newton polish");
  const double s = std::sqrt(spec.rho / detail::mass(g, u));
  for (double& x : u) x *= s;

  Profile prof = make_profile(g, std::move(u), nl);
  prof.iterations = iterations;
  if (prof.residual > spec.tol_residual) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "profile residual %.3e above tolerance %.3e", prof.residual,
                  spec.tol_residual);
    throw Error(ErrorKind::NonConvergence, msg);
  }
  return prof;
}

}  // namespace solitary
