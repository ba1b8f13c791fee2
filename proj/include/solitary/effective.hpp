#pragma once

// Finite-dimensional dynamics of the soliton centre: the U^2-averaged
// potential force, the trajectory system with its phase correction, the
// mismatch v(t), the Taylor remainder R_V and the effective Hamiltonian.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "solitary/error.hpp"
#include "solitary/grid.hpp"
#include "solitary/potential.hpp"
#include "solitary/profile.hpp"
#include "solitary/scaling.hpp"

namespace solitary {

struct SolitonState {
  double t = 0.0;
  Vec3 a{0.0, 0.0, 0.0};
  Vec3 xi{0.0, 0.0, 0.0};
  double theta = 0.0;
  double omega_eps = 0.0;

  double vartheta() const { return theta - omega_eps; }
};

inline double norm(const Vec3& v, int dim) { return std::sqrt(PotentialSpec::norm2(v, dim)); }

/// Tensor midpoint rule for  int g(x) U^2(x) dx / rho  on the cube of
/// half-width `window` around the origin. Weights below 1e-18 of the peak
/// weight are dropped; the sum is normalised by the discrete mass so that
/// linear g is averaged exactly.
class AveragingQuadrature {
 public:
  AveragingQuadrature() = default;

  AveragingQuadrature(const Profile& prof, int n_per_axis, double window = 0.0)
      : dim_(prof.dim()), rho_(prof.rho) {
    require(n_per_axis >= 4, ErrorKind::InvalidInput, "averaging quadrature needs >= 4 nodes per axis");
    if (window <= 0.0) window = std::min(prof.r_max(), prof.support_radius(1e-16));
    h_ = 2.0 * window / n_per_axis;
    const auto interp = prof.interpolant();
    const double cell = std::pow(h_, dim_);
    std::size_t total = 1;
    for (int a = 0; a < dim_; ++a) total *= static_cast<std::size_t>(n_per_axis);
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    nodes.reserve(total);
    weights.reserve(total);
    double peak = 0.0;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rem = idx;
      Vec3 x{0.0, 0.0, 0.0};
      double r2 = 0.0;
      for (int a = dim_ - 1; a >= 0; --a) {
        const int j = static_cast<int>(rem % n_per_axis);
        rem /= n_per_axis;
        x[a] = -window + (j + 0.5) * h_;
        r2 += x[a] * x[a];
      }
      const double u = interp.value(std::sqrt(r2));
      const double w = u * u * cell;
      peak = std::max(peak, w);
      nodes.push_back(x);
      weights.push_back(w);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (weights[i] >= 1e-18 * peak) {
        nodes_.push_back(nodes[i]);
        weights_.push_back(weights[i]);
      }
    }
    rho_q_ = 0.0;
    for (double w : weights_) rho_q_ += w;
  }

  int dim() const { return dim_; }
  double spacing() const { return h_; }
  double discrete_mass() const { return rho_q_; }
  double profile_mass() const { return rho_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Throws SingularityOnTrajectory when a is within two lab-frame cell
  /// diameters of the singular point.
  void check_clearance(const Vec3& a, double eps_beta, const PotentialSpec& pot) const {
    if (!pot.singular()) return;
    const double diam = eps_beta * h_ * std::sqrt(static_cast<double>(dim_));
    if (norm(a, dim_) < 2.0 * diam) {
      throw Error(ErrorKind::SingularityOnTrajectory,
                  "trajectory passes within two quadrature cells of the singular point");
    }
  }

  /// (1/rho) int grad V(a + eps^beta x) U^2(x) dx
  Vec3 averaged_gradient(const Vec3& a, double eps_beta, const PotentialSpec& pot) const {
    check_clearance(a, eps_beta, pot);
    Vec3 acc{0.0, 0.0, 0.0};
    if (pot.kind == PotentialKind::Zero) return acc;
    const double half = 0.5 * eps_beta * h_;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Vec3 y = lab_point(a, eps_beta, nodes_[i]);
      const Vec3 g = (pot.singular() && near_singular_point(y, half, dim_))
                         ? cell_average_gradient(pot, dim_, y, half)
                         : pot.gradient(y, dim_);
      for (int c = 0; c < dim_; ++c) acc[c] += weights_[i] * g[c];
    }
    for (int c = 0; c < dim_; ++c) acc[c] /= rho_q_;
    return acc;
  }

  /// (1/rho) int [grad V(a + eps^beta x) - grad V(a)] U^2(x) dx, summed directly.
  Vec3 mismatch(const Vec3& a, double eps_beta, const PotentialSpec& pot) const {
    check_clearance(a, eps_beta, pot);
    Vec3 acc{0.0, 0.0, 0.0};
    if (pot.kind == PotentialKind::Zero) return acc;
    const Vec3 ga = pot.gradient(a, dim_);
    const double half = 0.5 * eps_beta * h_;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Vec3 y = lab_point(a, eps_beta, nodes_[i]);
      const Vec3 g = (pot.singular() && near_singular_point(y, half, dim_))
                         ? cell_average_gradient(pot, dim_, y, half)
                         : pot.gradient(y, dim_);
      for (int c = 0; c < dim_; ++c) acc[c] += weights_[i] * (g[c] - ga[c]);
    }
    for (int c = 0; c < dim_; ++c) acc[c] /= rho_q_;
    return acc;
  }

  /// (1/rho) int V(a + eps^beta x) U^2(x) dx
  double averaged_value(const Vec3& a, double eps_beta, const PotentialSpec& pot) const {
    check_clearance(a, eps_beta, pot);
    if (pot.kind == PotentialKind::Zero) return 0.0;
    const double half = 0.5 * eps_beta * h_;
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Vec3 y = lab_point(a, eps_beta, nodes_[i]);
      const double v = (pot.singular() && near_singular_point(y, half, dim_))
                           ? cell_average_value(pot, dim_, y, half)
                           : pot.value(y, dim_);
      acc += weights_[i] * v;
    }
    return acc / rho_q_;
  }

 private:
  Vec3 lab_point(const Vec3& a, double eps_beta, const Vec3& x) const {
    Vec3 y{0.0, 0.0, 0.0};
    for (int c = 0; c < dim_; ++c) y[c] = a[c] + eps_beta * x[c];
    return y;
  }

  int dim_ = 3;
  double rho_ = 0.0;
  double rho_q_ = 0.0;
  double h_ = 0.0;
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
};

inline Vec3 averaged_grad_potential(const Vec3& a, double eps_beta, const AveragingQuadrature& q,
                                    const PotentialSpec& pot) {
  return q.averaged_gradient(a, eps_beta, pot);
}

/// v(t) = (1/rho) int [grad V(a + eps^beta x) - grad V(a)] U^2 dx.
inline Vec3 v_of_t(const Vec3& a, double eps_beta, const AveragingQuadrature& q,
                   const PotentialSpec& pot) {
  return q.mismatch(a, eps_beta, pot);
}

/// R_V(x~) = V(a + eps^beta x~) - V(a) - eps^beta x~ . grad V(a) on a grid in x~.
inline RealField R_V_field(const Vec3& a, double eps_beta, const PotentialSpec& pot,
                           const GridSpec& grid) {
  const int dim = grid.dim;
  if (pot.singular()) {
    // The singular point sits at x~ = -a / eps^beta.
    bool inside = true;
    for (int c = 0; c < dim; ++c) {
      const double s = -a[c] / eps_beta;
      inside = inside && s >= grid.center[c] - grid.L && s <= grid.center[c] + grid.L;
    }
    require(!inside, ErrorKind::SingularityInWindow,
            "the singular point of V lies inside the sampled window");
  }
  const double va = pot.value(a, dim);
  const Vec3 ga = pot.gradient(a, dim);
  return sample_real(grid, [&](const Vec3& x) {
    Vec3 y{0.0, 0.0, 0.0};
    double lin = 0.0;
    for (int c = 0; c < dim; ++c) {
      y[c] = a[c] + eps_beta * x[c];
      lin += eps_beta * x[c] * ga[c];
    }
    return pot.value(y, dim) - va - lin;
  });
}

/// int (|grad U|^2 + F(U^2)) / 2 on the profile's radial grid.
inline double internal_energy(const Profile& prof) { return profile_energy(prof); }

/// H restricted to the soliton manifold:
///   eps^(2 gamma + beta N) [ rho |xi|^2 / 8 + (1/2) int V(a + eps^beta x) U^2
///                            + eps^(2 - 2 beta) E_internal(U) ].
inline double effective_hamiltonian(const SolitonState& s, const ScalingParams& params,
                                    const Profile& prof, const AveragingQuadrature& q,
                                    const PotentialSpec& pot) {
  const int dim = params.dim;
  const double scale = params.charge_scale();
  const double kinetic = 0.125 * prof.rho * PotentialSpec::norm2(s.xi, dim);
  const double potential = 0.5 * prof.rho * q.averaged_value(s.a, params.eps_beta(), pot);
  const double internal = params.eps_pow(2.0 - 2.0 * params.beta) * internal_energy(prof);
  return scale * (kinetic + potential + internal);
}

/// const(U): the part of H_M that does not depend on sigma.
inline double hamiltonian_constant(const ScalingParams& params, const Profile& prof) {
  return params.charge_scale() * params.eps_pow(2.0 - 2.0 * params.beta) * internal_energy(prof);
}

struct TrajectoryOptions {
  double T = 1.0;
  double dt = 1e-3;
  /// Compare one step against two half steps every `monitor_every` steps.
  int monitor_every = 10;
  /// Reject the run when the step-doubling local error estimate exceeds this.
  double step_tolerance = 1e-9;
};

struct Trajectory {
  std::vector<SolitonState> states;
  std::vector<double> hamiltonian;
  std::vector<double> abar_running;
  double abar = 0.0;
  double max_step_error = 0.0;
  /// max |H_M(t) - H_M(0)| / |H_M(0)|
  double hamiltonian_drift = 0.0;
};

namespace detail {

struct OdeState {
  Vec3 a{0.0, 0.0, 0.0};
  Vec3 xi{0.0, 0.0, 0.0};
  double theta = 0.0;
  double omega_eps = 0.0;
};

inline OdeState axpy(const OdeState& y, double h, const OdeState& k, int dim) {
  OdeState out = y;
  for (int c = 0; c < dim; ++c) {
    out.a[c] += h * k.a[c];
    out.xi[c] += h * k.xi[c];
  }
  out.theta += h * k.theta;
  out.omega_eps += h * k.omega_eps;
  return out;
}

inline double distance(const OdeState& x, const OdeState& y, int dim) {
  double d = std::max(std::abs(x.theta - y.theta), std::abs(x.omega_eps - y.omega_eps));
  for (int c = 0; c < dim; ++c) {
    d = std::max(d, std::abs(x.a[c] - y.a[c]));
    d = std::max(d, std::abs(x.xi[c] - y.xi[c]));
  }
  return d;
}

}  // namespace detail

/// Classical RK4 for
///   a' = xi,  xi' = -2 <grad V>(a),  theta' = 0,
///   omega_eps' = eps^(2 - 2 beta) omega - |xi|^2 / 4 + V(a),
/// with omega_eps(0) given by s0 (normally 0). A negative dt integrates backwards.
inline Trajectory integrate_trajectory(const SolitonState& s0, const ScalingParams& params,
                                       const Profile& prof, const AveragingQuadrature& q,
                                       const PotentialSpec& pot, const TrajectoryOptions& opt) {
  require(opt.dt != 0.0, ErrorKind::InvalidInput, "trajectory dt must be nonzero");
  require(opt.T >= 0.0, ErrorKind::InvalidInput, "trajectory horizon must be non-negative");
  const int dim = params.dim;
  const double eb = params.eps_beta();
  const double phase_rate = params.eps_pow(2.0 - 2.0 * params.beta) * prof.omega;

  auto rhs = [&](const detail::OdeState& y) {
    detail::OdeState k;
    const Vec3 g = q.averaged_gradient(y.a, eb, pot);
    for (int c = 0; c < dim; ++c) {
      k.a[c] = y.xi[c];
      k.xi[c] = -2.0 * g[c];
    }
    k.theta = 0.0;
    k.omega_eps = phase_rate - 0.25 * PotentialSpec::norm2(y.xi, dim) + pot.value(y.a, dim);
    return k;
  };
  auto rk4 = [&](const detail::OdeState& y, double h) {
    const auto k1 = rhs(y);
    const auto k2 = rhs(detail::axpy(y, 0.5 * h, k1, dim));
    const auto k3 = rhs(detail::axpy(y, 0.5 * h, k2, dim));
    const auto k4 = rhs(detail::axpy(y, h, k3, dim));
    detail::OdeState out = y;
    for (int c = 0; c < dim; ++c) {
      out.a[c] += h / 6.0 * (k1.a[c] + 2 * k2.a[c] + 2 * k3.a[c] + k4.a[c]);
      out.xi[c] += h / 6.0 * (k1.xi[c] + 2 * k2.xi[c] + 2 * k3.xi[c] + k4.xi[c]);
    }
    out.omega_eps += h / 6.0 * (k1.omega_eps + 2 * k2.omega_eps + 2 * k3.omega_eps + k4.omega_eps);
    return out;
  };

  const long steps = std::lround(opt.T / std::abs(opt.dt));
  Trajectory traj;
  traj.states.reserve(steps + 1);
  detail::OdeState y{s0.a, s0.xi, s0.theta, s0.omega_eps};
  auto record = [&](double t) {
    SolitonState s{t, y.a, y.xi, y.theta, y.omega_eps};
    traj.states.push_back(s);
    traj.hamiltonian.push_back(effective_hamiltonian(s, params, prof, q, pot));
    const double r = norm(y.a, dim);
    traj.abar = traj.states.size() == 1 ? r : std::min(traj.abar, r);
    traj.abar_running.push_back(traj.abar);
  };
  record(s0.t);
  for (long n = 0; n < steps; ++n) {
    detail::OdeState next = rk4(y, opt.dt);
    if (opt.monitor_every > 0 && n % opt.monitor_every == 0) {
      const auto half = rk4(rk4(y, 0.5 * opt.dt), 0.5 * opt.dt);
      const double err = detail::distance(next, half, dim) / 15.0;
      traj.max_step_error = std::max(traj.max_step_error, err);
      if (err > opt.step_tolerance) {
        throw Error(ErrorKind::StepRejected, "RK4 step-doubling error estimate above tolerance");
      }
    }
    y = next;
    record(s0.t + (n + 1) * opt.dt);
  }
  const double h0 = traj.hamiltonian.front();
  for (double h : traj.hamiltonian)
    traj.hamiltonian_drift = std::max(traj.hamiltonian_drift, std::abs(h - h0) / std::abs(h0));
  return traj;
}

/// Straight-line reference for V = 0: a = a0 + xi0 t and
/// vartheta - theta0 = (|xi0|^2 / 4 - eps^(2 - 2 beta) omega) t.
inline SolitonState free_soliton_state(const SolitonState& s0, const ScalingParams& params,
                                       const Profile& prof, double t) {
  SolitonState s = s0;
  s.t = t;
  for (int c = 0; c < params.dim; ++c) s.a[c] = s0.a[c] + s0.xi[c] * t;
  const double rate = 0.25 * PotentialSpec::norm2(s0.xi, params.dim) -
                      params.eps_pow(2.0 - 2.0 * params.beta) * prof.omega;
  s.omega_eps = s0.omega_eps - rate * t;
  return s;
}

}  // namespace solitary
