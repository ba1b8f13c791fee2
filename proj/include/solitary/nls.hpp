#pragma once

// Strang-split Fourier stepping for
//   i eps psi_t + eps^2 Delta psi - f(eps^(-2 alpha) |psi|^2) psi = V psi
// on a periodic box, the soliton initial datum, and conserved-quantity monitors.

#include <cmath>
#include <functional>
#include <vector>

#include "solitary/effective.hpp"
#include "solitary/grid.hpp"
#include "solitary/nonlinearity.hpp"
#include "solitary/potential.hpp"
#include "solitary/profile.hpp"
#include "solitary/scaling.hpp"

namespace solitary {

/// Radius beyond which U^2 < 1e-10 U(0)^2.
inline double soliton_support_radius(const Profile& prof) { return prof.support_radius(1e-10); }

/// eps^gamma U(eps^(-beta)(x - a0)) exp((i/eps)(1/2 (x - a0).xi0 + theta0)).
inline ComplexField init_soliton_field(const Profile& prof, const SolitonState& s0,
                                       const ScalingParams& params, const GridSpec& grid) {
  grid.validate();
  require(grid.dim == params.dim && prof.dim() == params.dim, ErrorKind::InvalidInput,
          "profile, grid and parameters disagree on the dimension");
  const double eb = params.eps_beta();
  const double reach = eb * soliton_support_radius(prof);
  for (int c = 0; c < grid.dim; ++c) {
    const double lo = grid.center[c] - grid.L, hi = grid.center[c] + grid.L;
    if (s0.a[c] - reach < lo || s0.a[c] + reach > hi) {
      throw Error(ErrorKind::BoxTooSmall, "the soliton support does not fit in the box");
    }
  }
  const auto interp = prof.interpolant();
  const double amp = params.eps_pow(params.gamma);
  const double eps = params.eps;
  return sample_complex(grid, [&](const Vec3& x) {
    double r2 = 0.0, phase = 0.0;
    for (int c = 0; c < grid.dim; ++c) {
      const double y = x[c] - s0.a[c];
      r2 += y * y;
      phase += 0.5 * y * s0.xi[c];
    }
    phase = (phase + s0.theta) / eps;
    return amp * interp.value(std::sqrt(r2) / eb) * std::exp(cplx(0.0, phase));
  });
}

inline double charge(const ComplexField& psi) { return l2_norm_squared(psi); }

/// (1/2) int [eps^2 |grad psi|^2 + V |psi|^2 + eps^(2 alpha) F(eps^(-2 alpha) |psi|^2)],
/// gradient term by Parseval. No resolution check.
inline double hamiltonian_unchecked(const ComplexField& psi, const ScalingParams& params,
                                    const RealField& V, const NonlinearitySpec& nl) {
  require_same_grid(psi.grid, V.grid);
  const auto& g = psi.grid;
  ComplexField spec = psi;
  fft_forward(spec);
  double grad = 0.0;
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    const auto j = g.unflatten(idx);
    double k2 = 0.0;
    for (int a = 0; a < g.dim; ++a) k2 += g.wavenumber(j[a]) * g.wavenumber(j[a]);
    grad += k2 * std::norm(spec.data[idx]);
  }
  grad *= g.cell_volume() / static_cast<double>(spec.size());
  const double scale = params.eps_pow(-2.0 * params.alpha);
  double local = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double m = std::norm(psi.data[i]);
    local += V.data[i] * m + nl.F(scale * m) / scale;
  }
  local *= g.cell_volume();
  return 0.5 * (params.eps * params.eps * grad + local);
}

/// As hamiltonian_unchecked, but refuses fields whose spectral tail exceeds 1e-8.
inline double hamiltonian(const ComplexField& psi, const ScalingParams& params, const RealField& V,
                          const NonlinearitySpec& nl) {
  require(spectral_tail(psi) <= 1e-8, ErrorKind::UnderResolved,
          "field has more than 1e-8 of its mass beyond 2/3 of the grid's wavenumber range");
  return hamiltonian_unchecked(psi, params, V, nl);
}

/// Strang splitting with the potential sampled once: half local step,
/// full kinetic step, half local step. Each substep is unitary on the grid.
class StrangStepper {
 public:
  StrangStepper(const GridSpec& grid, const ScalingParams& params, RealField V,
                const NonlinearitySpec& nl, double dt)
      : grid_(grid), params_(params), V_(std::move(V)), nl_(nl), dt_(dt) {
    require(dt > 0.0, ErrorKind::InvalidInput, "time step must be positive");
    require_same_grid(grid_, V_.grid);
    kinetic_.resize(grid_.size());
    for (std::size_t idx = 0; idx < kinetic_.size(); ++idx) {
      const auto j = grid_.unflatten(idx);
      double k2 = 0.0;
      for (int a = 0; a < grid_.dim; ++a) k2 += grid_.wavenumber(j[a]) * grid_.wavenumber(j[a]);
      kinetic_[idx] = std::exp(cplx(0.0, -dt_ * params_.eps * k2));
    }
    nl_scale_ = params_.eps_pow(-2.0 * params_.alpha);
  }

  double dt() const { return dt_; }
  const RealField& potential() const { return V_; }

  void step(ComplexField& psi) const {
    require_same_grid(psi.grid, grid_);
    local_half_step(psi);
    fft_forward(psi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi.data[i] *= kinetic_[i];
    fft_inverse(psi);
    local_half_step(psi);
  }

 private:
  void local_half_step(ComplexField& psi) const {
    const double c = -0.5 * dt_ / params_.eps;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double m = std::norm(psi.data[i]);
      const double phase = c * (V_.data[i] + nl_.f(nl_scale_ * m));
      psi.data[i] *= cplx(std::cos(phase), std::sin(phase));
    }
  }

  GridSpec grid_;
  ScalingParams params_;
  RealField V_;
  NonlinearitySpec nl_;
  double dt_;
  double nl_scale_ = 1.0;
  std::vector<cplx> kinetic_;
};

inline ComplexField strang_step(ComplexField psi, double dt, const ScalingParams& params,
                                const RealField& V, const NonlinearitySpec& nl) {
  StrangStepper stepper(psi.grid, params, V, nl, dt);
  stepper.step(psi);
  return psi;
}

struct MonitorSample {
  double t = 0.0;
  double charge = 0.0;
  double hamiltonian = 0.0;
  double spectral_tail = 0.0;
};

struct EvolveOptions {
  double T = 0.0;
  double dt = 1e-3;
  /// Steps between snapshots (0: only the initial and final states).
  int snapshot_every = 0;
  double max_charge_drift = 1e-8;
  double max_spectral_tail = 1e-4;
};

using SnapshotFn = std::function<void(double t, const ComplexField& psi, const MonitorSample& mon)>;

/// Steps psi to time T, calling on_snapshot at t = 0, every snapshot_every
/// steps, and at T. Throws MonitorBreach when the charge drifts or the
/// spectrum reaches the grid's edge.
inline std::vector<MonitorSample> evolve(ComplexField psi, const ScalingParams& params,
                                         const RealField& V, const NonlinearitySpec& nl,
                                         const EvolveOptions& opt, const SnapshotFn& on_snapshot) {
  require(opt.T >= 0.0, ErrorKind::InvalidInput, "evolution horizon must be non-negative");
  std::vector<MonitorSample> log;
  const double q0 = charge(psi);
  auto observe = [&](double t) {
    MonitorSample m{t, charge(psi), hamiltonian_unchecked(psi, params, V, nl), spectral_tail(psi)};
    log.push_back(m);
    if (on_snapshot) on_snapshot(t, psi, m);
    if (std::abs(m.charge - q0) > opt.max_charge_drift * q0) {
      throw Error(ErrorKind::MonitorBreach, "charge drift above tolerance");
    }
    if (m.spectral_tail > opt.max_spectral_tail) {
      throw Error(ErrorKind::MonitorBreach, "spectral tail above tolerance: field under-resolved");
    }
  };
  observe(0.0);
  if (opt.T == 0.0) return log;
  const long steps = std::lround(opt.T / opt.dt);
  require(steps >= 1, ErrorKind::InvalidInput, "evolution horizon shorter than one step");
  StrangStepper stepper(psi.grid, params, V, nl, opt.dt);
  for (long n = 1; n <= steps; ++n) {
    stepper.step(psi);
    const bool snap = n == steps || (opt.snapshot_every > 0 && n % opt.snapshot_every == 0);
    if (snap) observe(n * opt.dt);
  }
  return log;
}

/// Convenience form that keeps every snapshot in memory.
inline std::vector<std::pair<double, ComplexField>> evolve_collect(
    const ComplexField& psi, const ScalingParams& params, const RealField& V,
    const NonlinearitySpec& nl, const EvolveOptions& opt) {
  std::vector<std::pair<double, ComplexField>> out;
  evolve(psi, params, V, nl, opt,
         [&](double t, const ComplexField& f, const MonitorSample&) { out.emplace_back(t, f); });
  return out;
}

}  // namespace solitary
