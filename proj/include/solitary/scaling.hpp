#pragma once

// Scaling exponents of the semiclassical problem and their admissibility
// algebra, plus the two exact rescalings of the equation.

#include <cmath>
#include <string>
#include <vector>

#include "solitary/error.hpp"

namespace solitary {

/// Exponents of  i eps psi_t + eps^2 Delta psi - f(eps^(-2 alpha) |psi|^2) psi = V psi
/// with datum  eps^gamma U(eps^(-beta)(x - a0)) e^{(i/eps)(...)}.
struct ScalingParams {
  int dim = 3;
  double p = 0.5;
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 0.0;
  double eps = 0.3;
  /// Error exponent, 0 < eta < delta.
  double eta = 0.3;

  double delta() const { return 1.0 + gamma + beta * (0.5 * dim - 2.0); }
  double eps_pow(double e) const { return std::pow(eps, e); }
  double eps_beta() const { return eps_pow(beta); }
  /// eps^(2 gamma + beta N), the charge of the approximate soliton per unit rho.
  double charge_scale() const { return eps_pow(2.0 * gamma + beta * dim); }
};

struct ParamReport {
  double delta = 0.0;
  /// beta - (1 + (alpha - gamma) p)
  double exponent_relation_residual = 0.0;
  bool dim_ok = false;
  bool exponent_relation_ok = false;
  bool beta_ok = false;
  bool alpha_gamma_ok = false;
  /// beta < 2 gamma + 2 when N = 3 (vacuous otherwise).
  bool dim3_beta_ok = false;
  bool delta_positive = false;
  bool eta_ok = false;
  /// delta > N/2, needed for the rescaled problem's error bound to decay.
  bool delta_exceeds_half_dim = false;
  bool balanced_case = false;
  /// Human-readable form of the delta > N/2 criterion for this dimension.
  std::string delta_condition_form;
  std::vector<std::string> failures;

  /// All hypotheses of the approximation theorem hold (delta > N/2 is not one of them).
  bool pass() const { return failures.empty(); }
};

inline ParamReport validate_params(const ScalingParams& s) {
  ParamReport r;
  r.delta = s.delta();
  r.exponent_relation_residual = s.beta - (1.0 + (s.alpha - s.gamma) * s.p);
  r.dim_ok = s.dim >= 3;
  r.exponent_relation_ok = std::abs(r.exponent_relation_residual) <= 1e-12;
  r.beta_ok = s.beta >= 1.0;
  r.alpha_gamma_ok = s.alpha >= s.gamma && s.gamma >= 0.0;
  r.dim3_beta_ok = s.dim != 3 || s.beta < 2.0 * s.gamma + 2.0;
  r.delta_positive = r.delta > 0.0;
  r.eta_ok = s.eta > 0.0 && s.eta < r.delta;
  const double half_n = 0.5 * s.dim;
  r.delta_exceeds_half_dim = r.delta > half_n;
  r.balanced_case = s.alpha == s.gamma && s.beta == 1.0;
  if (s.dim == 3) {
    r.delta_condition_form = "beta < 2 gamma - 1";
  } else if (s.dim >= 4) {
    r.delta_condition_form = "beta (N/2 - 2) + gamma > N/2 - 1";
  } else {
    r.delta_condition_form = "delta > N/2";
  }

  if (!r.dim_ok) r.failures.push_back("dimension N must be >= 3");
  if (!r.exponent_relation_ok) r.failures.push_back("beta != 1 + (alpha - gamma) p");
  if (!r.beta_ok) r.failures.push_back("beta < 1");
  if (!r.alpha_gamma_ok) r.failures.push_back("need alpha >= gamma >= 0");
  if (!r.dim3_beta_ok) r.failures.push_back("N = 3 needs beta < 2 gamma + 2");
  if (!r.delta_positive) r.failures.push_back("delta <= 0");
  if (!r.eta_ok) r.failures.push_back("need 0 < eta < delta");
  if (!(s.eps > 0.0 && s.eps < 1.0)) r.failures.push_back("eps must lie in (0, 1)");
  return r;
}

inline void require_valid(const ScalingParams& s) {
  const auto rep = validate_params(s);
  if (!rep.pass()) {
    std::string msg = "inadmissible scaling parameters:";
    for (const auto& f : rep.failures) msg += " " + f + ";";
    throw Error(ErrorKind::InvalidInput, msg);
  }
}

enum class RescaleMode { unit_eps, unscaled_nonlinearity };

/// Result of an exact rescaling: the new exponents and the affine map
///   t_new = t / time_factor,  x_new = x / space_factor,
///   psi_new = amplitude_factor * psi.
struct Rescaled {
  ScalingParams params;
  double time_factor = 1.0;
  double space_factor = 1.0;
  double amplitude_factor = 1.0;
  /// Exponent of the validity horizon, T ~ eps^horizon_exponent.
  double horizon_exponent = 0.0;
  /// Exponent of the L2 error for the configured eta.
  double error_exponent = 0.0;
  /// Best achievable error exponent (eta -> delta).
  double best_error_exponent = 0.0;
  bool delta_exceeds_half_dim = false;
};

inline Rescaled rescale_problem(const ScalingParams& s, RescaleMode mode) {
  Rescaled out;
  out.params = s;
  const double delta = s.delta();
  if (mode == RescaleMode::unit_eps) {
    // psi~(t, x) = psi(eps t, eps x): same exponents, V(eps x) in place of V(x).
    out.time_factor = s.eps;
    out.space_factor = s.eps;
    out.amplitude_factor = 1.0;
    out.horizon_exponent = s.eta - delta - 1.0;
    out.error_exponent = s.eta - 0.5 * s.dim;
    out.best_error_exponent = delta - 0.5 * s.dim;
    out.delta_exceeds_half_dim = delta > 0.5 * s.dim;
  } else {
    // eps^(-alpha) psi solves the problem with an unscaled nonlinearity.
    out.params.gamma = s.gamma - s.alpha;
    out.params.alpha = 0.0;
    out.amplitude_factor = std::pow(s.eps, -s.alpha);
    out.horizon_exponent = s.eta - delta;
    out.error_exponent = s.eta - s.alpha;
    out.best_error_exponent = delta - s.alpha;
    out.delta_exceeds_half_dim = delta > 0.5 * s.dim;
  }
  return out;
}

}  // namespace solitary
