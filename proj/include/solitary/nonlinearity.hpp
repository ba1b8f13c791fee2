#pragma once

#include <cmath>
#include <limits>

#include "solitary/error.hpp"

namespace solitary {

/// Local power nonlinearity f(s) = coupling * s^p with antiderivative
/// F(s) = coupling * s^(p+1) / (p+1). A negative coupling is focusing, which
/// is the case that admits positive decaying profiles.
struct NonlinearitySpec {
  double p = 1.0;
  double coupling = -1.0;

  double f(double s) const { return coupling * power(s); }

  /// f'(s). Diverges at s = 0 when p < 1; prefer real_linear_coeff near zero.
  double df(double s) const {
    if (p == 1.0) return coupling;
    return coupling * p * std::pow(s, p - 1.0);
  }

  double F(double s) const { return coupling * power(s) * s / (p + 1.0); }

  /// 2 s f'(s) + f(s), the coefficient of Re(v) in the real-linear part of
  /// v -> f(|U+v|^2)(U+v) at s = U^2.
  double real_linear_coeff(double s) const { return coupling * (2.0 * p + 1.0) * power(s); }

  /// Upper end of the admissible range 0 < p < 2/(N-2) (infinite for N < 3).
  static double max_admissible_p(int dim) {
    return dim >= 3 ? 2.0 / (dim - 2) : std::numeric_limits<double>::infinity();
  }

  bool admissible(int dim) const { return p > 0.0 && p < max_admissible_p(dim); }

  void validate(int dim) const {
    require(p > 0.0, ErrorKind::InvalidInput, "nonlinearity degree p must be positive");
    require(admissible(dim), ErrorKind::InvalidInput,
            "nonlinearity degree p outside (0, 2/(N-2))");
    require(coupling != 0.0, ErrorKind::InvalidInput, "nonlinearity coupling must be nonzero");
  }

 private:
  double power(double s) const {
    if (p == 1.0) return s;
    if (p == 0.5) return std::sqrt(s);
    return std::pow(s, p);
  }
};

}  // namespace solitary
