#pragma once

// Profiles shared across test binaries. Each is solved once per process.

#include "solitary/profile.hpp"

namespace solitary::testing {

inline NonlinearitySpec half_power() { return NonlinearitySpec{0.5, -1.0}; }

/// 3-D ground state of -Delta U - U^2 - omega U = 0 with omega close to -1.
/// Mass-subcritical, so it is the stable case used for field runs.
inline ProfileSpec smooth_profile_spec(int n_r = 4096) {
  return ProfileSpec{3, 131.0, 22.0, n_r, 1e-9, 20000};
}

inline const Profile& smooth_profile() {
  static const Profile prof = solve_profile(smooth_profile_spec(), half_power());
  return prof;
}

/// Same profile on a radial grid fine enough that the interpolated profile's
/// mass matches rho to 4e-9 (the gap closes at second order in the spacing).
inline const Profile& fine_profile() {
  static const Profile prof = [] {
    auto spec = smooth_profile_spec(131072);
    spec.tol_residual = 1e-7;
    return solve_profile(spec, half_power());
  }();
  return prof;
}

}  // namespace solitary::testing
