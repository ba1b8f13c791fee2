#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "solitary/profile.hpp"

using namespace solitary;

namespace {

NonlinearitySpec cubic() { return NonlinearitySpec{1.0, -1.0}; }

// Closed-form focusing cubic soliton on the line: sqrt(2) k sech(k x), omega = -k^2.
double sech_profile(double k, double x) { return std::sqrt(2.0) * k / std::cosh(k * x); }

Profile sech_samples(double k, double r_max, int n) {
  RadialGrid g(1, n, r_max);
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = sech_profile(k, g.r(i));
  return make_profile(g, u, cubic(), -k * k);
}

// Residual with the shell-volume stencil written out independently of the library.
double independent_residual(const Profile& prof) {
  const auto& g = prof.grid;
  const int d = g.dim;
  const double area = sphere_area(d);
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double r_in = i * g.h, r_out = (i + 1) * g.h;
    const double vol = area * (std::pow(r_out, d) - std::pow(r_in, d)) / d;
    const double u = prof.u[i];
    const double up = i + 1 < g.n ? prof.u[i + 1] : 0.0;
    const double flux_out = area * std::pow(r_out, d - 1) * (up - u) / g.h;
    const double flux_in = i == 0 ? 0.0 : area * std::pow(r_in, d - 1) * (u - prof.u[i - 1]) / g.h;
    const double lap = (flux_out - flux_in) / vol;
    const double res = -lap - u * u * u - prof.omega * u;
    acc += vol * res * res;
  }
  return std::sqrt(acc);
}

}  // namespace

TEST(Nonlinearity, AntiderivativeMatchesByFiniteDifferences) {
  for (double p : {0.5, 0.6, 1.0, 1.5}) {
    NonlinearitySpec nl{p, -1.0};
    for (double s : {0.3, 1.0, 2.7}) {
      const double h = 1e-5 * s;
      EXPECT_NEAR((nl.F(s + h) - nl.F(s - h)) / (2 * h), nl.f(s), 1e-8 * std::abs(nl.f(s)));
      EXPECT_NEAR((nl.f(s + h) - nl.f(s - h)) / (2 * h), nl.df(s), 1e-7 * std::abs(nl.df(s)));
    }
  }
}

TEST(Nonlinearity, AdmissibleRangeInThreeDimensions) {
  EXPECT_TRUE(NonlinearitySpec(1.0, -1.0).admissible(3));
  EXPECT_FALSE(NonlinearitySpec(2.0, -1.0).admissible(3));
  EXPECT_FALSE(NonlinearitySpec(0.0, -1.0).admissible(3));
  EXPECT_THROW(NonlinearitySpec(2.5, -1.0).validate(3), Error);
}

TEST(ProfileSolver, ReproducesOneDimensionalSech) {
  const double k = 1.0;
  ProfileSpec spec{1, 4.0 * k, 30.0, 16384, 1e-9, 20000};
  const Profile prof = solve_profile(spec, cubic());
  double err = 0.0, norm = 0.0;
  for (int i = 0; i < prof.grid.n; ++i) {
    const double exact = sech_profile(k, prof.grid.r(i));
    err += prof.grid.weight(i) * std::pow(prof.u[i] - exact, 2);
    norm += prof.grid.weight(i) * exact * exact;
  }
  EXPECT_LE(std::sqrt(err / norm), 1e-6);
  EXPECT_NEAR(prof.omega, -k * k, 1e-5);
  EXPECT_LT(prof.omega, 0.0);
}

TEST(ProfileSolver, ThreeDimensionalCubicResidualAndMass) {
  ProfileSpec spec{3, 1.0, 3.0, 4096, 1e-8, 20000};
  const Profile prof = solve_profile(spec, cubic());
  EXPECT_LE(elliptic_residual(prof, cubic()), 1e-8);
  EXPECT_LE(independent_residual(prof), 1e-8);
  double mass = 0.0;
  for (int i = 0; i < prof.grid.n; ++i)
    mass += 4.0 * std::numbers::pi / 3.0 *
            (std::pow((i + 1) * prof.grid.h, 3) - std::pow(i * prof.grid.h, 3)) * prof.u[i] * prof.u[i];
  EXPECT_NEAR(mass, 1.0, 1e-10);
  for (int i = 0; i < prof.grid.n; ++i) {
    ASSERT_GT(prof.u[i], 0.0);
    if (i > 0) {
      ASSERT_LE(prof.u[i], prof.u[i - 1]);
    }
  }
}

TEST(ProfileSolver, ConvergedGuessIsAFixedPoint) {
  ProfileSpec spec{3, 18.0, 20.0, 2048, 1e-8, 20000};
  const Profile first = solve_profile(spec, cubic());
  const Profile again = solve_profile(spec, cubic(), &first.u);
  EXPECT_LE(again.iterations, 2);
  for (int i = 0; i < first.grid.n; ++i) EXPECT_NEAR(again.u[i], first.u[i], 1e-12);
}

TEST(ProfileSolver, SubcriticalPowerUsesGradientFlow) {
  NonlinearitySpec nl{0.6, -1.0};
  ProfileSpec spec{3, 100.0, 15.0, 4096, 1e-8, 20000};
  const Profile prof = solve_profile(spec, nl);
  EXPECT_LE(prof.residual, 1e-8);
  EXPECT_NEAR(prof.rho, 100.0, 1e-8);
  EXPECT_FALSE(prof.moments.cutoff_warning);
  EXPECT_LT(prof.omega, 0.0);
}

TEST(GradientFlow, MassProjectedAndEnergyMonotone) {
  const RadialGrid g(3, 1024, 20.0);
  std::vector<double> u(g.n);
  for (int i = 0; i < g.n; ++i) u[i] = std::exp(-0.3 * g.r(i) * g.r(i));
  GradientFlowOptions opt;
  opt.max_iter = 200;
  NonlinearitySpec nl{0.6, -1.0};
  const auto res = gradient_flow(g, u, 3.0, nl, opt);
  ASSERT_GT(res.energy.size(), 10u);
  for (std::size_t k = 0; k < res.mass.size(); ++k) EXPECT_NEAR(res.mass[k], 3.0, 3e-12);
  for (std::size_t k = 1; k < res.energy.size(); ++k)
    EXPECT_LE(res.energy[k], res.energy[k - 1] + 1e-12);
}

TEST(EllipticResidual, SechOracleAtModerateResolution) {
  const Profile prof = sech_samples(0.15, 160.0, 2048);
  EXPECT_LE(elliptic_residual(prof, cubic()), 1e-6);
}

TEST(EllipticResidual, DoubledProfileIsNotASolution) {
  ProfileSpec spec{3, 18.0, 20.0, 2048, 1e-8, 20000};
  Profile prof = solve_profile(spec, cubic());
  for (double& x : prof.u) x *= 2.0;
  EXPECT_GT(elliptic_residual(prof, cubic()), 10.0 * spec.tol_residual);
}

TEST(ProfileMoments, GaussianFirstMomentInThreeDimensions) {
  const RadialGrid g(3, 200000, 12.0);
  std::vector<double> u(g.n);
  for (int i = 0; i < g.n; ++i) u[i] = std::exp(-0.5 * g.r(i) * g.r(i));
  const Profile prof = make_profile(g, u, cubic(), -1.0);
  // int |x| e^{-|x|^2} dx = 4 pi * Gamma(2) / 2
  EXPECT_NEAR(prof.moments.m1, 2.0 * std::numbers::pi, 1e-8);
  EXPECT_FALSE(prof.moments.cutoff_warning);
}

TEST(ProfileMoments, HomogeneityUnderAmplitudeDoubling) {
  const RadialGrid g(3, 2048, 12.0);
  std::vector<double> u(g.n), u2(g.n);
  for (int i = 0; i < g.n; ++i) {
    u[i] = std::exp(-0.5 * g.r(i) * g.r(i));
    u2[i] = 2.0 * u[i];
  }
  const auto a = make_profile(g, u, cubic(), -1.0).moments;
  const auto b = make_profile(g, u2, cubic(), -1.0).moments;
  EXPECT_NEAR(b.m1 / a.m1, 4.0, 1e-12);
  EXPECT_NEAR(b.m2 / a.m2, 4.0, 1e-12);
  EXPECT_NEAR(b.m3 / a.m3, 2.0, 1e-12);
}

TEST(ProfileMoments, ConvergedProfileTailIsNegligible) {
  const auto solve = [](double r_max, int n) {
    return solve_profile(ProfileSpec{3, 18.0, r_max, n, 1e-8, 20000}, cubic());
  };
  const Profile prof = solve(20.0, 4096);
  const Profile wide = solve(40.0, 8192);
  EXPECT_FALSE(prof.moments.cutoff_warning);
  EXPECT_LT(prof.moments.tail_fraction, 1e-6);
  EXPECT_NEAR(prof.moments.m1, wide.moments.m1, 1e-6 * wide.moments.m1);
  EXPECT_NEAR(prof.moments.m2, wide.moments.m2, 1e-6 * wide.moments.m2);
  EXPECT_NEAR(prof.moments.m3, wide.moments.m3, 1e-6 * wide.moments.m3);
}

TEST(ProfileMoments, ShortDomainRaisesCutoffWarning) {
  const RadialGrid g(3, 512, 3.0);
  std::vector<double> u(g.n);
  for (int i = 0; i < g.n; ++i) u[i] = std::exp(-0.5 * g.r(i));
  EXPECT_TRUE(make_profile(g, u, cubic(), -1.0).moments.cutoff_warning);
}
