#pragma once

// Experiment configuration and its JSON form.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "solitary/decomposition.hpp"
#include "solitary/io.hpp"

namespace solitary {

/// Pass thresholds. The scaling laws fix exponents, not constants, so these
/// are defaults to be surfaced in every report rather than sharp bounds.
struct Thresholds {
  double slope_slack = 0.15;
  double ratio_factor = 2.0;
  double growth_factor = 3.0;
  /// Lab/zoom pairing relation, relative to ||w||.
  double pairing_relation_tolerance = 1e-8;
  double forcing_rel_tolerance = 1e-8;
  double forcing_zero_tolerance = 1e-9;
  double kernel_tolerance = 1e-3;
  /// The I3 identities inherit the kernel residual of the sampled profile.
  double linear_pairing_tolerance = 1e-6;
  double max_charge_drift = 1e-8;
  double max_spectral_tail = 1e-4;
  double trajectory_step_tolerance = 1e-9;
};

struct ProbeConfig {
  std::vector<double> amplitudes{1.0, 0.5, 0.25, 0.125};
  int n_samples = 6;
  double inflation = 2.0;
  bool even = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ScalingParams scaling;
  NonlinearitySpec nl{0.5, -1.0};
  ProfileSpec profile{3, 131.0, 22.0, 4096, 1e-9, 20000};
  PotentialSpec potential;
  int grid_n = 128;
  /// Box half-width in zoomed units; the lab half-width is this times eps^beta.
  double zoom_half_width = 16.0;
  Vec3 grid_center{0.0, 0.0, 0.0};
  SolitonState s0;
  /// Largest time step; the step actually used divides the horizon evenly.
  double dt = 1e-3;
  /// Fixed horizon, used when horizon_c <= 0.
  double T = 0.0;
  /// Horizon rule T = horizon_c * eps^(eta - delta) when positive.
  double horizon_c = 0.0;
  int snapshot_every = 10;
  int quadrature_nodes = 12;
  FrameConvention convention = FrameConvention::direct_derivative;
  ProbeConfig probe;
  std::vector<double> epsilon_list;
  std::uint64_t seed = 1;
  Thresholds thresholds;

  double horizon() const {
    return horizon_c > 0.0 ? horizon_c * scaling.eps_pow(scaling.eta - scaling.delta()) : T;
  }
  long steps() const { return static_cast<long>(std::ceil(horizon() / dt - 1e-9)); }
  double step() const { return horizon() / static_cast<double>(steps()); }

  GridSpec lab_grid() const {
    GridSpec g;
    g.dim = scaling.dim;
    g.n = grid_n;
    g.L = zoom_half_width * scaling.eps_beta();
    g.center = grid_center;
    return g;
  }

  ExperimentConfig with_eps(double eps) const {
    ExperimentConfig c = *this;
    c.scaling.eps = eps;
    return c;
  }

  void validate() const {
    require_valid(scaling);
    require(nl.p == scaling.p, ErrorKind::InvalidInput, "nonlinearity p and scaling p differ");
    require(profile.dim == scaling.dim, ErrorKind::InvalidInput, "profile and scaling dimensions differ");
    potential.validate(scaling.dim);
    lab_grid().validate();
    require(dt > 0.0, ErrorKind::InvalidInput, "dt must be positive");
    require(horizon() > 0.0, ErrorKind::InvalidInput, "set a positive T or horizon_c");
    require(snapshot_every >= 1, ErrorKind::InvalidInput, "snapshot_every must be >= 1");
    require(probe.inflation >= 1.0, ErrorKind::InvalidInput, "probe inflation must be >= 1");
    for (double e : epsilon_list) require_valid(with_eps(e).scaling);
  }
};

namespace detail {

inline Vec3 vec3_from_json(const json& j, int dim, const char* what) {
  require(j.is_array() && static_cast<int>(j.size()) == dim, ErrorKind::InvalidInput,
          std::string(what) + " must be an array of " + std::to_string(dim) + " numbers");
  Vec3 v{0.0, 0.0, 0.0};
  for (int c = 0; c < dim; ++c) v[c] = j[c].get<double>();
  return v;
}

inline json vec3_to_json(const Vec3& v, int dim) { return std::vector<double>(v.begin(), v.begin() + dim); }

inline PotentialSpec potential_from_json(const json& j, int dim) {
  const auto kind = parse_potential_kind(j.at("kind").get<std::string>());
  switch (kind) {
    case PotentialKind::Zero: return PotentialSpec::zero();
    case PotentialKind::Harmonic: return PotentialSpec::harmonic(j.at("k").get<double>());
    case PotentialKind::GaussianWell:
      return PotentialSpec::gaussian_well(
          j.at("amplitude").get<double>(), j.at("width").get<double>(),
          j.contains("center") ? vec3_from_json(j["center"], dim, "potential.center") : Vec3{0.0, 0.0, 0.0});
    case PotentialKind::InversePower:
      return PotentialSpec::inverse_power(j.at("amplitude").get<double>(), j.at("zeta").get<double>());
  }
  return PotentialSpec::zero();
}

inline json potential_to_json(const PotentialSpec& p, int dim) {
  json j{{"kind", to_string(p.kind)}};
  switch (p.kind) {
    case PotentialKind::Zero: break;
    case PotentialKind::Harmonic: j["k"] = p.k; break;
    case PotentialKind::GaussianWell:
      j["amplitude"] = p.amplitude;
      j["width"] = p.width;
      j["center"] = vec3_to_json(p.center, dim);
      break;
    case PotentialKind::InversePower:
      j["amplitude"] = p.amplitude;
      j["zeta"] = p.zeta;
      break;
  }
  return j;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    if (j.contains("scaling")) {
      const auto& s = j["scaling"];
      c.scaling.dim = s.value("dim", c.scaling.dim);
      c.scaling.alpha = s.value("alpha", c.scaling.alpha);
      c.scaling.beta = s.value("beta", c.scaling.beta);
      c.scaling.gamma = s.value("gamma", c.scaling.gamma);
      c.scaling.eps = s.value("eps", c.scaling.eps);
      c.scaling.eta = s.value("eta", c.scaling.eta);
    }
    if (j.contains("nonlinearity")) {
      c.nl.p = j["nonlinearity"].value("p", c.nl.p);
      c.nl.coupling = j["nonlinearity"].value("coupling", c.nl.coupling);
    }
    c.scaling.p = c.nl.p;
    c.profile.dim = c.scaling.dim;
    if (j.contains("profile")) {
      const auto& p = j["profile"];
      c.profile.rho = p.value("rho", c.profile.rho);
      c.profile.r_max = p.value("r_max", c.profile.r_max);
      c.profile.n_r = p.value("n_r", c.profile.n_r);
      c.profile.tol_residual = p.value("tol_residual", c.profile.tol_residual);
      c.profile.max_iter = p.value("max_iter", c.profile.max_iter);
    }
    if (j.contains("potential")) c.potential = detail::potential_from_json(j["potential"], c.scaling.dim);
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      c.grid_n = g.value("n", c.grid_n);
      c.zoom_half_width = g.value("zoom_half_width", c.zoom_half_width);
      if (g.contains("center")) c.grid_center = detail::vec3_from_json(g["center"], c.scaling.dim, "grid.center");
    }
    if (j.contains("initial")) {
      const auto& s = j["initial"];
      if (s.contains("a")) c.s0.a = detail::vec3_from_json(s["a"], c.scaling.dim, "initial.a");
      if (s.contains("xi")) c.s0.xi = detail::vec3_from_json(s["xi"], c.scaling.dim, "initial.xi");
      c.s0.theta = s.value("theta", 0.0);
    }
    if (j.contains("time")) {
      const auto& t = j["time"];
      c.dt = t.value("dt", c.dt);
      c.T = t.value("T", c.T);
      c.horizon_c = t.value("horizon_c", c.horizon_c);
      c.snapshot_every = t.value("snapshot_every", c.snapshot_every);
    }
    c.quadrature_nodes = j.value("quadrature_nodes", c.quadrature_nodes);
    if (j.contains("frame_convention"))
      c.convention = parse_frame_convention(j["frame_convention"].get<std::string>());
    if (j.contains("probe")) {
      const auto& p = j["probe"];
      c.probe.amplitudes = p.value("amplitudes", c.probe.amplitudes);
      c.probe.n_samples = p.value("samples", c.probe.n_samples);
      c.probe.inflation = p.value("inflation", c.probe.inflation);
      c.probe.even = p.value("even", c.probe.even);
    }
    c.epsilon_list = j.value("epsilon_list", c.epsilon_list);
    c.seed = j.value("seed", c.seed);
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      auto& th = c.thresholds;
      th.slope_slack = t.value("slope_slack", th.slope_slack);
      th.ratio_factor = t.value("ratio_factor", th.ratio_factor);
      th.growth_factor = t.value("growth_factor", th.growth_factor);
      th.pairing_relation_tolerance = t.value("pairing_relation_tolerance", th.pairing_relation_tolerance);
      th.forcing_rel_tolerance = t.value("forcing_rel_tolerance", th.forcing_rel_tolerance);
      th.forcing_zero_tolerance = t.value("forcing_zero_tolerance", th.forcing_zero_tolerance);
      th.kernel_tolerance = t.value("kernel_tolerance", th.kernel_tolerance);
      th.linear_pairing_tolerance = t.value("linear_pairing_tolerance", th.linear_pairing_tolerance);
      th.max_charge_drift = t.value("max_charge_drift", th.max_charge_drift);
      th.max_spectral_tail = t.value("max_spectral_tail", th.max_spectral_tail);
      th.trajectory_step_tolerance = t.value("trajectory_step_tolerance", th.trajectory_step_tolerance);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json(path)); }

inline json config_to_json(const ExperimentConfig& c) {
  const int dim = c.scaling.dim;
  const auto& th = c.thresholds;
  return json{
      {"name", c.name},
      {"scaling",
       {{"dim", dim}, {"alpha", c.scaling.alpha}, {"beta", c.scaling.beta}, {"gamma", c.scaling.gamma},
        {"eps", c.scaling.eps}, {"eta", c.scaling.eta}}},
      {"nonlinearity", {{"p", c.nl.p}, {"coupling", c.nl.coupling}}},
      {"profile",
       {{"rho", c.profile.rho}, {"r_max", c.profile.r_max}, {"n_r", c.profile.n_r},
        {"tol_residual", c.profile.tol_residual}, {"max_iter", c.profile.max_iter}}},
      {"potential", detail::potential_to_json(c.potential, dim)},
      {"grid",
       {{"n", c.grid_n}, {"zoom_half_width", c.zoom_half_width},
        {"center", detail::vec3_to_json(c.grid_center, dim)}}},
      {"initial",
       {{"a", detail::vec3_to_json(c.s0.a, dim)}, {"xi", detail::vec3_to_json(c.s0.xi, dim)},
        {"theta", c.s0.theta}}},
      {"time", {{"dt", c.dt}, {"T", c.T}, {"horizon_c", c.horizon_c}, {"snapshot_every", c.snapshot_every}}},
      {"quadrature_nodes", c.quadrature_nodes},
      {"frame_convention", to_string(c.convention)},
      {"probe",
       {{"amplitudes", c.probe.amplitudes}, {"samples", c.probe.n_samples},
        {"inflation", c.probe.inflation}, {"even", c.probe.even}}},
      {"epsilon_list", c.epsilon_list},
      {"seed", c.seed},
      {"thresholds",
       {{"slope_slack", th.slope_slack}, {"ratio_factor", th.ratio_factor},
        {"growth_factor", th.growth_factor}, {"pairing_relation_tolerance", th.pairing_relation_tolerance},
        {"forcing_rel_tolerance", th.forcing_rel_tolerance}, {"forcing_zero_tolerance", th.forcing_zero_tolerance},
        {"kernel_tolerance", th.kernel_tolerance}, {"linear_pairing_tolerance", th.linear_pairing_tolerance},
        {"max_charge_drift", th.max_charge_drift}, {"max_spectral_tail", th.max_spectral_tail},
        {"trajectory_step_tolerance", th.trajectory_step_tolerance}}},
  };
}

}  // namespace solitary
