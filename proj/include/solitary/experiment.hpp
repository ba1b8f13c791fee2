#pragma once

// Batch pipeline: profile -> trajectory -> field evolution -> decomposition,
// the eps scan, and the text report built from a run's JSON artifacts.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <thread>

#include "solitary/config.hpp"

namespace solitary {

namespace fs = std::filesystem;

using LogFn = std::function<void(const std::string&)>;

struct CheckRow {
  std::string family;
  double t = 0.0;
  CheckResult result;
};

inline json check_to_json(const CheckRow& r) {
  return json{{"family", r.family},       {"t", r.t},
              {"name", r.result.name},    {"lhs", r.result.lhs},
              {"rhs", r.result.rhs},      {"residual", r.result.residual},
              {"tolerance", r.result.tolerance}, {"pass", r.result.pass}};
}

inline std::string with_time(const std::string& name, double t) {
  char buf[48];
  std::snprintf(buf, sizeof buf, " t=%.6g", t);
  return name + buf;
}

// ---------------------------------------------------------------- stages

inline Profile run_profile_stage(const ExperimentConfig& cfg) { return solve_profile(cfg.profile, cfg.nl); }

inline void write_profile(const Profile& prof, const fs::path& dir) {
  CsvWriter csv(dir / "profile.csv", {"r", "U"});
  for (int i = 0; i < prof.grid.n; ++i) csv.row({prof.grid.r(i), prof.u[i]});
  write_json(dir / "profile.json",
             json{{"dim", prof.dim()},
                  {"n_r", prof.grid.n},
                  {"r_max", prof.r_max()},
                  {"omega", prof.omega},
                  {"rho", prof.rho},
                  {"sup_norm", prof.sup_norm},
                  {"residual", prof.residual},
                  {"iterations", prof.iterations},
                  {"support_radius", prof.support_radius()},
                  {"moments",
                   {{"m1", prof.moments.m1}, {"m2", prof.moments.m2}, {"m3", prof.moments.m3},
                    {"tail_fraction", prof.moments.tail_fraction},
                    {"cutoff_warning", prof.moments.cutoff_warning}}}});
}

inline Trajectory run_trajectory_stage(const ExperimentConfig& cfg, const Profile& prof,
                                       const AveragingQuadrature& q) {
  TrajectoryOptions opt;
  opt.T = cfg.steps() * cfg.step();
  opt.dt = cfg.step();
  opt.step_tolerance = cfg.thresholds.trajectory_step_tolerance;
  auto traj = integrate_trajectory(cfg.s0, cfg.scaling, prof, q, cfg.potential, opt);
  if (cfg.potential.singular()) {
    require(traj.abar > 0.0, ErrorKind::SingularityOnTrajectory,
            "the trajectory reaches the singular point of V");
  }
  return traj;
}

inline void write_trajectory(const Trajectory& traj, int dim, const fs::path& dir) {
  std::vector<std::string> head{"t"};
  for (int c = 1; c <= dim; ++c) head.push_back("a" + std::to_string(c));
  for (int c = 1; c <= dim; ++c) head.push_back("xi" + std::to_string(c));
  for (const char* h : {"theta", "omega_eps", "vartheta", "H_M", "abar_running"}) head.emplace_back(h);
  CsvWriter csv(dir / "trajectory.csv", head);
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const auto& s = traj.states[i];
    std::vector<double> row{s.t};
    for (int c = 0; c < dim; ++c) row.push_back(s.a[c]);
    for (int c = 0; c < dim; ++c) row.push_back(s.xi[c]);
    row.insert(row.end(), {s.theta, s.omega_eps, s.vartheta(), traj.hamiltonian[i], traj.abar_running[i]});
    csv.row(row);
  }
}

// ---------------------------------------------------------------- decomposition

/// Per-snapshot decomposition of psi against the trajectory and every
/// check that can be evaluated at that snapshot. The remainder probe and the
/// kernel residuals are measured once, on the zoom grid of the first snapshot.
class Decomposer {
 public:
  Decomposer(const ExperimentConfig& cfg, const Profile& prof, const AveragingQuadrature& q)
      : cfg_(cfg), prof_(prof), q_(q), lab_(cfg.lab_grid()) {}

  void observe(double t, const SolitonState& s, const ComplexField& psi) {
    const auto& params = cfg_.scaling;
    const double eb = params.eps_beta();
    const auto& th = cfg_.thresholds;
    const ComplexField w = compute_w(psi, s, params, prof_);
    const auto lab_p = pairings(w, eps_frame(s, params, prof_, lab_, cfg_.convention), t);
    const GridSpec zoom = zoom_grid(lab_, s.a, eb);
    const ComplexField wt = compute_w_tilde(w, s, params, prof_, zoom);
    const auto pg = transfer_profile(prof_, zoom);
    if (!prepared_) prepare(pg);
    const auto zp = pairings(wt, zero_frame(pg), t);
    const double w_l2 = l2_norm(w), wt_l2 = l2_norm(wt);

    const auto l31 = pairing_relation_from_pairings(lab_p, zp, s, params, cfg_.convention);
    for (std::size_t j = 0; j < l31.lhs.size(); ++j) {
      const double res = w_l2 > 0.0 ? l31.residual[j] / w_l2 : l31.residual[j];
      add("pairing_relation", t, make_check(with_time("pairing_relation j=" + std::to_string(j + 1), t), l31.lhs[j], l31.rhs[j], res,
                                   th.pairing_relation_tolerance));
    }
    if (w_l2 > 0.0) printed_max_ = std::max(printed_max_, l31.max_residual_printed() / w_l2);

    NormSample ns{t, w_l2, 0.0, 0.0};
    try {
      for (auto& r : forcing_pairing_check(s, params, prof_, pg, cfg_.potential, q_, th.forcing_rel_tolerance,
                                    th.forcing_zero_tolerance))
        add("forcing", t, rename(std::move(r), t));
      if (wt_l2 <= 1.0) {
        ErrorPairingOptions opt;
        opt.kernel_tolerance = th.kernel_tolerance;
        opt.linear_pairing_tolerance = th.linear_pairing_tolerance;
        opt.kernel = &kernel_;
        for (auto& r : error_pairing_check(wt, s, params, prof_, pg, cfg_.potential, q_, c_hat_, opt)) {
          std::string family = r.name.substr(0, r.name.find(' '));
          add(std::move(family), t, rename(std::move(r), t));
        }
      } else {
        ++outside_window_;
      }
      ns.v_norm = norm(v_of_t(s.a, eb, q_, cfg_.potential), params.dim);
      ns.RV_U = profile_norms(pg, R_V_field(s.a, eb, cfg_.potential, zoom)).RV_U;
      norm_samples_.push_back(ns);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularityInWindow) throw;
      skip(std::string("forcing, error-pairing and norm-growth checks: ") + e.what());
    }

    lab_pairings_.push_back(lab_p);
    w_l2_.push_back(w_l2);
    wt_l2_.push_back(wt_l2);
    times_.push_back(t);
  }

  /// Writes pairings.csv and checks.json into dir and returns the summary fragment.
  json finish(const fs::path& dir) {
    const auto& params = cfg_.scaling;
    const int m = 2 * params.dim + 1;
    std::vector<std::string> head{"t"};
    for (int j = 1; j <= m; ++j) head.push_back("omega_w_z" + std::to_string(j));
    head.insert(head.end(), {"w_l2", "wtilde_l2"});
    {
      CsvWriter csv(dir / "pairings.csv", head);
      for (std::size_t i = 0; i < lab_pairings_.size(); ++i) {
        std::vector<double> row{times_[i]};
        row.insert(row.end(), lab_pairings_[i].values.begin(), lab_pairings_[i].values.end());
        row.insert(row.end(), {w_l2_[i], wt_l2_[i]});
        csv.row(row);
      }
    }

    json out;
    if (lab_pairings_.size() >= 3) {
      const auto g = growth_rates(lab_pairings_, params);
      out["growth"] = {{"max_rate", g.max_rate}, {"rate_scale", g.rate_scale}, {"ratio", g.ratio},
                       {"max_rate_per_j", g.max_rate_per_j}};
    }
    if (norm_samples_.size() >= 3 && norm_samples_.size() == times_.size()) {
      try {
        const auto rep = norm_growth_bound_check(norm_samples_, params, norms_.x_U, c_hat_[2 * params.dim]);
        for (const auto& r : rep.rows) add("norm_growth", 0.0, r);
        out["norm_growth_tightest"] = rep.tightest;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::WindowViolation) throw;
        skip(std::string("norm growth bound: ") + e.what());
      }
    }

    json rows = json::array();
    for (const auto& r : rows_) rows.push_back(check_to_json(r));
    write_json(dir / "checks.json", json{{"checks", rows}, {"skipped", skipped_}});

    // Worst row of each family, judged by residual / tolerance.
    std::map<std::string, json> fam;
    std::vector<std::string> order;
    int failed = 0;
    for (const auto& r : rows_) {
      const auto& c = r.result;
      if (!c.pass) ++failed;
      const double score = c.tolerance > 0.0 ? c.residual / c.tolerance : c.residual;
      auto it = fam.find(r.family);
      if (it == fam.end()) {
        order.push_back(r.family);
        fam[r.family] = json{{"family", r.family}, {"count", 0}, {"failed", 0}, {"score", score},
                             {"worst", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance},
                             {"inequality", c.tolerance == 0.0}, {"tightest", 0.0}};
        it = fam.find(r.family);
      }
      auto& f = it->second;
      f["count"] = f["count"].get<int>() + 1;
      if (!c.pass) f["failed"] = f["failed"].get<int>() + 1;
      if (c.tolerance == 0.0 && c.rhs > 0.0) f["tightest"] = std::max(f["tightest"].get<double>(), c.lhs / c.rhs);
      if (score > f["score"].get<double>()) {
        f["score"] = score;
        f["worst"] = c.name;
        f["residual"] = c.residual;
        f["tolerance"] = c.tolerance;
      }
    }
    json families = json::array();
    for (const auto& name : order) families.push_back(fam[name]);

    std::vector<double> c_vals;
    for (double c : c_hat_) c_vals.push_back(c / cfg_.probe.inflation);
    out["families"] = families;
    out["checks_total"] = rows_.size();
    out["checks_failed"] = failed;
    out["skipped"] = skipped_;
    out["snapshots"] = times_.size();
    out["max_w"] = w_l2_.empty() ? 0.0 : *std::max_element(w_l2_.begin(), w_l2_.end());
    out["w_final"] = w_l2_.empty() ? 0.0 : w_l2_.back();
    out["max_wtilde"] = wt_l2_.empty() ? 0.0 : *std::max_element(wt_l2_.begin(), wt_l2_.end());
    out["snapshots_outside_window"] = outside_window_;
    out["printed_relation_max_relative"] = printed_max_;
    out["probe"] = {{"C", c_vals}, {"inflation", cfg_.probe.inflation}, {"c_hat", c_hat_},
                    {"slopes", probe_slopes_}, {"bounded", probe_bounded_}};
    out["kernel"] = {{"gauge", kernel_.gauge}, {"translation", kernel_.translation},
                     {"boost", kernel_.boost}, {"tolerance", cfg_.thresholds.kernel_tolerance}};
    return out;
  }

 private:
  void prepare(const ProfileOnGrid& pg) {
    kernel_ = kernel_check(prof_, pg);
    if (kernel_.max() > cfg_.thresholds.kernel_tolerance) {
      throw Error(ErrorKind::KernelResidualTooLarge,
                  "profile kernel residual on the zoom grid is " + fmt17(kernel_.max()));
    }
    RemainderProbeOptions opt;
    opt.amplitudes = cfg_.probe.amplitudes;
    opt.n_samples = cfg_.probe.n_samples;
    opt.seed = cfg_.seed;
    opt.even = cfg_.probe.even;
    const auto est = remainder_bound_probe(pg, prof_.nl, zero_frame(pg).z, opt);
    probe_bounded_ = true;
    for (const auto& e : est) {
      c_hat_.push_back(cfg_.probe.inflation * e.C);
      probe_slopes_.push_back(e.slope);
      probe_bounded_ = probe_bounded_ && e.bounded;
    }
    norms_ = profile_norms(pg, RealField(pg.grid));
    prepared_ = true;
  }

  static CheckResult rename(CheckResult r, double t) {
    r.name = with_time(r.name, t);
    return r;
  }

  void add(std::string family, double t, CheckResult r) { rows_.push_back({std::move(family), t, std::move(r)}); }

  void skip(std::string why) {
    if (std::find(skipped_.begin(), skipped_.end(), why) == skipped_.end()) skipped_.push_back(std::move(why));
  }

  const ExperimentConfig& cfg_;
  const Profile& prof_;
  const AveragingQuadrature& q_;
  GridSpec lab_;
  bool prepared_ = false;
  KernelReport kernel_;
  std::vector<double> c_hat_, probe_slopes_;
  bool probe_bounded_ = false;
  ProfileNorms norms_;
  std::vector<CheckRow> rows_;
  std::vector<std::string> skipped_;
  std::vector<PairingVector> lab_pairings_;
  std::vector<NormSample> norm_samples_;
  std::vector<double> times_, w_l2_, wt_l2_;
  int outside_window_ = 0;
  double printed_max_ = 0.0;
};

// ---------------------------------------------------------------- runs

/// Profile, averaging quadrature and trajectory shared by every stage of a run.
struct RunSetup {
  ExperimentConfig cfg;
  std::shared_ptr<const Profile> prof;
  std::unique_ptr<AveragingQuadrature> q;
  Trajectory traj;
};

inline RunSetup prepare_run(const ExperimentConfig& cfg, std::shared_ptr<const Profile> prof = nullptr) {
  cfg.validate();
  RunSetup r;
  r.cfg = cfg;
  r.prof = prof ? std::move(prof) : std::make_shared<const Profile>(run_profile_stage(cfg));
  r.q = std::make_unique<AveragingQuadrature>(*r.prof, cfg.quadrature_nodes);
  r.traj = run_trajectory_stage(cfg, *r.prof, *r.q);
  return r;
}

inline const SolitonState& state_at(const RunSetup& r, double t) {
  const long n = std::lround(t / r.cfg.step());
  require(n >= 0 && n < static_cast<long>(r.traj.states.size()), ErrorKind::InvalidInput,
          "snapshot time outside the trajectory");
  return r.traj.states[n];
}

inline void write_monitors(const std::vector<MonitorSample>& log, const fs::path& dir) {
  CsvWriter csv(dir / "monitors.csv", {"t", "charge", "charge_drift", "hamiltonian", "spectral_tail"});
  const double q0 = log.front().charge;
  for (const auto& m : log) csv.row({m.t, m.charge, (m.charge - q0) / q0, m.hamiltonian, m.spectral_tail});
}

inline json monitor_summary(const std::vector<MonitorSample>& log) {
  double dq = 0.0, dh = 0.0, tail = 0.0;
  const double q0 = log.front().charge, h0 = log.front().hamiltonian;
  for (const auto& m : log) {
    dq = std::max(dq, std::abs(m.charge - q0) / q0);
    dh = std::max(dh, std::abs(m.hamiltonian - h0) / std::abs(h0));
    tail = std::max(tail, m.spectral_tail);
  }
  return json{{"max_charge_drift", dq}, {"max_hamiltonian_drift", dh}, {"max_spectral_tail", tail}};
}

inline EvolveOptions evolve_options(const ExperimentConfig& cfg) {
  EvolveOptions opt;
  opt.T = cfg.steps() * cfg.step();
  opt.dt = cfg.step();
  opt.snapshot_every = cfg.snapshot_every;
  opt.max_charge_drift = cfg.thresholds.max_charge_drift;
  opt.max_spectral_tail = cfg.thresholds.max_spectral_tail;
  return opt;
}

inline json run_header(const RunSetup& r) {
  const auto& cfg = r.cfg;
  const auto& s = cfg.scaling;
  return json{{"name", cfg.name},
              {"eps", s.eps},
              {"eta", s.eta},
              {"delta", s.delta()},
              {"T", cfg.horizon()},
              {"horizon_rule", cfg.horizon_c > 0.0 ? "c eps^(eta - delta)" : "fixed"},
              {"horizon_c", cfg.horizon_c},
              {"dt", cfg.step()},
              {"steps", cfg.steps()},
              {"frame_convention", to_string(cfg.convention)},
              {"potential", detail::potential_to_json(cfg.potential, s.dim)},
              {"grid", grid_to_json(cfg.lab_grid())},
              {"profile", {{"omega", r.prof->omega}, {"rho", r.prof->rho}, {"residual", r.prof->residual}}},
              {"trajectory",
               {{"abar", r.traj.abar},
                {"hamiltonian_drift", r.traj.hamiltonian_drift},
                {"max_step_error", r.traj.max_step_error}}}};
}

/// Evolves the field and writes psi snapshots under dir/fields.
inline json run_evolution(const RunSetup& r, const fs::path& dir, bool save_fields, const LogFn& log = {}) {
  fs::create_directories(dir);
  const auto& cfg = r.cfg;
  const GridSpec lab = cfg.lab_grid();
  if (save_fields) fs::create_directories(dir / "fields");
  const auto psi0 = init_soliton_field(*r.prof, cfg.s0, cfg.scaling, lab);
  const auto mon = evolve(psi0, cfg.scaling, sample_potential(cfg.potential, lab), r.prof->nl, evolve_options(cfg),
                          [&](double t, const ComplexField& psi, const MonitorSample&) {
                            if (save_fields) {
                              char name[32];
                              std::snprintf(name, sizeof name, "psi_%08ld", std::lround(t / cfg.step()));
                              write_field_snapshot(dir / "fields" / name, psi, t);
                            }
                            if (log) log("evolve" + with_time("", t));
                          });
  write_monitors(mon, dir);
  return monitor_summary(mon);
}

inline void finalize_summary(json& summary, const fs::path& dir);

/// The full pipeline with the decomposition done in memory at every snapshot.
/// Writes profile, trajectory, monitors, pairings, checks and summary files.
inline json run_experiment(const ExperimentConfig& cfg, const fs::path& dir,
                           std::shared_ptr<const Profile> prof = nullptr, const LogFn& log = {}) {
  fs::create_directories(dir);
  const RunSetup r = prepare_run(cfg, std::move(prof));
  write_json(dir / "config.json", config_to_json(cfg));
  write_profile(*r.prof, dir);
  write_trajectory(r.traj, cfg.scaling.dim, dir);
  const GridSpec lab = cfg.lab_grid();
  Decomposer dec(r.cfg, *r.prof, *r.q);
  const auto psi0 = init_soliton_field(*r.prof, cfg.s0, cfg.scaling, lab);
  const auto mon = evolve(psi0, cfg.scaling, sample_potential(cfg.potential, lab), r.prof->nl, evolve_options(cfg),
                          [&](double t, const ComplexField& psi, const MonitorSample&) {
                            dec.observe(t, state_at(r, t), psi);
                            if (log) log(cfg.name + ": snapshot" + with_time("", t));
                          });
  write_monitors(mon, dir);
  json summary = run_header(r);
  summary["monitors"] = monitor_summary(mon);
  summary.update(dec.finish(dir));
  finalize_summary(summary, dir);
  return summary;
}

/// Decomposition of the snapshots a previous `evolve` stored under dir/fields.
inline json decompose_run(const ExperimentConfig& cfg, const fs::path& dir, const LogFn& log = {}) {
  const fs::path fields = dir / "fields";
  require(fs::is_directory(fields), ErrorKind::MissingArtifacts, "no field snapshots in " + fields.string());
  std::vector<fs::path> bases;
  for (const auto& e : fs::directory_iterator(fields))
    if (e.path().extension() == ".bin") bases.push_back(e.path().parent_path() / e.path().stem());
  std::sort(bases.begin(), bases.end());
  require(!bases.empty(), ErrorKind::MissingArtifacts, "no field snapshots in " + fields.string());
  const RunSetup r = prepare_run(cfg);
  Decomposer dec(r.cfg, *r.prof, *r.q);
  for (const auto& b : bases) {
    const double t = read_json(fs::path(b.string() + ".json")).at("t").get<double>();
    const auto psi = read_field_snapshot(b);
    require_same_grid(psi.grid, cfg.lab_grid());
    dec.observe(t, state_at(r, t), psi);
    if (log) log("decompose" + with_time("", t));
  }
  json summary = run_header(r);
  summary.update(dec.finish(dir));
  finalize_summary(summary, dir);
  return summary;
}

// ---------------------------------------------------------------- scan

struct ScanRow {
  double eps = 0.0;
  double T = 0.0;
  double max_w = 0.0;
  double w_final = 0.0;
  /// ||w(T)|| / eps^eta
  double ratio = 0.0;
  double growth_max_rate = 0.0;
  /// max pairing growth rate / eps^(delta - 1)
  double growth_ratio = 0.0;
  /// The same run read in the eps = 1 variables.
  double unit_eps_T = 0.0;
  double unit_eps_max_w = 0.0;
  bool checks_pass = false;
};

struct ScanResult {
  double eta = 0.0;
  std::vector<ScanRow> rows;
  double slope = 0.0;
  double slope_unit_eps = 0.0;
  /// Largest factor by which the ratio grows when eps decreases, and max/min over the list.
  double ratio_growth = 0.0;
  double ratio_spread = 0.0;
  double growth_growth = 0.0;
  double growth_spread = 0.0;
  bool slope_pass = false;
  bool ratio_pass = false;
  bool growth_pass = false;
  bool checks_pass = false;
  bool pass() const { return slope_pass && ratio_pass && growth_pass; }
};

/// max over pairs eps_i < eps_j of y_i / y_j, with rows sorted by eps.
inline double growth_as_eps_decreases(const std::vector<double>& eps, const std::vector<double>& y) {
  double g = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i)
    for (std::size_t j = 0; j < eps.size(); ++j)
      if (eps[i] < eps[j]) g = std::max(g, y[i] / y[j]);
  return g;
}

inline double spread(const std::vector<double>& y) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return *hi / *lo;
}

inline std::string eps_dir_name(double eps) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "eps_%.6g", eps);
  return buf;
}

inline ScanResult scan_from_rows(std::vector<ScanRow> rows, double eta, const Thresholds& th, int dim) {
  ScanResult res;
  res.eta = eta;
  std::sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) { return a.eps > b.eps; });
  res.rows = std::move(rows);
  std::vector<double> le, lw, eps, ratio, growth;
  res.checks_pass = true;
  for (const auto& r : res.rows) {
    le.push_back(std::log(r.eps));
    lw.push_back(std::log(r.max_w));
    eps.push_back(r.eps);
    ratio.push_back(r.ratio);
    growth.push_back(r.growth_ratio);
    res.checks_pass = res.checks_pass && r.checks_pass;
  }
  res.slope = fit_slope(le, lw);
  res.slope_unit_eps = res.slope - 0.5 * dim;
  res.ratio_growth = growth_as_eps_decreases(eps, ratio);
  res.ratio_spread = spread(ratio);
  res.growth_growth = growth_as_eps_decreases(eps, growth);
  res.growth_spread = spread(growth);
  res.slope_pass = res.slope >= eta - th.slope_slack;
  res.ratio_pass = res.ratio_growth <= th.ratio_factor;
  res.growth_pass = res.growth_growth <= th.growth_factor;
  return res;
}

inline json scan_to_json(const ScanResult& s, const Thresholds& th) {
  json rows = json::array();
  for (const auto& r : s.rows)
    rows.push_back(json{{"eps", r.eps}, {"T", r.T}, {"max_w", r.max_w}, {"w_final", r.w_final},
                        {"ratio", r.ratio}, {"growth_max_rate", r.growth_max_rate},
                        {"growth_ratio", r.growth_ratio}, {"unit_eps_T", r.unit_eps_T}, {"unit_eps_max_w", r.unit_eps_max_w},
                        {"checks_pass", r.checks_pass}, {"run", eps_dir_name(r.eps)}});
  return json{{"eta", s.eta},
              {"rows", rows},
              {"slope", s.slope},
              {"slope_unit_eps", s.slope_unit_eps},
              {"ratio_growth", s.ratio_growth},
              {"ratio_spread", s.ratio_spread},
              {"growth_growth", s.growth_growth},
              {"growth_spread", s.growth_spread},
              {"slope_pass", s.slope_pass},
              {"ratio_pass", s.ratio_pass},
              {"growth_pass", s.growth_pass},
              {"checks_pass", s.checks_pass},
              {"pass", s.pass()},
              {"thresholds",
               {{"slope_slack", th.slope_slack}, {"ratio_factor", th.ratio_factor},
                {"growth_factor", th.growth_factor}}}};
}

inline std::string emit_report(const fs::path& dir);

/// One run per eps (concurrently with `threads` workers), then the slope fit
/// and the ratio tables. The profile does not depend on eps and is solved once.
inline ScanResult run_scan(const ExperimentConfig& cfg, const fs::path& dir, int threads = 1,
                           const LogFn& log = {}) {
  require(cfg.epsilon_list.size() >= 3, ErrorKind::InsufficientEpsilons, "a scan needs at least 3 eps values");
  cfg.validate();
  fs::create_directories(dir);
  write_json(dir / "config.json", config_to_json(cfg));
  const auto prof = std::make_shared<const Profile>(run_profile_stage(cfg));
  const std::size_t n = cfg.epsilon_list.size();
  std::vector<ScanRow> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto c = cfg.with_eps(cfg.epsilon_list[i]);
        const auto sum = run_experiment(c, dir / eps_dir_name(c.scaling.eps), prof, log);
        const auto& s = c.scaling;
        const auto unit = rescale_problem(s, RescaleMode::unit_eps);
        ScanRow& r = rows[i];
        r.eps = s.eps;
        r.T = c.horizon();
        r.max_w = sum.at("max_w");
        r.w_final = sum.at("w_final");
        r.ratio = r.w_final / s.eps_pow(s.eta);
        r.growth_max_rate = sum.at("growth").at("max_rate");
        r.growth_ratio = sum.at("growth").at("ratio");
        r.unit_eps_T = r.T / unit.time_factor;
        r.unit_eps_max_w = r.max_w * s.eps_pow(-0.5 * s.dim);
        r.checks_pass = sum.at("pass");
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int k = std::clamp(threads, 1, static_cast<int>(n));
  std::vector<std::thread> pool;
  for (int t = 1; t < k; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  auto res = scan_from_rows(rows, cfg.scaling.eta, cfg.thresholds, cfg.scaling.dim);
  CsvWriter csv(dir / "scan.csv", {"eps", "T", "max_w", "w_final", "ratio", "growth_max_rate", "growth_ratio",
                                   "unit_eps_T", "unit_eps_max_w"});
  for (const auto& r : res.rows)
    csv.row({r.eps, r.T, r.max_w, r.w_final, r.ratio, r.growth_max_rate, r.growth_ratio, r.unit_eps_T, r.unit_eps_max_w});
  write_json(dir / "scan.json", scan_to_json(res, cfg.thresholds));
  emit_report(dir);
  return res;
}

// ---------------------------------------------------------------- report

inline void finalize_summary(json& summary, const fs::path& dir) {
  summary["pass"] = summary.at("checks_failed").get<int>() == 0;
  write_json(dir / "summary.json", summary);
  emit_report(dir);
}

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string run_report(const json& s) {
  std::string out = "run " + s.at("name").get<std::string>() + "  eps " + num(s.at("eps")) + "  T " +
                    num(s.at("T")) + "  dt " + num(s.at("dt")) + "  convention " +
                    s.at("frame_convention").get<std::string>() + "\n";
  for (const auto& f : s.at("families")) {
    char line[256];
    const std::string detail = f.at("inequality").get<bool>()
                                   ? "largest lhs/bound " + sci(f.at("tightest"))
                                   : "worst " + sci(f.at("residual")) + " (tolerance " + sci(f.at("tolerance")) +
                                         ") at " + f.at("worst").get<std::string>();
    std::snprintf(line, sizeof line, "%s  %-17s %5d checks  %3d failed  %s\n",
                  f.at("failed").get<int>() == 0 ? "PASS" : "FAIL", f.at("family").get<std::string>().c_str(),
                  f.at("count").get<int>(), f.at("failed").get<int>(), detail.c_str());
    out += line;
  }
  for (const auto& sk : s.at("skipped")) out += "SKIP  " + sk.get<std::string>() + "\n";
  out += "max ||w|| " + sci(s.at("max_w")) + "  ||w(T)|| " + sci(s.at("w_final")) + "  max ||w~|| " +
         sci(s.at("max_wtilde")) + "\n";
  if (s.contains("growth"))
    out += "max pairing rate " + sci(s["growth"].at("max_rate")) + "  / eps^(delta-1) = " +
           sci(s["growth"].at("ratio")) + "\n";
  out += "printed lab/zoom combination, max residual / ||w||: " + sci(s.at("printed_relation_max_relative")) +
         " (reported, not gated)\n";
  if (s.contains("monitors"))
    out += "charge drift " + sci(s["monitors"].at("max_charge_drift")) + "  energy drift " +
           sci(s["monitors"].at("max_hamiltonian_drift")) + "\n";
  out += std::string("overall ") + (s.at("pass").get<bool>() ? "PASS" : "FAIL") + "\n";
  return out;
}

inline std::string scan_report(const json& s) {
  const auto& th = s.at("thresholds");
  std::string out = "scan eta " + num(s.at("eta")) + "\n";
  out += "eps          T            max||w||     ||w(T)||/eps^eta  rate/eps^(delta-1)  T(eps=1)    max||w||(eps=1)\n";
  for (const auto& r : s.at("rows")) {
    char line[256];
    std::snprintf(line, sizeof line, "%-12.6g %-12.6g %-12.5e %-17.5e %-19.5e %-11.6g %-12.5e%s\n",
                  r.at("eps").get<double>(), r.at("T").get<double>(), r.at("max_w").get<double>(),
                  r.at("ratio").get<double>(), r.at("growth_ratio").get<double>(), r.at("unit_eps_T").get<double>(),
                  r.at("unit_eps_max_w").get<double>(), r.at("checks_pass").get<bool>() ? "" : "  (run checks failed)");
    out += line;
  }
  auto flag = [&](const char* k) { return s.at(k).get<bool>() ? "PASS" : "FAIL"; };
  out += std::string(flag("slope_pass")) + "  slope of log max||w|| vs log eps " + num(s.at("slope")) +
         " >= eta - " + num(th.at("slope_slack")) + " (eps = 1 variables: " + num(s.at("slope_unit_eps")) + ")\n";
  out += std::string(flag("ratio_pass")) + "  ||w(T)||/eps^eta grows by " + num(s.at("ratio_growth")) +
         " as eps decreases, limit " + num(th.at("ratio_factor")) + " (max/min " +
         num(s.at("ratio_spread")) + ")\n";
  out += std::string(flag("growth_pass")) + "  pairing rate / eps^(delta-1) grows by " +
         num(s.at("growth_growth")) + " as eps decreases, limit " + num(th.at("growth_factor")) +
         " (max/min " + num(s.at("growth_spread")) + ")\n";
  out += std::string("overall ") + flag("pass") + "\n";
  return out;
}

}  // namespace detail

/// Text summary of a run or scan directory, rebuilt from its JSON files only.
/// Writes report.txt and returns the same text.
inline std::string emit_report(const fs::path& dir) {
  std::string text;
  if (fs::exists(dir / "scan.json")) {
    const json s = read_json(dir / "scan.json");
    text = detail::scan_report(s);
    for (const auto& r : s.at("rows")) {
      const auto sub = dir / r.at("run").get<std::string>() / "summary.json";
      require(fs::exists(sub), ErrorKind::MissingArtifacts, "missing " + sub.string());
      text += "\n" + detail::run_report(read_json(sub));
    }
  } else if (fs::exists(dir / "summary.json")) {
    text = detail::run_report(read_json(dir / "summary.json"));
  } else {
    throw Error(ErrorKind::MissingArtifacts, "no summary.json or scan.json in " + dir.string());
  }
  std::ofstream(dir / "report.txt") << text;
  return text;
}

}  // namespace solitary
