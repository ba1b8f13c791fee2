// Command-line driver for the solitary-wave experiments.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "solitary/experiment.hpp"

namespace fs = std::filesystem;
using namespace solitary;

namespace {

constexpr int kCheckFailure = 2;

struct Options {
  std::string config;
  std::string out;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool save_fields = false;
};

ExperimentConfig load(const Options& o) {
  auto cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

fs::path out_dir(const Options& o, const ExperimentConfig& cfg) {
  const fs::path dir = o.out.empty() ? fs::path("runs") / cfg.name : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

LogFn logger(const Options& o) {
  if (o.quiet) return {};
  return [](const std::string& msg) { std::cerr << msg << '\n'; };
}

int cmd_profile(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const auto prof = run_profile_stage(cfg);
  write_profile(prof, dir);
  std::printf("omega %s  rho %s  residual %s  iterations %d\n", fmt17(prof.omega).c_str(),
              fmt17(prof.rho).c_str(), fmt17(prof.residual).c_str(), prof.iterations);
  return 0;
}

int cmd_trajectory(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const auto r = prepare_run(cfg);
  write_profile(*r.prof, dir);
  write_trajectory(r.traj, cfg.scaling.dim, dir);
  std::printf("steps %ld  abar %s  H_M drift %s\n", cfg.steps(), fmt17(r.traj.abar).c_str(),
              fmt17(r.traj.hamiltonian_drift).c_str());
  return 0;
}

int cmd_evolve(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const auto r = prepare_run(cfg);
  write_json(dir / "config.json", config_to_json(cfg));
  write_profile(*r.prof, dir);
  write_trajectory(r.traj, cfg.scaling.dim, dir);
  const auto mon = run_evolution(r, dir, o.save_fields, logger(o));
  std::printf("charge drift %s  energy drift %s  spectral tail %s\n", fmt17(mon.at("max_charge_drift")).c_str(),
              fmt17(mon.at("max_hamiltonian_drift")).c_str(), fmt17(mon.at("max_spectral_tail")).c_str());
  return 0;
}

int cmd_decompose(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const auto sum = decompose_run(cfg, dir, logger(o));
  std::fputs(emit_report(dir).c_str(), stdout);
  return sum.at("pass").get<bool>() ? 0 : kCheckFailure;
}

int cmd_validate(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const auto sum = run_experiment(cfg, dir, nullptr, logger(o));
  std::fputs(emit_report(dir).c_str(), stdout);
  return sum.at("pass").get<bool>() ? 0 : kCheckFailure;
}

int cmd_scan(const Options& o) {
  const auto cfg = load(o);
  const auto dir = out_dir(o, cfg);
  const auto res = run_scan(cfg, dir, o.threads, logger(o));
  std::fputs(emit_report(dir).c_str(), stdout);
  return res.pass() ? 0 : kCheckFailure;
}

int cmd_report(const Options& o) {
  require(!o.out.empty(), ErrorKind::InvalidInput, "report needs --out DIR");
  std::fputs(emit_report(o.out).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solitary-wave laboratory: profiles, effective dynamics, field runs and decomposition checks"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "experiment JSON file")->check(CLI::ExistingFile);
    if (needs_config) c->required();
    sub->add_option("--out", o.out, "output directory (default runs/<name>)");
    sub->add_option("--threads", o.threads, "concurrent eps cases in a scan")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed of the remainder probe sampling");
    sub->add_flag("--quiet", o.quiet, "no progress messages");
  };

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
    bool needs_config;
  };
  const Sub subs[] = {
      {"profile", "solve the ground-state profile", cmd_profile, true},
      {"trajectory", "integrate the effective dynamics", cmd_trajectory, true},
      {"evolve", "evolve the field and log the conserved quantities", cmd_evolve, true},
      {"decompose", "decompose the field snapshots stored by evolve --save-fields", cmd_decompose, true},
      {"validate", "full pipeline with every check", cmd_validate, true},
      {"scan", "eps scan of the error law", cmd_scan, true},
      {"report", "rebuild report.txt from a run or scan directory", cmd_report, false},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, s.needs_config);
    if (std::string(s.name) == "evolve") sub->add_flag("--save-fields", o.save_fields, "write psi at every snapshot");
    registered.emplace_back(sub, &s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    for (const auto& [sub, s] : registered) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed") > 0) o.seed = seed;
      return s->fn(o);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    std::fprintf(stdout, "{\"error\": \"%s\", \"exit_code\": %d}\n", to_string(e.kind()), exit_code(e.kind()));
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 3;
}
