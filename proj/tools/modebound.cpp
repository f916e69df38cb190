// modebound: upper bounds on optical mode discrimination from the command line.
//
//   modebound bound --scenario channel --task prob --family two-mode --k 0.5 --nbar 1
//   modebound sweep --figure phase --scenario channel --task prob > phase.csv
//   modebound validate --quick

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modebound/bounds.hpp"
#include "modebound/cli_args.hpp"
#include "modebound/sweep.hpp"
#include "modebound/validate.hpp"

using namespace modebound;

namespace {

struct CommonArgs {
  std::string scenario = "channel";
  std::string task = "prob";
  int n_max = kDefaultNmax;
  unsigned jobs = default_jobs();
  std::string embedding = "averaged";
  std::string tail = "hull";
  std::string cache_dir;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& c) {
  cmd->add_option("--scenario", c.scenario, "channel | source")
      ->check(CLI::IsMember({"channel", "source"}))
      ->capture_default_str();
  cmd->add_option("--task", c.task, "prob | ud")->check(CLI::IsMember({"prob", "ud"}))->capture_default_str();
  cmd->add_option("--nmax", c.n_max, "photon-number cutoff")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "worker threads (default from MODEBOUND_JOBS)")->capture_default_str();
  cmd->add_option("--embedding", c.embedding, "Hermitian blocks: averaged | linked")
      ->check(CLI::IsMember({"averaged", "linked"}))
      ->capture_default_str();
  cmd->add_option("--tail", c.tail, "truncated-tail model for real overlaps: hull | disk")
      ->check(CLI::IsMember({"hull", "disk"}))
      ->capture_default_str();
  cmd->add_option("--cache-dir", c.cache_dir, "directory for cached per-photon-number tables");
  cmd->add_flag("--verbose", c.verbose, "solver progress on stderr");
}

void add_family(CLI::App* cmd, FamilyArgs& f) {
  cmd->add_option("--family", f.family, "two-mode | phase | comp-ft | dps | custom")
      ->check(CLI::IsMember({"two-mode", "phase", "comp-ft", "dps", "custom"}))
      ->capture_default_str();
  cmd->add_option("--k", f.k, "two-mode commutator, a+bi")->capture_default_str();
  cmd->add_option("--n-outcomes", f.n_outcomes, "phase family size")->capture_default_str();
  cmd->add_option("--d", f.d, "comp-ft dimension")->capture_default_str();
  cmd->add_option("--ell", f.ell, "DPS bit-string length")->capture_default_str();
  cmd->add_option("--kfile", f.kfile, "JSON commutation matrix for --family custom");
  cmd->add_option("--priors", f.priors_file, "JSON array of prior probabilities");
}

BoundRequest make_request(const CommonArgs& c) {
  BoundRequest r;
  r.scenario = parse_scenario(c.scenario);
  r.task = parse_task(c.task);
  r.n_max = c.n_max;
  r.jobs = std::max(1u, c.jobs);
  r.cache_dir = c.cache_dir;
  r.gram.embedding = c.embedding == "linked" ? conic::EmbeddingMode::linked : conic::EmbeddingMode::averaged;
  r.gram.tail = c.tail == "disk" ? TailModel::disk : TailModel::hull;
  r.gram.sdp.verbose = c.verbose;
  return r;
}

void print_table(const nlohmann::json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "weights") {
      std::printf("%-18s", "weights");
      const auto& w = value;
      for (std::size_t n = 0; n < w.size(); ++n)
        if (w[n].get<double>() > 1e-9) std::printf(" p%zu=%.6g", n, w[n].get<double>());
      std::printf("\n");
    } else if (value.is_number_float()) {
      std::printf("%-18s %.10g\n", key.c_str(), value.get<double>());
    } else if (value.is_string()) {
      std::printf("%-18s %s\n", key.c_str(), value.get<std::string>().c_str());
    } else {
      std::printf("%-18s %s\n", key.c_str(), value.dump().c_str());
    }
  }
}

void emit(const nlohmann::json& j, const std::string& format) {
  if (format == "json") {
    std::cout << j.dump(2) << '\n';
  } else if (format == "csv") {
    std::vector<std::string> keys;
    for (const auto& [key, value] : j.items())
      if (!value.is_array() && !value.is_object()) keys.push_back(key);
    for (std::size_t i = 0; i < keys.size(); ++i) std::cout << (i ? "," : "") << keys[i];
    std::cout << '\n';
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const auto& v = j[keys[i]];
      std::cout << (i ? "," : "") << (v.is_string() ? v.get<std::string>() : v.dump());
    }
    std::cout << '\n';
  } else {
    print_table(j);
  }
}

int cmd_bound(const CommonArgs& c, const FamilyArgs& fa, double nbar, std::optional<double> t2,
              const std::string& format, int n_trunc, int restarts, bool phases) {
  const ModeFamily f = build_family(fa);
  BoundRequest req = make_request(c);
  req.nbar = nbar;
  req.t2 = t2;
  if (req.scenario == Scenario::channel && t2 && *t2 < 1.0) {
    if (f.size() != 2) throw ValidationError("lossy channel estimates exist for two modes only");
    if (req.task != Task::probabilistic) throw ValidationError("lossy channel estimate covers --task prob only");
    const Complex k = f.k(0, 1);
    HeuristicOptions h;
    h.n_trunc = n_trunc;
    h.restarts = restarts;
    h.optimize_phases = phases;
    h.jobs = req.jobs;
    const HeuristicResult r = heuristic_channel_lossy(k, nbar, LossChannel(*t2), h);
    nlohmann::json j;
    j["scenario"] = "channel";
    j["task"] = to_string(req.task);
    j["kind"] = "heuristic lower estimate";
    j["estimate"] = r.best.p_correct;
    j["t2"] = *t2;
    j["n_trunc"] = n_trunc;
    j["restarts_converged"] = r.restarts_converged;
    j["weights"] = r.best.weights;
    if (r.with_phases) {
      j["estimate_with_phases"] = r.with_phases->p_correct;
      j["phases"] = r.with_phases->phases;
    }
    if (k.imag() == 0.0 && k.real() >= 0.0) {
      j["coherent"] = coherent_bound(k.real(), nbar, LossChannel(*t2));
      if (nbar == std::floor(nbar)) j["fock"] = fock_bound_lossy(k.real(), static_cast<int>(nbar), LossChannel(*t2));
    }
    emit(j, format);
    return 0;
  }
  nlohmann::json j;
  BoundResult r;
  if (req.scenario == Scenario::source && t2) {
    const LossySourceResult lr = source_lossy_bound(f, EnergyConstraint(nbar, req.n_max), LossChannel(*t2), req.task,
                                                    FockTableOptions{req.gram, req.jobs, req.cache_dir});
    r = lr.bound;
    j = to_json(r);
    j["t2"] = *t2;
    if (lr.pre_loss) {
      j["pre_loss_weights"] = lr.pre_loss->p;
      j["pre_loss_physical"] = lr.pre_loss->physical();
      j["inversion_condition"] = lr.pre_loss->condition;
    }
  } else {
    r = evaluate(f, req);
    j = to_json(r);
  }
  j["family"] = fa.family;
  j["n_modes"] = f.size();
  j["nbar"] = nbar;
  emit(j, format);
  return usable(r.status) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Upper bounds on optical mode discrimination"};
  app.require_subcommand(1);

  CommonArgs bc;
  FamilyArgs bf;
  double b_nbar = 1.0;
  std::optional<double> b_t2;
  std::string b_format = "json";
  int b_trunc = 5, b_restarts = 20;
  bool b_phases = false;
  auto* bound = app.add_subcommand("bound", "one bound for one family");
  add_common(bound, bc);
  add_family(bound, bf);
  bound->add_option("--nbar", b_nbar, "mean photon number")->required();
  bound->add_option("--t2", b_t2, "transmittivity of a mode-independent loss")->check(CLI::Range(0.0, 1.0));
  bound->add_option("--format", b_format, "json | csv | table")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->capture_default_str();
  bound->add_option("--n-trunc", b_trunc, "photon cutoff of the lossy heuristic")->capture_default_str();
  bound->add_option("--restarts", b_restarts, "restarts of the lossy heuristic")->capture_default_str();
  bound->add_flag("--phases", b_phases, "lossy heuristic: also optimise amplitude phases");

  CommonArgs sc;
  FamilyArgs sf;
  std::string figure = "family";
  std::vector<std::string> members;
  double s_from = 0.1, s_to = 3.0, s_nbar = 0.5;
  int s_steps = 20, s_angles = 24;
  bool s_log = false, deterministic = false;
  std::optional<double> s_t2;
  std::string out_file;
  int s_restarts = 20;
  auto* sweep = app.add_subcommand("sweep", "CSV of bounds over a parameter grid");
  add_common(sweep, sc);
  add_family(sweep, sf);
  sweep->add_option("--figure", figure, "family | phase | comp-ft | dps | polar | losses")
      ->check(CLI::IsMember({"family", "phase", "comp-ft", "dps", "polar", "losses"}))
      ->capture_default_str();
  sweep->add_option("--members", members,
                    "phase: N values; comp-ft: d values; dps: ell values; losses: k values")
      ->delimiter(',');
  sweep->add_option("--from", s_from, "grid start (nbar, mu, |k| or t2)")->capture_default_str();
  sweep->add_option("--to", s_to, "grid end")->capture_default_str();
  sweep->add_option("--steps", s_steps, "grid points")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_flag("--log", s_log, "logarithmic grid");
  sweep->add_option("--nbar", s_nbar, "fixed mean photon number (polar, losses)")->capture_default_str();
  sweep->add_option("--angle-steps", s_angles, "polar: angles per radius")->capture_default_str();
  sweep->add_option("--t2", s_t2, "source scenario: loss transmittivity")->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--restarts", s_restarts, "losses: heuristic restarts")->capture_default_str();
  sweep->add_option("--out", out_file, "write CSV here instead of stdout");
  sweep->add_flag("--deterministic", deterministic, "write wall_ms as 0 for byte-stable output");

  bool quick = false;
  std::vector<std::string> suites;
  unsigned v_seed = 7;
  auto* validate = app.add_subcommand("validate", "oracle cross-checks, one PASS/FAIL line per suite");
  validate->add_flag("--quick", quick, "smaller grids");
  validate->add_option("--suite", suites, "run only these suites")->delimiter(',');
  validate->add_option("--seed", v_seed, "seed of the randomised suites")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (bound->parsed()) return cmd_bound(bc, bf, b_nbar, b_t2, b_format, b_trunc, b_restarts, b_phases);

    if (sweep->parsed()) {
      BoundRequest base = make_request(sc);
      base.t2 = s_t2;
      const std::vector<double> grid = s_log ? logspace(s_from, s_to, s_steps) : linspace(s_from, s_to, s_steps);
      auto ints = [&](std::vector<int> fallback) {
        if (members.empty()) return fallback;
        std::vector<int> v;
        for (const auto& m : members) v.push_back(std::stoi(m));
        return v;
      };
      SweepSpec spec;
      if (figure == "family") {
        spec = family_nbar_sweep({{sf.family, build_family(sf)}}, grid, base);
      } else if (figure == "phase") {
        std::vector<NamedFamily> fams;
        for (int n : ints({2, 3, 4, 5})) fams.push_back({"phase-" + std::to_string(n), make_phase_family(n)});
        spec = family_nbar_sweep(fams, grid, base);
      } else if (figure == "comp-ft") {
        std::vector<NamedFamily> fams;
        for (int d : ints({2, 3, 4, 5})) fams.push_back({"comp-ft-" + std::to_string(d), make_comp_ft_family(d)});
        spec = family_nbar_sweep(fams, grid, base);
      } else if (figure == "dps") {
        spec = dps_sweep(ints({1, 2, 3}), grid, base);
      } else if (figure == "polar") {
        base.nbar = s_nbar;
        spec = polar_sweep(grid, s_angles, base);
      } else {
        std::vector<double> ks;
        for (const auto& m : members) ks.push_back(std::stod(m));
        if (ks.empty()) ks = {0.0, 0.4, 0.8};
        HeuristicOptions h;
        h.restarts = s_restarts;
        spec = losses_sweep(ks, grid, s_nbar, h);
      }
      const std::vector<SweepRow> rows = run_sweep(spec, base.jobs);
      if (out_file.empty()) {
        write_sweep_csv(spec, rows, std::cout, deterministic);
      } else {
        std::ofstream out(out_file);
        if (!out) throw ValidationError("cannot write " + out_file);
        write_sweep_csv(spec, rows, out, deterministic);
      }
      for (const auto& r : rows)
        if (r.value.status == "error" || r.value.status == "numerical-failure") return 2;
      return 0;
    }

    ValidateOptions vo;
    vo.quick = quick;
    vo.seed = v_seed;
    bool all = true;
    for (const auto& [name, run] : validation_suites()) {
      if (!suites.empty() && std::find(suites.begin(), suites.end(), name) == suites.end()) continue;
      const SuiteResult r = run(vo);
      all = all && r.passed();
      std::printf("%s %-36s checks=%d worst=%.3g tol=%.3g%s%s\n", r.passed() ? "PASS" : "FAIL", r.name.c_str(),
                  r.checks, r.worst, r.tolerance, r.first_failure.empty() ? "" : "  first failure: ",
                  r.first_failure.c_str());
    }
    return all ? 0 : 1;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
