#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "modebound/bounds.hpp"

namespace modebound {

/// What one sweep point reports besides its key columns.
struct SweepValue {
  double bound = 0.0;
  std::string status;
  int n_max = 0;
  double tol = 0.0;
};

struct SweepJob {
  std::vector<std::string> keys;
  std::function<SweepValue()> run;
};

struct SweepSpec {
  std::vector<std::string> key_names;
  std::vector<SweepJob> jobs;
};

struct SweepRow {
  std::vector<std::string> keys;
  SweepValue value;
  double wall_ms = 0.0;
};

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 1) throw ValidationError("grid needs at least one step");
  std::vector<double> out;
  for (int i = 0; i < steps; ++i) out.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
  return out;
}

inline std::vector<double> logspace(double lo, double hi, int steps) {
  if (!(lo > 0.0 && hi > 0.0)) throw ValidationError("log grid needs positive endpoints");
  std::vector<double> out;
  for (double e : linspace(std::log10(lo), std::log10(hi), steps)) out.push_back(std::pow(10.0, e));
  return out;
}

/// Runs every job on a pool of `jobs` threads; rows come back in job order.
/// A job that throws yields a row with status "error".
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned jobs = 1) {
  std::vector<SweepRow> rows(spec.jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < spec.jobs.size(); i = next++) {
      const auto t0 = std::chrono::steady_clock::now();
      SweepRow& row = rows[i];
      row.keys = spec.jobs[i].keys;
      try {
        row.value = spec.jobs[i].run();
      } catch (const std::exception&) {
        row.value.status = "error";
        row.value.bound = std::nan("");
      }
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(spec.jobs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < n; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

/// CSV with the key columns followed by bound,status,n_max,tol,wall_ms. With
/// `deterministic` the timing column is written as 0 so output is byte-stable.
inline void write_sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows, std::ostream& out,
                            bool deterministic = false) {
  for (const auto& k : spec.key_names) out << k << ',';
  out << "bound,status,n_max,tol,wall_ms\n";
  for (const auto& r : rows) {
    for (const auto& k : r.keys) out << k << ',';
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.1f", deterministic ? 0.0 : r.wall_ms);
    out << format_number(r.value.bound) << ',' << r.value.status << ',' << r.value.n_max << ','
        << format_number(r.value.tol) << ',' << ms << '\n';
  }
}

inline SweepValue to_sweep_value(const BoundResult& r) {
  return {r.bound, std::string(to_string(r.status)), r.n_max, r.tol};
}

struct NamedFamily {
  std::string name;
  ModeFamily family;
};

/// Fock tables for the source scenario are shared by every point of a family,
/// so they are computed once up front.
class SourceTables {
 public:
  SourceTables(const std::vector<NamedFamily>& families, Task task, int n_max, const FockTableOptions& opt) {
    for (const auto& nf : families) tables_.emplace(nf.name, fock_table(nf.family, n_max, task, opt));
  }
  const FockBoundTable& at(const std::string& name) const { return tables_.at(name); }

 private:
  std::map<std::string, FockBoundTable> tables_;
};

/// Bound against nbar for several families.
inline SweepSpec family_nbar_sweep(const std::vector<NamedFamily>& families, const std::vector<double>& nbars,
                                   const BoundRequest& base) {
  SweepSpec spec;
  spec.key_names = {"family", "scenario", "task", "nbar"};
  std::shared_ptr<SourceTables> tables;
  if (base.scenario == Scenario::source && !base.t2)
    tables = std::make_shared<SourceTables>(families, base.task, base.n_max,
                                            FockTableOptions{base.gram, base.jobs, base.cache_dir});
  for (const auto& nf : families) {
    for (double nbar : nbars) {
      SweepJob job;
      job.keys = {nf.name, std::string(to_string(base.scenario)), std::string(to_string(base.task)),
                  format_number(nbar)};
      BoundRequest req = base;
      req.nbar = nbar;
      req.jobs = 1;
      job.run = [fam = nf.family, name = nf.name, req, tables] {
        if (tables) return to_sweep_value(lp_bound(tables->at(name), EnergyConstraint(req.nbar, req.n_max)));
        return to_sweep_value(evaluate(fam, req));
      };
      spec.jobs.push_back(std::move(job));
    }
  }
  return spec;
}

/// Two modes on a polar grid of complex k at fixed nbar.
inline SweepSpec polar_sweep(const std::vector<double>& radii, int angle_steps, const BoundRequest& base) {
  if (angle_steps < 1) throw ValidationError("polar sweep needs at least one angle");
  SweepSpec spec;
  spec.key_names = {"k_abs", "k_arg", "k_re", "k_im", "scenario", "task", "nbar"};
  for (double r : radii) {
    for (int a = 0; a < angle_steps; ++a) {
      const double theta = 2.0 * std::numbers::pi * a / angle_steps;
      const Complex k = std::polar(std::min(r, 1.0), theta);
      SweepJob job;
      job.keys = {format_number(r), format_number(theta), format_number(k.real()), format_number(k.imag()),
                  std::string(to_string(base.scenario)), std::string(to_string(base.task)), format_number(base.nbar)};
      job.run = [k, base] {
        BoundRequest req = base;
        req.jobs = 1;
        return to_sweep_value(evaluate(make_two_mode(k), req));
      };
      spec.jobs.push_back(std::move(job));
    }
  }
  return spec;
}

/// DPS families against the energy per pulse mu = nbar / (ell + 1).
inline SweepSpec dps_sweep(const std::vector<int>& ells, const std::vector<double>& mus, const BoundRequest& base) {
  SweepSpec spec;
  spec.key_names = {"ell", "mu", "scenario", "task", "nbar"};
  for (int ell : ells) {
    const ModeFamily f = make_dps_family(ell);
    std::shared_ptr<SourceTables> tables;
    if (base.scenario == Scenario::source && !base.t2)
      tables = std::make_shared<SourceTables>(std::vector<NamedFamily>{{"dps", f}}, base.task, base.n_max,
                                              FockTableOptions{base.gram, base.jobs, base.cache_dir});
    for (double mu : mus) {
      BoundRequest req = base;
      req.nbar = mu * (ell + 1);
      req.jobs = 1;
      SweepJob job;
      job.keys = {std::to_string(ell), format_number(mu), std::string(to_string(base.scenario)),
                  std::string(to_string(base.task)), format_number(req.nbar)};
      job.run = [f, req, tables] {
        if (tables) return to_sweep_value(lp_bound(tables->at("dps"), EnergyConstraint(req.nbar, req.n_max)));
        return to_sweep_value(evaluate(f, req));
      };
      spec.jobs.push_back(std::move(job));
    }
  }
  return spec;
}

/// Lossy two-mode channel: heuristic estimate next to the coherent and Fock
/// benchmarks, against t^2.
inline SweepSpec losses_sweep(const std::vector<double>& ks, const std::vector<double>& t2s, double nbar,
                              const HeuristicOptions& hopt) {
  SweepSpec spec;
  spec.key_names = {"k", "t2", "nbar", "coherent", "fock"};
  const int m = static_cast<int>(std::lround(nbar));
  const bool integer = std::abs(nbar - m) < 1e-12;
  for (double k : ks) {
    for (double t2 : t2s) {
      const LossChannel ch(t2);
      SweepJob job;
      job.keys = {format_number(k), format_number(t2), format_number(nbar), format_number(coherent_bound(k, nbar, ch)),
                  integer ? format_number(fock_bound_lossy(k, m, ch)) : std::string("nan")};
      job.run = [k, nbar, ch, hopt] {
        HeuristicOptions o = hopt;
        o.jobs = 1;
        const HeuristicResult r = heuristic_channel_lossy(k, nbar, ch, o);
        return SweepValue{r.best.p_correct, r.restarts_converged > 0 ? "heuristic" : "heuristic-unconverged",
                          o.n_trunc, o.ftol};
      };
      spec.jobs.push_back(std::move(job));
    }
  }
  return spec;
}

}  // namespace modebound
