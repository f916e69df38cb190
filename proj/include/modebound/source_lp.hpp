#pragma once

// Source scenario: phase-randomised states are photon-number mixtures, so the
// bound splits into per-photon-number programs a_n and a linear program over
// the photon-number weights.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "modebound/common.hpp"
#include "modebound/conic.hpp"
#include "modebound/fock.hpp"
#include "modebound/gram.hpp"
#include "modebound/lp_solver.hpp"
#include "modebound/modes.hpp"

namespace modebound {

/// Per-photon-number optimal success probabilities a_0..a_{n_max}.
struct FockBoundTable {
  std::vector<double> a;
  Task task = Task::probabilistic;
  std::string fingerprint;

  int n_max() const { return static_cast<int>(a.size()) - 1; }

  void validate(int n_modes = 0) const {
    if (a.empty()) throw ValidationError("Fock bound table is empty");
    for (std::size_t n = 0; n < a.size(); ++n)
      if (!(a[n] >= -1e-6 && a[n] <= 1.0 + 1e-6)) throw ValidationError("a_" + std::to_string(n) + " outside [0, 1]");
    if (task == Task::unambiguous && std::abs(a[0]) > 1e-9) throw ValidationError("unambiguous table needs a_0 = 0");
    if (task == Task::probabilistic && n_modes > 0 && std::abs(a[0] - 1.0 / n_modes) > 1e-9)
      throw ValidationError("probabilistic table needs a_0 = 1/N");
  }
};

struct FockTableOptions {
  GramOptions gram{};
  unsigned jobs = 1;
  /// Directory for `n,a_n` CSV caches; empty disables caching.
  std::filesystem::path cache_dir;
};

inline std::filesystem::path fock_cache_file(const std::filesystem::path& dir, const ModeFamily& f, Task task) {
  return dir / (f.fingerprint() + "_" + std::string(to_string(task)) + ".csv");
}

inline void write_fock_table_csv(const FockBoundTable& t, std::ostream& out) {
  out << "n,a_n\n";
  char buf[64];
  for (int n = 0; n <= t.n_max(); ++n) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", n, t.a[static_cast<std::size_t>(n)]);
    out << buf;
  }
}

inline FockBoundTable read_fock_table_csv(std::istream& in, Task task, std::string fingerprint = {}) {
  FockBoundTable t;
  t.task = task;
  t.fingerprint = std::move(fingerprint);
  std::string line;
  if (!std::getline(in, line) || line.rfind("n,a_n", 0) != 0) throw ValidationError("Fock table CSV must start with 'n,a_n'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("malformed Fock table row: " + line);
    const int n = std::stoi(line.substr(0, comma));
    if (n != static_cast<int>(t.a.size())) throw ValidationError("Fock table rows must be consecutive from n = 0");
    t.a.push_back(std::stod(line.substr(comma + 1)));
  }
  return t;
}

/// Solves the per-photon-number programs for n = 0..n_max. n = 0 is filled
/// analytically. Independent n are distributed over `jobs` threads.
inline FockBoundTable fock_table(const ModeFamily& f, int n_max, Task task, const FockTableOptions& opt = {}) {
  if (n_max < 1) throw ValidationError("Fock table needs n_max >= 1");
  FockBoundTable t;
  t.task = task;
  t.fingerprint = f.fingerprint();
  std::filesystem::path cache;
  if (!opt.cache_dir.empty()) {
    cache = fock_cache_file(opt.cache_dir, f, task);
    std::ifstream in(cache);
    if (in) {
      try {
        FockBoundTable c = read_fock_table_csv(in, task, t.fingerprint);
        if (c.n_max() >= n_max) {
          c.a.resize(static_cast<std::size_t>(n_max) + 1);
          return c;
        }
      } catch (const std::exception&) {
        // unreadable cache is recomputed
      }
    }
  }

  t.a.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  std::vector<SolveStatus> status(static_cast<std::size_t>(n_max) + 1, SolveStatus::optimal);
  std::atomic<int> next{1};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int n = next++; n <= n_max; n = next++) {
      try {
        const GramProgram g = task == Task::probabilistic ? build_fock_prob(f, n, opt.gram) : build_fock_ud(f, n, opt.gram);
        const BoundResult r = solve(g, opt.gram);
        t.a[static_cast<std::size_t>(n)] = std::clamp(r.bound, 0.0, 1.0);
        status[static_cast<std::size_t>(n)] = r.status;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  t.a[0] = task == Task::probabilistic ? detail::max_prior(f) : 0.0;
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(n_max)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  for (int n = 1; n <= n_max; ++n)
    if (!usable(status[static_cast<std::size_t>(n)]))
      throw NumericalError("Fock program at n = " + std::to_string(n) + " ended with status " +
                           std::string(to_string(status[static_cast<std::size_t>(n)])));

  if (!cache.empty()) {
    std::filesystem::create_directories(opt.cache_dir);
    std::ofstream out(cache);
    if (out) write_fock_table_csv(t, out);
  }
  return t;
}

/// Cutoff-relaxed LP: max sum_n p_n a_n + (1 - sum p) subject to p >= 0,
/// sum p <= 1 and sum_n n p_n + (1 - sum p)(n_max + 1) <= nbar. The missing
/// mass stands for photon numbers above the cutoff, credited with success 1.
inline BoundResult lp_bound(const FockBoundTable& table, const EnergyConstraint& ec) {
  if (table.n_max() < ec.n_max)
    throw ValidationError("Fock table covers n <= " + std::to_string(table.n_max()) + " but the cutoff is " +
                          std::to_string(ec.n_max));
  conic::LinearProgram lp;
  std::vector<std::pair<int, double>> mass, energy;
  for (int n = 0; n <= ec.n_max; ++n) {
    const int v = lp.add_variable("p" + std::to_string(n));
    lp.set_objective_coeff(v, table.a[static_cast<std::size_t>(n)] - 1.0);
    mass.push_back({v, 1.0});
    energy.push_back({v, static_cast<double>(n - ec.n_max - 1)});
  }
  lp.set_objective_constant(1.0);
  lp.set_sense(conic::Sense::maximize);
  lp.add_row(mass, conic::Relation::less_equal, 1.0, "mass");
  lp.add_row(energy, conic::Relation::less_equal, ec.nbar - ec.n_max - 1.0, "energy");
  const conic::LpReport rep = conic::solve_lp(lp);

  BoundResult out;
  out.scenario = Scenario::source;
  out.task = table.task;
  out.n_max = ec.n_max;
  out.tol = 1e-9;
  out.status = rep.status;
  if (rep.status == SolveStatus::optimal) {
    out.primal_objective = rep.primal_objective;
    out.dual_objective = rep.dual_objective;
    out.bound = std::max(rep.primal_objective, rep.dual_objective);
    out.weights = rep.x;
  }
  return out;
}

/// Optimum of the dual of the exact-energy LP
///   max sum p_n a_n  s.t.  sum p_n = 1, sum n p_n = nbar, p >= 0, n <= n_max,
/// i.e. min x + nbar y subject to the lines L_n: x + n y >= a_n.
struct DualLpSolution {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
  /// Indices n whose line L_n passes through the optimal (x, y).
  std::vector<int> active;
  /// Lines on the lower boundary of the feasible region, in walking order.
  std::vector<int> envelope;
  /// Optimal slopes when the optimum is a whole edge of the boundary (nbar on
  /// an envelope line); (x, y) is then the midpoint of that edge.
  std::optional<std::pair<double, double>> y_range;
  /// More than the two defining lines pass through the optimum.
  bool degenerate = false;
  /// Primal optimiser: weights on the envelope lines adjacent to nbar.
  std::vector<std::pair<int, double>> weights;
};

namespace detail {

/// x at which L_u and L_v cross (u < v): x_{u,v} = (v a_u - u a_v)/(v - u).
inline double crossing(const std::vector<double>& a, int u, int v) {
  return (v * a[static_cast<std::size_t>(u)] - u * a[static_cast<std::size_t>(v)]) / static_cast<double>(v - u);
}

}  // namespace detail

/// Walks the lower boundary of {x + n y >= a_n} from the vertical line L_0
/// (x = a_0) towards larger x. At each boundary vertex the walk continues on
/// the line that takes over first; when several lines meet there it keeps the
/// earliest, and the later ones follow through zero-length edges. It stops at
/// the vertex whose two lines bracket nbar, or on the edge of L_nbar when nbar
/// is one of the lines.
inline DualLpSolution dual_geometric_solve(const FockBoundTable& table, double nbar) {
  const std::vector<double>& a = table.a;
  const int n_max = table.n_max();
  if (n_max < 1) throw ValidationError("Fock bound table needs n_max >= 1");
  if (!(nbar >= 0.0) || nbar > n_max)
    throw ValidationError("mean photon number must lie in [0, n_max] for the exact-energy LP");
  constexpr double kTie = 1e-12;

  DualLpSolution sol;
  std::vector<int>& env = sol.envelope;
  env.push_back(0);
  for (int cur = 0; cur < n_max;) {
    int best = -1;
    double key = 0.0;
    for (int m = cur + 1; m <= n_max; ++m) {
      // on L_0 the first vertex is the highest y = (a_m - a_0)/m; elsewhere the nearest crossing
      const double k = cur == 0 ? -(a[static_cast<std::size_t>(m)] - a[0]) / m : detail::crossing(a, cur, m);
      if (best < 0 || k < key - kTie) {
        best = m;
        key = k;
      }
    }
    cur = best;
    env.push_back(cur);
  }

  // boundary vertex between env[i] and env[i+1]: the line through both points
  auto vertex_slope = [&](std::size_t i) {
    const int u = env[i], v = env[i + 1];
    return (a[static_cast<std::size_t>(v)] - a[static_cast<std::size_t>(u)]) / (v - u);
  };
  const auto on = std::find_if(env.begin(), env.end(), [&](int e) { return std::abs(e - nbar) <= kTie; });
  if (on != env.end()) {
    const std::size_t i = static_cast<std::size_t>(on - env.begin());
    const int m = *on;
    // the edge of L_m runs between its two vertices; the first and last lines have one finite end
    const double hi = i > 0 ? vertex_slope(i - 1) : vertex_slope(i);
    const double lo = i + 1 < env.size() ? vertex_slope(i) : vertex_slope(i - 1);
    sol.y_range = std::pair{lo, hi};
    sol.y = 0.5 * (lo + hi);
    sol.x = a[static_cast<std::size_t>(m)] - m * sol.y;
    sol.weights = {{m, 1.0}};
  } else {
    std::size_t seg = 0;
    while (env[seg + 1] < nbar) ++seg;
    const int u = env[seg], v = env[seg + 1];
    sol.y = vertex_slope(seg);
    sol.x = a[static_cast<std::size_t>(u)] - u * sol.y;
    const double wu = (v - nbar) / (v - u);
    sol.weights = {{u, wu}, {v, 1.0 - wu}};
  }
  sol.value = sol.x + nbar * sol.y;
  const double scale = 1.0 + std::abs(sol.x) + n_max * std::abs(sol.y);
  for (int n = 0; n <= n_max; ++n)
    if (std::abs(sol.x + n * sol.y - a[static_cast<std::size_t>(n)]) <= kTie * scale) sol.active.push_back(n);
  sol.degenerate = sol.active.size() > (sol.y_range ? 1u : 2u);
  return sol;
}

/// Second-difference test a_{n-1} - 2 a_n + a_{n+1} < 0 for n = 1..n_max-1.
/// Entry i describes n = i + 1. Differences within 1e-12 of zero are flagged
/// degenerate and do not count as holding.
struct ConditionCheck {
  std::vector<bool> holds;
  std::vector<bool> degenerate;

  bool at(int n) const { return holds.at(static_cast<std::size_t>(n - 1)); }
  bool all() const { return std::all_of(holds.begin(), holds.end(), [](bool b) { return b; }); }
};

inline ConditionCheck condition_check(const FockBoundTable& table) {
  if (table.a.size() < 3) throw ValidationError("condition check needs a_0, a_1, a_2 at least");
  ConditionCheck c;
  for (int n = 1; n < table.n_max(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double d2 = table.a[i - 1] - 2.0 * table.a[i] + table.a[i + 1];
    const bool tie = std::abs(d2) <= 1e-12;
    c.degenerate.push_back(tie);
    c.holds.push_back(!tie && d2 < 0.0);
  }
  return c;
}

/// Source-scenario bound: Fock table then the cutoff-relaxed LP.
inline BoundResult source_bound(const ModeFamily& f, const EnergyConstraint& ec, Task task,
                                const FockTableOptions& opt = {}) {
  return lp_bound(fock_table(f, ec.n_max, task, opt), ec);
}

}  // namespace modebound
