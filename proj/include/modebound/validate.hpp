#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "modebound/analytic.hpp"
#include "modebound/bounds.hpp"
#include "modebound/losses.hpp"
#include "modebound/source_lp.hpp"

namespace modebound {

struct SuiteResult {
  std::string name;
  int checks = 0;
  int failures = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  std::string first_failure;

  bool passed() const { return failures == 0 && checks > 0; }

  void record(double error, const std::string& what) {
    ++checks;
    worst = std::max(worst, error);
    if (!(error <= tolerance)) {
      if (failures == 0) first_failure = what + " (error " + std::to_string(error) + ")";
      ++failures;
    }
  }
};

struct ValidateOptions {
  GramOptions gram{};
  unsigned seed = 7;
  /// Smaller grids for a quick run.
  bool quick = false;
};

/// Channel and source bounds for two modes against the closed forms.
inline SuiteResult validate_two_mode(const ValidateOptions& opt = {}) {
  SuiteResult s;
  s.name = "two-mode closed forms";
  s.tolerance = 1e-4;
  const std::vector<double> ks = opt.quick ? std::vector<double>{0.0, 0.5, 0.9} : std::vector<double>{0.0, 0.3, 0.6, 0.9};
  const std::vector<double> nbars = opt.quick ? std::vector<double>{0.5, 1.7} : std::vector<double>{0.3, 1.0, 1.7};
  for (double k : ks)
    for (double nbar : nbars) {
      const ModeFamily f = make_two_mode(k);
      const EnergyConstraint ec(nbar, kDefaultNmax);
      const double chi = chi_two_mode(k, nbar);
      const std::string at = "k=" + std::to_string(k) + " nbar=" + std::to_string(nbar);
      s.record(std::abs(channel_bound(f, ec, Task::probabilistic, opt.gram).bound - helstrom(chi)), "channel prob " + at);
      s.record(std::abs(channel_bound(f, ec, Task::unambiguous, opt.gram).bound - idp(chi)), "channel ud " + at);
      for (Task t : {Task::probabilistic, Task::unambiguous})
        s.record(std::abs(source_bound(f, ec, t, FockTableOptions{opt.gram, 1, {}}).bound - two_mode_source_bound(k, nbar, t)),
                 "source " + std::string(to_string(t)) + " " + at);
    }
  return s;
}

/// chi by floor/ceil formula against the LP minimum.
inline SuiteResult validate_chi(const ValidateOptions& = {}) {
  SuiteResult s;
  s.name = "chi formula vs LP";
  s.tolerance = 1e-9;
  for (int i = 0; i <= 10; ++i)
    for (int j = 1; j <= 15; ++j) {
      const double k = i / 10.0, nbar = 0.2 * j;
      s.record(std::abs(chi_two_mode(k, nbar) - chi_lp(k, nbar).value),
               "k=" + std::to_string(k) + " nbar=" + std::to_string(nbar));
    }
  return s;
}

/// Generic simplex against the geometric dual on random monotone tables.
inline SuiteResult validate_lp_dual(const ValidateOptions& opt = {}) {
  SuiteResult s;
  s.name = "LP primal vs geometric dual";
  s.tolerance = 1e-7;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int cases = opt.quick ? 30 : 100;
  for (int c = 0; c < cases; ++c) {
    FockBoundTable t;
    const int n_max = 2 + c % 12;
    t.a.resize(static_cast<std::size_t>(n_max) + 1);
    for (double& v : t.a) v = u(rng);
    const double nbar = u(rng) * n_max;
    conic::LinearProgram lp;
    std::vector<std::pair<int, double>> mass, energy;
    for (int n = 0; n <= n_max; ++n) {
      const int v = lp.add_variable("p" + std::to_string(n));
      lp.set_objective_coeff(v, t.a[static_cast<std::size_t>(n)]);
      mass.push_back({v, 1.0});
      energy.push_back({v, static_cast<double>(n)});
    }
    lp.set_sense(conic::Sense::maximize);
    lp.add_row(mass, conic::Relation::equal, 1.0);
    lp.add_row(energy, conic::Relation::equal, nbar);
    const conic::LpReport rep = conic::solve_lp(lp);
    s.record(std::abs(rep.primal_objective - dual_geometric_solve(t, nbar).value), "case " + std::to_string(c));
  }
  return s;
}

/// Loss transform followed by its inverse.
inline SuiteResult validate_loss_round_trip(const ValidateOptions& opt = {}) {
  SuiteResult s;
  s.name = "loss transform round trip";
  s.tolerance = 1e-8;
  std::mt19937_64 rng(opt.seed + 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < (opt.quick ? 20 : 60); ++c) {
    const int n_max = 1 + c % 20;
    const double t2 = 0.3 + 0.7 * u(rng);
    std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
    double z = 0.0;
    for (double& v : p) z += (v = u(rng));
    for (double& v : p) v /= z;
    const LossInversion inv = loss_invert(loss_transform(PhotonDistribution(p), LossChannel(t2)), LossChannel(t2));
    double err = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) err = std::max(err, std::abs(inv.p[n] - p[n]));
    s.record(err, "n_max=" + std::to_string(n_max) + " t2=" + std::to_string(t2));
  }
  return s;
}

/// The lossless heuristic against the rigorous optimum.
inline SuiteResult validate_heuristic(const ValidateOptions& opt = {}) {
  SuiteResult s;
  s.name = "lossless heuristic vs closed form";
  s.tolerance = 2e-3;
  HeuristicOptions h;
  h.restarts = opt.quick ? 6 : 20;
  for (double k : {0.0, 0.4, 0.8}) {
    const double ref = helstrom(chi_two_mode(k, 1.0));
    s.record(std::abs(heuristic_channel_lossy(k, 1.0, LossChannel(1.0), h).best.p_correct - ref),
             "k=" + std::to_string(k));
  }
  return s;
}

inline std::vector<std::pair<std::string, std::function<SuiteResult(const ValidateOptions&)>>> validation_suites() {
  return {{"two-mode", validate_two_mode},
          {"chi", validate_chi},
          {"lp-dual", validate_lp_dual},
          {"loss-round-trip", validate_loss_round_trip},
          {"heuristic", validate_heuristic}};
}

}  // namespace modebound
