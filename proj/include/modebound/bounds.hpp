#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modebound/gram.hpp"
#include "modebound/losses.hpp"
#include "modebound/modes.hpp"
#include "modebound/source_lp.hpp"

namespace modebound {

struct BoundRequest {
  Scenario scenario = Scenario::channel;
  Task task = Task::probabilistic;
  double nbar = 1.0;
  int n_max = kDefaultNmax;
  /// Transmittivity of a mode-independent loss; source scenario only.
  std::optional<double> t2;
  GramOptions gram{};
  unsigned jobs = 1;
  std::filesystem::path cache_dir;
};

namespace detail {

/// Modes with k_ij = 1 carry identical states for every photon number.
/// Returns the representative of each mode's group.
inline std::vector<int> identical_mode_groups(const ModeFamily& f, double tol = 1e-12) {
  const int n = f.size();
  std::vector<int> rep(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rep[static_cast<std::size_t>(i)] = i;
    for (int j = 0; j < i; ++j)
      if (rep[static_cast<std::size_t>(j)] == j && std::abs(f.k(i, j) - Complex(1.0)) <= tol) {
        rep[static_cast<std::size_t>(i)] = j;
        break;
      }
  }
  return rep;
}

}  // namespace detail

inline BoundResult channel_bound(const ModeFamily& f, const EnergyConstraint& ec, Task task,
                                 const GramOptions& opt = {}) {
  auto direct = [&](const ModeFamily& g) {
    return solve(task == Task::probabilistic ? build_channel_prob(g, ec, opt) : build_channel_ud(g, ec, opt), opt);
  };
  // identical modes leave the Gram program without an interior; merge them first
  const std::vector<int> rep = detail::identical_mode_groups(f);
  std::vector<int> reps;
  for (int i = 0; i < f.size(); ++i)
    if (rep[static_cast<std::size_t>(i)] == i) reps.push_back(i);
  if (static_cast<int>(reps.size()) == f.size()) return direct(f);

  // prob: a merged outcome earns its largest prior; ud: a merged outcome is never conclusive
  std::vector<double> w;
  for (int r : reps) {
    double best = 0.0;
    int members = 0;
    for (int i = 0; i < f.size(); ++i)
      if (rep[static_cast<std::size_t>(i)] == r) {
        best = std::max(best, f.priors()[static_cast<std::size_t>(i)]);
        ++members;
      }
    w.push_back(task == Task::unambiguous && members > 1 ? 0.0 : best);
  }
  double total = 0.0;
  for (double q : w) total += q;
  BoundResult out;
  out.scenario = Scenario::channel;
  out.task = task;
  out.n_max = ec.n_max;
  out.tol = opt.sdp.gap_tol;
  out.status = SolveStatus::optimal;
  if (reps.size() == 1 || total == 0.0) {
    out.bound = out.primal_objective = out.dual_objective = total;
    return out;
  }
  const int m = static_cast<int>(reps.size());
  CMatrix k(m, m);
  std::vector<std::string> labels;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) k(a, b) = f.k(reps[static_cast<std::size_t>(a)], reps[static_cast<std::size_t>(b)]);
    if (!f.labels().empty()) labels.push_back(f.labels()[static_cast<std::size_t>(reps[static_cast<std::size_t>(a)])]);
  }
  for (double& q : w) q /= total;
  out = direct(ModeFamily(k, std::move(labels), std::move(w)));
  out.bound *= total;
  out.primal_objective *= total;
  out.dual_objective *= total;
  return out;
}

/// Rigorous upper bound for one family, scenario, task and energy.
inline BoundResult evaluate(const ModeFamily& f, const BoundRequest& req) {
  const EnergyConstraint ec(req.nbar, req.n_max);
  if (req.scenario == Scenario::channel) {
    if (req.t2 && *req.t2 < 1.0)
      throw ValidationError("no rigorous channel bound under loss; two-mode families have a heuristic estimate");
    return channel_bound(f, ec, req.task, req.gram);
  }
  const FockTableOptions fo{req.gram, req.jobs, req.cache_dir};
  if (req.t2) return source_lossy_bound(f, ec, LossChannel(*req.t2), req.task, fo).bound;
  return source_bound(f, ec, req.task, fo);
}

inline nlohmann::json to_json(const BoundResult& r) {
  nlohmann::json j;
  j["scenario"] = to_string(r.scenario);
  j["task"] = to_string(r.task);
  j["bound"] = r.bound;
  j["status"] = to_string(r.status);
  j["n_max"] = r.n_max;
  j["tol"] = r.tol;
  j["primal_objective"] = r.primal_objective;
  j["dual_objective"] = r.dual_objective;
  if (r.weights) j["weights"] = *r.weights;
  return j;
}

}  // namespace modebound
