#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace modebound {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Thrown when user-supplied data violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine cannot produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scenario { channel, source };
enum class Task { probabilistic, unambiguous };

inline std::string_view to_string(Scenario s) { return s == Scenario::channel ? "channel" : "source"; }
inline std::string_view to_string(Task t) { return t == Task::probabilistic ? "prob" : "ud"; }

inline Scenario parse_scenario(std::string_view s) {
  if (s == "channel") return Scenario::channel;
  if (s == "source") return Scenario::source;
  throw ValidationError("unknown scenario '" + std::string(s) + "' (expected channel|source)");
}

inline Task parse_task(std::string_view s) {
  if (s == "prob" || s == "probabilistic") return Task::probabilistic;
  if (s == "ud" || s == "unambiguous") return Task::unambiguous;
  throw ValidationError("unknown task '" + std::string(s) + "' (expected prob|ud)");
}

enum class SolveStatus { optimal, near_optimal, infeasible, unbounded, numerical_failure };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::near_optimal: return "near-optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "numerical-failure";
}

inline bool usable(SolveStatus s) { return s == SolveStatus::optimal || s == SolveStatus::near_optimal; }

/// Outcome of one bound computation, whatever route produced it.
struct BoundResult {
  Scenario scenario = Scenario::channel;
  Task task = Task::probabilistic;
  double bound = 0.0;
  SolveStatus status = SolveStatus::numerical_failure;
  int n_max = 0;
  double tol = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// Optimal photon-number weights when the route exposes them.
  std::optional<std::vector<double>> weights;
};

}  // namespace modebound
