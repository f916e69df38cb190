#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "modebound/common.hpp"
#include "modebound/fock.hpp"
#include "modebound/lp_solver.hpp"

namespace modebound {

namespace detail {

inline void check_overlap(Complex overlap) {
  if (!(std::abs(overlap) <= 1.0 + 1e-12)) throw ValidationError("overlap modulus exceeds 1");
}

}  // namespace detail

/// Minimum-error success probability for two equiprobable pure states.
inline double helstrom(Complex overlap) {
  detail::check_overlap(overlap);
  return 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - std::norm(overlap))));
}

/// Ivanovic-Dieks-Peres limit for two equiprobable pure states.
inline double idp(Complex overlap) {
  detail::check_overlap(overlap);
  return std::max(0.0, 1.0 - std::abs(overlap));
}

/// Smallest |sum_n p_n k^n| over distributions of mean nbar, for k in [0, 1]:
/// the floor/ceil mixture k^f (1 - w) + k^(f+1) w, w = nbar - f.
inline double chi_two_mode(double k, double nbar) {
  if (!(k >= 0.0 && k <= 1.0)) throw ValidationError("chi_two_mode needs real k in [0, 1]; use chi_lp otherwise");
  if (!(nbar >= 0.0)) throw ValidationError("mean photon number must be nonnegative");
  const PhotonDistribution p = floor_ceil_state(nbar);
  return inner_product(p, k).real();
}

struct ChiResult {
  double value = 0.0;
  std::vector<double> weights;
  /// Sign of sum_n p_n k^n assumed by the branch that won.
  int sign = 1;
};

/// The same minimum by linear programming over p_0..p_{n_max} with sum p = 1 and
/// sum n p_n = nbar. For k < 0 the modulus is handled by two programs, one per
/// sign of the sum, keeping the smaller feasible value.
inline ChiResult chi_lp(double k, double nbar, int n_max = kDefaultNmax) {
  if (!(k >= -1.0 && k <= 1.0)) throw ValidationError("chi_lp needs real k in [-1, 1]");
  const EnergyConstraint ec(nbar, n_max);
  std::optional<ChiResult> best;
  for (int sign : {1, -1}) {
    if (k >= 0.0 && sign < 0) break;
    conic::LinearProgram lp;
    std::vector<std::pair<int, double>> mass, energy, sum;
    double kn = 1.0;
    for (int n = 0; n <= ec.n_max; ++n) {
      const int v = lp.add_variable("p" + std::to_string(n));
      lp.set_objective_coeff(v, sign * kn);
      mass.push_back({v, 1.0});
      energy.push_back({v, static_cast<double>(n)});
      sum.push_back({v, sign * kn});
      kn *= k;
    }
    lp.set_sense(conic::Sense::minimize);
    lp.add_row(mass, conic::Relation::equal, 1.0, "mass");
    lp.add_row(energy, conic::Relation::equal, nbar, "energy");
    if (k < 0.0) lp.add_row(sum, conic::Relation::greater_equal, 0.0, "sign");
    const conic::LpReport rep = conic::solve_lp(lp);
    if (rep.status != SolveStatus::optimal) continue;
    double s = 0.0;
    kn = 1.0;
    for (double p : rep.x) {
      s += p * kn;
      kn *= k;
    }
    if (sign * s < -1e-9) throw NumericalError("chi_lp: optimiser violates the sign it assumed");
    if (!best || std::abs(s) < best->value) best = ChiResult{std::abs(s), rep.x, sign};
  }
  if (!best) throw NumericalError("chi_lp: no feasible branch");
  return *best;
}

/// Source-scenario optimum for two modes: floor/ceil mixture of the per-n
/// single-pair values 1/2(1 + sqrt(1 - |k|^2n)) or 1 - |k|^n.
inline double two_mode_source_bound(Complex k, double nbar, Task task) {
  if (!(std::abs(k) <= 1.0 + 1e-12)) throw ValidationError("commutator modulus exceeds 1");
  if (!(nbar >= 0.0)) throw ValidationError("mean photon number must be nonnegative");
  const double ak = std::min(1.0, std::abs(k));
  auto a = [&](int n) { return task == Task::probabilistic ? helstrom(std::pow(ak, n)) : idp(std::pow(ak, n)); };
  const PhotonDistribution p = floor_ceil_state(nbar);
  double out = 0.0;
  for (int n = 0; n <= p.n_max(); ++n) out += p[n] * a(n);
  return out;
}

/// Two states of mean nbar on the modes a and -a that are exactly orthogonal:
/// sqrt((1-delta)/4)|m-1> +- 1/sqrt2 |m> + sqrt((1+delta)/4)|m+1>, nbar = m + delta/2.
struct OrthogonalPair {
  int m = 1;
  double delta = 0.0;
  /// Amplitudes on |m-1>, |m>, |m+1>.
  std::array<double, 3> plus{}, minus{};
  /// Commutator of the mode pair (a, -a).
  Complex k = -1.0;

  /// Amplitudes over |0>..|m+1>.
  std::vector<double> amplitudes(int sign) const {
    std::vector<double> c(static_cast<std::size_t>(m) + 2, 0.0);
    const auto& s = sign > 0 ? plus : minus;
    for (int i = 0; i < 3; ++i) c[static_cast<std::size_t>(m - 1 + i)] = s[static_cast<std::size_t>(i)];
    return c;
  }
};

inline OrthogonalPair phase_orthogonal_pair(double nbar) {
  if (!(nbar >= 0.5)) throw ValidationError("orthogonal pair needs nbar >= 0.5");
  OrthogonalPair out;
  out.m = static_cast<int>(std::floor(nbar + 0.5));
  out.delta = 2.0 * (nbar - out.m);
  const double lo = std::sqrt((1.0 - out.delta) / 4.0);
  const double hi = std::sqrt((1.0 + out.delta) / 4.0);
  out.plus = {lo, std::sqrt(0.5), hi};
  out.minus = {lo, -std::sqrt(0.5), hi};
  return out;
}

/// <psi|phi> for psi = sum c_n |n>_a and phi = sum d_n |n>_b with [a, b^dagger] = k.
inline Complex mode_overlap(const std::vector<Complex>& c, const std::vector<Complex>& d, Complex k) {
  Complex acc = 0.0;
  Complex kn = 1.0;
  for (std::size_t n = 0; n < std::min(c.size(), d.size()); ++n) {
    acc += std::conj(c[n]) * d[n] * kn;
    kn *= k;
  }
  return acc;
}

}  // namespace modebound
