#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modebound/common.hpp"

namespace modebound {

/// Photon-number weights p_0..p_{n_max}. Sub-normalised vectors are allowed:
/// the missing mass stands for the truncated tail.
class PhotonDistribution {
 public:
  PhotonDistribution() : weights_{1.0} {}

  explicit PhotonDistribution(std::vector<double> weights, std::optional<double> declared_mean = std::nullopt)
      : weights_(std::move(weights)), declared_mean_(declared_mean) {
    if (weights_.empty()) throw ValidationError("photon distribution needs at least p_0");
    double total = 0.0;
    for (std::size_t n = 0; n < weights_.size(); ++n) {
      if (!(weights_[n] >= 0.0)) throw ValidationError("p_" + std::to_string(n) + " is negative");
      total += weights_[n];
    }
    if (total > 1.0 + 1e-12) throw ValidationError("photon weights sum to more than 1");
    if (declared_mean_ && std::abs(total - 1.0) <= 1e-12 && std::abs(mean() - *declared_mean_) > 1e-9)
      throw ValidationError("declared mean " + std::to_string(*declared_mean_) + " disagrees with weights (" +
                            std::to_string(mean()) + ")");
  }

  static PhotonDistribution fock(int n) {
    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    w.back() = 1.0;
    return PhotonDistribution(std::move(w), static_cast<double>(n));
  }

  int n_max() const { return static_cast<int>(weights_.size()) - 1; }
  const std::vector<double>& weights() const { return weights_; }
  double operator[](int n) const { return n <= n_max() ? weights_[static_cast<std::size_t>(n)] : 0.0; }
  std::optional<double> declared_mean() const { return declared_mean_; }

  double mass() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

  /// Mean photon number of the retained part, sum n p_n.
  double mean() const {
    double s = 0.0;
    for (std::size_t n = 0; n < weights_.size(); ++n) s += static_cast<double>(n) * weights_[n];
    return s;
  }

 private:
  std::vector<double> weights_;
  std::optional<double> declared_mean_;
};

/// Mean-photon-number budget together with the truncation used to enforce it.
struct EnergyConstraint {
  double nbar = 0.0;
  int n_max = 50;

  EnergyConstraint() = default;
  EnergyConstraint(double nbar_, int n_max_) : nbar(nbar_), n_max(n_max_) {
    if (n_max < 1) throw ValidationError("photon cutoff n_max must be at least 1");
    if (!(nbar >= 0.0)) throw ValidationError("mean photon number must be nonnegative");
    if (nbar > n_max)
      throw ValidationError("mean photon number " + std::to_string(nbar) + " exceeds cutoff " + std::to_string(n_max));
  }
};

/// Mixture of the Fock states floor(nbar) and floor(nbar)+1 with mean nbar.
inline PhotonDistribution floor_ceil_state(double nbar) {
  if (!(nbar >= 0.0)) throw ValidationError("mean photon number must be nonnegative");
  const int lo = static_cast<int>(std::floor(nbar));
  const double frac = nbar - lo;
  std::vector<double> w(static_cast<std::size_t>(lo) + 2, 0.0);
  w[static_cast<std::size_t>(lo)] = 1.0 - frac;
  w[static_cast<std::size_t>(lo) + 1] = frac;
  if (frac == 0.0) w.pop_back();
  return PhotonDistribution(std::move(w), nbar);
}

inline constexpr int kDefaultNmax = 50;
inline constexpr int kTwoModeSweepNmax = 300;

/// Integer power of a complex number with 0^0 = 1.
inline Complex ipow(Complex k, int n) {
  Complex r = 1.0;
  Complex b = k;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) r *= b;
    b *= b;
  }
  return r;
}

/// Truncated overlap sum_{n <= n_max} p_n k^n of two states built on modes with commutator k.
inline Complex inner_product(const PhotonDistribution& p, Complex k) {
  Complex acc = 0.0;
  Complex kn = 1.0;
  for (double w : p.weights()) {
    acc += w * kn;
    kn *= k;
  }
  return acc;
}

/// Bound on the discarded tail |sum_{n > n_max} p_n k^n| given only the retained mass.
inline double truncation_epsilon(const PhotonDistribution& p, Complex k) {
  const double missing = std::max(0.0, 1.0 - p.mass());
  return missing * std::pow(std::abs(k), p.n_max() + 1);
}

struct LinearInequality {
  std::vector<double> coeffs;  // one per p_n
  double rhs = 0.0;            // coeffs . p >= rhs
};

/// Energy budget with the tail charged n_max+1 photons:
/// sum_n p_n (n_max + 1 - n) >= n_max + 1 - nbar.
inline LinearInequality relaxed_energy_row(const EnergyConstraint& ec) {
  LinearInequality row;
  row.coeffs.resize(static_cast<std::size_t>(ec.n_max) + 1);
  for (int n = 0; n <= ec.n_max; ++n) row.coeffs[static_cast<std::size_t>(n)] = ec.n_max + 1 - n;
  row.rhs = ec.n_max + 1 - ec.nbar;
  return row;
}

inline bool satisfies(const LinearInequality& row, const std::vector<double>& p, double tol = 1e-12) {
  double lhs = 0.0;
  for (std::size_t n = 0; n < row.coeffs.size() && n < p.size(); ++n) lhs += row.coeffs[n] * p[n];
  return lhs >= row.rhs - tol;
}

}  // namespace modebound
