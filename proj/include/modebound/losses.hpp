#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "modebound/analytic.hpp"
#include "modebound/common.hpp"
#include "modebound/fock.hpp"
#include "modebound/source_lp.hpp"

namespace modebound {

/// Mode-independent loss: every mode passes a beam splitter of transmittivity t^2
/// whose other input is vacuum.
struct LossChannel {
  double t2 = 1.0;

  LossChannel() = default;
  explicit LossChannel(double t2_) : t2(t2_) {
    if (!(t2 >= 0.0 && t2 <= 1.0)) throw ValidationError("transmittivity t^2 must lie in [0, 1]");
  }
  double r2() const { return 1.0 - t2; }
};

namespace detail {

inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// C(m, n) t2^n (1 - t2)^(m - n), exact at the endpoints t2 = 0 and t2 = 1.
inline double binomial_pmf(int m, int n, double t2) {
  if (n < 0 || n > m) return 0.0;
  if (t2 <= 0.0) return n == 0 ? 1.0 : 0.0;
  if (t2 >= 1.0) return n == m ? 1.0 : 0.0;
  return std::exp(log_choose(m, n) + n * std::log(t2) + (m - n) * std::log1p(-t2));
}

inline RMatrix loss_matrix(int n_max, double t2) {
  RMatrix T = RMatrix::Zero(n_max + 1, n_max + 1);
  for (int m = 0; m <= n_max; ++m)
    for (int n = 0; n <= m; ++n) T(n, m) = binomial_pmf(m, n, t2);
  return T;
}

}  // namespace detail

/// Photon-number weights after loss: q_n = sum_{m >= n} p_m C(m, n) t^2n r^2(m-n).
inline PhotonDistribution loss_transform(const PhotonDistribution& p, const LossChannel& ch) {
  const int n_max = p.n_max();
  std::vector<double> q(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int m = 0; m <= n_max; ++m)
    for (int n = 0; n <= m; ++n) q[static_cast<std::size_t>(n)] += p[m] * detail::binomial_pmf(m, n, ch.t2);
  std::optional<double> mean;
  if (p.declared_mean()) mean = *p.declared_mean() * ch.t2;
  return PhotonDistribution(std::move(q), mean);
}

struct LossInversion {
  /// Pre-loss weights; may contain negative entries, which are reported rather than clipped.
  std::vector<double> p;
  std::vector<int> negative;
  /// 2-norm condition number of the triangular loss matrix.
  double condition = 1.0;
  bool ill_conditioned = false;

  bool physical() const { return negative.empty(); }
  PhotonDistribution distribution() const {
    if (!physical())
      throw ValidationError("pre-loss weights are negative at n = " + std::to_string(negative.front()) +
                            ": not reachable from a physical input at this cutoff");
    return PhotonDistribution(p);
  }
};

inline constexpr double kIllConditioned = 1e12;

/// Solves loss_transform(p) = q by back substitution.
inline LossInversion loss_invert(const PhotonDistribution& q, const LossChannel& ch) {
  if (!(ch.t2 > 0.0)) throw ValidationError("loss inversion needs t^2 > 0");
  const int n_max = q.n_max();
  const RMatrix T = detail::loss_matrix(n_max, ch.t2);
  LossInversion out;
  out.p.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int n = n_max; n >= 0; --n) {
    double r = q[n];
    for (int m = n + 1; m <= n_max; ++m) r -= T(n, m) * out.p[static_cast<std::size_t>(m)];
    out.p[static_cast<std::size_t>(n)] = r / T(n, n);
  }
  const RVector s = Eigen::JacobiSVD<RMatrix>(T).singularValues();
  out.condition = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  out.ill_conditioned = !(out.condition < kIllConditioned);
  const double tol = 1e-12 + 1e-16 * out.condition;
  for (int n = 0; n <= n_max; ++n)
    if (out.p[static_cast<std::size_t>(n)] < -tol) out.negative.push_back(n);
  return out;
}

/// Coherent-state input: 1/2 (1 + sqrt(1 - exp(-2 t^2 nbar (1 - k)))).
inline double coherent_bound(double k, double nbar, const LossChannel& ch) {
  if (!(k >= 0.0 && k <= 1.0)) throw ValidationError("coherent_bound needs k in [0, 1]");
  if (!(nbar >= 0.0)) throw ValidationError("mean photon number must be nonnegative");
  return 0.5 * (1.0 + std::sqrt(std::max(0.0, -std::expm1(-2.0 * ch.t2 * nbar * (1.0 - k)))));
}

/// Fock input |m>, photon number measured after loss, then the two-state optimum
/// for the n photons that survived.
inline double fock_bound_lossy(double k, int m, const LossChannel& ch) {
  if (!(k >= 0.0 && k <= 1.0)) throw ValidationError("fock_bound_lossy needs k in [0, 1]");
  if (m < 0) throw ValidationError("photon number must be nonnegative");
  double s = 0.0;
  for (int n = 0; n <= m; ++n) s += detail::binomial_pmf(m, n, ch.t2) * std::sqrt(std::max(0.0, 1.0 - std::pow(k, 2 * n)));
  return 0.5 * (1.0 + s);
}

/// Achievable estimate at integer mean m: the better of coherent and Fock inputs.
inline double estimate_floor(double k, int m, const LossChannel& ch) {
  return std::max(coherent_bound(k, m, ch), fock_bound_lossy(k, m, ch));
}

struct LossySourceResult {
  BoundResult bound;
  /// Input weights that produce the optimal post-loss distribution; empty at t^2 = 0.
  std::optional<LossInversion> pre_loss;
};

/// Source scenario under loss: the post-loss weights are any number mixture of
/// mean nbar t^2, so the lossless pipeline runs at that mean.
inline LossySourceResult source_lossy_bound(const ModeFamily& f, const EnergyConstraint& ec, const LossChannel& ch,
                                            Task task, const FockTableOptions& opt = {}) {
  LossySourceResult out;
  out.bound = source_bound(f, EnergyConstraint(ec.nbar * ch.t2, ec.n_max), task, opt);
  if (ch.t2 > 0.0 && out.bound.weights) out.pre_loss = loss_invert(PhotonDistribution(*out.bound.weights), ch);
  return out;
}

/// Truncated two-mode Fock basis |n_a, n_b> with n_a + n_b <= n_trunc.
class TwoModeBasis {
 public:
  explicit TwoModeBasis(int n_trunc) : n_trunc_(n_trunc) {
    if (n_trunc < 0) throw ValidationError("two-mode truncation must be nonnegative");
  }
  int n_trunc() const { return n_trunc_; }
  int size() const { return (n_trunc_ + 1) * (n_trunc_ + 2) / 2; }
  /// States are ordered by total photon number, then by n_b.
  int index(int na, int nb) const {
    const int n = na + nb;
    return n * (n + 1) / 2 + nb;
  }

 private:
  int n_trunc_;
};

struct TwoModeState {
  int n_trunc = 0;
  CMatrix rho;

  double trace() const { return rho.trace().real(); }
};

/// Loss on one mode: sigma = sum_l K_l |psi><psi| K_l^dagger with
/// <n-l|K_l|n> = sqrt(C(n, l)) t^(n-l) r^l.
inline CMatrix lossy_single_mode(const std::vector<Complex>& amplitudes, const LossChannel& ch) {
  const int n_trunc = static_cast<int>(amplitudes.size()) - 1;
  CMatrix sigma = CMatrix::Zero(n_trunc + 1, n_trunc + 1);
  for (int l = 0; l <= n_trunc; ++l) {
    CVector v = CVector::Zero(n_trunc + 1);
    for (int n = l; n <= n_trunc; ++n)
      v(n - l) = std::sqrt(detail::binomial_pmf(n, l, ch.r2())) * amplitudes[static_cast<std::size_t>(n)];
    sigma.noalias() += v * v.adjoint();
  }
  return sigma;
}

/// Isometry placing a single-mode state on the mode b = conj(k) a_1 + s a_perp,
/// so that [a_1, b^dagger] = k: |n>_b = sum_j sqrt(C(n, j)) k^j s^(n-j) |j, n-j>.
inline CMatrix mode_embedding(const TwoModeBasis& basis, Complex k) {
  const double s = std::sqrt(std::max(0.0, 1.0 - std::norm(k)));
  const int n_trunc = basis.n_trunc();
  CMatrix E = CMatrix::Zero(basis.size(), n_trunc + 1);
  for (int n = 0; n <= n_trunc; ++n)
    for (int j = 0; j <= n; ++j)
      E(basis.index(j, n - j), n) = std::sqrt(std::exp(detail::log_choose(n, j))) * ipow(k, j) * std::pow(s, n - j);
  return E;
}

inline TwoModeState embed(const TwoModeBasis& basis, const CMatrix& sigma, Complex k) {
  const CMatrix E = mode_embedding(basis, k);
  return {basis.n_trunc(), E * sigma * E.adjoint()};
}

/// 1/2 (1 + 1/2 ||rho_1 - rho_2||_1).
inline double trace_distance_success(const TwoModeState& r1, const TwoModeState& r2) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(r1.rho - r2.rho, Eigen::EigenvaluesOnly);
  return 0.5 * (1.0 + 0.5 * es.eigenvalues().cwiseAbs().sum());
}

/// Success probability for the same input amplitudes sent on modes a_1 and a_2
/// with [a_1, a_2^dagger] = k, both followed by the loss channel.
class LossyPairModel {
 public:
  LossyPairModel(Complex k, const LossChannel& ch, int n_trunc)
      : ch_(ch), basis_(n_trunc), e1_(mode_embedding(basis_, 1.0)), e2_(mode_embedding(basis_, k)) {
    if (!(std::abs(k) <= 1.0 + 1e-12)) throw ValidationError("commutator modulus exceeds 1");
  }

  int n_trunc() const { return basis_.n_trunc(); }

  double success(const std::vector<Complex>& amplitudes) const {
    const CMatrix sigma = lossy_single_mode(amplitudes, ch_);
    const CMatrix diff = e1_ * sigma * e1_.adjoint() - e2_ * sigma * e2_.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * (1.0 + 0.5 * es.eigenvalues().cwiseAbs().sum());
  }

 private:
  LossChannel ch_;
  TwoModeBasis basis_;
  CMatrix e1_, e2_;
};

namespace detail {

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Downhill simplex minimisation with the standard coefficients.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, double step, int max_evaluations, double ftol) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> pts(d + 1, x0);
  for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step;
  std::vector<double> fv(d + 1);
  NelderMeadResult out;
  auto eval = [&](const std::vector<double>& x) {
    ++out.evaluations;
    return f(x);
  };
  for (std::size_t i = 0; i <= d; ++i) fv[i] = eval(pts[i]);
  std::vector<std::size_t> order(d + 1);
  auto affine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> r(d);
    for (std::size_t i = 0; i < d; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
    if (std::abs(fv[worst] - fv[best]) <= ftol) {
      out.converged = true;
      break;
    }
    if (out.evaluations >= max_evaluations) break;
    std::vector<double> c(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i)
      if (i != worst)
        for (std::size_t j = 0; j < d; ++j) c[j] += pts[i][j] / static_cast<double>(d);
    const auto xr = affine(c, pts[worst], -1.0);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      const auto xe = affine(c, pts[worst], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      const auto xc = outside ? affine(c, xr, 0.5) : affine(c, pts[worst], 0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, fv[worst])) {
        pts[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          pts[i] = affine(pts[best], pts[i], 0.5);
          fv[i] = eval(pts[i]);
        }
      }
    }
  }
  const std::size_t best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  out.x = pts[best];
  out.f = fv[best];
  return out;
}

/// Weights proportional to exp(theta_n + lambda n) with lambda chosen so that the
/// mean is nbar (0 < nbar < n_trunc).
inline std::vector<double> tilted_softmax(const std::vector<double>& theta, double nbar) {
  const std::size_t len = theta.size();
  const double top = *std::max_element(theta.begin(), theta.end());
  std::vector<double> w(len);
  auto weights_at = [&](double lambda) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < len; ++n) peak = std::max(peak, theta[n] - top + lambda * static_cast<double>(n));
    double z = 0.0;
    for (std::size_t n = 0; n < len; ++n) {
      w[n] = std::exp(theta[n] - top + lambda * static_cast<double>(n) - peak);
      z += w[n];
    }
    double mean = 0.0;
    for (std::size_t n = 0; n < len; ++n) {
      w[n] /= z;
      mean += static_cast<double>(n) * w[n];
    }
    return mean;
  };
  double lo = -1.0, hi = 1.0;
  while (weights_at(lo) > nbar && lo > -1e4) lo *= 2.0;
  while (weights_at(hi) < nbar && hi < 1e4) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (weights_at(mid) < nbar ? lo : hi) = mid;
  }
  weights_at(0.5 * (lo + hi));
  return w;
}

inline std::vector<double> log_profile(const std::vector<double>& p) {
  std::vector<double> theta(p.size());
  for (std::size_t n = 0; n < p.size(); ++n) theta[n] = std::log(std::max(p[n], 1e-12));
  return theta;
}

}  // namespace detail

struct HeuristicOptions {
  int n_trunc = 5;
  int restarts = 20;
  /// Also optimise the relative phases of the amplitudes and report that run separately.
  bool optimize_phases = false;
  unsigned seed = 1;
  unsigned jobs = 1;
  int max_evaluations = 6000;
  double ftol = 1e-12;
};

struct HeuristicRun {
  double p_correct = 0.5;
  std::vector<double> weights;
  /// Amplitude phases phi_n (phi_0 = 0); all zero unless phases were optimised.
  std::vector<double> phases;
  bool converged = false;
  int evaluations = 0;
};

/// Achievable (lower) estimate of the lossy two-mode channel optimum.
struct HeuristicResult {
  HeuristicRun best;
  std::optional<HeuristicRun> with_phases;
  int restarts = 0;
  int restarts_converged = 0;
};

/// Multi-start maximisation of the trace distance between the two lossy states over
/// input weights with mean nbar, amplitudes sqrt(p_n) with zero phases. Restarts are
/// seeded from the floor/ceil and coherent profiles, then random profiles.
inline HeuristicResult heuristic_channel_lossy(Complex k, double nbar, const LossChannel& ch,
                                               const HeuristicOptions& opt = {}) {
  if (!(nbar >= 0.0)) throw ValidationError("mean photon number must be nonnegative");
  if (opt.n_trunc < static_cast<int>(std::ceil(nbar)) + 2)
    throw ValidationError("heuristic truncation must be at least ceil(nbar) + 2");
  if (opt.restarts < 1) throw ValidationError("heuristic needs at least one restart");
  const LossyPairModel model(k, ch, opt.n_trunc);
  const std::size_t len = static_cast<std::size_t>(opt.n_trunc) + 1;

  HeuristicResult out;
  out.restarts = opt.restarts;
  if (nbar == 0.0) {
    std::vector<Complex> vac(len, 0.0);
    vac[0] = 1.0;
    out.best.p_correct = model.success(vac);
    out.best.weights.assign(len, 0.0);
    out.best.weights[0] = 1.0;
    out.best.phases.assign(len, 0.0);
    out.best.converged = true;
    out.restarts_converged = opt.restarts;
    return out;
  }

  auto amplitudes = [&](const std::vector<double>& p, const double* phases) {
    std::vector<Complex> c(len);
    for (std::size_t n = 0; n < len; ++n)
      c[n] = std::sqrt(p[n]) * (phases && n > 0 ? std::polar(1.0, phases[n - 1]) : Complex(1.0));
    return c;
  };

  std::vector<std::vector<double>> seeds;
  {
    std::vector<double> fc(len, 0.0);
    const PhotonDistribution f = floor_ceil_state(nbar);
    for (int n = 0; n <= f.n_max(); ++n) fc[static_cast<std::size_t>(n)] = f[n];
    seeds.push_back(detail::log_profile(fc));
    std::vector<double> poisson(len);
    for (std::size_t n = 0; n < len; ++n)
      poisson[n] = -nbar + static_cast<double>(n) * std::log(nbar) - std::lgamma(static_cast<double>(n) + 1.0);
    seeds.push_back(poisson);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 2.0);
    while (static_cast<int>(seeds.size()) < opt.restarts) {
      std::vector<double> theta(len);
      for (double& t : theta) t = gauss(rng);
      seeds.push_back(theta);
    }
    seeds.resize(static_cast<std::size_t>(opt.restarts));
  }

  auto objective = [&](const std::vector<double>& theta) {
    return -model.success(amplitudes(detail::tilted_softmax(theta, nbar), nullptr));
  };
  std::vector<HeuristicRun> runs(seeds.size());
  std::vector<std::vector<double>> thetas(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      auto r = detail::nelder_mead(objective, seeds[i], 1.0, opt.max_evaluations, opt.ftol);
      // a second pass from the incumbent guards against a collapsed simplex
      const auto r2 = detail::nelder_mead(objective, r.x, 0.25, opt.max_evaluations, opt.ftol);
      const int evals = r.evaluations + r2.evaluations;
      if (r2.f <= r.f) r = r2;
      runs[i].p_correct = -r.f;
      runs[i].weights = detail::tilted_softmax(r.x, nbar);
      runs[i].phases.assign(len, 0.0);
      runs[i].converged = r2.converged;
      runs[i].evaluations = evals;
      thetas[i] = r.x;
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(seeds.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::size_t best = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].converged) ++out.restarts_converged;
    if (runs[i].p_correct > runs[best].p_correct) best = i;
  }
  out.best = runs[best];

  if (opt.optimize_phases) {
    const std::size_t dims = 2 * len - 1;
    auto phase_objective = [&](const std::vector<double>& x) {
      const std::vector<double> theta(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(len));
      return -model.success(amplitudes(detail::tilted_softmax(theta, nbar), x.data() + len));
    };
    std::mt19937_64 rng(opt.seed + 7919);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    HeuristicRun pr;
    pr.p_correct = -1.0;
    for (int s = 0; s < std::max(1, opt.restarts / 4); ++s) {
      std::vector<double> x(dims, 0.0);
      std::copy(thetas[best].begin(), thetas[best].end(), x.begin());
      if (s > 0)
        for (std::size_t i = len; i < dims; ++i) x[i] = angle(rng);
      const auto r = detail::nelder_mead(phase_objective, x, 0.5, 4 * opt.max_evaluations, opt.ftol);
      pr.evaluations += r.evaluations;
      if (-r.f > pr.p_correct) {
        pr.p_correct = -r.f;
        const std::vector<double> theta(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(len));
        pr.weights = detail::tilted_softmax(theta, nbar);
        pr.phases.assign(len, 0.0);
        for (std::size_t n = 1; n < len; ++n) pr.phases[n] = std::remainder(r.x[len + n - 1], 2.0 * M_PI);
        pr.converged = r.converged;
      }
    }
    out.with_phases = pr;
  }
  return out;
}

}  // namespace modebound
