#pragma once

// Primal-dual interior-point method for block-diagonal semidefinite programs.
//
//   (P)  max <C, X>  s.t.  A(X) = b,  X = diag(X_1..X_K, x_lp) >= 0
//   (D)  min b'y     s.t.  A*(y) - C = Z >= 0
//
// HKM search direction with Mehrotra predictor-corrector steps, infeasible
// start. Scalar unknowns and inequality slacks live in one diagonal (LP) block.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "modebound/conic.hpp"

namespace modebound::conic {

struct SdpOptions {
  /// A stopped iterate within these tolerances is reported optimal.
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-7;
  /// Iteration continues towards these while it makes progress.
  double target_feasibility = 1e-10;
  double target_gap = 1e-9;
  /// Fallback acceptance as near-optimal when the iteration stalls.
  double near_optimal_tol = 1e-6;
  int max_iterations = 120;
  /// Stop once the best merit has not improved for this many iterations.
  int stall_iterations = 8;
  double step_fraction = 0.96;
  /// Per-iteration trace on stderr.
  bool verbose = false;
};

namespace detail {

struct BlockEntry {
  int r = 0;
  int c = 0;
  double v = 0.0;  // symmetric: A[r,c] = A[c,r] = v
};

struct StandardForm {
  std::vector<int> dims;
  int lp_dim = 0;
  int m = 0;
  // psd[i][k] -> entries of constraint i in block k (sparse by block)
  std::vector<std::vector<std::pair<int, std::vector<BlockEntry>>>> psd;
  std::vector<std::vector<std::pair<int, double>>> lp;
  RVector b;
  std::vector<RMatrix> c_blocks;
  RVector c_lp;
  double c_const = 0.0;
  double sign = 1.0;  // +1 maximise, -1 when the IR minimises
  // IR scalar s -> (lp index of positive part, lp index of negative part or -1)
  std::vector<std::pair<int, int>> scalar_map;
  bool trivially_infeasible = false;
};

inline void accumulate(std::vector<std::pair<int, std::vector<BlockEntry>>>& by_block, int block, int r, int c, double v) {
  auto it = std::find_if(by_block.begin(), by_block.end(), [block](const auto& p) { return p.first == block; });
  if (it == by_block.end()) {
    by_block.push_back({block, {}});
    it = std::prev(by_block.end());
  }
  it->second.push_back({r, c, v});
}

inline StandardForm standardize(const ConicProgram& prog) {
  StandardForm sf;
  for (const auto& mv : prog.matrices()) sf.dims.push_back(mv.dim);
  int lp = 0;
  for (const auto& s : prog.scalars()) {
    if (s.nonnegative) {
      sf.scalar_map.push_back({lp++, -1});
    } else {
      sf.scalar_map.push_back({lp, lp + 1});
      lp += 2;
    }
  }
  std::vector<int> slack_of_row(prog.rows().size(), -1);
  for (std::size_t i = 0; i < prog.rows().size(); ++i)
    if (prog.rows()[i].relation != Relation::equal) slack_of_row[i] = lp++;
  sf.lp_dim = lp;
  sf.m = static_cast<int>(prog.rows().size());
  sf.psd.resize(static_cast<std::size_t>(sf.m));
  sf.lp.resize(static_cast<std::size_t>(sf.m));
  sf.b = RVector::Zero(sf.m);

  auto emit = [&](const LinearExpr& e, std::vector<std::pair<int, std::vector<BlockEntry>>>& blocks,
                  std::vector<std::pair<int, double>>& lpv, double scale) {
    for (const auto& [ref, coeff] : e.terms()) {
      const double c = coeff * scale;
      if (ref.kind == VarRef::Kind::scalar) {
        const auto [pos, neg] = sf.scalar_map[static_cast<std::size_t>(ref.var)];
        lpv.push_back({pos, c});
        if (neg >= 0) lpv.push_back({neg, -c});
      } else {
        // coefficient on the single unknown X(r,c) is tr(A X) with A(r,c)=A(c,r)=coeff/2
        accumulate(blocks, ref.var, ref.row, ref.col, ref.row == ref.col ? c : 0.5 * c);
      }
    }
  };

  for (int i = 0; i < sf.m; ++i) {
    const Row& row = prog.rows()[static_cast<std::size_t>(i)];
    emit(row.expr, sf.psd[static_cast<std::size_t>(i)], sf.lp[static_cast<std::size_t>(i)], 1.0);
    sf.b(i) = -row.expr.constant();
    const int slack = slack_of_row[static_cast<std::size_t>(i)];
    if (slack >= 0) sf.lp[static_cast<std::size_t>(i)].push_back({slack, row.relation == Relation::less_equal ? 1.0 : -1.0});
    if (row.expr.terms().empty()) {
      const double c = row.expr.constant();
      const bool ok = row.relation == Relation::equal ? std::abs(c) <= 1e-12
                      : row.relation == Relation::less_equal ? c <= 1e-12
                                                             : c >= -1e-12;
      if (!ok) sf.trivially_infeasible = true;
    }
  }

  sf.sign = prog.sense() == Sense::maximize ? 1.0 : -1.0;
  sf.c_blocks.reserve(sf.dims.size());
  for (int d : sf.dims) sf.c_blocks.push_back(RMatrix::Zero(d, d));
  sf.c_lp = RVector::Zero(sf.lp_dim);
  std::vector<std::pair<int, std::vector<BlockEntry>>> cb;
  std::vector<std::pair<int, double>> cl;
  emit(prog.objective(), cb, cl, sf.sign);
  for (const auto& [k, entries] : cb)
    for (const auto& e : entries) {
      sf.c_blocks[static_cast<std::size_t>(k)](e.r, e.c) += e.v;
      if (e.r != e.c) sf.c_blocks[static_cast<std::size_t>(k)](e.c, e.r) += e.v;
    }
  for (const auto& [l, v] : cl) sf.c_lp(l) += v;
  sf.c_const = prog.objective().constant();
  // unit-norm rows; b'y is unchanged under the matching rescaling of y
  for (int i = 0; i < sf.m; ++i) {
    double s2 = 0.0;
    for (const auto& [k, entries] : sf.psd[static_cast<std::size_t>(i)])
      for (const auto& e : entries) s2 += (e.r == e.c ? 1.0 : 2.0) * e.v * e.v;
    for (const auto& [l, v] : sf.lp[static_cast<std::size_t>(i)]) s2 += v * v;
    if (s2 == 0.0) continue;
    const double inv = 1.0 / std::sqrt(s2);
    for (auto& [k, entries] : sf.psd[static_cast<std::size_t>(i)])
      for (auto& e : entries) e.v *= inv;
    for (auto& [l, v] : sf.lp[static_cast<std::size_t>(i)]) v *= inv;
    sf.b(i) *= inv;
  }
  // rows without unknowns carry no information once checked above
  int kept = 0;
  for (int i = 0; i < sf.m; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    if (sf.psd[ii].empty() && sf.lp[ii].empty()) continue;
    if (kept != i) {
      const auto kk = static_cast<std::size_t>(kept);
      sf.psd[kk] = std::move(sf.psd[ii]);
      sf.lp[kk] = std::move(sf.lp[ii]);
      sf.b(kept) = sf.b(i);
    }
    ++kept;
  }
  sf.psd.resize(static_cast<std::size_t>(kept));
  sf.lp.resize(static_cast<std::size_t>(kept));
  sf.b.conservativeResize(kept);
  sf.m = kept;
  return sf;
}

/// L with L L^T = X; Cholesky when it succeeds, otherwise a clipped eigen square root.
inline RMatrix psd_factor(const RMatrix& x) {
  Eigen::LLT<RMatrix> llt(x);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(x);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

/// tr(A_i W) restricted to one block, W not necessarily symmetric.
inline double apply_entries(const std::vector<BlockEntry>& entries, const RMatrix& w) {
  double s = 0.0;
  for (const auto& e : entries) s += e.v * (e.r == e.c ? w(e.r, e.r) : w(e.r, e.c) + w(e.c, e.r));
  return s;
}

/// Largest alpha with x + alpha dx PSD (capped), given x PD.
inline double max_step_psd(const RMatrix& x, const RMatrix& dx) {
  if (x.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::LLT<RMatrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const RMatrix l = llt.matrixL();
  RMatrix w = l.triangularView<Eigen::Lower>().solve(dx);
  w = l.triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
  w = 0.5 * (w + w.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(w, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double max_step_lp(const RVector& x, const RVector& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index l = 0; l < x.size(); ++l)
    if (dx(l) < 0.0) a = std::min(a, -x(l) / dx(l));
  return a;
}

}  // namespace detail

/// Solves a ConicProgram. Never throws on infeasible or badly conditioned
/// input; those outcomes are reported through the status.
inline SolveReport solve_sdp(const ConicProgram& prog, const SdpOptions& opt = {}) {
  using detail::BlockEntry;
  SolveReport rep;
  const detail::StandardForm sf = detail::standardize(prog);
  const int m = sf.m;
  const int nblocks = static_cast<int>(sf.dims.size());

  auto finish_solution = [&](const std::vector<RMatrix>& xb, const RVector& xl) {
    rep.solution.matrices = xb;
    rep.solution.scalars.resize(sf.scalar_map.size());
    for (std::size_t s = 0; s < sf.scalar_map.size(); ++s) {
      const auto [pos, neg] = sf.scalar_map[s];
      rep.solution.scalars[s] = xl(pos) - (neg >= 0 ? xl(neg) : 0.0);
    }
  };

  if (sf.trivially_infeasible) {
    rep.status = SolveStatus::infeasible;
    return rep;
  }

  // constraints touching each block, with their entries there
  std::vector<std::vector<std::pair<int, const std::vector<BlockEntry>*>>> touching(static_cast<std::size_t>(nblocks));
  for (int i = 0; i < m; ++i)
    for (const auto& [k, entries] : sf.psd[static_cast<std::size_t>(i)])
      touching[static_cast<std::size_t>(k)].push_back({i, &entries});

  std::vector<std::vector<std::pair<int, double>>> lp_cols(static_cast<std::size_t>(sf.lp_dim));
  for (int i = 0; i < m; ++i)
    for (const auto& [l, v] : sf.lp[static_cast<std::size_t>(i)]) lp_cols[static_cast<std::size_t>(l)].push_back({i, v});

  auto apply_a = [&](const std::vector<RMatrix>& w, const RVector& wl) {
    RVector out = RVector::Zero(m);
    for (int k = 0; k < nblocks; ++k)
      for (const auto& [i, entries] : touching[static_cast<std::size_t>(k)])
        out(i) += detail::apply_entries(*entries, w[static_cast<std::size_t>(k)]);
    for (int i = 0; i < m; ++i)
      for (const auto& [l, v] : sf.lp[static_cast<std::size_t>(i)]) out(i) += v * wl(l);
    return out;
  };

  auto apply_at = [&](const RVector& y, std::vector<RMatrix>& out, RVector& outl) {
    out.resize(static_cast<std::size_t>(nblocks));
    for (int k = 0; k < nblocks; ++k) {
      auto& o = out[static_cast<std::size_t>(k)];
      o = RMatrix::Zero(sf.dims[static_cast<std::size_t>(k)], sf.dims[static_cast<std::size_t>(k)]);
      for (const auto& [i, entries] : touching[static_cast<std::size_t>(k)])
        for (const auto& e : *entries) {
          o(e.r, e.c) += y(i) * e.v;
          if (e.r != e.c) o(e.c, e.r) += y(i) * e.v;
        }
    }
    outl = RVector::Zero(sf.lp_dim);
    for (int i = 0; i < m; ++i)
      for (const auto& [l, v] : sf.lp[static_cast<std::size_t>(i)]) outl(l) += y(i) * v;
  };

  // starting point
  double norm_c = sf.c_lp.squaredNorm();
  for (const auto& c : sf.c_blocks) norm_c += c.squaredNorm();
  norm_c = std::sqrt(norm_c);
  std::vector<double> a_norm(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (const auto& [k, entries] : sf.psd[static_cast<std::size_t>(i)])
      for (const auto& e : entries) s += (e.r == e.c ? 1.0 : 2.0) * e.v * e.v;
    for (const auto& [l, v] : sf.lp[static_cast<std::size_t>(i)]) s += v * v;
    a_norm[static_cast<std::size_t>(i)] = std::sqrt(s);
  }
  double xi = 10.0, eta = 10.0;
  int n_total = sf.lp_dim;
  for (int d : sf.dims) n_total += d;
  for (int i = 0; i < m; ++i) {
    xi = std::max(xi, std::sqrt(static_cast<double>(n_total)) * (1.0 + std::abs(sf.b(i))) / (1.0 + a_norm[static_cast<std::size_t>(i)]));
    eta = std::max(eta, a_norm[static_cast<std::size_t>(i)]);
  }
  eta = std::max({eta, norm_c, std::sqrt(static_cast<double>(n_total))});

  std::vector<RMatrix> x(static_cast<std::size_t>(nblocks)), z(static_cast<std::size_t>(nblocks));
  for (int k = 0; k < nblocks; ++k) {
    const int d = sf.dims[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(k)] = xi * RMatrix::Identity(d, d);
    z[static_cast<std::size_t>(k)] = eta * RMatrix::Identity(d, d);
  }
  RVector xl = RVector::Constant(sf.lp_dim, xi);
  RVector zl = RVector::Constant(sf.lp_dim, eta);
  RVector y = RVector::Zero(m);

  const double norm_b = sf.b.norm();
  const auto inner = [&](const std::vector<RMatrix>& a, const RVector& al, const std::vector<RMatrix>& bm, const RVector& bl) {
    double s = al.dot(bl);
    for (int k = 0; k < nblocks; ++k) s += (a[static_cast<std::size_t>(k)].cwiseProduct(bm[static_cast<std::size_t>(k)])).sum();
    return s;
  };

  std::vector<RMatrix> zinv(static_cast<std::size_t>(nblocks));
  std::vector<RMatrix> aty, rd(static_cast<std::size_t>(nblocks));
  RVector atyl, rdl;
  double best_merit = std::numeric_limits<double>::infinity();
  std::vector<RMatrix> best_x;
  RVector best_xl;
  double best_p = 0, best_d = 0, best_pinf = 0, best_dinf = 0, best_gap = 0;
  int last_improvement = 0;
  double checkpoint_merit = std::numeric_limits<double>::infinity();
  double mu0 = 0.0, pinf0 = 0.0, dinf0 = 0.0;
  double last_pinf = 0.0, last_dinf = 0.0, last_mu = 0.0;

  for (int iter = 0; iter <= opt.max_iterations; ++iter) {
    rep.iterations = iter;
    // residuals
    const RVector ax = apply_a(x, xl);
    const RVector rp = sf.b - ax;
    apply_at(y, aty, atyl);
    double rd_norm2 = 0.0;
    for (int k = 0; k < nblocks; ++k) {
      rd[static_cast<std::size_t>(k)] = sf.c_blocks[static_cast<std::size_t>(k)] - aty[static_cast<std::size_t>(k)] + z[static_cast<std::size_t>(k)];
      rd_norm2 += rd[static_cast<std::size_t>(k)].squaredNorm();
    }
    rdl = sf.c_lp - atyl + zl;
    rd_norm2 += rdl.squaredNorm();

    const double pobj = inner(sf.c_blocks, sf.c_lp, x, xl);
    const double dobj = sf.b.dot(y);
    const double pinf = rp.norm() / (1.0 + norm_b);
    const double dinf = std::sqrt(rd_norm2) / (1.0 + norm_c);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double mu = inner(x, xl, z, zl) / n_total;

    const double merit = std::max({pinf, dinf, gap});
    if (iter == 0) {
      mu0 = mu;
      pinf0 = std::max(pinf, 1e-300);
      dinf0 = std::max(dinf, 1e-300);
    }
    last_pinf = pinf;
    last_dinf = dinf;
    last_mu = mu;
    if (opt.verbose)
      std::fprintf(stderr, "%3d pobj % .10e dobj % .10e pinf %.2e dinf %.2e gap %.2e mu %.2e\n", iter, sf.sign * pobj + sf.c_const,
                   sf.sign * dobj + sf.c_const, pinf, dinf, gap, mu);
    if (merit < best_merit) {
      if (merit < 0.9 * checkpoint_merit) {
        last_improvement = iter;
        checkpoint_merit = merit;
      }
      best_merit = merit;
      best_x = x;
      best_xl = xl;
      best_p = pobj;
      best_d = dobj;
      best_pinf = pinf;
      best_dinf = dinf;
      best_gap = gap;
    }
    if (pinf < opt.target_feasibility && dinf < opt.target_feasibility && gap < opt.target_gap) break;
    // infeasibility certificates
    if (dobj < 0.0 && std::abs(dobj) > 1e8 * (1.0 + norm_c)) {
      rep.status = SolveStatus::infeasible;
      rep.primal_objective = sf.sign * pobj + sf.c_const;
      rep.dual_objective = sf.sign * dobj + sf.c_const;
      finish_solution(x, xl);
      return rep;
    }
    if (pobj > 1e8 * (1.0 + norm_b) && rp.norm() < 1e-6 * pobj) {
      rep.status = SolveStatus::unbounded;
      rep.primal_objective = sf.sign * pobj + sf.c_const;
      rep.dual_objective = sf.sign * dobj + sf.c_const;
      finish_solution(x, xl);
      return rep;
    }
    if (iter == opt.max_iterations || iter - last_improvement > opt.stall_iterations) break;

    // Schur complement M_ij = tr(A_i X A_j Z^-1) + sum_l a_il a_jl x_l / z_l, kept in factored
    // form M = B^T B with column i of B holding vec(Lx^T A_i Rz), X = Lx Lx^T, Z^-1 = Rz Rz^T.
    // Solving through a QR factor of B avoids squaring the condition number.
    std::vector<RMatrix> rz(static_cast<std::size_t>(nblocks));
    bool ok = true;
    for (int k = 0; k < nblocks && ok; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      Eigen::LLT<RMatrix> llt(z[kk]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      const int d = sf.dims[kk];
      rz[kk] = llt.matrixU().solve(RMatrix::Identity(d, d));
      zinv[kk] = rz[kk] * rz[kk].transpose();
    }
    if (!ok) break;

    Eigen::Index b_rows = sf.lp_dim;
    for (int d : sf.dims) b_rows += static_cast<Eigen::Index>(d) * d;
    RMatrix bmat = RMatrix::Zero(b_rows, m);
    Eigen::Index off = 0;
    for (int k = 0; k < nblocks; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const int d = sf.dims[kk];
      const RMatrix lx = detail::psd_factor(x[kk]);
      for (const auto& [i, entries_i] : touching[kk]) {
        Eigen::Map<RMatrix> col(bmat.col(i).data() + off, d, d);
        for (const auto& e : *entries_i) {
          col.noalias() += e.v * lx.row(e.r).transpose() * rz[kk].row(e.c);
          if (e.r != e.c) col.noalias() += e.v * lx.row(e.c).transpose() * rz[kk].row(e.r);
        }
      }
      off += static_cast<Eigen::Index>(d) * d;
    }
    for (int l = 0; l < sf.lp_dim; ++l) {
      const double sl = std::sqrt(xl(l) / zl(l));
      for (const auto& [i, v] : lp_cols[static_cast<std::size_t>(l)]) bmat(off + l, i) = v * sl;
    }

    if (opt.verbose) {
      Eigen::SelfAdjointEigenSolver<RMatrix> es(bmat.transpose() * bmat, Eigen::EigenvaluesOnly);
      std::fprintf(stderr, "    schur m=%d eig [%.3e, %.3e]\n", m, es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff());
    }
    Eigen::ColPivHouseholderQR<RMatrix> qr(bmat);
    const bool full_rank = b_rows >= m && qr.rank() == m;
    RMatrix rfac;
    Eigen::LDLT<RMatrix> schur_ldlt;
    if (full_rank) {
      rfac = qr.matrixR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
    } else {
      schur_ldlt.compute(bmat.transpose() * bmat);
    }
    auto solve_once = [&](const RVector& r) -> RVector {
      if (!full_rank) return schur_ldlt.solve(r);
      RVector t = qr.colsPermutation().transpose() * r;
      t = rfac.transpose().triangularView<Eigen::Lower>().solve(t);
      t = rfac.triangularView<Eigen::Upper>().solve(t);
      return qr.colsPermutation() * t;
    };
    auto solve_schur = [&](const RVector& r) -> RVector {
      RVector v = solve_once(r);
      for (int pass = 0; pass < 2; ++pass) v += solve_once(r - bmat.transpose() * (bmat * v));
      return v;
    };

    // X Rd Z^-1 term is common to predictor and corrector
    std::vector<RMatrix> xrdz(static_cast<std::size_t>(nblocks));
    for (int k = 0; k < nblocks; ++k)
      xrdz[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] * rd[static_cast<std::size_t>(k)] * zinv[static_cast<std::size_t>(k)];
    const RVector xrdzl = xl.cwiseProduct(rdl).cwiseQuotient(zl);

    std::vector<RMatrix> dx(static_cast<std::size_t>(nblocks)), dz(static_cast<std::size_t>(nblocks));
    RVector dxl, dzl, dy;
    auto direction = [&](double sigma_mu, const std::vector<RMatrix>* corr, const RVector* corrl) {
      std::vector<RMatrix> t(static_cast<std::size_t>(nblocks));
      for (int k = 0; k < nblocks; ++k) {
        t[static_cast<std::size_t>(k)] = sigma_mu * zinv[static_cast<std::size_t>(k)] - x[static_cast<std::size_t>(k)] + xrdz[static_cast<std::size_t>(k)];
        if (corr) t[static_cast<std::size_t>(k)] -= (*corr)[static_cast<std::size_t>(k)];
      }
      RVector tl = (sigma_mu * zl.cwiseInverse() - xl + xrdzl);
      if (corrl) tl -= *corrl;
      const RVector rhs = apply_a(t, tl) - rp;
      dy = solve_schur(rhs);
      std::vector<RMatrix> atdy;
      RVector atdyl;
      apply_at(dy, atdy, atdyl);
      for (int k = 0; k < nblocks; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        dz[kk] = atdy[kk] - rd[kk];
        RMatrix d = sigma_mu * zinv[kk] - x[kk] - x[kk] * dz[kk] * zinv[kk];
        if (corr) d -= (*corr)[kk];
        dx[kk] = 0.5 * (d + d.transpose());
      }
      dzl = atdyl - rdl;
      dxl = sigma_mu * zl.cwiseInverse() - xl - xl.cwiseProduct(dzl).cwiseQuotient(zl);
      if (corrl) dxl -= *corrl;
    };

    auto step_lengths = [&](double& ap, double& ad) {
      ap = detail::max_step_lp(xl, dxl);
      ad = detail::max_step_lp(zl, dzl);
      for (int k = 0; k < nblocks; ++k) {
        ap = std::min(ap, detail::max_step_psd(x[static_cast<std::size_t>(k)], dx[static_cast<std::size_t>(k)]));
        ad = std::min(ad, detail::max_step_psd(z[static_cast<std::size_t>(k)], dz[static_cast<std::size_t>(k)]));
      }
    };

    // predictor
    direction(0.0, nullptr, nullptr);
    double ap = 0, ad = 0;
    step_lengths(ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0.0;
    {
      std::vector<RMatrix> xa(static_cast<std::size_t>(nblocks)), za(static_cast<std::size_t>(nblocks));
      for (int k = 0; k < nblocks; ++k) {
        xa[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + ap * dx[static_cast<std::size_t>(k)];
        za[static_cast<std::size_t>(k)] = z[static_cast<std::size_t>(k)] + ad * dz[static_cast<std::size_t>(k)];
      }
      mu_aff = inner(xa, xl + ap * dxl, za, zl + ad * dzl) / n_total;
    }
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);
    // keep some centering while far from feasibility
    if (std::max(pinf, dinf) > 1e-3) sigma = std::max(sigma, 0.1);
    // do not let complementarity run ahead of feasibility
    {
      const double lag = std::max(last_pinf / pinf0, last_dinf / dinf0) / (last_mu / mu0);
      if (lag > 1.0 && std::max(last_pinf, last_dinf) > opt.target_feasibility) sigma = std::max(sigma, std::min(0.5, 0.05 * lag));
    }

    std::vector<RMatrix> corr(static_cast<std::size_t>(nblocks));
    for (int k = 0; k < nblocks; ++k)
      corr[static_cast<std::size_t>(k)] = dx[static_cast<std::size_t>(k)] * dz[static_cast<std::size_t>(k)] * zinv[static_cast<std::size_t>(k)];
    const RVector corrl = dxl.cwiseProduct(dzl).cwiseQuotient(zl);

    // corrector
    direction(sigma * mu, &corr, &corrl);
    step_lengths(ap, ad);
    const double gamma = opt.step_fraction;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    if (opt.verbose) std::fprintf(stderr, "    sigma %.2e ap %.3e ad %.3e\n", sigma, ap, ad);
    if (!(ap > 1e-14) && !(ad > 1e-14)) break;

    for (int k = 0; k < nblocks; ++k) {
      x[static_cast<std::size_t>(k)] += ap * dx[static_cast<std::size_t>(k)];
      z[static_cast<std::size_t>(k)] += ad * dz[static_cast<std::size_t>(k)];
      x[static_cast<std::size_t>(k)] = 0.5 * (x[static_cast<std::size_t>(k)] + x[static_cast<std::size_t>(k)].transpose()).eval();
      z[static_cast<std::size_t>(k)] = 0.5 * (z[static_cast<std::size_t>(k)] + z[static_cast<std::size_t>(k)].transpose()).eval();
    }
    xl += ap * dxl;
    zl += ad * dzl;
    y += ad * dy;
    // guard against LP entries collapsing to exactly zero
    for (Eigen::Index l = 0; l < xl.size(); ++l) {
      xl(l) = std::max(xl(l), 1e-300);
      zl(l) = std::max(zl(l), 1e-300);
    }
  }

  if (best_x.empty()) {
    rep.status = SolveStatus::numerical_failure;
    return rep;
  }
  if (best_pinf < opt.feasibility_tol && best_dinf < opt.feasibility_tol && best_gap < opt.gap_tol)
    rep.status = SolveStatus::optimal;
  else
    rep.status = best_merit < opt.near_optimal_tol ? SolveStatus::near_optimal : SolveStatus::numerical_failure;
  rep.primal_objective = sf.sign * best_p + sf.c_const;
  rep.dual_objective = sf.sign * best_d + sf.c_const;
  rep.primal_infeasibility = best_pinf;
  rep.dual_infeasibility = best_dinf;
  rep.gap = best_gap;
  finish_solution(best_x, best_xl);
  return rep;
}

}  // namespace modebound::conic
