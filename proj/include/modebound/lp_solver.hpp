#pragma once

// Dense two-phase primal simplex with Bland's rule. Intended for the small
// photon-number LPs (a few rows, a few hundred columns), where exact vertex
// solutions are wanted rather than interior approximations.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "modebound/conic.hpp"

namespace modebound::conic {

struct LpOptions {
  double pivot_tol = 1e-11;
  double feasibility_tol = 1e-9;
  int max_pivots = 100000;
};

namespace detail {

// Column transform for one user variable: x = offset + sign * x' (x' >= 0), or a split x+ - x-.
struct ColumnMap {
  int pos = -1;
  int neg = -1;
  double offset = 0.0;
  double sign = 1.0;
};

class Tableau {
 public:
  Tableau(int rows, int cols) : t_(RMatrix::Zero(rows + 1, cols + 1)), basis_(static_cast<std::size_t>(rows), -1) {}

  RMatrix& data() { return t_; }
  std::vector<int>& basis() { return basis_; }
  int rows() const { return static_cast<int>(t_.rows()) - 1; }
  int cols() const { return static_cast<int>(t_.cols()) - 1; }
  double& rhs(int r) { return t_(r, cols()); }

  void pivot(int r, int c) {
    const double p = t_(r, c);
    t_.row(r) /= p;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  /// Runs Bland-rule pivots against the objective stored in the last row
  /// (row holds reduced costs of a minimisation). Returns false if unbounded.
  bool optimise(const std::vector<bool>& allowed, const LpOptions& opt, int& pivots) {
    const int obj = rows();
    const int nc = cols();
    while (pivots < opt.max_pivots) {
      int enter = -1;
      for (int c = 0; c < nc; ++c)
        if (allowed[static_cast<std::size_t>(c)] && t_(obj, c) < -opt.pivot_tol) {
          enter = c;
          break;
        }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < obj; ++r) {
        const double a = t_(r, enter);
        if (a > opt.pivot_tol) {
          const double ratio = t_(r, nc) / a;
          if (leave < 0 || ratio < best - 1e-14 ||
              (std::abs(ratio - best) <= 1e-14 && basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(static_cast<int>(leave), enter);
      ++pivots;
    }
    return true;
  }

 private:
  RMatrix t_;
  std::vector<int> basis_;
};

}  // namespace detail

inline LpReport solve_lp(const LinearProgram& lp, const LpOptions& opt = {}) {
  LpReport rep;
  const int nv = lp.num_variables();
  std::vector<detail::ColumnMap> cmap(static_cast<std::size_t>(nv));
  int ncol = 0;
  struct StdRow {
    std::vector<std::pair<int, double>> a;
    Relation rel;
    double b;
  };
  std::vector<StdRow> rows;
  double obj_const = lp.objective_constant();

  for (int v = 0; v < nv; ++v) {
    const auto& var = lp.variables()[static_cast<std::size_t>(v)];
    auto& cm = cmap[static_cast<std::size_t>(v)];
    if (std::isfinite(var.lower)) {
      cm.pos = ncol++;
      cm.offset = var.lower;
      if (std::isfinite(var.upper)) rows.push_back({{{cm.pos, 1.0}}, Relation::less_equal, var.upper - var.lower});
    } else if (std::isfinite(var.upper)) {
      cm.pos = ncol++;
      cm.offset = var.upper;
      cm.sign = -1.0;
    } else {
      cm.pos = ncol++;
      cm.neg = ncol++;
    }
  }
  const int n_bound_rows = static_cast<int>(rows.size());
  for (const auto& row : lp.rows()) {
    StdRow sr{{}, row.relation, row.rhs};
    for (const auto& [v, c] : row.coeffs) {
      const auto& cm = cmap[static_cast<std::size_t>(v)];
      sr.b -= c * cm.offset;
      sr.a.push_back({cm.pos, c * cm.sign});
      if (cm.neg >= 0) sr.a.push_back({cm.neg, -c});
    }
    rows.push_back(std::move(sr));
  }
  const double sense = lp.sense() == Sense::maximize ? 1.0 : -1.0;
  // maximise sense * c.x  ->  minimise -sense * c.x' in the tableau
  RVector cost = RVector::Zero(ncol);
  for (int v = 0; v < nv; ++v) {
    const auto& cm = cmap[static_cast<std::size_t>(v)];
    const double c = lp.objective()[static_cast<std::size_t>(v)];
    obj_const += c * cm.offset;
    cost(cm.pos) += sense * c * cm.sign;
    if (cm.neg >= 0) cost(cm.neg) -= sense * c;
  }

  const int m = static_cast<int>(rows.size());
  std::vector<double> flip(static_cast<std::size_t>(m), 1.0);
  int n_slack = 0, n_art = 0;
  for (int i = 0; i < m; ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    if (r.b < 0) {
      flip[static_cast<std::size_t>(i)] = -1.0;
      r.b = -r.b;
      for (auto& [c, v] : r.a) v = -v;
      if (r.rel == Relation::less_equal) r.rel = Relation::greater_equal;
      else if (r.rel == Relation::greater_equal) r.rel = Relation::less_equal;
    }
    if (r.rel != Relation::equal) ++n_slack;
    if (r.rel != Relation::less_equal) ++n_art;
  }
  const int total = ncol + n_slack + n_art;
  detail::Tableau tab(m, total);
  RMatrix& t = tab.data();
  RMatrix a_std = RMatrix::Zero(m, ncol + n_slack);
  RVector b_std(m);
  int slack = ncol, art = ncol + n_slack;
  std::vector<bool> is_art(static_cast<std::size_t>(total), false);
  for (int i = 0; i < m; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (const auto& [c, v] : r.a) {
      t(i, c) += v;
      a_std(i, c) += v;
    }
    t(i, total) = r.b;
    b_std(i) = r.b;
    int basic = -1;
    if (r.rel == Relation::less_equal) {
      t(i, slack) = 1.0;
      a_std(i, slack) = 1.0;
      basic = slack++;
    } else if (r.rel == Relation::greater_equal) {
      t(i, slack) = -1.0;
      a_std(i, slack) = -1.0;
      ++slack;
    }
    if (basic < 0) {
      t(i, art) = 1.0;
      is_art[static_cast<std::size_t>(art)] = true;
      basic = art++;
    }
    tab.basis()[static_cast<std::size_t>(i)] = basic;
  }

  int pivots = 0;
  std::vector<bool> allowed(static_cast<std::size_t>(total), true);
  // phase 1: minimise the artificial sum
  if (n_art > 0) {
    t.row(m).setZero();
    for (int c = ncol + n_slack; c < total; ++c) t(m, c) = 1.0;
    for (int i = 0; i < m; ++i)
      if (is_art[static_cast<std::size_t>(tab.basis()[static_cast<std::size_t>(i)])]) t.row(m) -= t.row(i);
    tab.optimise(allowed, opt, pivots);
    if (-t(m, total) > opt.feasibility_tol * (1.0 + b_std.cwiseAbs().maxCoeff())) {
      rep.status = SolveStatus::infeasible;
      rep.iterations = pivots;
      return rep;
    }
    // drive remaining artificials out of the basis where possible
    for (int i = 0; i < m; ++i) {
      if (!is_art[static_cast<std::size_t>(tab.basis()[static_cast<std::size_t>(i)])]) continue;
      for (int c = 0; c < ncol + n_slack; ++c)
        if (std::abs(t(i, c)) > opt.pivot_tol) {
          tab.pivot(i, c);
          break;
        }
    }
    for (int c = ncol + n_slack; c < total; ++c) allowed[static_cast<std::size_t>(c)] = false;
  }

  // phase 2
  t.row(m).setZero();
  for (int c = 0; c < ncol; ++c) t(m, c) = -cost(c);
  for (int i = 0; i < m; ++i) {
    const int bc = tab.basis()[static_cast<std::size_t>(i)];
    if (t(m, bc) != 0.0) t.row(m) -= t(m, bc) * t.row(i);
  }
  if (!tab.optimise(allowed, opt, pivots)) {
    rep.status = SolveStatus::unbounded;
    rep.iterations = pivots;
    return rep;
  }
  rep.iterations = pivots;

  // refine the vertex from the original data: x_B = B^-1 b
  std::vector<int> basic_cols;
  std::vector<int> basic_rows;
  for (int i = 0; i < m; ++i) {
    const int bc = tab.basis()[static_cast<std::size_t>(i)];
    if (!is_art[static_cast<std::size_t>(bc)]) {
      basic_cols.push_back(bc);
      basic_rows.push_back(i);
    }
  }
  RVector xs = RVector::Zero(ncol + n_slack);
  RVector y = RVector::Zero(m);
  const RVector full_cost = [&] {
    RVector c = RVector::Zero(ncol + n_slack);
    c.head(ncol) = cost;
    return c;
  }();
  if (static_cast<int>(basic_cols.size()) == m) {
    RMatrix bm(m, m);
    for (int j = 0; j < m; ++j) bm.col(j) = a_std.col(basic_cols[static_cast<std::size_t>(j)]);
    Eigen::FullPivLU<RMatrix> lu(bm);
    if (lu.isInvertible()) {
      const RVector xb = lu.solve(b_std);
      for (int j = 0; j < m; ++j) xs(basic_cols[static_cast<std::size_t>(j)]) = std::max(0.0, xb(j));
      RVector cb(m);
      for (int j = 0; j < m; ++j) cb(j) = full_cost(basic_cols[static_cast<std::size_t>(j)]);
      y = lu.transpose().solve(cb);
    } else {
      for (int i = 0; i < m; ++i) xs(tab.basis()[static_cast<std::size_t>(i)]) = t(i, total);
    }
  } else {
    // degenerate rows kept an artificial at zero; read the tableau directly
    for (int i = 0; i < m; ++i) {
      const int bc = tab.basis()[static_cast<std::size_t>(i)];
      if (!is_art[static_cast<std::size_t>(bc)]) xs(bc) = t(i, total);
    }
    // duals from reduced costs of the initial identity columns are not available for every row; use least squares
    RMatrix bt(static_cast<Eigen::Index>(basic_cols.size()), m);
    RVector cb(static_cast<Eigen::Index>(basic_cols.size()));
    for (std::size_t j = 0; j < basic_cols.size(); ++j) {
      bt.row(static_cast<Eigen::Index>(j)) = a_std.col(basic_cols[j]).transpose();
      cb(static_cast<Eigen::Index>(j)) = full_cost(basic_cols[j]);
    }
    y = bt.completeOrthogonalDecomposition().solve(cb);
  }

  rep.x.assign(static_cast<std::size_t>(nv), 0.0);
  for (int v = 0; v < nv; ++v) {
    const auto& cm = cmap[static_cast<std::size_t>(v)];
    double val = cm.offset + cm.sign * xs(cm.pos);
    if (cm.neg >= 0) val -= xs(cm.neg);
    rep.x[static_cast<std::size_t>(v)] = val;
  }
  double primal = lp.objective_constant();
  for (int v = 0; v < nv; ++v) primal += lp.objective()[static_cast<std::size_t>(v)] * rep.x[static_cast<std::size_t>(v)];
  rep.primal_objective = primal;
  // dual of max cost.x', A x' = b, x' >= 0 is min b.y with A'y >= cost; undo the sense flip
  rep.dual_objective = sense * b_std.dot(y) + obj_const;
  rep.row_duals.assign(lp.rows().size(), 0.0);
  for (std::size_t r = 0; r < lp.rows().size(); ++r) {
    const int i = n_bound_rows + static_cast<int>(r);
    rep.row_duals[r] = sense * flip[static_cast<std::size_t>(i)] * y(i);
  }
  rep.status = SolveStatus::optimal;
  return rep;
}

}  // namespace modebound::conic
