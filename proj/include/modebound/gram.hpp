#pragma once

// Gram-matrix programs for discriminating states built on a family of modes.
//
// The unknown is the Gram matrix G of the vectors {O|psi_j>} with O ranging
// over the identity and the measurement projectors. Projectivity and mutual
// orthogonality of the outcomes make every block G[(m,.),(m,.)] equal to
// G[(0,.),(m,.)] =: X_m and kill cross blocks, so G is determined by the
// blocks X_m, and completeness fixes the identity block to S = sum_m X_m.
// For such G one has v*Gv = sum_m (u + w_m)* X_m (u + w_m), hence G is PSD
// exactly when every X_m is. The programs below carry one PSD block per
// outcome instead of the full operator-by-state matrix; the full G is
// rebuilt from a solution by gram_matrix().

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "modebound/common.hpp"
#include "modebound/conic.hpp"
#include "modebound/fock.hpp"
#include "modebound/modes.hpp"
#include "modebound/sdp_solver.hpp"

namespace modebound {

inline constexpr conic::EmbeddingMode kDefaultEmbedding = conic::EmbeddingMode::averaged;

/// Set that the discarded tail sum_{n > n_max} p_n k^n is confined to.
enum class TailModel {
  /// |tail| <= (1 - sum p)|k|^(n_max+1), for every k.
  disk,
  /// For real k the tail lies between (1 - sum p) times the extreme values of
  /// {k^n : n > n_max} (and 0 when |k| < 1); complex k falls back to the disk.
  hull,
};

struct GramOptions {
  conic::EmbeddingMode embedding = kDefaultEmbedding;
  TailModel tail = TailModel::hull;
  /// Below this tail factor |k|^(n_max+1) the overlap anchor is imposed as an equality.
  double exact_anchor_threshold = 1e-12;
  /// Relative eigenvalue cutoff for the rank of the Fock-state Gram matrix.
  double rank_tol = 1e-9;
  conic::SdpOptions sdp{};
};

/// A Hermitian PSD unknown, stored as a real symmetric block when the family is
/// real and through the 2d x 2d embedding otherwise.
class HermitianBlock {
 public:
  HermitianBlock() = default;

  static HermitianBlock make(conic::ConicProgram& prog, const std::string& name, int dim, bool real,
                             conic::EmbeddingMode mode) {
    HermitianBlock b;
    b.dim_ = dim;
    b.real_ = real;
    if (real) {
      b.block_ = prog.add_psd(name, dim);
    } else {
      b.herm_ = conic::hermitian_to_real_psd(prog, name, dim, mode);
      b.block_ = b.herm_.block();
    }
    return b;
  }

  int dim() const { return dim_; }
  int block() const { return block_; }

  conic::LinearExpr re(int i, int j) const {
    return real_ ? conic::LinearExpr(conic::VarRef::entry(block_, i, j), 1.0) : herm_.re(i, j);
  }
  conic::LinearExpr im(int i, int j) const { return real_ ? conic::LinearExpr() : herm_.im(i, j); }

  CMatrix extract(const conic::ConicSolution& s) const {
    if (!real_) return herm_.extract(s);
    return s.matrices[static_cast<std::size_t>(block_)].cast<Complex>();
  }

 private:
  int dim_ = 0;
  int block_ = -1;
  bool real_ = true;
  conic::HermitianVar herm_;
};

/// One item of the constraint ledger and the way this program realises it.
struct LedgerEntry {
  std::string constraint;
  std::string realisation;
  int rows = 0;
};

class GramProgram {
 public:
  enum class Kind { channel, fock };

  const ModeFamily& family() const { return family_; }
  Task task() const { return task_; }
  Kind kind() const { return kind_; }
  /// Photon number of the Fock program; empty for channel programs.
  std::optional<int> photon_number() const { return fock_n_; }
  int n_max() const { return n_max_; }

  /// Identity, the N outcome projectors, and M_empty for unambiguous discrimination.
  int operator_set_size() const { return family_.size() + (task_ == Task::unambiguous ? 2 : 1); }
  int gram_dimension() const { return operator_set_size() * family_.size(); }
  /// Row of G holding O_o |psi_j>; o = 0 is the identity, o = N+1 is M_empty.
  int index(int o, int j) const { return o * family_.size() + j; }

  const conic::ConicProgram& program() const { return prog_; }
  const std::vector<LedgerEntry>& ledger() const { return ledger_; }
  const std::vector<conic::VarRef>& photon_weights() const { return p_; }
  /// Analytic value when no program needs solving (zero photons, empty feasible set interior).
  std::optional<double> closed_form() const { return closed_form_; }

 private:
  friend GramProgram build_channel_prob(const ModeFamily&, const EnergyConstraint&, const GramOptions&);
  friend GramProgram build_channel_ud(const ModeFamily&, const EnergyConstraint&, const GramOptions&);
  friend GramProgram build_fock_prob(const ModeFamily&, int, const GramOptions&);
  friend GramProgram build_fock_ud(const ModeFamily&, int, const GramOptions&);
  friend CMatrix gram_matrix(const GramProgram&, const conic::ConicSolution&);

  GramProgram(ModeFamily f, Task t, Kind k) : family_(std::move(f)), task_(t), kind_(k) {}

  void note(std::string constraint, std::string realisation, int rows) {
    ledger_.push_back({std::move(constraint), std::move(realisation), rows});
  }
  int row_count() const { return static_cast<int>(prog_.rows().size()); }

  ModeFamily family_;
  Task task_;
  Kind kind_;
  std::optional<int> fock_n_;
  int n_max_ = 0;
  conic::ConicProgram prog_;
  std::vector<LedgerEntry> ledger_;
  std::vector<conic::VarRef> p_;
  std::optional<double> closed_form_;

  // channel: one block per outcome (prob) or X_empty plus scalars x_i (ud)
  std::vector<HermitianBlock> blocks_;
  std::vector<conic::VarRef> ud_scalars_;
  // fock: factor of K^(n) = V^dagger V and the per-outcome directions for ud
  CMatrix v_;
  std::vector<int> ud_outcome_;
  CMatrix ud_dirs_;
};

namespace detail {

inline double max_prior(const ModeFamily& f) { return *std::max_element(f.priors().begin(), f.priors().end()); }

/// Channel identity block S_ij = sum over outcome blocks, tied to the truncated overlap.
/// Returns the number of rows emitted.
template <typename EntryFn>
int anchor_overlaps(conic::ConicProgram& prog, const ModeFamily& f, const std::vector<conic::VarRef>& p, int n_max,
                    const GramOptions& opt, EntryFn s_entry) {
  using conic::LinearExpr;
  using conic::Relation;
  const int n = f.size();
  const int before = static_cast<int>(prog.rows().size());
  LinearExpr mass;
  for (const auto& pv : p) mass.add(pv, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Complex k = f.k(i, j);
      // z = S_ij - sum_n p_n k^n
      auto [s_re, s_im] = s_entry(i, j);
      LinearExpr z_re = s_re, z_im = s_im;
      Complex kn = 1.0;
      for (int m = 0; m <= n_max; ++m) {
        z_re.add(p[static_cast<std::size_t>(m)], -kn.real());
        z_im.add(p[static_cast<std::size_t>(m)], -kn.imag());
        kn *= k;
      }
      const double tail = std::pow(std::abs(k), n_max + 1);
      const std::string tag = "anchor(" + std::to_string(i) + "," + std::to_string(j) + ")";
      if (tail < opt.exact_anchor_threshold) {
        prog.add_row(z_re, Relation::equal, 0.0, tag);
        if (!f.is_real()) prog.add_row(z_im, Relation::equal, 0.0, tag);
        continue;
      }
      const LinearExpr missing = LinearExpr(1.0) - mass;
      // eps = (1 - sum p) |k|^(n_max+1)
      LinearExpr eps = missing * tail;
      if (f.is_real() && opt.tail == TailModel::hull) {
        const double k1 = std::pow(k.real(), n_max + 1), k2 = k1 * k.real();
        const double zero_limit = std::abs(k.real()) < 1.0 ? 0.0 : k1;
        const double lo = std::min({k1, k2, zero_limit}), hi = std::max({k1, k2, zero_limit});
        if (hi - lo < opt.exact_anchor_threshold) {
          prog.add_row(z_re, Relation::equal, missing * lo, tag);
        } else {
          prog.add_row(z_re, Relation::less_equal, missing * hi, tag);
          prog.add_row(z_re, Relation::greater_equal, missing * lo, tag);
        }
      } else if (f.is_real()) {
        prog.add_row(z_re, Relation::less_equal, eps, tag);
        prog.add_row(z_re, Relation::greater_equal, eps * -1.0, tag);
      } else {
        // |z| <= eps  <=>  [[eps + Re z, Im z], [Im z, eps - Re z]] PSD
        const int w = prog.add_psd(tag, 2);
        const LinearExpr w00(prog.entry(w, 0, 0), 1.0), w11(prog.entry(w, 1, 1), 1.0), w01(prog.entry(w, 0, 1), 1.0);
        prog.add_row(w00 + w11, Relation::equal, eps * 2.0, tag);
        prog.add_row(w00 - w11, Relation::equal, z_re * 2.0, tag);
        prog.add_row(w01, Relation::equal, z_im, tag);
      }
    }
  }
  return static_cast<int>(prog.rows().size()) - before;
}

inline std::vector<conic::VarRef> add_photon_weights(conic::ConicProgram& prog, const EnergyConstraint& ec) {
  std::vector<conic::VarRef> p;
  conic::LinearExpr mass, energy;
  const LinearInequality row = relaxed_energy_row(ec);
  for (int n = 0; n <= ec.n_max; ++n) {
    p.push_back(prog.add_scalar("p" + std::to_string(n)));
    mass.add(p.back(), 1.0);
    energy.add(p.back(), row.coeffs[static_cast<std::size_t>(n)]);
  }
  prog.add_row(mass, conic::Relation::less_equal, 1.0, "mass");
  prog.add_row(energy, conic::Relation::greater_equal, row.rhs, "energy");
  return p;
}

/// Columns v_j with V^dagger V = K^(n) (entrywise power), V of full row rank r.
inline CMatrix fock_factor(const ModeFamily& f, int n, double rank_tol) {
  const int N = f.size();
  CMatrix g(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) g(i, j) = ipow(f.k(i, j), n);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
  const RVector& w = es.eigenvalues();
  const double cut = rank_tol * std::max(1.0, w.maxCoeff());
  std::vector<int> keep;
  for (int i = 0; i < N; ++i)
    if (w(i) > cut) keep.push_back(i);
  CMatrix v(static_cast<Eigen::Index>(keep.size()), N);
  for (std::size_t r = 0; r < keep.size(); ++r)
    v.row(static_cast<Eigen::Index>(r)) = std::sqrt(w(keep[r])) * es.eigenvectors().col(keep[r]).adjoint();
  if (f.is_real()) v = v.real().cast<Complex>();
  return v;
}

}  // namespace detail

/// Channel scenario, minimum-error discrimination with the truncated energy relaxation.
inline GramProgram build_channel_prob(const ModeFamily& f, const EnergyConstraint& ec, const GramOptions& opt = {}) {
  using conic::LinearExpr;
  using conic::Relation;
  GramProgram g(f, Task::probabilistic, GramProgram::Kind::channel);
  g.n_max_ = ec.n_max;
  const int N = f.size();
  if (ec.nbar == 0.0) {
    g.closed_form_ = detail::max_prior(f);
    return g;
  }
  auto& prog = g.prog_;
  g.p_ = detail::add_photon_weights(prog, ec);
  g.note("photon weights", "p_n >= 0, sum p_n <= 1, relaxed energy row", 2);
  for (int m = 0; m < N; ++m)
    g.blocks_.push_back(HermitianBlock::make(prog, "X" + std::to_string(m), N, f.is_real(), opt.embedding));
  const int structure_rows = g.row_count() - 2;
  auto s_entry = [&](int i, int j) {
    LinearExpr re, im;
    for (const auto& b : g.blocks_) {
      re += b.re(i, j);
      im += b.im(i, j);
    }
    return std::pair{re, im};
  };
  int r0 = g.row_count();
  for (int i = 0; i < N; ++i) prog.add_row(s_entry(i, i).first, Relation::equal, 1.0, "diag(" + std::to_string(i) + ")");
  const int diag_rows = g.row_count() - r0;
  const int anchor_rows = detail::anchor_overlaps(prog, f, g.p_, ec.n_max, opt, s_entry);
  LinearExpr obj;
  for (int j = 0; j < N; ++j) obj += g.blocks_[static_cast<std::size_t>(j)].re(j, j) * f.priors()[static_cast<std::size_t>(j)];
  prog.set_objective(obj, conic::Sense::maximize);

  g.note("identity block anchoring", "|S_ij - sum_n p_n k_ij^n| <= (1 - sum p)|k_ij|^(n_max+1)", anchor_rows);
  g.note("projectivity", "G[(m,i),(m,j)] and G[(0,i),(m,j)] share the block X_m", 0);
  g.note("orthogonality of outcomes", "cross blocks G[(m,.),(m',.)] are identically zero", 0);
  g.note("completeness", "S = sum_m X_m substituted in every row", 0);
  g.note("hermiticity", f.is_real() ? "real symmetric blocks" : "Hermitian blocks via real embedding", structure_rows);
  g.note("diagonal normalisation", "S_ii = 1", diag_rows);
  g.note("positivity", "each X_m PSD, equivalent to G PSD", 0);
  return g;
}

/// Channel scenario, unambiguous discrimination. Zero error plus positivity
/// forces X_i = x_i e_i e_i^dagger, leaving X_empty and the scalars x_i.
inline GramProgram build_channel_ud(const ModeFamily& f, const EnergyConstraint& ec, const GramOptions& opt = {}) {
  using conic::LinearExpr;
  using conic::Relation;
  GramProgram g(f, Task::unambiguous, GramProgram::Kind::channel);
  g.n_max_ = ec.n_max;
  const int N = f.size();
  if (ec.nbar == 0.0) {
    g.closed_form_ = 0.0;
    return g;
  }
  auto& prog = g.prog_;
  g.p_ = detail::add_photon_weights(prog, ec);
  g.note("photon weights", "p_n >= 0, sum p_n <= 1, relaxed energy row", 2);
  g.blocks_.push_back(HermitianBlock::make(prog, "X_empty", N, f.is_real(), opt.embedding));
  const int structure_rows = g.row_count() - 2;
  for (int i = 0; i < N; ++i) g.ud_scalars_.push_back(prog.add_scalar("x" + std::to_string(i)));
  const HermitianBlock& xe = g.blocks_.front();
  auto s_entry = [&](int i, int j) {
    LinearExpr re = xe.re(i, j);
    if (i == j) re.add(g.ud_scalars_[static_cast<std::size_t>(i)], 1.0);
    return std::pair{re, xe.im(i, j)};
  };
  int r0 = g.row_count();
  for (int i = 0; i < N; ++i) prog.add_row(s_entry(i, i).first, Relation::equal, 1.0, "diag(" + std::to_string(i) + ")");
  const int diag_rows = g.row_count() - r0;
  const int anchor_rows = detail::anchor_overlaps(prog, f, g.p_, ec.n_max, opt, s_entry);
  LinearExpr obj;
  for (int i = 0; i < N; ++i) obj.add(g.ud_scalars_[static_cast<std::size_t>(i)], f.priors()[static_cast<std::size_t>(i)]);
  prog.set_objective(obj, conic::Sense::maximize);

  g.note("identity block anchoring", "|S_ij - sum_n p_n k_ij^n| <= (1 - sum p)|k_ij|^(n_max+1)", anchor_rows);
  g.note("projectivity", "G[(m,i),(m,j)] and G[(0,i),(m,j)] share one block per outcome", 0);
  g.note("orthogonality of outcomes", "cross blocks identically zero", 0);
  g.note("completeness", "S = X_empty + diag(x), M_empty included", 0);
  g.note("hermiticity", f.is_real() ? "real symmetric blocks" : "Hermitian blocks via real embedding", structure_rows);
  g.note("diagonal normalisation", "S_ii = 1", diag_rows);
  g.note("zero error", "<psi_j|M_i|psi_j> = 0 for i != j: X_i supported on (i,i) only", 0);
  g.note("positivity", "X_empty PSD, x_i >= 0", 0);
  return g;
}

/// Fock scenario, minimum-error discrimination of the states |n_j> with
/// <n_i|n_j> = k_ij^n. Solved on the span of the states: with K^(n) = V^dagger V,
/// X_m = V^dagger Y_m V and sum_m Y_m = I.
inline GramProgram build_fock_prob(const ModeFamily& f, int n, const GramOptions& opt = {}) {
  using conic::LinearExpr;
  using conic::Relation;
  if (n < 0) throw ValidationError("photon number must be nonnegative");
  GramProgram g(f, Task::probabilistic, GramProgram::Kind::fock);
  g.fock_n_ = n;
  g.n_max_ = n;
  const int N = f.size();
  if (n == 0) {
    g.closed_form_ = detail::max_prior(f);
    return g;
  }
  g.v_ = detail::fock_factor(f, n, opt.rank_tol);
  const int r = static_cast<int>(g.v_.rows());
  auto& prog = g.prog_;
  for (int m = 0; m < N; ++m)
    g.blocks_.push_back(HermitianBlock::make(prog, "Y" + std::to_string(m), r, f.is_real(), opt.embedding));
  const int structure_rows = g.row_count();
  for (int a = 0; a < r; ++a)
    for (int b = a; b < r; ++b) {
      LinearExpr re, im;
      for (const auto& blk : g.blocks_) {
        re += blk.re(a, b);
        im += blk.im(a, b);
      }
      prog.add_row(re, Relation::equal, a == b ? 1.0 : 0.0, "completeness");
      if (a != b && !f.is_real()) prog.add_row(im, Relation::equal, 0.0, "completeness");
    }
  const int completeness_rows = g.row_count() - structure_rows;
  // v^dagger Y v = sum_ab conj(v_a) v_b Y_ab
  LinearExpr obj;
  for (int j = 0; j < N; ++j) {
    const auto& blk = g.blocks_[static_cast<std::size_t>(j)];
    const double q = f.priors()[static_cast<std::size_t>(j)];
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        const Complex c = std::conj(g.v_(a, j)) * g.v_(b, j);
        obj += blk.re(a, b) * (q * c.real());
        if (a != b) obj += blk.im(a, b) * (-q * c.imag());
      }
  }
  prog.set_objective(obj, conic::Sense::maximize);

  g.note("identity block anchoring", "S = K^(n) exactly, via the factor V", 0);
  g.note("projectivity", "X_m = V^dagger Y_m V is both G[(m,.),(m,.)] and G[(0,.),(m,.)]", 0);
  g.note("orthogonality of outcomes", "cross blocks identically zero", 0);
  g.note("completeness", "sum_m Y_m = I on the span of the states", completeness_rows);
  g.note("hermiticity", f.is_real() ? "real symmetric blocks" : "Hermitian blocks via real embedding", structure_rows);
  g.note("diagonal normalisation", "(K^(n))_ii = 1", 0);
  g.note("positivity", "each Y_m PSD", 0);
  return g;
}

/// Fock scenario, unambiguous discrimination. A conclusive outcome i may only
/// respond on the part of the span orthogonal to every other state; that
/// complement has dimension at most one.
inline GramProgram build_fock_ud(const ModeFamily& f, int n, const GramOptions& opt = {}) {
  using conic::LinearExpr;
  using conic::Relation;
  if (n < 0) throw ValidationError("photon number must be nonnegative");
  GramProgram g(f, Task::unambiguous, GramProgram::Kind::fock);
  g.fock_n_ = n;
  g.n_max_ = n;
  const int N = f.size();
  if (n == 0) {
    g.closed_form_ = 0.0;
    return g;
  }
  g.v_ = detail::fock_factor(f, n, opt.rank_tol);
  const int r = static_cast<int>(g.v_.rows());
  std::vector<CVector> dirs;
  for (int i = 0; i < N; ++i) {
    CMatrix others(r, N - 1);
    for (int j = 0, c = 0; j < N; ++j)
      if (j != i) others.col(c++) = g.v_.col(j);
    Eigen::JacobiSVD<CMatrix> svd(others, Eigen::ComputeFullU);
    const RVector& s = svd.singularValues();
    const double cut = opt.rank_tol * std::max(1.0, s.size() ? s(0) : 0.0);
    int rank = 0;
    while (rank < s.size() && s(rank) > cut) ++rank;
    if (rank == r) continue;  // |n_i> lies in the span of the others
    CVector u = svd.matrixU().col(rank);
    if (std::abs(u.dot(g.v_.col(i))) < cut) continue;
    if (f.is_real()) u = u.real().cast<Complex>().normalized();
    g.ud_outcome_.push_back(i);
    dirs.push_back(u);
  }
  g.ud_dirs_.resize(r, static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t c = 0; c < dirs.size(); ++c) g.ud_dirs_.col(static_cast<Eigen::Index>(c)) = dirs[c];
  if (dirs.empty()) {
    // every state lies in the span of the others: no conclusive outcome exists
    g.closed_form_ = 0.0;
    return g;
  }

  auto& prog = g.prog_;
  g.blocks_.push_back(HermitianBlock::make(prog, "Y_empty", r, f.is_real(), opt.embedding));
  const int structure_rows = g.row_count();
  for (std::size_t c = 0; c < dirs.size(); ++c) g.ud_scalars_.push_back(prog.add_scalar("w" + std::to_string(g.ud_outcome_[c])));
  const HermitianBlock& ye = g.blocks_.front();
  for (int a = 0; a < r; ++a)
    for (int b = a; b < r; ++b) {
      LinearExpr re = ye.re(a, b), im = ye.im(a, b);
      for (std::size_t c = 0; c < dirs.size(); ++c) {
        const Complex uu = dirs[c](a) * std::conj(dirs[c](b));
        re.add(g.ud_scalars_[c], uu.real());
        im.add(g.ud_scalars_[c], uu.imag());
      }
      prog.add_row(re, Relation::equal, a == b ? 1.0 : 0.0, "completeness");
      if (a != b && !f.is_real()) prog.add_row(im, Relation::equal, 0.0, "completeness");
    }
  const int completeness_rows = g.row_count() - structure_rows;
  LinearExpr obj;
  for (std::size_t c = 0; c < dirs.size(); ++c) {
    const int i = g.ud_outcome_[c];
    obj.add(g.ud_scalars_[c], f.priors()[static_cast<std::size_t>(i)] * std::norm(dirs[c].dot(g.v_.col(i))));
  }
  prog.set_objective(obj, conic::Sense::maximize);

  g.note("identity block anchoring", "S = K^(n) exactly, via the factor V", 0);
  g.note("projectivity", "one block per outcome shared by G[(m,.),(m,.)] and G[(0,.),(m,.)]", 0);
  g.note("orthogonality of outcomes", "cross blocks identically zero", 0);
  g.note("completeness", "Y_empty + sum_i w_i u_i u_i^dagger = I, M_empty included", completeness_rows);
  g.note("hermiticity", f.is_real() ? "real symmetric blocks" : "Hermitian blocks via real embedding", structure_rows);
  g.note("diagonal normalisation", "(K^(n))_ii = 1", 0);
  g.note("zero error", "<n_j|M_i|n_j> = 0 for i != j: M_i confined to the complement of the other states", 0);
  g.note("positivity", "Y_empty PSD, w_i >= 0", 0);
  return g;
}

/// The full Gram matrix over (operator, state) pairs rebuilt from a solution.
inline CMatrix gram_matrix(const GramProgram& g, const conic::ConicSolution& s) {
  const int N = g.family().size();
  const int ops = g.operator_set_size();
  std::vector<CMatrix> x(static_cast<std::size_t>(ops - 1), CMatrix::Zero(N, N));
  const bool ud = g.task() == Task::unambiguous;
  if (g.kind() == GramProgram::Kind::channel) {
    if (!ud) {
      for (int m = 0; m < N; ++m) x[static_cast<std::size_t>(m)] = g.blocks_[static_cast<std::size_t>(m)].extract(s);
    } else {
      for (int i = 0; i < N; ++i) x[static_cast<std::size_t>(i)](i, i) = s.value(g.ud_scalars_[static_cast<std::size_t>(i)]);
      x[static_cast<std::size_t>(N)] = g.blocks_.front().extract(s);
    }
  } else {
    const CMatrix& v = g.v_;
    if (!ud) {
      for (int m = 0; m < N; ++m) x[static_cast<std::size_t>(m)] = v.adjoint() * g.blocks_[static_cast<std::size_t>(m)].extract(s) * v;
    } else {
      for (std::size_t c = 0; c < g.ud_outcome_.size(); ++c) {
        const CVector w = v.adjoint() * g.ud_dirs_.col(static_cast<Eigen::Index>(c));
        x[static_cast<std::size_t>(g.ud_outcome_[c])] = s.value(g.ud_scalars_[c]) * w * w.adjoint();
      }
      x[static_cast<std::size_t>(N)] = v.adjoint() * g.blocks_.front().extract(s) * v;
    }
  }
  CMatrix full = CMatrix::Zero(ops * N, ops * N);
  CMatrix sum = CMatrix::Zero(N, N);
  for (const auto& b : x) sum += b;
  full.block(0, 0, N, N) = sum;
  for (int m = 1; m < ops; ++m) {
    const CMatrix& b = x[static_cast<std::size_t>(m - 1)];
    full.block(g.index(m, 0), g.index(m, 0), N, N) = b;
    full.block(0, g.index(m, 0), N, N) = b;
    full.block(g.index(m, 0), 0, N, N) = b.adjoint();
  }
  return full;
}

/// Solves a Gram program and also returns the raw report, for callers that
/// inspect the Gram matrix. The reported bound is the safe (certificate) side.
inline std::pair<BoundResult, conic::SolveReport> solve_with_report(const GramProgram& g, const GramOptions& opt = {}) {
  BoundResult out;
  out.scenario = g.kind() == GramProgram::Kind::channel ? Scenario::channel : Scenario::source;
  out.task = g.task();
  out.n_max = g.n_max();
  out.tol = opt.sdp.gap_tol;
  if (g.closed_form()) {
    out.bound = out.primal_objective = out.dual_objective = *g.closed_form();
    out.status = SolveStatus::optimal;
    if (g.kind() == GramProgram::Kind::channel) {
      std::vector<double> w(static_cast<std::size_t>(g.n_max()) + 1, 0.0);
      w[0] = 1.0;
      out.weights = std::move(w);
    }
    conic::SolveReport rep;
    rep.status = SolveStatus::optimal;
    rep.primal_objective = rep.dual_objective = out.bound;
    return {out, rep};
  }
  conic::SolveReport rep = conic::solve_sdp(g.program(), opt.sdp);
  out.status = rep.status;
  out.primal_objective = rep.primal_objective;
  out.dual_objective = rep.dual_objective;
  out.bound = rep.bound(conic::Sense::maximize);
  if (!g.photon_weights().empty() && usable(rep.status)) {
    std::vector<double> w;
    for (const auto& pv : g.photon_weights()) w.push_back(std::max(0.0, rep.solution.value(pv)));
    out.weights = std::move(w);
  }
  return {out, std::move(rep)};
}

inline BoundResult solve(const GramProgram& g, const GramOptions& opt = {}) { return solve_with_report(g, opt).first; }

}  // namespace modebound
