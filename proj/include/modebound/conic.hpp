#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "modebound/common.hpp"

namespace modebound::conic {

enum class Sense { maximize, minimize };
enum class Relation { equal, less_equal, greater_equal };

/// Reference to one scalar unknown: either a scalar variable or the (row, col)
/// entry of a symmetric matrix variable. Entries (r,c) and (c,r) are the same unknown.
struct VarRef {
  enum class Kind { scalar, matrix_entry };
  Kind kind = Kind::scalar;
  int var = 0;
  int row = 0;
  int col = 0;

  static VarRef scalar(int v) { return {Kind::scalar, v, 0, 0}; }
  static VarRef entry(int m, int r, int c) { return {Kind::matrix_entry, m, std::min(r, c), std::max(r, c)}; }

  friend bool operator<(const VarRef& a, const VarRef& b) {
    return std::tie(a.kind, a.var, a.row, a.col) < std::tie(b.kind, b.var, b.row, b.col);
  }
  friend bool operator==(const VarRef& a, const VarRef& b) = default;
};

/// Affine expression sum_t coeff_t * unknown_t + constant.
class LinearExpr {
 public:
  LinearExpr() = default;
  explicit LinearExpr(double constant) : constant_(constant) {}
  LinearExpr(VarRef ref, double coeff) { add(ref, coeff); }

  LinearExpr& add(VarRef ref, double coeff) {
    if (coeff != 0.0) terms_[ref] += coeff;
    return *this;
  }
  LinearExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }
  LinearExpr& operator+=(const LinearExpr& o) {
    for (const auto& [r, c] : o.terms_) terms_[r] += c;
    constant_ += o.constant_;
    return *this;
  }
  LinearExpr& operator-=(const LinearExpr& o) { return *this += o * -1.0; }
  LinearExpr operator*(double s) const {
    LinearExpr out;
    for (const auto& [r, c] : terms_) out.terms_[r] = c * s;
    out.constant_ = constant_ * s;
    return out;
  }
  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
  friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }

  const std::map<VarRef, double>& terms() const { return terms_; }
  double constant() const { return constant_; }

 private:
  std::map<VarRef, double> terms_;
  double constant_ = 0.0;
};

/// Complex-valued affine expression kept as two real parts.
struct ComplexExpr {
  LinearExpr re;
  LinearExpr im;

  ComplexExpr& operator+=(const ComplexExpr& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  friend ComplexExpr operator+(ComplexExpr a, const ComplexExpr& b) { return a += b; }
  friend ComplexExpr operator-(ComplexExpr a, const ComplexExpr& b) {
    a.re -= b.re;
    a.im -= b.im;
    return a;
  }
};

struct Row {
  LinearExpr expr;  // expr (relation) 0
  Relation relation = Relation::equal;
  std::string tag;
};

struct ScalarVar {
  std::string name;
  bool nonnegative = true;
};

struct MatrixVar {
  std::string name;
  int dim = 0;
};

/// Linear objective and rows over scalar and symmetric-PSD matrix unknowns.
class ConicProgram {
 public:
  VarRef add_scalar(std::string name, bool nonnegative = true) {
    scalars_.push_back({std::move(name), nonnegative});
    return VarRef::scalar(static_cast<int>(scalars_.size()) - 1);
  }

  int add_psd(std::string name, int dim) {
    if (dim < 1) throw ValidationError("PSD variable needs positive dimension");
    matrices_.push_back({std::move(name), dim});
    return static_cast<int>(matrices_.size()) - 1;
  }

  VarRef entry(int matrix, int r, int c) const {
    if (matrix < 0 || matrix >= static_cast<int>(matrices_.size()))
      throw ValidationError("matrix variable index out of range");
    const int d = matrices_[static_cast<std::size_t>(matrix)].dim;
    if (r < 0 || c < 0 || r >= d || c >= d) throw ValidationError("matrix entry out of range");
    return VarRef::entry(matrix, r, c);
  }

  /// Adds lhs (relation) rhs.
  void add_row(const LinearExpr& lhs, Relation rel, const LinearExpr& rhs, std::string tag = {}) {
    Row row{lhs - rhs, rel, std::move(tag)};
    check(row.expr);
    rows_.push_back(std::move(row));
  }
  void add_row(const LinearExpr& lhs, Relation rel, double rhs, std::string tag = {}) {
    add_row(lhs, rel, LinearExpr(rhs), std::move(tag));
  }

  void set_objective(LinearExpr obj, Sense sense) {
    check(obj);
    objective_ = std::move(obj);
    sense_ = sense;
  }

  const std::vector<ScalarVar>& scalars() const { return scalars_; }
  const std::vector<MatrixVar>& matrices() const { return matrices_; }
  const std::vector<Row>& rows() const { return rows_; }
  const LinearExpr& objective() const { return objective_; }
  Sense sense() const { return sense_; }

 private:
  void check(const LinearExpr& e) const {
    for (const auto& [ref, c] : e.terms()) {
      if (!std::isfinite(c)) throw ValidationError("non-finite coefficient in conic program");
      if (ref.kind == VarRef::Kind::scalar) {
        if (ref.var < 0 || ref.var >= static_cast<int>(scalars_.size()))
          throw ValidationError("row references undeclared scalar");
      } else {
        (void)entry(ref.var, ref.row, ref.col);
      }
    }
  }

  std::vector<ScalarVar> scalars_;
  std::vector<MatrixVar> matrices_;
  std::vector<Row> rows_;
  LinearExpr objective_;
  Sense sense_ = Sense::maximize;
};

/// Values of every unknown of a ConicProgram at a solution.
struct ConicSolution {
  std::vector<double> scalars;
  std::vector<RMatrix> matrices;

  double value(const VarRef& r) const {
    return r.kind == VarRef::Kind::scalar ? scalars[static_cast<std::size_t>(r.var)]
                                          : matrices[static_cast<std::size_t>(r.var)](r.row, r.col);
  }
  double value(const LinearExpr& e) const {
    double v = e.constant();
    for (const auto& [r, c] : e.terms()) v += c * value(r);
    return v;
  }
};

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_failure;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double gap = 0.0;  // achieved relative duality gap
  int iterations = 0;
  ConicSolution solution;

  /// Safe-side bound: the dual (certificate) value for maximisation, the primal for minimisation.
  double bound(Sense sense) const {
    return sense == Sense::maximize ? std::max(dual_objective, primal_objective) : std::min(dual_objective, primal_objective);
  }
};

/// How a complex Hermitian variable H = A + iB is carried by a real PSD block
/// Z = [[A, -B], [B, A]].
enum class EmbeddingMode {
  /// Rows pin Z to the block structure.
  linked,
  /// No structure rows; H is read as the average over the two copies, which
  /// any real PSD Z maps onto a structured PSD matrix with the same value.
  averaged,
};

/// d x d complex Hermitian PSD unknown realised as a 2d x 2d real block.
class HermitianVar {
 public:
  HermitianVar() = default;
  HermitianVar(int block, int dim, EmbeddingMode mode) : block_(block), dim_(dim), mode_(mode) {}

  int block() const { return block_; }
  int dim() const { return dim_; }
  EmbeddingMode mode() const { return mode_; }

  LinearExpr re(int i, int j) const {
    if (mode_ == EmbeddingMode::linked) return LinearExpr(VarRef::entry(block_, i, j), 1.0);
    LinearExpr e;
    e.add(VarRef::entry(block_, i, j), 0.5);
    e.add(VarRef::entry(block_, dim_ + i, dim_ + j), 0.5);
    return e;
  }

  LinearExpr im(int i, int j) const {
    if (i == j) return {};
    if (mode_ == EmbeddingMode::linked) return LinearExpr(VarRef::entry(block_, dim_ + i, j), 1.0);
    LinearExpr e;
    e.add(VarRef::entry(block_, dim_ + i, j), 0.5);
    e.add(VarRef::entry(block_, dim_ + j, i), -0.5);
    return e;
  }

  ComplexExpr at(int i, int j) const { return {re(i, j), im(i, j)}; }

  CMatrix extract(const ConicSolution& s) const {
    const RMatrix& z = s.matrices[static_cast<std::size_t>(block_)];
    const RMatrix a = z.topLeftCorner(dim_, dim_);
    const RMatrix d = z.bottomRightCorner(dim_, dim_);
    const RMatrix b = z.bottomLeftCorner(dim_, dim_);
    const RMatrix re_part = 0.5 * (a + d);
    const RMatrix im_part = 0.5 * (b - b.transpose());
    CMatrix h(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) h(i, j) = Complex(re_part(i, j), im_part(i, j));
    return h;
  }

 private:
  int block_ = -1;
  int dim_ = 0;
  EmbeddingMode mode_ = EmbeddingMode::linked;
};

/// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.
/// H is PSD iff the embedding is; the spectrum is duplicated.
inline RMatrix embed_hermitian(const CMatrix& h) {
  const auto d = h.rows();
  RMatrix z(2 * d, 2 * d);
  z.topLeftCorner(d, d) = h.real();
  z.bottomRightCorner(d, d) = h.real();
  z.topRightCorner(d, d) = -h.imag();
  z.bottomLeftCorner(d, d) = h.imag();
  return z;
}

/// Declares a d x d Hermitian PSD unknown. In linked mode this emits the
/// d^2 + d rows tying the 2d x 2d real block to [[A, -B], [B, A]].
inline HermitianVar hermitian_to_real_psd(ConicProgram& prog, const std::string& name, int d,
                                          EmbeddingMode mode = EmbeddingMode::linked) {
  const int block = prog.add_psd(name, 2 * d);
  if (mode == EmbeddingMode::linked) {
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        prog.add_row(LinearExpr(prog.entry(block, i, j), 1.0) - LinearExpr(prog.entry(block, d + i, d + j), 1.0),
                     Relation::equal, 0.0, name + ":re-link");
      }
      prog.add_row(LinearExpr(prog.entry(block, d + i, i), 1.0), Relation::equal, 0.0, name + ":im-diag");
      for (int j = i + 1; j < d; ++j) {
        prog.add_row(LinearExpr(prog.entry(block, d + i, j), 1.0) + LinearExpr(prog.entry(block, d + j, i), 1.0),
                     Relation::equal, 0.0, name + ":im-antisym");
      }
    }
  }
  return HermitianVar(block, d, mode);
}

// ---------------------------------------------------------------------------
// Linear programs

struct LpVariable {
  std::string name;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

struct LpRow {
  std::vector<std::pair<int, double>> coeffs;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
  std::string tag;
};

class LinearProgram {
 public:
  int add_variable(std::string name, double lower = 0.0, double upper = std::numeric_limits<double>::infinity()) {
    if (lower > upper) throw ValidationError("variable " + name + " has empty bounds");
    vars_.push_back({std::move(name), lower, upper});
    objective_.push_back(0.0);
    return static_cast<int>(vars_.size()) - 1;
  }

  void set_objective_coeff(int var, double c) { objective_.at(static_cast<std::size_t>(var)) = c; }
  void set_objective_constant(double c) { constant_ = c; }
  void set_sense(Sense s) { sense_ = s; }

  void add_row(std::vector<std::pair<int, double>> coeffs, Relation rel, double rhs, std::string tag = {}) {
    for (const auto& [v, c] : coeffs) {
      if (v < 0 || v >= static_cast<int>(vars_.size())) throw ValidationError("LP row references undeclared variable");
      if (!std::isfinite(c)) throw ValidationError("non-finite LP coefficient");
    }
    if (!std::isfinite(rhs)) throw ValidationError("non-finite LP right-hand side");
    rows_.push_back({std::move(coeffs), rel, rhs, std::move(tag)});
  }

  int num_variables() const { return static_cast<int>(vars_.size()); }
  const std::vector<LpVariable>& variables() const { return vars_; }
  const std::vector<LpRow>& rows() const { return rows_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_constant() const { return constant_; }
  Sense sense() const { return sense_; }

 private:
  std::vector<LpVariable> vars_;
  std::vector<LpRow> rows_;
  std::vector<double> objective_;
  double constant_ = 0.0;
  Sense sense_ = Sense::maximize;
};

struct LpReport {
  SolveStatus status = SolveStatus::numerical_failure;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  std::vector<double> x;
  std::vector<double> row_duals;
  int iterations = 0;

  double bound(Sense sense) const {
    return sense == Sense::maximize ? std::max(dual_objective, primal_objective) : std::min(dual_objective, primal_objective);
  }
};

}  // namespace modebound::conic
