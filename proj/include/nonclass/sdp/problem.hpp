#ifndef NONCLASS_SDP_PROBLEM_HPP
#define NONCLASS_SDP_PROBLEM_HPP

// Solver-agnostic conic problem:
//
//   minimize    <objective>
//   subject to  <equality_i> = rhs_i
//               every PSD block symmetric positive semidefinite
//
// A linear expression addresses block entries through their upper triangle:
// the term (block, r, c, v) with r <= c contributes v * X_block(r, c).

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nonclass/polyalg.hpp"

namespace nonclass::sdp {

struct BlockTerm {
  int block = 0;
  int row = 0;
  int col = 0;
  double coeff = 0.0;
};

class LinearExpr {
 public:
  /// Adds v * X_block(r, c); (r, c) and (c, r) name the same variable.
  LinearExpr& add_block(int block, int r, int c, double v) {
    if (v == 0.0) return *this;
    if (r > c) std::swap(r, c);
    block_terms_.push_back({block, r, c, v});
    compressed_ = false;
    return *this;
  }
  LinearExpr& add_scalar(int index, double v) {
    if (v == 0.0) return *this;
    scalar_terms_.emplace_back(index, v);
    compressed_ = false;
    return *this;
  }
  LinearExpr& operator+=(const LinearExpr& o) {
    block_terms_.insert(block_terms_.end(), o.block_terms_.begin(), o.block_terms_.end());
    scalar_terms_.insert(scalar_terms_.end(), o.scalar_terms_.begin(), o.scalar_terms_.end());
    compressed_ = false;
    return *this;
  }
  LinearExpr& operator*=(double s) {
    for (auto& t : block_terms_) t.coeff *= s;
    for (auto& t : scalar_terms_) t.second *= s;
    return *this;
  }

  /// Merges duplicate references and drops zeros.
  void compress() {
    if (compressed_) return;
    std::map<std::tuple<int, int, int>, double> b;
    for (const auto& t : block_terms_) b[{t.block, t.row, t.col}] += t.coeff;
    block_terms_.clear();
    for (const auto& [k, v] : b)
      if (v != 0.0) block_terms_.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), v});
    std::map<int, double> s;
    for (const auto& [i, v] : scalar_terms_) s[i] += v;
    scalar_terms_.clear();
    for (const auto& [i, v] : s)
      if (v != 0.0) scalar_terms_.emplace_back(i, v);
    compressed_ = true;
  }

  const std::vector<BlockTerm>& block_terms() const { return block_terms_; }
  const std::vector<std::pair<int, double>>& scalar_terms() const { return scalar_terms_; }
  bool empty() const { return block_terms_.empty() && scalar_terms_.empty(); }

 private:
  std::vector<BlockTerm> block_terms_;
  std::vector<std::pair<int, double>> scalar_terms_;
  bool compressed_ = true;
};

struct PsdBlock {
  std::string name;
  int size = 0;
};

struct Equality {
  LinearExpr expr;
  double rhs = 0.0;
};

class ConicProblem {
 public:
  int add_psd_block(std::string name, int size) {
    if (size <= 0) throw Error("ConicProblem: PSD block must have positive size");
    blocks_.push_back({std::move(name), size});
    return static_cast<int>(blocks_.size()) - 1;
  }
  int add_free_scalar(std::string name) {
    scalars_.push_back(std::move(name));
    return static_cast<int>(scalars_.size()) - 1;
  }
  void add_equality(LinearExpr e, double rhs) {
    e.compress();
    check(e);
    equalities_.push_back({std::move(e), rhs});
  }
  void set_objective(LinearExpr e) {
    e.compress();
    check(e);
    objective_ = std::move(e);
  }

  const std::vector<PsdBlock>& blocks() const { return blocks_; }
  const std::vector<std::string>& scalars() const { return scalars_; }
  const std::vector<Equality>& equalities() const { return equalities_; }
  const LinearExpr& objective() const { return objective_; }

  /// Number of scalar unknowns: n(n+1)/2 per block plus the free scalars.
  long variable_count() const {
    long n = static_cast<long>(scalars_.size());
    for (const auto& b : blocks_) n += static_cast<long>(b.size) * (b.size + 1) / 2;
    return n;
  }

 private:
  void check(const LinearExpr& e) const {
    for (const auto& t : e.block_terms()) {
      if (t.block < 0 || t.block >= static_cast<int>(blocks_.size()))
        throw Error("ConicProblem: expression references an undeclared block");
      if (t.row < 0 || t.col >= blocks_[t.block].size)
        throw Error("ConicProblem: block entry out of range");
    }
    for (const auto& [i, v] : e.scalar_terms())
      if (i < 0 || i >= static_cast<int>(scalars_.size()))
        throw Error("ConicProblem: expression references an undeclared scalar");
  }

  std::vector<PsdBlock> blocks_;
  std::vector<std::string> scalars_;
  std::vector<Equality> equalities_;
  LinearExpr objective_;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

struct SolveOptions {
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iterations = 100000;
  bool verbose = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_failure;
  double objective_value = 0.0;
  double dual_objective = 0.0;
  std::vector<Eigen::MatrixXd> block_values;
  Eigen::VectorXd scalar_values;
  Eigen::VectorXd dual_values;  // one multiplier per equality
  int iterations = 0;
  double primal_residual = 0.0;  // relative
  double dual_residual = 0.0;    // relative
  double relative_gap = 0.0;
  std::string backend;
  std::string message;
};

/// Optimal, or stopped short of the tolerances with residuals and gap below tol.
inline bool near_optimal(const SolveResult& r, double tol) {
  if (r.status == SolveStatus::optimal) return true;
  return r.status == SolveStatus::numerical_failure && !r.block_values.empty() && r.primal_residual <= tol &&
         r.dual_residual <= tol && r.relative_gap <= tol;
}

/// Value of an expression at a given point.
inline double evaluate(const LinearExpr& e, const std::vector<Eigen::MatrixXd>& blocks,
                       const Eigen::VectorXd& scalars) {
  double s = 0.0;
  for (const auto& t : e.block_terms()) s += t.coeff * blocks[t.block](t.row, t.col);
  for (const auto& [i, v] : e.scalar_terms()) s += v * scalars(i);
  return s;
}

}  // namespace nonclass::sdp

#endif  // NONCLASS_SDP_PROBLEM_HPP
