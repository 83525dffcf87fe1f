#ifndef NONCLASS_SDP_SOLVE_HPP
#define NONCLASS_SDP_SOLVE_HPP

// Backend selection and the solver-independent helpers around ConicProblem.
//
// NONCLASS_SOLVER picks the adapter used by solve():
//   ipm       built-in interior point method (default)
//   analysis  no optimisation; checks candidates supplied by the caller

#include <Eigen/Dense>

#include <cstdlib>
#include <memory>
#include <string>

#include "json.hpp"
#include "nonclass/sdp/ipm.hpp"
#include "nonclass/sdp/problem.hpp"

namespace nonclass::sdp {

/// Smallest eigenvalue of (A + A^T)/2.
inline double psd_min_eig(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error("psd_min_eig: matrix is not square");
  if (a.rows() == 0) return 0.0;
  const Eigen::MatrixXd s = 0.5 * (a + a.transpose());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

inline double psd_min_eig(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw Error("psd_min_eig: matrix is not square");
  if (a.rows() == 0) return 0.0;
  const Eigen::MatrixXcd s = 0.5 * (a + a.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(s, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const ConicProblem& p, const SolveOptions& opts) const = 0;
};

class IpmBackend : public Backend {
 public:
  std::string name() const override { return "ipm"; }
  SolveResult solve(const ConicProblem& p, const SolveOptions& opts) const override {
    try {
      return InteriorPointSolver(opts).solve(p);
    } catch (const std::exception& e) {
      SolveResult r;
      r.status = SolveStatus::numerical_failure;
      r.backend = name();
      r.message = e.what();
      return r;
    }
  }
};

/// Feasibility check of a supplied point: equality residuals and block spectra.
class AnalysisBackend : public Backend {
 public:
  AnalysisBackend() = default;
  AnalysisBackend(std::vector<Eigen::MatrixXd> blocks, Eigen::VectorXd scalars)
      : blocks_(std::move(blocks)), scalars_(std::move(scalars)), has_candidate_(true) {}

  std::string name() const override { return "analysis"; }

  SolveResult solve(const ConicProblem& p, const SolveOptions& opts) const override {
    SolveResult r;
    r.backend = name();
    if (!has_candidate_) {
      r.message = "analysis backend needs a candidate point";
      return r;
    }
    if (blocks_.size() != p.blocks().size() || scalars_.size() != static_cast<long>(p.scalars().size())) {
      r.message = "candidate does not match problem shape";
      return r;
    }
    double worst_res = 0.0;
    for (const auto& eq : p.equalities()) {
      const double v = evaluate(eq.expr, blocks_, scalars_);
      worst_res = std::max(worst_res, std::abs(v - eq.rhs) / (1.0 + std::abs(eq.rhs)));
    }
    double worst_eig = 0.0;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      if (blocks_[k].rows() != p.blocks()[k].size) {
        r.message = "candidate block size mismatch";
        return r;
      }
      worst_eig = std::min(worst_eig, psd_min_eig(blocks_[k]));
    }
    r.block_values = blocks_;
    r.scalar_values = scalars_;
    r.primal_residual = worst_res;
    r.objective_value = evaluate(p.objective(), blocks_, scalars_);
    r.dual_objective = r.objective_value;
    const bool ok = worst_res <= opts.feasibility_tol && worst_eig >= -opts.feasibility_tol;
    r.status = ok ? SolveStatus::optimal : SolveStatus::infeasible;
    r.message = ok ? "candidate feasible" : "candidate violates constraints";
    return r;
  }

 private:
  std::vector<Eigen::MatrixXd> blocks_;
  Eigen::VectorXd scalars_;
  bool has_candidate_ = false;
};

inline std::unique_ptr<Backend> backend_from_env() {
  const char* env = std::getenv("NONCLASS_SOLVER");
  const std::string id = env ? env : "ipm";
  if (id.empty() || id == "ipm") return std::make_unique<IpmBackend>();
  if (id == "analysis") return std::make_unique<AnalysisBackend>();
  throw Error("NONCLASS_SOLVER: unknown backend '" + id + "'");
}

inline SolveResult solve(const ConicProblem& p, const SolveOptions& opts = {}) {
  return backend_from_env()->solve(p, opts);
}

/// Sparse triplet listing of every functional.
inline nlohmann::json dump_problem(const ConicProblem& p) {
  using nlohmann::json;
  auto expr_json = [](const LinearExpr& e) {
    json terms = json::array();
    for (const auto& t : e.block_terms()) terms.push_back({t.block, t.row, t.col, t.coeff});
    json sc = json::array();
    for (const auto& [i, v] : e.scalar_terms()) sc.push_back({i, v});
    return json{{"blocks", terms}, {"scalars", sc}};
  };
  json blocks = json::array();
  for (const auto& b : p.blocks()) blocks.push_back({{"name", b.name}, {"size", b.size}});
  json eqs = json::array();
  for (const auto& eq : p.equalities()) {
    json e = expr_json(eq.expr);
    e["rhs"] = eq.rhs;
    eqs.push_back(std::move(e));
  }
  return json{{"psd_blocks", blocks},
              {"free_scalars", p.scalars()},
              {"objective", expr_json(p.objective())},
              {"equalities", eqs}};
}

}  // namespace nonclass::sdp

#endif  // NONCLASS_SDP_SOLVE_HPP
