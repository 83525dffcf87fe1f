#ifndef NONCLASS_SDP_IPM_HPP
#define NONCLASS_SDP_IPM_HPP

// Infeasible primal-dual interior point method (HKM direction, Mehrotra
// predictor-corrector) for ConicProblem.
//
// Primal:  min <C, X> + c_f' x_f   s.t.  A(X) + B x_f = b,  X psd
// Dual:    max b' y                 s.t.  C - A*(y) = Z psd,  B' y = c_f
//
// The Newton system is kept in saddle form
//
//   [ M   B ] [dy ]   [h  ]
//   [ B'  0 ] [dxf] = [r_f]
//
// with M_ij = tr(A_i X A_j Z^-1). It is factorised with a small static
// regularisation and polished by iterative refinement; M is assembled only for
// constraint pairs that share a block, so block-diagonal problems stay sparse.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "nonclass/sdp/problem.hpp"

namespace nonclass::sdp {

namespace ipm_detail {

struct Triplet {
  int r;
  int c;
  double v;
};

// One constraint restricted to one block, stored as a full symmetric triplet list.
struct ConstraintBlock {
  int con;
  std::vector<Triplet> full;
};

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline std::vector<Triplet> symmetric_full(const std::vector<BlockTerm>& upper) {
  std::vector<Triplet> out;
  out.reserve(2 * upper.size());
  for (const auto& t : upper) {
    if (t.row == t.col) {
      out.push_back({t.row, t.col, t.coeff});
    } else {
      out.push_back({t.row, t.col, 0.5 * t.coeff});
      out.push_back({t.col, t.row, 0.5 * t.coeff});
    }
  }
  return out;
}

inline std::optional<Mat> inverse_spd(const Mat& a) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Mat inv = llt.solve(Mat::Identity(a.rows(), a.cols()));
  return Mat(0.5 * (inv + inv.transpose()));
}

// Largest alpha with x + alpha * dx psd (infinity if unbounded).
inline double max_step(const Mat& x, const Mat& dx) {
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Mat l = llt.matrixL();
  Mat w = l.triangularView<Eigen::Lower>().solve(dx);
  w = l.triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
  w = 0.5 * (w + w.transpose());
  const double lmin = w.rows() == 1 ? w(0, 0)
                                    : Eigen::SelfAdjointEigenSolver<Mat>(w, Eigen::EigenvaluesOnly)
                                          .eigenvalues()
                                          .minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

class KktSolver {
 public:
  KktSolver(int m, int nf) : m_(m), nf_(nf) {}

  // M is given as a list of (i, j >= i, value); B as (i, f, value).
  bool factor(const std::vector<Eigen::Triplet<double>>& m_upper,
              const std::vector<Eigen::Triplet<double>>& b_entries, double reg_primal, double reg_dual) {
    const int n = m_ + nf_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * m_upper.size() + 2 * b_entries.size() + n);
    for (const auto& t : m_upper) {
      trip.push_back(t);
      if (t.row() != t.col()) trip.emplace_back(t.col(), t.row(), t.value());
    }
    for (const auto& t : b_entries) {
      trip.emplace_back(t.row(), m_ + t.col(), t.value());
      trip.emplace_back(m_ + t.col(), t.row(), t.value());
    }
    true_.resize(n, n);
    true_.setFromTriplets(trip.begin(), trip.end());
    for (int i = 0; i < m_; ++i) trip.emplace_back(i, i, reg_primal);
    for (int f = 0; f < nf_; ++f) trip.emplace_back(m_ + f, m_ + f, -reg_dual);
    Eigen::SparseMatrix<double> reg(n, n);
    reg.setFromTriplets(trip.begin(), trip.end());

    const double density = static_cast<double>(reg.nonZeros()) / (static_cast<double>(n) * n);
    dense_ = n <= 1200 || density > 0.25;
    if (dense_) {
      dense_ldlt_.compute(Mat(reg));
      return dense_ldlt_.info() == Eigen::Success;
    }
    sparse_ldlt_.compute(reg);
    return sparse_ldlt_.info() == Eigen::Success;
  }

  Vec solve(const Vec& rhs) const {
    Vec x = raw_solve(rhs);
    const double rn = std::max(1.0, rhs.norm());
    for (int it = 0; it < 4; ++it) {
      const Vec r = rhs - true_ * x;
      if (r.norm() <= 1e-14 * rn) break;
      x += raw_solve(r);
    }
    return x;
  }

 private:
  Vec raw_solve(const Vec& r) const { return dense_ ? Vec(dense_ldlt_.solve(r)) : Vec(sparse_ldlt_.solve(r)); }

  int m_;
  int nf_;
  bool dense_ = true;
  Eigen::SparseMatrix<double> true_;
  Eigen::LDLT<Mat> dense_ldlt_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> sparse_ldlt_;
};

}  // namespace ipm_detail

class InteriorPointSolver {
 public:
  explicit InteriorPointSolver(SolveOptions opts = {}) : opts_(opts) {}

  SolveResult solve(const ConicProblem& problem) const {
    using namespace ipm_detail;
    const int nb = static_cast<int>(problem.blocks().size());
    const int m = static_cast<int>(problem.equalities().size());
    const int nf = static_cast<int>(problem.scalars().size());
    SolveResult res;
    res.backend = "ipm";
    if (nb == 0) throw Error("InteriorPointSolver: problem needs at least one PSD block");

    std::vector<int> sizes(nb);
    int total = 0;
    for (int k = 0; k < nb; ++k) total += (sizes[k] = problem.blocks()[k].size);

    // ---- data with row scaling ------------------------------------------
    std::vector<double> row_scale(m, 1.0);
    Vec b(m);
    std::vector<std::vector<ConstraintBlock>> by_block(nb);
    std::vector<Eigen::Triplet<double>> b_entries;
    for (int i = 0; i < m; ++i) {
      const auto& eq = problem.equalities()[i];
      double nrm2 = 0.0;
      for (const auto& t : eq.expr.block_terms()) nrm2 += (t.row == t.col ? 1.0 : 0.5) * t.coeff * t.coeff;
      for (const auto& [f, v] : eq.expr.scalar_terms()) nrm2 += v * v;
      const double d = nrm2 > 0.0 ? 1.0 / std::sqrt(nrm2) : 1.0;
      row_scale[i] = d;
      b(i) = eq.rhs * d;
      std::map<int, std::vector<BlockTerm>> per;
      for (const auto& t : eq.expr.block_terms()) {
        BlockTerm s = t;
        s.coeff *= d;
        per[t.block].push_back(s);
      }
      for (auto& [k, terms] : per) by_block[k].push_back({i, symmetric_full(terms)});
      for (const auto& [f, v] : eq.expr.scalar_terms()) b_entries.emplace_back(i, f, v * d);
    }
    Eigen::SparseMatrix<double> bmat(m, nf);
    bmat.setFromTriplets(b_entries.begin(), b_entries.end());

    std::vector<Mat> cblk(nb);
    for (int k = 0; k < nb; ++k) cblk[k] = Mat::Zero(sizes[k], sizes[k]);
    Vec cf = Vec::Zero(nf);
    for (const auto& t : problem.objective().block_terms()) {
      if (t.row == t.col) {
        cblk[t.block](t.row, t.col) += t.coeff;
      } else {
        cblk[t.block](t.row, t.col) += 0.5 * t.coeff;
        cblk[t.block](t.col, t.row) += 0.5 * t.coeff;
      }
    }
    for (const auto& [f, v] : problem.objective().scalar_terms()) cf(f) += v;
    double cnorm = cf.norm();
    for (const auto& c : cblk) cnorm = std::hypot(cnorm, c.norm());
    const double obj_scale = std::max(1.0, cnorm);
    for (auto& c : cblk) c /= obj_scale;
    cf /= obj_scale;
    const double c_norm_scaled = cnorm / obj_scale;
    const double b_norm = b.norm();

    // ---- operators --------------------------------------------------------
    auto apply_a = [&](const std::vector<Mat>& x) {
      Vec out = Vec::Zero(m);
      for (int k = 0; k < nb; ++k)
        for (const auto& cb : by_block[k]) {
          double s = 0.0;
          for (const auto& t : cb.full) s += t.v * x[k](t.r, t.c);
          out(cb.con) += s;
        }
      return out;
    };
    auto apply_at = [&](const Vec& y) {
      std::vector<Mat> out(nb);
      for (int k = 0; k < nb; ++k) {
        out[k] = Mat::Zero(sizes[k], sizes[k]);
        for (const auto& cb : by_block[k]) {
          const double yi = y(cb.con);
          if (yi == 0.0) continue;
          for (const auto& t : cb.full) out[k](t.r, t.c) += yi * t.v;
        }
      }
      return out;
    };
    auto inner = [](const std::vector<Mat>& a, const std::vector<Mat>& c) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += (a[k].array() * c[k].array()).sum();
      return s;
    };

    // ---- starting point ---------------------------------------------------
    std::vector<Mat> x(nb), z(nb);
    for (int k = 0; k < nb; ++k) {
      const double n = sizes[k];
      double xi = std::max(10.0, std::sqrt(n));
      double eta = std::max(10.0, std::sqrt(n));
      for (const auto& cb : by_block[k]) {
        double an = 0.0;
        for (const auto& t : cb.full) an += t.v * t.v;
        an = std::sqrt(an);
        xi = std::max(xi, n * (1.0 + std::abs(b(cb.con))) / (1.0 + an));
        eta = std::max(eta, an);
      }
      eta = std::max(eta, (1.0 + cblk[k].norm()) / std::sqrt(n));
      x[k] = xi * Mat::Identity(sizes[k], sizes[k]);
      z[k] = eta * Mat::Identity(sizes[k], sizes[k]);
    }
    Vec y = Vec::Zero(m);
    Vec xf = Vec::Zero(nf);

    int stalls = 0;
    double best_merit = std::numeric_limits<double>::infinity();
    int since_best = 0;
    SolveStatus status = SolveStatus::numerical_failure;
    std::string message = "iteration limit";
    double relp = 0, reld = 0, relgap = 0, pobj = 0, dobj = 0;
    int iter = 0;

    // Most accurate iterate seen; returned when the method stops short of the tolerances.
    struct Snapshot {
      std::vector<Mat> x;
      Vec xf, y;
      double relp, reld, relgap, pobj, dobj;
    };
    std::optional<Snapshot> best;

    for (;; ++iter) {
      const std::vector<Mat> aty = apply_at(y);
      const Vec rp = b - apply_a(x) - bmat * xf;
      std::vector<Mat> rd(nb);
      double rdn2 = 0.0;
      for (int k = 0; k < nb; ++k) {
        rd[k] = cblk[k] - aty[k] - z[k];
        rdn2 += rd[k].squaredNorm();
      }
      const Vec rf = cf - bmat.transpose() * y;
      rdn2 += rf.squaredNorm();
      pobj = inner(cblk, x) + cf.dot(xf);
      dobj = b.dot(y);
      const double xz = inner(x, z);
      const double mu = xz / total;
      relp = rp.norm() / (1.0 + b_norm);
      reld = std::sqrt(rdn2) / (1.0 + c_norm_scaled);
      relgap = std::max(xz, std::abs(pobj - dobj)) / (1.0 + std::abs(pobj) + std::abs(dobj));

      if (opts_.verbose)
        std::fprintf(stderr, "ipm %3d  pobj % .10e  dobj % .10e  relp %.2e  reld %.2e  gap %.2e\n", iter,
                     pobj * obj_scale, dobj * obj_scale, relp, reld, relgap);

      if (relp < opts_.feasibility_tol && reld < opts_.feasibility_tol && relgap < opts_.gap_tol) {
        status = SolveStatus::optimal;
        message = "converged";
        break;
      }
      // infeasibility certificates from diverging iterates
      if (dobj > 0.0) {
        double cz = 0.0;
        for (int k = 0; k < nb; ++k) cz += (cblk[k] - rd[k]).squaredNorm();
        cz += (cf - rf).squaredNorm();
        if (std::sqrt(cz) / dobj < 1e-8 && dobj > 1e3) {
          status = SolveStatus::infeasible;
          message = "primal infeasibility certificate";
          break;
        }
      }
      if (pobj < 0.0 && (b - rp).norm() / (-pobj) < 1e-8 && -pobj > 1e3) {
        status = SolveStatus::unbounded;
        message = "dual infeasibility certificate";
        break;
      }
      if (iter >= opts_.max_iterations) break;

      const double merit = std::max({relp, reld, relgap});
      if (merit < best_merit) {
        best = Snapshot{x, xf, y, relp, reld, relgap, pobj, dobj};
      }
      if (merit < 0.999 * best_merit) {
        best_merit = merit;
        since_best = 0;
      } else if (++since_best > 15) {
        message = "no progress";
        break;
      }

      // ---- Schur complement ---------------------------------------------
      std::vector<Mat> zinv(nb);
      bool ok = true;
      for (int k = 0; k < nb; ++k) {
        auto inv = inverse_spd(z[k]);
        if (!inv) {
          ok = false;
          break;
        }
        zinv[k] = std::move(*inv);
      }
      if (!ok) {
        message = "dual iterate lost definiteness";
        break;
      }
      std::vector<Eigen::Triplet<double>> m_upper;
      {
        const bool dense_acc = m <= 2500;
        Mat dense;
        std::unordered_map<long, double> sparse;
        if (dense_acc) dense = Mat::Zero(m, m);
        for (int k = 0; k < nb; ++k) {
          const auto& list = by_block[k];
          const Mat& xk = x[k];
          const Mat& zk = zinv[k];
          for (std::size_t a = 0; a < list.size(); ++a) {
            const auto& ai = list[a].full;
            for (std::size_t c = a; c < list.size(); ++c) {
              const auto& aj = list[c].full;
              double s = 0.0;
              for (const auto& p : ai) {
                double inner_sum = 0.0;
                for (const auto& q : aj) inner_sum += q.v * xk(p.c, q.r) * zk(q.c, p.r);
                s += p.v * inner_sum;
              }
              int i = list[a].con, j = list[c].con;
              if (i > j) std::swap(i, j);
              if (dense_acc)
                dense(i, j) += s;
              else
                sparse[static_cast<long>(i) * m + j] += s;
            }
          }
        }
        if (dense_acc) {
          for (int j = 0; j < m; ++j)
            for (int i = 0; i <= j; ++i)
              if (dense(i, j) != 0.0) m_upper.emplace_back(i, j, dense(i, j));
        } else {
          m_upper.reserve(sparse.size());
          for (const auto& [key, v] : sparse)
            m_upper.emplace_back(static_cast<int>(key / m), static_cast<int>(key % m), v);
        }
      }
      double mdiag = 0.0;
      for (const auto& t : m_upper)
        if (t.row() == t.col()) mdiag = std::max(mdiag, std::abs(t.value()));
      KktSolver kkt(m, nf);
      const double reg = 1e-13 * std::max(1.0, mdiag);
      if (!kkt.factor(m_upper, b_entries_scaled(bmat), reg, 1e-11)) {
        message = "KKT factorisation failed";
        break;
      }

      auto direction = [&](double sigma_mu, const std::vector<Mat>* corr, std::vector<Mat>& dx, Vec& dxf,
                           Vec& dy, std::vector<Mat>& dz) {
        std::vector<Mat> g(nb);
        for (int k = 0; k < nb; ++k) {
          g[k] = -x[k] + sigma_mu * zinv[k] - x[k] * rd[k] * zinv[k];
          if (corr) g[k] -= (*corr)[k];
        }
        const Vec h = rp - apply_a(g);
        Vec rhs(m + nf);
        rhs << h, rf;
        Vec sol = kkt.solve(rhs);
        auto build = [&](const Vec& v) {
          dy = v.head(m);
          dxf = v.tail(nf);
          const std::vector<Mat> atdy = apply_at(dy);
          dx.resize(nb);
          dz.resize(nb);
          for (int k = 0; k < nb; ++k) {
            dz[k] = rd[k] - atdy[k];
            Mat d = g[k] + x[k] * atdy[k] * zinv[k];
            dx[k] = 0.5 * (d + d.transpose());
          }
        };
        build(sol);
        // Refine against the operator itself: the assembled Schur matrix and
        // the products forming dX round differently once X Z^-1 is badly scaled.
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 3; ++it) {
          Vec e(m + nf);
          e << rp - apply_a(dx) - bmat * dxf, rf - bmat.transpose() * dy;
          const double en = e.norm();
          if (en <= 1e-15 * (1.0 + rhs.norm()) || en >= 0.5 * prev) break;
          prev = en;
          sol += kkt.solve(e);
          build(sol);
        }
      };
      auto steps = [&](const std::vector<Mat>& dx, const std::vector<Mat>& dz) {
        double ap = std::numeric_limits<double>::infinity(), ad = ap;
        for (int k = 0; k < nb; ++k) {
          ap = std::min(ap, max_step(x[k], dx[k]));
          ad = std::min(ad, max_step(z[k], dz[k]));
        }
        return std::pair<double, double>{ap, ad};
      };

      std::vector<Mat> dxa, dza;
      Vec dxfa, dya;
      direction(0.0, nullptr, dxa, dxfa, dya, dza);
      auto [apa, ada] = steps(dxa, dza);
      apa = std::min(1.0, apa);
      ada = std::min(1.0, ada);
      double mu_aff = 0.0;
      for (int k = 0; k < nb; ++k) mu_aff += ((x[k] + apa * dxa[k]).array() * (z[k] + ada * dza[k]).array()).sum();
      mu_aff /= total;
      const double ratio = std::clamp(mu_aff / std::max(mu, 1e-300), 0.0, 1.0);
      const double expo = std::min(apa, ada) > 0.3 ? 3.0 : 2.0;
      const double sigma = std::clamp(std::pow(ratio, expo), 0.0, 1.0);

      std::vector<Mat> corr(nb);
      for (int k = 0; k < nb; ++k) corr[k] = dxa[k] * dza[k] * zinv[k];
      std::vector<Mat> dx, dz;
      Vec dxf, dy;
      direction(sigma * mu, &corr, dx, dxf, dy, dz);
      auto [ap, ad] = steps(dx, dz);
      const double gamma = 0.9 + 0.09 * std::min(apa, ada);
      ap = std::min(1.0, gamma * ap);
      ad = std::min(1.0, gamma * ad);
      if (!std::isfinite(ap) || !std::isfinite(ad)) {
        message = "non-finite step";
        break;
      }
      if (ap < 1e-10 && ad < 1e-10) {
        if (++stalls >= 3) {
          message = "step length stalled";
          break;
        }
      } else {
        stalls = 0;
      }
      for (int k = 0; k < nb; ++k) {
        x[k] += ap * dx[k];
        z[k] += ad * dz[k];
        x[k] = 0.5 * (x[k] + x[k].transpose()).eval();
        z[k] = 0.5 * (z[k] + z[k].transpose()).eval();
      }
      xf += ap * dxf;
      y += ad * dy;
    }

    if (status == SolveStatus::numerical_failure && best) {
      x = best->x;
      xf = best->xf;
      y = best->y;
      relp = best->relp;
      reld = best->reld;
      relgap = best->relgap;
      pobj = best->pobj;
      dobj = best->dobj;
    }
    res.status = status;
    res.message = message;
    res.iterations = iter;
    res.primal_residual = relp;
    res.dual_residual = reld;
    res.relative_gap = relgap;
    res.objective_value = pobj * obj_scale;
    res.dual_objective = dobj * obj_scale;
    res.block_values = x;
    res.scalar_values = xf;
    res.dual_values.resize(m);
    for (int i = 0; i < m; ++i) res.dual_values(i) = y(i) * row_scale[i] * obj_scale;
    return res;
  }

 private:
  static std::vector<Eigen::Triplet<double>> b_entries_scaled(const Eigen::SparseMatrix<double>& bmat) {
    std::vector<Eigen::Triplet<double>> out;
    for (int c = 0; c < bmat.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(bmat, c); it; ++it)
        out.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    return out;
  }

  SolveOptions opts_;
};

}  // namespace nonclass::sdp

#endif  // NONCLASS_SDP_IPM_HPP
