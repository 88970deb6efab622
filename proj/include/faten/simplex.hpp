#pragma once

// Dense-tableau dual simplex for
//
//   min c^T x  s.t.  A x <= b,  x >= 0,   with c >= 0.
//
// With c >= 0 the all-slack basis is dual feasible for every right-hand side,
// so no phase one is needed and a solved tableau can be re-optimized after a
// change of b (the basis stays dual feasible). CLIME walks its tau grid this way.

#include "faten/core.hpp"

#include <limits>
#include <string>
#include <vector>

namespace faten::lp {

enum class Status { Optimal, Infeasible, IterationLimit };

struct Result {
    Status status = Status::Optimal;
    Vec x;
    double objective = 0.0;
    int pivots = 0;
};

class DualSimplex {
public:
    DualSimplex(const Mat& a, const Vec& c, double eps = 1e-10)
        : m_(a.rows()), n_(a.cols()), eps_(eps), c_(c) {
        require(c.size() == n_, ErrorKind::ShapeMismatch, "cost length != columns");
        require((c.array() >= 0.0).all(), ErrorKind::InvalidParameter, "dual simplex needs c >= 0");
        tableau_.resize(m_, n_ + m_);
        tableau_.leftCols(n_) = a;
        tableau_.rightCols(m_).setIdentity();
        reduced_ = Vec::Zero(n_ + m_);
        reduced_.head(n_) = c;
        basis_.resize(m_);
        for (Index i = 0; i < m_; ++i) basis_[i] = n_ + i;
        rhs_ = Vec::Zero(m_);
        scale_ = std::max(1.0, a.cwiseAbs().maxCoeff());
    }

    /// Replaces b; the current basis is kept.
    void set_rhs(const Vec& b) {
        require(b.size() == m_, ErrorKind::ShapeMismatch, "rhs length != rows");
        rhs_.noalias() = tableau_.rightCols(m_) * b;
    }

    Result solve(int max_pivots) {
        Result res;
        const double feas_tol = eps_ * scale_;
        for (;;) {
            Index leave = -1;
            double worst = -feas_tol;
            for (Index i = 0; i < m_; ++i) {
                if (rhs_(i) < worst) {
                    worst = rhs_(i);
                    leave = i;
                }
            }
            if (leave < 0) break;
            if (res.pivots >= max_pivots) {
                res.status = Status::IterationLimit;
                return res;
            }
            Index enter = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            double best_mag = 0.0;
            for (Index j = 0; j < n_ + m_; ++j) {
                const double t = tableau_(leave, j);
                if (t < -eps_) {
                    const double ratio = std::max(reduced_(j), 0.0) / -t;
                    if (ratio < best_ratio - 1e-14 || (ratio <= best_ratio + 1e-14 && -t > best_mag)) {
                        best_ratio = ratio;
                        best_mag = -t;
                        enter = j;
                    }
                }
            }
            if (enter < 0) {
                res.status = Status::Infeasible;
                infeasible_row_ = leave;
                return res;
            }
            pivot(leave, enter);
            ++res.pivots;
        }
        res.status = Status::Optimal;
        res.x = Vec::Zero(n_);
        for (Index i = 0; i < m_; ++i)
            if (basis_[i] < n_) res.x(basis_[i]) = std::max(rhs_(i), 0.0);
        res.objective = c_.dot(res.x);
        return res;
    }

    Index infeasible_row() const { return infeasible_row_; }

private:
    void pivot(Index r, Index j) {
        const double piv = tableau_(r, j);
        tableau_.row(r) /= piv;
        rhs_(r) /= piv;
        Vec col = tableau_.col(j);
        col(r) = 0.0;
        const Eigen::RowVectorXd row = tableau_.row(r);
        tableau_.noalias() -= col * row;
        rhs_.noalias() -= col * rhs_(r);
        const double dj = reduced_(j);
        reduced_.noalias() -= dj * row.transpose();
        reduced_(j) = 0.0;
        tableau_.col(j).setZero();
        tableau_(r, j) = 1.0;
        basis_[r] = j;
    }

    Index m_, n_;
    double eps_;
    double scale_ = 1.0;
    Vec c_;
    Mat tableau_;
    Vec rhs_;
    Vec reduced_;
    std::vector<Index> basis_;
    Index infeasible_row_ = -1;
};

}  // namespace faten::lp
