#pragma once

// CLIME: column-wise  min ||w||_1  s.t.  ||S w - e_j||_inf <= tau,  solved as an
// LP in the split variables w = u - v.

#include "faten/core.hpp"
#include "faten/simplex.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace faten {

struct ClimeProblem {
    Mat S;
    double tau = 0.0;
};

struct ClimeSolution {
    Mat omega;      // symmetrized
    Mat omega_raw;  // column solutions before symmetrization
    Vec column_l1;  // per-column objective
    Vec residual;   // per-column ||S w_j - e_j||_inf, pre-symmetrization
    double tau = 0.0;
    int pivots = 0;

    double max_residual() const { return residual.size() ? residual.maxCoeff() : 0.0; }
};

/// For each (i, j) keep whichever of omega_ij, omega_ji has the smaller magnitude.
inline Mat symmetrize_min_magnitude(const Mat& omega) {
    Mat out = omega;
    for (Index j = 0; j < omega.cols(); ++j) {
        for (Index i = j + 1; i < omega.rows(); ++i) {
            const double a = omega(i, j), b = omega(j, i);
            const double v = std::abs(a) <= std::abs(b) ? a : b;
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

namespace detail {

inline void check_clime_input(const Mat& s) {
    require(s.rows() == s.cols(), ErrorKind::ShapeMismatch, "CLIME input must be square");
    require(s.allFinite(), ErrorKind::InvalidParameter, "CLIME input holds non-finite entries");
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    require((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale, ErrorKind::InvalidParameter,
            "CLIME input must be symmetric");
}

inline int pivot_cap(Index p) { return static_cast<int>(std::max<Index>(1000, 200 * p)); }

}  // namespace detail

/// Solutions for every tau in `taus` (any order). Columns are solved along the
/// tau values in decreasing order, each re-optimized from the previous basis.
/// Infeasible (column, tau) pairs are reported through `feasible`.
inline std::vector<ClimeSolution> clime_path(const Mat& s, const Eigen::Ref<const Vec>& taus,
                                             std::vector<bool>* feasible = nullptr) {
    detail::check_clime_input(s);
    const Index p = s.rows(), k = taus.size();
    require((taus.array() >= 0.0).all(), ErrorKind::InvalidParameter, "tau must be >= 0");
    std::vector<Index> order(k);
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return taus(a) > taus(b); });

    std::vector<ClimeSolution> out(k);
    std::vector<bool> ok(k, true);
    for (Index t = 0; t < k; ++t) {
        out[t].tau = taus(t);
        out[t].omega_raw = Mat::Zero(p, p);
        out[t].column_l1 = Vec::Zero(p);
        out[t].residual = Vec::Zero(p);
    }
    if (p == 0) {
        if (feasible) *feasible = ok;
        for (auto& sol : out) sol.omega = sol.omega_raw;
        return out;
    }

    Mat a(2 * p, 2 * p);
    a << s, -s, -s, s;
    const Vec cost = Vec::Ones(2 * p);
    const int cap = detail::pivot_cap(p);
    for (Index j = 0; j < p; ++j) {
        lp::DualSimplex lp(a, cost);
        bool column_ok = true;
        for (Index t : order) {
            if (!column_ok) {
                ok[t] = false;
                continue;
            }
            Vec b = Vec::Constant(2 * p, taus(t));
            b(j) += 1.0;
            b(p + j) -= 1.0;
            lp.set_rhs(b);
            const lp::Result res = lp.solve(cap);
            if (res.status == lp::Status::IterationLimit)
                throw Error(ErrorKind::IterationLimit, "CLIME LP pivot cap hit at column " + std::to_string(j));
            if (res.status == lp::Status::Infeasible) {
                column_ok = false;
                ok[t] = false;
                continue;
            }
            const Vec w = res.x.head(p) - res.x.tail(p);
            out[t].omega_raw.col(j) = w;
            out[t].column_l1(j) = l1_norm(w);
            Vec r = s * w;
            r(j) -= 1.0;
            out[t].residual(j) = r.lpNorm<Eigen::Infinity>();
            out[t].pivots += res.pivots;
        }
    }
    for (Index t = 0; t < k; ++t) out[t].omega = symmetrize_min_magnitude(out[t].omega_raw);
    if (feasible) *feasible = ok;
    return out;
}

inline ClimeSolution clime_solve(const ClimeProblem& problem) {
    require(problem.tau >= 0.0, ErrorKind::InvalidParameter, "tau must be >= 0");
    detail::check_clime_input(problem.S);
    const Index p = problem.S.rows();
    Mat a(2 * p, 2 * p);
    a << problem.S, -problem.S, -problem.S, problem.S;
    const Vec cost = Vec::Ones(2 * p);
    ClimeSolution sol;
    sol.tau = problem.tau;
    sol.omega_raw = Mat::Zero(p, p);
    sol.column_l1 = Vec::Zero(p);
    sol.residual = Vec::Zero(p);
    for (Index j = 0; j < p; ++j) {
        lp::DualSimplex lp(a, cost);
        Vec b = Vec::Constant(2 * p, problem.tau);
        b(j) += 1.0;
        b(p + j) -= 1.0;
        lp.set_rhs(b);
        const lp::Result res = lp.solve(detail::pivot_cap(p));
        if (res.status == lp::Status::Infeasible)
            throw Error(ErrorKind::Infeasible, "CLIME column " + std::to_string(j) + " infeasible at tau = " +
                                                   std::to_string(problem.tau));
        if (res.status == lp::Status::IterationLimit)
            throw Error(ErrorKind::IterationLimit, "CLIME LP pivot cap hit at column " + std::to_string(j));
        const Vec w = res.x.head(p) - res.x.tail(p);
        sol.omega_raw.col(j) = w;
        sol.column_l1(j) = l1_norm(w);
        Vec r = problem.S * w;
        r(j) -= 1.0;
        sol.residual(j) = r.lpNorm<Eigen::Infinity>();
        sol.pivots += res.pivots;
    }
    sol.omega = symmetrize_min_magnitude(sol.omega_raw);
    return sol;
}

/// tr[(S Omega - I)^2]
inline double clime_trace_loss(const Mat& s, const Mat& omega) {
    Mat m = s * omega;
    m.diagonal().array() -= 1.0;
    return (m * m).trace();
}

/// tau = c * n^{-1/8} (log p)^2.
inline double tau_scale(double n, Index p) {
    const double lp = std::log(static_cast<double>(std::max<Index>(p, 2)));
    return std::pow(n, -0.125) * lp * lp;
}

inline Vec default_tau_grid() { return log_grid(1e-2, 1e2, 9); }

struct TauSelection {
    double c_tau = 0.0;
    double tau = 0.0;
    Index index = 0;
    Vec grid;
    Vec loss;  // +inf where infeasible
    ClimeSolution solution;
};

/// Minimizes the trace loss over tau = c * scale; ties resolve to the larger tau.
inline TauSelection select_tau(const Mat& s, const Eigen::Ref<const Vec>& c_grid, double scale) {
    require(c_grid.size() > 0, ErrorKind::InvalidParameter, "empty tau grid");
    const Vec taus = c_grid * scale;
    std::vector<bool> ok;
    std::vector<ClimeSolution> path = clime_path(s, taus, &ok);
    TauSelection sel;
    sel.grid = c_grid;
    sel.loss = Vec::Constant(c_grid.size(), std::numeric_limits<double>::infinity());
    bool any = false;
    for (Index t = 0; t < c_grid.size(); ++t) {
        if (!ok[t]) continue;
        const double loss = clime_trace_loss(s, path[t].omega);
        sel.loss(t) = loss;
        if (!any || loss < sel.loss(sel.index) || (loss == sel.loss(sel.index) && taus(t) > taus(sel.index))) {
            sel.index = t;
            any = true;
        }
    }
    if (!any) throw Error(ErrorKind::Infeasible, "CLIME infeasible for every tau candidate");
    sel.c_tau = c_grid(sel.index);
    sel.tau = taus(sel.index);
    sel.solution = std::move(path[sel.index]);
    return sel;
}

}  // namespace faten
