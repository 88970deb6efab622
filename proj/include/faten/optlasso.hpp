#pragma once

// Bias-adjusted l1-penalized local regression:
//
//   L(theta) = (n / (2 phi k1 k2)) ||y - G theta||^2 - (n zeta / (2 phi k1)) theta^T V theta
//
// minimized with an l1 penalty under ||theta||_1 <= rho by composite gradient
// descent. V carries the covariate noise covariance in its leading p x p block
// and zeros elsewhere, so the problem is nonconvex in general.

#include "faten/core.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace faten {

struct LossSpec {
    Vec y;     // rows
    Mat G;     // rows x (p + r)
    Mat V_x;   // p x p noise covariance
    double n = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double phi = 0.0;
    double zeta = 0.0;
    bool bias_adjust = true;  // false gives the convex (unadjusted) loss

    Index p() const { return V_x.rows(); }
    Index dim() const { return G.cols(); }
    double gram_scale() const { return n / (phi * k1 * k2); }
    double noise_scale() const { return bias_adjust ? n * zeta / (phi * k1) : 0.0; }

    /// (p+r) x (p+r) with V_x top-left and exact zeros elsewhere.
    Mat augmented_noise() const {
        Mat v = Mat::Zero(dim(), dim());
        v.topLeftCorner(p(), p()) = V_x;
        return v;
    }

    void validate() const {
        require(G.rows() == y.size(), ErrorKind::ShapeMismatch, "G rows != y length");
        require(V_x.rows() == V_x.cols() && V_x.rows() <= G.cols(), ErrorKind::ShapeMismatch,
                "noise covariance must be square with p <= p + r");
        require(n > 0 && k1 > 0 && k2 > 0 && phi > 0 && zeta >= 0, ErrorKind::InvalidParameter,
                "loss scalars must be positive");
    }
};

inline double loss_value(const Eigen::Ref<const Vec>& theta, const LossSpec& spec) {
    require(theta.size() == spec.dim(), ErrorKind::ShapeMismatch, "theta length != p + r");
    const Index p = spec.p();
    const Vec head = theta.head(p);
    return 0.5 * spec.gram_scale() * (spec.y - spec.G * theta).squaredNorm() -
           0.5 * spec.noise_scale() * head.dot(spec.V_x * head);
}

inline Vec loss_gradient(const Eigen::Ref<const Vec>& theta, const LossSpec& spec) {
    require(theta.size() == spec.dim(), ErrorKind::ShapeMismatch, "theta length != p + r");
    const Index p = spec.p();
    Vec grad = spec.gram_scale() * (spec.G.transpose() * (spec.G * theta - spec.y));
    grad.head(p).noalias() -= spec.noise_scale() * (spec.V_x * theta.head(p));
    return grad;
}

inline Mat loss_hessian(const LossSpec& spec) {
    Mat h = spec.gram_scale() * (spec.G.transpose() * spec.G);
    h.topLeftCorner(spec.p(), spec.p()) -= spec.noise_scale() * spec.V_x;
    return h;
}

/// L(theta) = 0.5 theta^T H theta - b^T theta + c, precomputed once per block.
struct QuadraticModel {
    Mat H;
    Vec b;
    double c = 0.0;

    static QuadraticModel from(const LossSpec& spec) {
        spec.validate();
        QuadraticModel m;
        m.H = loss_hessian(spec);
        m.b = spec.gram_scale() * (spec.G.transpose() * spec.y);
        m.c = 0.5 * spec.gram_scale() * spec.y.squaredNorm();
        return m;
    }

    Index dim() const { return b.size(); }
    double value(const Eigen::Ref<const Vec>& theta) const { return 0.5 * theta.dot(H * theta) - b.dot(theta) + c; }
    Vec gradient(const Eigen::Ref<const Vec>& theta) const { return H * theta - b; }
};

/// Euclidean projection onto {||x||_1 <= radius}; equals soft-thresholding at the level
/// where the l1 norm hits the radius.
inline Vec project_l1_ball(const Eigen::Ref<const Vec>& z, double radius) {
    if (l1_norm(z) <= radius) return z;
    std::vector<double> a(z.size());
    for (Index i = 0; i < z.size(); ++i) a[i] = std::abs(z(i));
    std::sort(a.begin(), a.end(), std::greater<>());
    double cum = 0.0, level = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        cum += a[k];
        const double t = (cum - radius) / static_cast<double>(k + 1);
        if (k + 1 == a.size() || a[k + 1] <= t) {
            level = t;
            break;
        }
    }
    Vec out(z.size());
    for (Index i = 0; i < z.size(); ++i) out(i) = soft_threshold(z(i), level);
    return out;
}

/// argmin_{||theta||_1 <= rho} <grad, theta - theta_t> + alpha2 ||theta - theta_t||^2 + eta ||theta||_1
inline Vec prox_step(const Eigen::Ref<const Vec>& theta_t, const Eigen::Ref<const Vec>& grad, double alpha2,
                     double eta, double rho) {
    require(alpha2 > 0.0, ErrorKind::InvalidParameter, "alpha2 must be positive");
    require(theta_t.size() == grad.size(), ErrorKind::ShapeMismatch, "theta/grad length mismatch");
    const Vec z = theta_t - grad / (2.0 * alpha2);
    const double level = eta / (2.0 * alpha2);
    Vec x(z.size());
    for (Index i = 0; i < z.size(); ++i) x(i) = soft_threshold(z(i), level);
    if (l1_norm(x) <= rho) return x;
    return project_l1_ball(z, rho);
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
inline double largest_eigenvalue(const Mat& a, double tol = 1e-6, int max_iters = 500) {
    const Index d = a.rows();
    if (d == 0) return 0.0;
    Vec v(d);
    for (Index i = 0; i < d; ++i) v(i) = 1.0 + 0.01 * static_cast<double>(i % 7);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Vec w = a * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        const double next = v.dot(w);
        w /= norm;
        v = w;
        if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) return next;
        lambda = next;
    }
    return lambda;
}

struct SolverConfig {
    double rho = 10.0;
    double eta = 0.0;
    double alpha2 = 0.0;  // <= 0 selects the largest eigenvalue of the scaled Gram
    int max_iters = 1000;
    double tol = 1e-8;
    std::optional<Vec> warm_start;
    bool record_trace = false;

    void validate() const {
        require(rho > 0.0, ErrorKind::InvalidParameter, "rho must be positive");
        require(eta >= 0.0, ErrorKind::InvalidParameter, "eta must be >= 0");
        require(max_iters >= 1, ErrorKind::InvalidParameter, "max_iters must be >= 1");
    }
};

struct InstantEstimate {
    Vec theta;
    Vec beta;   // first p entries
    Vec gamma;  // last r entries; rotation dependent
    int iterations = 0;
    double objective = 0.0;  // L + eta ||theta||_1
    bool converged = false;
    std::vector<int> active;
    std::vector<double> trace;
};

inline constexpr double kActiveTol = 1e-10;

inline std::vector<int> active_set(const Eigen::Ref<const Vec>& theta, double tol = kActiveTol) {
    std::vector<int> out;
    for (Index j = 0; j < theta.size(); ++j)
        if (std::abs(theta(j)) > tol) out.push_back(static_cast<int>(j));
    return out;
}

/// Composite gradient descent on a precomputed quadratic model. `alpha2` must be resolved.
inline InstantEstimate solve_instantaneous(const QuadraticModel& model, Index p, const SolverConfig& cfg,
                                           double alpha2) {
    cfg.validate();
    require(alpha2 > 0.0, ErrorKind::InvalidParameter, "alpha2 must be positive");
    const Index d = model.dim();
    require(p <= d, ErrorKind::ShapeMismatch, "p exceeds model dimension");
    Vec theta = Vec::Zero(d);
    if (cfg.warm_start) {
        require(cfg.warm_start->size() == d, ErrorKind::ShapeMismatch, "warm start length != p + r");
        theta = project_l1_ball(*cfg.warm_start, cfg.rho);
    }
    auto objective = [&](const Vec& t) { return model.value(t) + cfg.eta * l1_norm(t); };

    InstantEstimate est;
    double f = objective(theta);
    if (cfg.record_trace) est.trace.push_back(f);
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        const Vec grad = model.gradient(theta);
        Vec next = prox_step(theta, grad, alpha2, cfg.eta, cfg.rho);
        const double fn = objective(next);
        if (!std::isfinite(fn))
            throw Error(ErrorKind::SolverDivergence,
                        "non-finite objective at iteration " + std::to_string(it) + "; increase alpha2");
        theta.swap(next);
        const double change = std::abs(f - fn);
        f = fn;
        if (cfg.record_trace) est.trace.push_back(f);
        if (change <= cfg.tol * std::max(1.0, std::abs(f))) {
            est.converged = true;
            ++it;
            break;
        }
    }
    est.iterations = it;
    est.objective = f;
    est.theta = std::move(theta);
    est.beta = est.theta.head(p);
    est.gamma = est.theta.tail(d - p);
    est.active = active_set(est.theta);
    return est;
}

/// Default step curvature: the largest eigenvalue of (n/(phi k1 k2)) G^T G.
inline double default_alpha2(const LossSpec& spec) {
    return largest_eigenvalue(spec.gram_scale() * (spec.G.transpose() * spec.G));
}

inline InstantEstimate solve_instantaneous(const LossSpec& spec, const SolverConfig& cfg) {
    const QuadraticModel model = QuadraticModel::from(spec);
    double alpha2 = cfg.alpha2 > 0.0 ? cfg.alpha2 : default_alpha2(spec);
    if (alpha2 <= 0.0) alpha2 = 1.0;
    return solve_instantaneous(model, spec.p(), cfg, alpha2);
}

/// A local regression prepared for repeated solves: the loss on the solve scale
/// (columns standardized unless disabled) plus what is needed to map back.
struct BlockProblem {
    LossSpec spec;  // solve scale
    QuadraticModel model;
    double alpha2 = 1.0;
    Vec col_scale;  // solve-scale theta_j = raw theta_j * col_scale_j / y_scale
    double y_scale = 1.0;
    Mat gram;  // G^T G on the solve scale
    Vec gty;
    double yty = 0.0;

    Index rows() const { return spec.y.size(); }
    Index p() const { return spec.p(); }
    Index dim() const { return spec.dim(); }

    Vec to_raw(const Eigen::Ref<const Vec>& theta) const {
        return (theta.array() * y_scale / col_scale.array()).matrix();
    }
    Vec to_solve(const Eigen::Ref<const Vec>& theta) const {
        return (theta.array() * col_scale.array() / y_scale).matrix();
    }
    double rss(const Eigen::Ref<const Vec>& theta) const {
        return std::max(0.0, yty - 2.0 * gty.dot(theta) + theta.dot(gram * theta));
    }

    /// Columns of y and G centered and scaled to unit sample variance when `standardize`;
    /// V_x is mapped to D^{-1} V_x D^{-1} so the loss is the raw loss divided by y_scale^2.
    static BlockProblem build(const LossSpec& raw, bool standardize) {
        raw.validate();
        BlockProblem bp;
        const Index d = raw.dim(), p = raw.p();
        bp.col_scale = Vec::Ones(d);
        bp.spec = raw;
        if (standardize) {
            const Index m = raw.y.size();
            const double denom = static_cast<double>(std::max<Index>(m - 1, 1));
            const double ym = raw.y.mean();
            const double ysd = std::sqrt((raw.y.array() - ym).square().sum() / denom);
            bp.y_scale = ysd > 0.0 ? ysd : 1.0;
            bp.spec.y = (raw.y.array() - ym) / bp.y_scale;
            for (Index j = 0; j < d; ++j) {
                const double mean = raw.G.col(j).mean();
                const double sd = std::sqrt((raw.G.col(j).array() - mean).square().sum() / denom);
                if (sd > 0.0) {
                    bp.col_scale(j) = sd;
                    bp.spec.G.col(j) = (raw.G.col(j).array() - mean) / sd;
                } else {
                    bp.spec.G.col(j).setZero();
                }
            }
            const Vec inv = bp.col_scale.head(p).cwiseInverse();
            bp.spec.V_x = inv.asDiagonal() * raw.V_x * inv.asDiagonal();
        }
        bp.model = QuadraticModel::from(bp.spec);
        bp.gram = bp.spec.G.transpose() * bp.spec.G;
        bp.gty = bp.spec.G.transpose() * bp.spec.y;
        bp.yty = bp.spec.y.squaredNorm();
        bp.alpha2 = largest_eigenvalue(bp.spec.gram_scale() * bp.gram);
        if (!(bp.alpha2 > 0.0)) bp.alpha2 = 1.0;
        return bp;
    }
};

/// Per-block fits at one penalty level; raw-scale warm starts chain across blocks
/// when `chain` is set.
inline std::vector<InstantEstimate> fit_blocks(const std::vector<BlockProblem>& blocks, const SolverConfig& base,
                                               bool chain) {
    std::vector<InstantEstimate> fits;
    fits.reserve(blocks.size());
    std::optional<Vec> prev_raw;
    for (const BlockProblem& bp : blocks) {
        SolverConfig cfg = base;
        if (chain && prev_raw && prev_raw->size() == bp.dim()) cfg.warm_start = bp.to_solve(*prev_raw);
        fits.push_back(solve_instantaneous(bp.model, bp.p(), cfg, bp.alpha2));
        prev_raw = bp.to_raw(fits.back().theta);
    }
    return fits;
}

/// Gaussian BIC of one block: m log(RSS/m) + df log m.
inline double block_bic(const BlockProblem& bp, const InstantEstimate& fit) {
    const double m = static_cast<double>(bp.rows());
    const double rss = std::max(bp.rss(fit.theta), 1e-300);
    return m * std::log(rss / m) + static_cast<double>(fit.active.size()) * std::log(m);
}

struct EtaSelection {
    double c_eta = 0.0;
    double eta = 0.0;
    Index index = 0;
    Vec grid;   // c values
    Vec bic;    // total BIC per grid point (+inf when the fit failed)
    std::vector<InstantEstimate> fits;  // at the selected eta
};

/// eta = c * n^{-1/8} (log p)^2.
inline double eta_scale(double n, Index p) {
    const double lp = std::log(static_cast<double>(std::max<Index>(p, 2)));
    return std::pow(n, -0.125) * lp * lp;
}

inline Vec default_eta_grid() { return log_grid(1e-4, 1e4, 17); }

/// Minimizes the summed block BIC over the grid; ties resolve to the larger eta.
inline EtaSelection select_eta(const std::vector<BlockProblem>& blocks, const Eigen::Ref<const Vec>& grid,
                               double scale, const SolverConfig& base, bool chain = true) {
    require(grid.size() > 0, ErrorKind::InvalidParameter, "empty eta grid");
    require(!blocks.empty(), ErrorKind::InsufficientData, "no blocks to fit");
    EtaSelection sel;
    sel.grid = grid;
    sel.bic = Vec::Constant(grid.size(), std::numeric_limits<double>::infinity());
    bool any = false;
    std::string last_error;
    for (Index g = 0; g < grid.size(); ++g) {
        SolverConfig cfg = base;
        cfg.eta = grid(g) * scale;
        std::vector<InstantEstimate> fits;
        try {
            fits = fit_blocks(blocks, cfg, chain);
        } catch (const Error& e) {
            last_error = e.what();
            continue;
        }
        double total = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b) total += block_bic(blocks[b], fits[b]);
        sel.bic(g) = total;
        if (!any || total < sel.bic(sel.index) ||
            (total == sel.bic(sel.index) && grid(g) > grid(sel.index))) {
            sel.index = g;
            sel.fits = std::move(fits);
            any = true;
        }
    }
    if (!any) throw Error(ErrorKind::SolverDivergence, "every eta candidate failed; last: " + last_error);
    sel.c_eta = grid(sel.index);
    sel.eta = sel.c_eta * scale;
    return sel;
}

/// Convex LASSO sum (y - X b)^2 + eta ||b||_1 by cyclic coordinate descent on the Gram.
inline Vec lasso_coordinate_descent(const Mat& gram, const Vec& xty, double eta, int max_sweeps = 10000,
                                    double tol = 1e-10, const Vec* warm = nullptr) {
    const Index p = gram.rows();
    Vec beta = warm ? *warm : Vec::Zero(p);
    Vec grad = gram * beta;  // X^T X beta
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_delta = 0.0, max_coef = 0.0;
        for (Index j = 0; j < p; ++j) {
            const double gjj = gram(j, j);
            if (gjj <= 0.0) {
                if (beta(j) != 0.0) {
                    grad -= gram.col(j) * beta(j);
                    beta(j) = 0.0;
                }
                continue;
            }
            const double rho_j = xty(j) - grad(j) + gjj * beta(j);
            const double next = soft_threshold(rho_j, 0.5 * eta) / gjj;
            const double delta = next - beta(j);
            if (delta != 0.0) {
                grad.noalias() += gram.col(j) * delta;
                beta(j) = next;
            }
            max_delta = std::max(max_delta, std::abs(delta));
            max_coef = std::max(max_coef, std::abs(next));
        }
        if (max_delta <= tol * std::max(1.0, max_coef)) break;
    }
    return beta;
}

}  // namespace faten
