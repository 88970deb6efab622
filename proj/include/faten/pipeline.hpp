#pragma once

// End-to-end integrated coefficient estimators:
//   FATEN  smoothing -> truncation -> block PCA -> noise covariance -> bias-adjusted
//          l1 solve (eta by BIC) -> CLIME (tau by trace loss) -> debias -> integrate -> threshold
//   FATEC  the same with the convex (unadjusted) local loss
//   NAIVE  LASSO on truncated raw returns, no smoothing, debiasing or thresholding

#include "faten/clime.hpp"
#include "faten/core.hpp"
#include "faten/factorpca.hpp"
#include "faten/optlasso.hpp"
#include "faten/panel.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace faten {

enum class EstimatorKind { Faten, Fatec, NaiveLasso };

inline const char* to_string(EstimatorKind k) {
    switch (k) {
    case EstimatorKind::Faten: return "FATEN";
    case EstimatorKind::Fatec: return "FATEC";
    case EstimatorKind::NaiveLasso: return "NAIVE_LASSO";
    }
    return "?";
}

inline EstimatorKind parse_estimator(const std::string& s) {
    if (s == "FATEN" || s == "faten") return EstimatorKind::Faten;
    if (s == "FATEC" || s == "fatec") return EstimatorKind::Fatec;
    if (s == "NAIVE_LASSO" || s == "naive_lasso" || s == "LASSO" || s == "lasso") return EstimatorKind::NaiveLasso;
    throw Error(ErrorKind::InvalidParameter, "unknown estimator '" + s + "'");
}

enum class ThresholdKind { Hard, Soft };

struct PipelineConfig {
    int k1 = 0;  // 0: round(0.5 sqrt(n))
    int k2 = 0;  // 0: round(n^{3/4})
    KernelFn kernel = triangular_kernel;
    ThresholdMode threshold_mode = ThresholdMode::Practical;
    TheoreticalConstants theoretical;
    Vec eta_grid = default_eta_grid();
    Vec tau_grid = default_tau_grid();
    Vec naive_eta_grid = log_grid(1e-4, 1e4, 17);
    double c_h = 1.0;
    ThresholdKind threshold_kind = ThresholdKind::Hard;
    int r_max = 5;
    std::optional<int> rank;  // pinned rank skips selection
    double rho = 10.0;
    int max_iters = 1000;
    double tol = 1e-8;
    bool standardize = true;
    bool warm_start_chain = true;
};

/// Everything shared by all ranks and estimators for one panel.
struct PreparedPanel {
    Index n = 0, p = 0;
    int k1 = 0, k2 = 0;
    KernelSpec kernel;
    SmoothedSeries smoothed;   // raw
    SmoothedSeries truncated;  // jump-truncated
    Thresholds thresholds;
    TruncationStats truncation;
    NoiseCov noise;
    std::vector<SmoothedBlock> blocks;  // non-overlapping, stride k2

    Index block_rows() const { return k2 - k1 + 1; }
};

inline PreparedPanel prepare_panel(const ObservedPanel& panel, const PipelineConfig& cfg) {
    panel.validate();
    PreparedPanel pp;
    pp.n = panel.n();
    pp.p = panel.p();
    pp.k1 = cfg.k1 > 0 ? cfg.k1 : default_k1(pp.n);
    pp.k2 = cfg.k2 > 0 ? cfg.k2 : default_k2(pp.n, pp.k1);
    require(pp.k1 < pp.k2 && pp.k2 <= pp.n, ErrorKind::InvalidParameter,
            "need k1 < k2 <= n (k1 = " + std::to_string(pp.k1) + ", k2 = " + std::to_string(pp.k2) + ")");
    pp.kernel = kernel_constants(cfg.kernel, pp.k1);
    pp.smoothed = smooth_panel(panel, pp.kernel);
    pp.thresholds = truncation_thresholds(panel, pp.smoothed, cfg.threshold_mode, cfg.theoretical);
    pp.truncated = truncate(pp.smoothed, pp.thresholds, &pp.truncation);
    pp.noise = noise_covariance(panel, pp.thresholds.v2);
    const Index count = pp.n / pp.k2;
    for (Index b = 0; b < count; ++b)
        pp.blocks.push_back(build_block(pp.smoothed, pp.k1, pp.k2, b * pp.k2, pp.thresholds));
    require(!pp.blocks.empty(), ErrorKind::InsufficientData, "no complete block fits in the sample");
    return pp;
}

/// (n/(phi k1 k2)) U^T U - (n zeta/(phi k1)) V, symmetric by construction.
inline Mat adjusted_idiosyncratic_gram(const Mat& u, const Mat& v, double n, double k1, double k2, double phi,
                                       double zeta) {
    const Index p = u.cols();
    Mat s = Mat::Zero(p, p);
    s.selfadjointView<Eigen::Lower>().rankUpdate(u.transpose(), n / (phi * k1 * k2));
    s = s.selfadjointView<Eigen::Lower>();
    s.noalias() -= (n * zeta / (phi * k1)) * v;
    return 0.5 * (s + s.transpose());
}

/// beta + (n/(phi k1 k2)) Omega^T { U^T y - (U^T X - k2 zeta V) beta }
inline Vec debias_block(const Eigen::Ref<const Vec>& beta_hat, const Mat& omega, const Mat& u, const Mat& x,
                        const Eigen::Ref<const Vec>& y, const Mat& v, double phi, double zeta, double n, double k1,
                        double k2) {
    const Index p = beta_hat.size();
    require(omega.rows() == p && omega.cols() == p && u.cols() == p && x.cols() == p && v.rows() == p &&
                u.rows() == y.size() && x.rows() == y.size(),
            ErrorKind::ShapeMismatch, "debias_block shapes");
    const Vec score = u.transpose() * y - (u.transpose() * (x * beta_hat) - k2 * zeta * (v * beta_hat));
    return beta_hat + (n / (phi * k1 * k2)) * (omega.transpose() * score);
}

/// sum_b beta_b k2 / n
inline Vec integrate(const std::vector<Vec>& path, Index k2, Index n) {
    require(!path.empty(), ErrorKind::InsufficientData, "no blocks to integrate");
    Vec acc = Vec::Zero(path.front().size());
    for (const Vec& b : path) {
        require(b.size() == acc.size(), ErrorKind::ShapeMismatch, "block coefficient lengths differ");
        acc += b;
    }
    return acc * (static_cast<double>(k2) / static_cast<double>(n));
}

inline Vec threshold(const Eigen::Ref<const Vec>& v, double h, ThresholdKind kind) {
    require(h >= 0.0, ErrorKind::InvalidParameter, "threshold level must be >= 0");
    Vec out = Vec::Zero(v.size());
    for (Index j = 0; j < v.size(); ++j) {
        const double x = v(j);
        if (std::abs(x) < h) continue;
        out(j) = kind == ThresholdKind::Hard ? x : x - (x > 0 ? h : (x < 0 ? -h : 0.0));
    }
    return out;
}

/// h_n = c_h n^{-1/4}
inline double threshold_level(double c_h, Index n) { return c_h * std::pow(static_cast<double>(n), -0.25); }

/// PCA and CLIME of every block at a fixed rank; shared by FATEN and FATEC.
struct RankStage {
    int r = 0;
    std::vector<FactorDecomposition> pca;
    std::vector<TauSelection> clime;
    std::vector<std::string> warnings;
};

inline RankStage prepare_rank(const PreparedPanel& pp, int r, const PipelineConfig& cfg) {
    RankStage st;
    st.r = r;
    const double n = static_cast<double>(pp.n), k1 = pp.k1, k2 = pp.k2;
    for (std::size_t b = 0; b < pp.blocks.size(); ++b) {
        const SmoothedBlock& blk = pp.blocks[b];
        FactorDecomposition fd;
        try {
            fd = pca_decompose(blk.x, r);
        } catch (const Error& e) {
            throw Error(e.kind(), "block " + std::to_string(b) + ": " + e.what());
        }
        if (fd.degenerate) st.warnings.push_back("block " + std::to_string(b) + " is all-zero; rank forced to 0");
        if (fd.ties) st.warnings.push_back("block " + std::to_string(b) + " has tied top eigenvalues");
        const Mat s = adjusted_idiosyncratic_gram(fd.U, pp.noise.V, n, k1, k2, pp.kernel.phi, pp.kernel.zeta);
        try {
            st.clime.push_back(select_tau(s, cfg.tau_grid, tau_scale(n, pp.p)));
        } catch (const Error& e) {
            throw Error(e.kind(), "block " + std::to_string(b) + " CLIME: " + e.what());
        }
        st.pca.push_back(std::move(fd));
    }
    return st;
}

struct BlockDiagnostics {
    Index start = 0;
    int r = 0;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    Index active = 0;
    double tau = 0.0;
    double clime_residual = 0.0;
    int clime_pivots = 0;
    bool pca_ties = false;
    bool pca_degenerate = false;
};

struct IntegratedEstimate {
    EstimatorKind estimator = EstimatorKind::Faten;
    Index n = 0, p = 0;
    int k1 = 0, k2 = 0;
    int r_selected = 0;
    std::vector<Vec> beta_hat_path;       // per block, before debiasing
    std::vector<Vec> beta_debiased_path;  // per block
    Vec I_beta_plain;  // sum of undebiased block estimates times k2/n
    Vec I_beta_hat;    // debiased integrated estimate
    Vec I_beta_tilde;  // thresholded
    double h_n = 0.0;
    ThresholdKind kind = ThresholdKind::Hard;
    double eta = 0.0;
    double c_eta = 0.0;
    double tau = 0.0;  // mean selected tau across blocks
    Vec rank_mse;      // per candidate rank (empty when pinned)
    std::vector<BlockDiagnostics> blocks;
    std::vector<std::string> warnings;
};

/// One estimator at one rank.
inline IntegratedEstimate fit_at_rank(const PreparedPanel& pp, const RankStage& st, EstimatorKind kind,
                                      const PipelineConfig& cfg) {
    require(kind != EstimatorKind::NaiveLasso, ErrorKind::InvalidParameter, "naive LASSO has no rank stage");
    const double n = static_cast<double>(pp.n);
    std::vector<BlockProblem> problems;
    problems.reserve(pp.blocks.size());
    for (std::size_t b = 0; b < pp.blocks.size(); ++b) {
        LossSpec spec;
        spec.y = pp.blocks[b].y;
        spec.G = st.pca[b].G;
        spec.V_x = pp.noise.V;
        spec.n = n;
        spec.k1 = pp.k1;
        spec.k2 = pp.k2;
        spec.phi = pp.kernel.phi;
        spec.zeta = pp.kernel.zeta;
        spec.bias_adjust = kind == EstimatorKind::Faten;
        problems.push_back(BlockProblem::build(spec, cfg.standardize));
    }
    SolverConfig base;
    base.rho = cfg.rho;
    base.max_iters = cfg.max_iters;
    base.tol = cfg.tol;
    const EtaSelection eta = select_eta(problems, cfg.eta_grid, eta_scale(n, pp.p), base, cfg.warm_start_chain);

    IntegratedEstimate est;
    est.estimator = kind;
    est.n = pp.n;
    est.p = pp.p;
    est.k1 = pp.k1;
    est.k2 = pp.k2;
    est.r_selected = st.r;
    est.eta = eta.eta;
    est.c_eta = eta.c_eta;
    est.kind = cfg.threshold_kind;
    est.warnings = st.warnings;
    double tau_sum = 0.0;
    for (std::size_t b = 0; b < pp.blocks.size(); ++b) {
        const Vec theta = problems[b].to_raw(eta.fits[b].theta);
        const Vec beta_hat = theta.head(pp.p);
        const SmoothedBlock& blk = pp.blocks[b];
        const FactorDecomposition& fd = st.pca[b];
        const TauSelection& ts = st.clime[b];
        est.beta_hat_path.push_back(beta_hat);
        est.beta_debiased_path.push_back(debias_block(beta_hat, ts.solution.omega, fd.U, blk.x, blk.y,
                                                      pp.noise.V, pp.kernel.phi, pp.kernel.zeta, n, pp.k1, pp.k2));
        BlockDiagnostics d;
        d.start = blk.start;
        d.r = fd.r;
        d.iterations = eta.fits[b].iterations;
        d.converged = eta.fits[b].converged;
        d.objective = eta.fits[b].objective;
        d.active = static_cast<Index>(eta.fits[b].active.size());
        d.tau = ts.tau;
        d.clime_residual = ts.solution.max_residual();
        d.clime_pivots = ts.solution.pivots;
        d.pca_ties = fd.ties;
        d.pca_degenerate = fd.degenerate;
        est.blocks.push_back(d);
        tau_sum += ts.tau;
    }
    est.tau = tau_sum / static_cast<double>(pp.blocks.size());
    est.I_beta_plain = integrate(est.beta_hat_path, pp.k2, pp.n);
    est.I_beta_hat = integrate(est.beta_debiased_path, pp.k2, pp.n);
    est.h_n = threshold_level(cfg.c_h, pp.n);
    est.I_beta_tilde = threshold(est.I_beta_hat, est.h_n, cfg.threshold_kind);
    return est;
}

inline int max_feasible_rank(const PreparedPanel& pp) {
    return static_cast<int>(std::min<Index>(pp.p, pp.block_rows()));
}

/// FATEN and/or FATEC on one panel, sharing smoothing, PCA and CLIME across estimators.
/// Rank is pinned by cfg.rank or chosen per estimator by the smoothed in-sample MSE.
inline std::map<EstimatorKind, IntegratedEstimate> run_factor_estimators(const PreparedPanel& pp,
                                                                        const std::vector<EstimatorKind>& kinds,
                                                                        const PipelineConfig& cfg) {
    std::vector<int> ranks;
    if (cfg.rank) {
        require(*cfg.rank >= 0 && *cfg.rank <= max_feasible_rank(pp), ErrorKind::InvalidParameter,
                "pinned rank out of range");
        ranks.push_back(*cfg.rank);
    } else {
        require(cfg.r_max >= 0, ErrorKind::InvalidParameter, "r_max must be >= 0");
        for (int r = 0; r <= std::min(cfg.r_max, max_feasible_rank(pp)); ++r) ranks.push_back(r);
    }

    std::map<EstimatorKind, std::map<int, IntegratedEstimate>> fits;
    std::map<int, std::string> stage_errors;
    for (int r : ranks) {
        std::optional<RankStage> st;
        try {
            st = prepare_rank(pp, r, cfg);
        } catch (const Error& e) {
            if (cfg.rank) throw;
            stage_errors[r] = e.what();
            continue;
        }
        for (EstimatorKind k : kinds) {
            try {
                fits[k].emplace(r, fit_at_rank(pp, *st, k, cfg));
            } catch (const Error& e) {
                if (cfg.rank) throw;
                stage_errors[r] = e.what();
            }
        }
    }

    std::map<EstimatorKind, IntegratedEstimate> out;
    for (EstimatorKind k : kinds) {
        auto& by_rank = fits[k];
        if (cfg.rank) {
            out.emplace(k, std::move(by_rank.at(*cfg.rank)));
            continue;
        }
        const int r_top = ranks.back();
        const RankSelection sel = select_rank(
            pp.truncated.y, pp.truncated.x,
            [&](int r) -> Vec {
                auto it = by_rank.find(r);
                if (it == by_rank.end()) {
                    auto err = stage_errors.find(r);
                    throw Error(ErrorKind::NumericDegeneracy,
                                err != stage_errors.end() ? err->second : "rank not evaluated");
                }
                return it->second.I_beta_tilde;
            },
            r_top);
        IntegratedEstimate est = std::move(by_rank.at(sel.selected));
        est.rank_mse = sel.mse;
        for (const std::string& w : sel.warnings) est.warnings.push_back(w);
        out.emplace(k, std::move(est));
    }
    return out;
}

inline IntegratedEstimate run_faten(const ObservedPanel& panel, const PipelineConfig& cfg) {
    const PreparedPanel pp = prepare_panel(panel, cfg);
    return std::move(run_factor_estimators(pp, {EstimatorKind::Faten}, cfg).at(EstimatorKind::Faten));
}

inline IntegratedEstimate run_fatec(const ObservedPanel& panel, const PipelineConfig& cfg) {
    const PreparedPanel pp = prepare_panel(panel, cfg);
    return std::move(run_factor_estimators(pp, {EstimatorKind::Fatec}, cfg).at(EstimatorKind::Fatec));
}

/// (pi/2) sum_{i>=2} |r_{i-1}| |r_i|
inline double bipower_variation(const Eigen::Ref<const Vec>& returns) {
    double acc = 0.0;
    for (Index i = 1; i < returns.size(); ++i) acc += std::abs(returns(i - 1)) * std::abs(returns(i));
    return 0.5 * std::numbers::pi * acc;
}

/// LASSO on raw returns truncated at 3 n^{-0.47} sqrt(BV); eta by BIC over cfg.naive_eta_grid.
inline IntegratedEstimate run_naive_lasso(const ObservedPanel& panel, const PipelineConfig& cfg) {
    panel.validate();
    const Index n = panel.n(), p = panel.p();
    require(n >= 2, ErrorKind::InsufficientData, "naive LASSO needs n >= 2");
    require(cfg.naive_eta_grid.size() > 0, ErrorKind::InvalidParameter, "empty eta grid");
    const double rate = 3.0 * std::pow(static_cast<double>(n), -0.47);
    Vec ry = panel.y.tail(n) - panel.y.head(n);
    Mat rx = panel.x.bottomRows(n) - panel.x.topRows(n);
    const double wy = rate * std::sqrt(bipower_variation(ry));
    ry = (ry.array().abs() > wy).select(0.0, ry);
    for (Index j = 0; j < p; ++j) {
        const double vj = rate * std::sqrt(bipower_variation(rx.col(j)));
        auto col = rx.col(j).array();
        col = (col.abs() > vj).select(0.0, col);
    }
    Mat gram = Mat::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(rx.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();
    const Vec xty = rx.transpose() * ry;
    const double yty = ry.squaredNorm();

    // Largest eta first so each fit warm-starts the next.
    const Vec& grid = cfg.naive_eta_grid;
    std::vector<Index> order(grid.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return grid(a) > grid(b); });
    const double m = static_cast<double>(n);
    Vec beta = Vec::Zero(p), best;
    double best_bic = std::numeric_limits<double>::infinity(), best_eta = 0.0;
    for (Index g : order) {
        beta = lasso_coordinate_descent(gram, xty, grid(g), 10000, 1e-10, &beta);
        const double rss = std::max(yty - 2.0 * xty.dot(beta) + beta.dot(gram * beta), 1e-300);
        const double df = static_cast<double>(active_set(beta).size());
        const double bic = m * std::log(rss / m) + df * std::log(m);
        if (bic < best_bic) {  // descending order: ties keep the larger eta
            best_bic = bic;
            best = beta;
            best_eta = grid(g);
        }
    }
    IntegratedEstimate est;
    est.estimator = EstimatorKind::NaiveLasso;
    est.n = n;
    est.p = p;
    est.eta = best_eta;
    est.c_eta = best_eta;
    est.I_beta_plain = best;
    est.I_beta_hat = best;
    est.I_beta_tilde = best;
    return est;
}

/// All requested estimators on one panel.
inline std::map<EstimatorKind, IntegratedEstimate> run_estimators(const ObservedPanel& panel,
                                                                 const std::vector<EstimatorKind>& kinds,
                                                                 const PipelineConfig& cfg) {
    std::map<EstimatorKind, IntegratedEstimate> out;
    std::vector<EstimatorKind> factor_kinds;
    for (EstimatorKind k : kinds) {
        if (k == EstimatorKind::NaiveLasso)
            out.emplace(k, run_naive_lasso(panel, cfg));
        else
            factor_kinds.push_back(k);
    }
    if (!factor_kinds.empty()) {
        const PreparedPanel pp = prepare_panel(panel, cfg);
        for (auto& [k, est] : run_factor_estimators(pp, factor_kinds, cfg)) out.emplace(k, std::move(est));
    }
    return out;
}

/// Threshold-scale hook: picks c_h from `grid` minimizing the prediction error of the
/// thresholded estimate on held-out smoothed data.
inline double select_threshold_constant(const Eigen::Ref<const Vec>& I_beta_hat, Index n,
                                        const Eigen::Ref<const Vec>& grid, const Eigen::Ref<const Vec>& y_holdout,
                                        const Eigen::Ref<const Mat>& x_holdout, ThresholdKind kind) {
    require(grid.size() > 0, ErrorKind::InvalidParameter, "empty c_h grid");
    double best = std::numeric_limits<double>::infinity(), best_c = grid(0);
    for (Index g = 0; g < grid.size(); ++g) {
        const Vec b = threshold(I_beta_hat, threshold_level(grid(g), n), kind);
        const double mspe = smoothed_mse(y_holdout, x_holdout, b);
        if (mspe < best) {
            best = mspe;
            best_c = grid(g);
        }
    }
    return best_c;
}

}  // namespace faten
