#pragma once

// Observed panels, pre-averaging, jump truncation and the covariate noise
// covariance estimator.

#include "faten/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace faten {

/// Synchronized noisy log prices on the grid t_i = i/n, i = 0..n.
struct ObservedPanel {
    Vec y;  // n+1
    Mat x;  // (n+1) x p

    Index n() const { return y.size() - 1; }
    Index p() const { return x.cols(); }
    double dt() const { return 1.0 / static_cast<double>(n()); }

    void validate() const {
        require(y.size() >= 2, ErrorKind::InsufficientData, "panel needs at least two observations");
        require(x.rows() == y.size(), ErrorKind::ShapeMismatch, "panel x rows != y length");
        require(y.allFinite() && x.allFinite(), ErrorKind::InvalidParameter, "panel holds non-finite entries");
    }
};

using KernelFn = std::function<double(double)>;

/// g(x) = min(x, 1 - x).
inline double triangular_kernel(double x) { return std::min(x, 1.0 - x); }

struct KernelSpec {
    KernelFn g;
    int k1 = 0;
    double phi = 0.0;   // (1/k1) sum_l g(l/k1)^2
    double zeta = 0.0;  // sum_l (g(l/k1) - g((l+1)/k1))^2
    Vec weights;        // g(l/k1), l = 0..k1-1
};

inline KernelSpec kernel_constants(KernelFn g, int k1) {
    require(k1 >= 2, ErrorKind::InvalidParameter, "k1 must be >= 2");
    require(static_cast<bool>(g), ErrorKind::InvalidKernel, "empty kernel");
    const double g0 = g(0.0), g1 = g(1.0);
    require(std::isfinite(g0) && std::isfinite(g1) && std::abs(g0) <= 1e-12 && std::abs(g1) <= 1e-12,
            ErrorKind::InvalidKernel, "kernel must vanish at 0 and 1");
    KernelSpec spec;
    spec.g = std::move(g);
    spec.k1 = k1;
    spec.weights.resize(k1);
    double sq = 0.0, diff = 0.0;
    for (int l = 0; l < k1; ++l) {
        const double a = spec.g(static_cast<double>(l) / k1);
        const double b = spec.g(static_cast<double>(l + 1) / k1);
        require(std::isfinite(a), ErrorKind::InvalidKernel, "kernel not finite on [0,1]");
        spec.weights(l) = a;
        sq += a * a;
        diff += (a - b) * (a - b);
    }
    spec.phi = sq / k1;
    spec.zeta = diff;
    require(spec.phi > 0.0, ErrorKind::InvalidKernel, "kernel has zero energy");
    return spec;
}

/// Smoothing window, round(0.5 sqrt(n)) floored at 2.
inline int default_k1(Index n) {
    return std::max(2, static_cast<int>(std::lround(0.5 * std::sqrt(static_cast<double>(n)))));
}

/// Local regression span, round(n^{3/4}) clamped into (k1, n].
inline int default_k2(Index n, int k1) {
    int k2 = static_cast<int>(std::lround(std::pow(static_cast<double>(n), 0.75)));
    k2 = std::min<int>(k2, static_cast<int>(n));
    return std::max(k2, k1 + 1);
}

/// out_i = sum_{l<k1} g(l/k1) (s[i+l+1] - s[i+l]), i = 0..n-k1.
inline Vec smooth_series(const Eigen::Ref<const Vec>& series, const KernelSpec& kernel) {
    const Index n = series.size() - 1;
    const int k1 = kernel.k1;
    require(n >= k1, ErrorKind::InsufficientData, "series shorter than the smoothing window");
    const Vec inc = series.tail(n) - series.head(n);
    const Index m = n - k1 + 1;
    Vec out = Vec::Zero(m);
    for (int l = 0; l < k1; ++l) {
        const double w = kernel.weights(l);
        if (w != 0.0) out.noalias() += w * inc.segment(l, m);
    }
    return out;
}

/// Column-wise smooth_series.
inline Mat smooth_matrix(const Eigen::Ref<const Mat>& series, const KernelSpec& kernel) {
    const Index n = series.rows() - 1;
    const int k1 = kernel.k1;
    require(n >= k1, ErrorKind::InsufficientData, "series shorter than the smoothing window");
    const Mat inc = series.bottomRows(n) - series.topRows(n);
    const Index m = n - k1 + 1;
    Mat out = Mat::Zero(m, series.cols());
    for (int l = 0; l < k1; ++l) {
        const double w = kernel.weights(l);
        if (w != 0.0) out.noalias() += w * inc.middleRows(l, m);
    }
    return out;
}

/// Smoothed increments of a whole panel: y is (n-k1+1), x is (n-k1+1) x p.
struct SmoothedSeries {
    Vec y;
    Mat x;
};

inline SmoothedSeries smooth_panel(const ObservedPanel& panel, const KernelSpec& kernel) {
    return {smooth_series(panel.y, kernel), smooth_matrix(panel.x, kernel)};
}

enum class ThresholdMode { Practical, Theoretical };

/// Constants for the rate-based thresholds
///   w = c_w s_p sqrt(log p) n^{-1/4},  v_j = c_v sqrt(log p) n^{-1/4},  v2_j = c_v2 sqrt(log p).
struct TheoreticalConstants {
    double c_w = 1.0;
    double c_v = 1.0;
    double c_v2 = 1.0;
    int s_p = 1;

    bool operator==(const TheoreticalConstants&) const = default;
};

struct Thresholds {
    double w = 0.0;  // dependent smoothed increments
    Vec v;           // covariate smoothed increments
    Vec v2;          // covariate raw returns (noise covariance)
    bool zero_variance = false;
};

/// Practical mode uses three sample standard deviations of the full series.
inline Thresholds truncation_thresholds(const ObservedPanel& panel, const SmoothedSeries& smoothed,
                                        ThresholdMode mode, const TheoreticalConstants& tc = {}) {
    require(smoothed.y.size() > 0, ErrorKind::InsufficientData, "empty smoothed series");
    const Index p = panel.p();
    require(smoothed.x.cols() == p, ErrorKind::ShapeMismatch, "smoothed x width != p");
    Thresholds th;
    th.v.resize(p);
    th.v2.resize(p);
    if (mode == ThresholdMode::Practical) {
        th.w = 3.0 * sample_sd(smoothed.y);
        const Index n = panel.n();
        for (Index j = 0; j < p; ++j) {
            th.v(j) = 3.0 * sample_sd(smoothed.x.col(j));
            const Vec ret = panel.x.col(j).tail(n) - panel.x.col(j).head(n);
            th.v2(j) = 3.0 * sample_sd(ret);
        }
        th.zero_variance = th.w == 0.0 || (th.v.array() == 0.0).any() || (th.v2.array() == 0.0).any();
    } else {
        const double lp = std::sqrt(std::log(static_cast<double>(std::max<Index>(p, 2))));
        const double rate = std::pow(static_cast<double>(panel.n()), -0.25);
        th.w = tc.c_w * tc.s_p * lp * rate;
        th.v.setConstant(tc.c_v * lp * rate);
        th.v2.setConstant(tc.c_v2 * lp);
    }
    return th;
}

struct TruncationStats {
    Index y_flagged = 0;
    Index x_flagged = 0;
};

/// Zero every smoothed entry whose magnitude exceeds its threshold.
inline SmoothedSeries truncate(const SmoothedSeries& s, const Thresholds& th, TruncationStats* stats = nullptr) {
    SmoothedSeries out = s;
    TruncationStats local;
    for (Index i = 0; i < out.y.size(); ++i) {
        if (std::abs(out.y(i)) > th.w) {
            out.y(i) = 0.0;
            ++local.y_flagged;
        }
    }
    for (Index j = 0; j < out.x.cols(); ++j) {
        for (Index i = 0; i < out.x.rows(); ++i) {
            if (std::abs(out.x(i, j)) > th.v(j)) {
                out.x(i, j) = 0.0;
                ++local.x_flagged;
            }
        }
    }
    if (stats) *stats = local;
    return out;
}

/// Truncated smoothed increments at offsets i..i+k2-k1.
struct SmoothedBlock {
    Index start = 0;
    Vec y;
    Mat x;
    Eigen::Array<bool, Eigen::Dynamic, 1> y_flag;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> x_flag;

    Index rows() const { return y.size(); }
};

/// Block from an untruncated smoothed series of the whole panel.
inline SmoothedBlock build_block(const SmoothedSeries& smoothed, int k1, Index k2, Index i, const Thresholds& th) {
    const Index n = smoothed.y.size() + k1 - 1;
    require(k1 < k2, ErrorKind::InvalidParameter, "k1 must be smaller than k2");
    require(i >= 0 && i + k2 <= n, ErrorKind::OutOfRange,
            "block [" + std::to_string(i) + ", " + std::to_string(i + k2) + "] overruns n = " + std::to_string(n));
    const Index rows = k2 - k1 + 1;
    SmoothedBlock blk;
    blk.start = i;
    blk.y = smoothed.y.segment(i, rows);
    blk.x = smoothed.x.middleRows(i, rows);
    blk.y_flag = blk.y.array().abs() > th.w;
    blk.x_flag.resize(rows, blk.x.cols());
    for (Index j = 0; j < blk.x.cols(); ++j) blk.x_flag.col(j) = blk.x.col(j).array().abs() > th.v(j);
    blk.y = blk.y_flag.select(0.0, blk.y);
    blk.x = blk.x_flag.select(0.0, blk.x);
    return blk;
}

/// Block smoothed locally from the panel window [i, i+k2].
inline SmoothedBlock build_block(const ObservedPanel& panel, const KernelSpec& kernel, Index k2, Index i,
                                 const Thresholds& th) {
    const Index n = panel.n();
    require(kernel.k1 < k2, ErrorKind::InvalidParameter, "k1 must be smaller than k2");
    require(i >= 0 && i + k2 <= n, ErrorKind::OutOfRange,
            "block [" + std::to_string(i) + ", " + std::to_string(i + k2) + "] overruns n = " + std::to_string(n));
    SmoothedSeries local{smooth_series(panel.y.segment(i, k2 + 1), kernel),
                         smooth_matrix(panel.x.middleRows(i, k2 + 1), kernel)};
    SmoothedBlock blk = build_block(local, kernel.k1, k2, 0, th);
    blk.start = i;
    return blk;
}

struct NoiseCov {
    Mat V;   // p x p
    Vec v2;  // thresholds used
};

/// V = (1/2n) sum_i r_i r_i^T over raw returns, entries beyond v2_j zeroed.
inline NoiseCov noise_covariance(const ObservedPanel& panel, const Eigen::Ref<const Vec>& v2) {
    const Index n = panel.n(), p = panel.p();
    require(n >= 1, ErrorKind::InsufficientData, "noise covariance needs n >= 1");
    require(v2.size() == p, ErrorKind::ShapeMismatch, "v2 length != p");
    Mat r = panel.x.bottomRows(n) - panel.x.topRows(n);
    for (Index j = 0; j < p; ++j) {
        auto col = r.col(j).array();
        col = (col.abs() > v2(j)).select(0.0, col);
    }
    NoiseCov out;
    out.V = Mat::Zero(p, p);
    out.V.selfadjointView<Eigen::Lower>().rankUpdate(r.transpose(), 1.0 / (2.0 * static_cast<double>(n)));
    out.V = out.V.selfadjointView<Eigen::Lower>();
    out.v2 = v2;
    return out;
}

}  // namespace faten
