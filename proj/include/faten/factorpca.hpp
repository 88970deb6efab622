#pragma once

// Least-squares PCA of a smoothed covariate block under p^{-1} B^T B = I_r
// with F^T F diagonal, and rank selection by in-sample smoothed MSE.

#include "faten/core.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace faten {

struct FactorDecomposition {
    int r = 0;
    Mat B;  // p x r loadings, p^{-1} B^T B = I
    Mat F;  // rows x r smoothed factors
    Mat U;  // rows x p idiosyncratic block, X - F B^T
    Mat G;  // rows x (p + r), [U, F]
    Vec eigenvalues;  // top-r eigenvalues of X^T X (descending)
    Vec spectrum;     // all eigenvalues of the Gram actually decomposed (descending)
    bool ties = false;        // repeated eigenvalues among the top r+1
    bool degenerate = false;  // all-zero block; rank forced to 0
};

namespace detail {

/// Top-r unit eigenvectors of X^T X (columns) with eigenvalues, via the smaller Gram.
inline void top_eigvecs(const Mat& x, int r, Mat& vecs, Vec& vals, Vec& spectrum) {
    const Index rows = x.rows(), p = x.cols();
    if (p <= rows) {
        Mat gram = Mat::Zero(p, p);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
        gram = gram.selfadjointView<Eigen::Lower>();
        Eigen::SelfAdjointEigenSolver<Mat> es(gram);
        require(es.info() == Eigen::Success, ErrorKind::NumericDegeneracy, "eigen solver did not converge");
        spectrum = es.eigenvalues().reverse();
        vecs = es.eigenvectors().rightCols(r).rowwise().reverse();
        vals = spectrum.head(r);
    } else {
        Mat gram = Mat::Zero(rows, rows);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
        gram = gram.selfadjointView<Eigen::Lower>();
        Eigen::SelfAdjointEigenSolver<Mat> es(gram);
        require(es.info() == Eigen::Success, ErrorKind::NumericDegeneracy, "eigen solver did not converge");
        spectrum = es.eigenvalues().reverse();
        const Mat w = es.eigenvectors().rightCols(r).rowwise().reverse();
        vals = spectrum.head(r);
        vecs.resize(p, r);
        for (int k = 0; k < r; ++k) {
            require(vals(k) > 0.0, ErrorKind::NumericDegeneracy, "rank exceeds the block's numerical rank");
            vecs.col(k) = x.transpose() * w.col(k) / std::sqrt(vals(k));
            vecs.col(k).normalize();
        }
    }
}

}  // namespace detail

/// B = sqrt(p) * top-r eigenvectors of X^T X, F = X B / p, U = X - F B^T.
/// Each loading column is signed so its largest-magnitude entry is positive.
inline FactorDecomposition pca_decompose(const Mat& x, int r) {
    const Index rows = x.rows(), p = x.cols();
    require(r >= 0 && r <= std::min(p, rows), ErrorKind::InvalidParameter,
            "rank " + std::to_string(r) + " exceeds min(p, rows)");
    require(x.allFinite(), ErrorKind::InvalidParameter, "block holds non-finite entries");

    FactorDecomposition out;
    if (x.squaredNorm() == 0.0) {
        out.degenerate = r > 0;
        r = 0;
    }
    out.r = r;
    if (r == 0) {
        out.B.resize(p, 0);
        out.F.resize(rows, 0);
        out.U = x;
        out.G = x;
        out.eigenvalues.resize(0);
        return out;
    }

    Mat vecs;
    detail::top_eigvecs(x, r, vecs, out.eigenvalues, out.spectrum);
    for (int k = 0; k < r; ++k) {
        Index arg = 0;
        vecs.col(k).cwiseAbs().maxCoeff(&arg);
        if (vecs(arg, k) < 0.0) vecs.col(k) = -vecs.col(k);
    }
    const double sp = std::sqrt(static_cast<double>(p));
    out.B = sp * vecs;
    out.F = x * out.B / static_cast<double>(p);
    out.U = x - out.F * out.B.transpose();
    out.G.resize(rows, p + r);
    out.G << out.U, out.F;

    const Index top = std::min<Index>(r + 1, out.spectrum.size());
    for (Index k = 0; k + 1 < top; ++k) {
        const double a = out.spectrum(k), b = out.spectrum(k + 1);
        if (std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1e-300)) out.ties = true;
    }
    return out;
}

struct RankSelection {
    int selected = 0;
    Vec mse;                     // per rank, +inf where the pipeline failed
    std::vector<int> failed;     // ranks excluded
    std::vector<std::string> warnings;
};

/// In-sample MSE of the smoothed truncated regression y - x beta.
inline double smoothed_mse(const Eigen::Ref<const Vec>& y, const Eigen::Ref<const Mat>& x,
                           const Eigen::Ref<const Vec>& beta) {
    require(x.rows() == y.size() && x.cols() == beta.size(), ErrorKind::ShapeMismatch, "smoothed_mse shapes");
    return (y - x * beta).squaredNorm() / static_cast<double>(y.size());
}

/// argmin_r MSE(r) over r = 0..r_max; ties go to the smaller rank.
/// `estimate(r)` returns the integrated estimate at rank r and may throw.
inline RankSelection select_rank(const Eigen::Ref<const Vec>& y_trunc, const Eigen::Ref<const Mat>& x_trunc,
                                 const std::function<Vec(int)>& estimate, int r_max) {
    require(r_max >= 0, ErrorKind::InvalidParameter, "r_max must be >= 0");
    RankSelection sel;
    sel.mse = Vec::Constant(r_max + 1, std::numeric_limits<double>::infinity());
    bool any = false;
    std::string last_error;
    for (int r = 0; r <= r_max; ++r) {
        try {
            const Vec beta = estimate(r);
            sel.mse(r) = smoothed_mse(y_trunc, x_trunc, beta);
            if (!std::isfinite(sel.mse(r))) throw Error(ErrorKind::NumericDegeneracy, "non-finite MSE");
            if (!any || sel.mse(r) < sel.mse(sel.selected)) sel.selected = r;
            any = true;
        } catch (const Error& e) {
            sel.failed.push_back(r);
            sel.mse(r) = std::numeric_limits<double>::infinity();
            sel.warnings.push_back("rank " + std::to_string(r) + " excluded: " + e.what());
            last_error = e.what();
        }
    }
    if (!any) throw Error(ErrorKind::NumericDegeneracy, "every rank failed; last: " + last_error);
    return sel;
}

}  // namespace faten
