#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace faten {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Plain loop; Eigen's vectorized abs-sum is miscompiled by GCC 11 at -O3 in some inlining contexts.
inline double l1_norm(const Eigen::Ref<const Vec>& v) {
    double s = 0.0;
    for (Index j = 0; j < v.size(); ++j) s += std::abs(v(j));
    return s;
}

enum class ErrorKind {
    InvalidParameter,
    InvalidKernel,
    InsufficientData,
    OutOfRange,
    ShapeMismatch,
    NumericDegeneracy,
    SolverDivergence,
    Infeasible,
    IterationLimit,
    Io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidKernel: return "invalid-kernel";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::NumericDegeneracy: return "numeric-degeneracy";
    case ErrorKind::SolverDivergence: return "solver-divergence";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::IterationLimit: return "iteration-limit";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

/// Library error. `kind()` lets callers branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) throw Error(kind, what);
}

inline bool all_finite(const Eigen::Ref<const Mat>& m) { return m.allFinite(); }

inline double soft_threshold(double x, double level) {
    if (x > level) return x - level;
    if (x < -level) return x + level;
    return 0.0;
}

/// Sample standard deviation (mean removed, n-1 denominator). Zero for fewer than two points.
inline double sample_sd(const Eigen::Ref<const Vec>& x) {
    const Index n = x.size();
    if (n < 2) return 0.0;
    const double mean = x.mean();
    return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(n - 1));
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
inline Vec log_grid(double lo, double hi, int count) {
    require(lo > 0.0 && hi >= lo && count >= 1, ErrorKind::InvalidParameter, "log_grid bounds");
    Vec out(count);
    if (count == 1) {
        out(0) = lo;
        return out;
    }
    const double a = std::log10(lo), b = std::log10(hi);
    for (int i = 0; i < count; ++i) out(i) = std::pow(10.0, a + (b - a) * i / (count - 1));
    return out;
}

}  // namespace faten
