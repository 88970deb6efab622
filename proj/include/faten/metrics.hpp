#pragma once

#include "faten/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace faten {

struct ErrorNorms {
    double max = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
};

inline ErrorNorms error_norms(const Eigen::Ref<const Vec>& est, const Eigen::Ref<const Vec>& truth) {
    require(est.size() == truth.size(), ErrorKind::ShapeMismatch, "estimate and truth lengths differ");
    // Scalar loop: GCC 11 at -O3 miscompiles Eigen's vectorized abs-sum reduction here.
    ErrorNorms out;
    double sq = 0.0;
    for (Index j = 0; j < est.size(); ++j) {
        const double d = std::abs(est(j) - truth(j));
        out.max = std::max(out.max, d);
        out.l1 += d;
        sq += d * d;
    }
    out.l2 = std::sqrt(sq);
    return out;
}

/// Rates are NaN when their denominator is empty.
struct SupportRates {
    double fp = std::numeric_limits<double>::quiet_NaN();
    double fn = std::numeric_limits<double>::quiet_NaN();

    bool fp_defined() const { return !std::isnan(fp); }
    bool fn_defined() const { return !std::isnan(fn); }
};

inline SupportRates support_rates(const Eigen::Ref<const Vec>& est, const Eigen::Ref<const Vec>& truth,
                                  double zero_tol = 1e-12) {
    require(est.size() == truth.size(), ErrorKind::ShapeMismatch, "estimate and truth lengths differ");
    Index zeros = 0, nonzeros = 0, fp = 0, fn = 0;
    for (Index j = 0; j < est.size(); ++j) {
        const bool e = std::abs(est(j)) > zero_tol;
        if (std::abs(truth(j)) > zero_tol) {
            ++nonzeros;
            if (!e) ++fn;
        } else {
            ++zeros;
            if (e) ++fp;
        }
    }
    SupportRates out;
    if (zeros > 0) out.fp = static_cast<double>(fp) / static_cast<double>(zeros);
    if (nonzeros > 0) out.fn = static_cast<double>(fn) / static_cast<double>(nonzeros);
    return out;
}

struct ErrorReport {
    double max_err = 0.0;
    double l1_err = 0.0;
    double l2_err = 0.0;
    double fp = std::numeric_limits<double>::quiet_NaN();
    double fn = std::numeric_limits<double>::quiet_NaN();

    /// max <= l2 <= l1 and l2 <= sqrt(p) max, rates in [0, 1].
    bool consistent(Index p, double tol = 1e-12) const {
        const double s = tol * std::max(1.0, l1_err);
        bool ok = max_err >= 0.0 && max_err <= l2_err + s && l2_err <= l1_err + s &&
                  l2_err <= std::sqrt(static_cast<double>(p)) * max_err + s;
        for (double r : {fp, fn})
            if (!std::isnan(r)) ok = ok && r >= 0.0 && r <= 1.0;
        return ok;
    }
};

inline ErrorReport evaluate(const Eigen::Ref<const Vec>& est, const Eigen::Ref<const Vec>& truth,
                            double zero_tol = 1e-12) {
    const ErrorNorms norms = error_norms(est, truth);
    const SupportRates rates = support_rates(est, truth, zero_tol);
    return {norms.max, norms.l1, norms.l2, rates.fp, rates.fn};
}

struct FieldSummary {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double median = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;
};

/// NaN entries (undefined rates) are skipped.
inline FieldSummary summarize(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }),
                 values.end());
    FieldSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    s.median = m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
    return s;
}

struct AggregateReport {
    FieldSummary max_err, l1_err, l2_err, fp, fn;
    std::size_t reps = 0;
};

inline AggregateReport aggregate(std::span<const ErrorReport> reports) {
    require(!reports.empty(), ErrorKind::InsufficientData, "nothing to aggregate");
    auto field = [&](double ErrorReport::*member) {
        std::vector<double> v;
        v.reserve(reports.size());
        for (const ErrorReport& r : reports) v.push_back(r.*member);
        return summarize(std::move(v));
    };
    AggregateReport out;
    out.max_err = field(&ErrorReport::max_err);
    out.l1_err = field(&ErrorReport::l1_err);
    out.l2_err = field(&ErrorReport::l2_err);
    out.fp = field(&ErrorReport::fp);
    out.fn = field(&ErrorReport::fn);
    out.reps = reports.size();
    return out;
}

}  // namespace faten
