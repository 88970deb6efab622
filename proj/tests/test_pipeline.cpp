#include "faten/metrics.hpp"
#include "faten/pipeline.hpp"
#include "faten/simgen.hpp"

#include <gtest/gtest.h>

using namespace faten;

namespace {

Mat gaussian(Index rows, Index cols, std::uint64_t seed) {
    NormalStream g(seed, 0);
    Mat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = g();
    return m;
}

SimConfig small_config(int p, int r, int s_p, int n_all, std::uint64_t seed) {
    SimConfig cfg = SimConfig::for_dimension(p, r);
    cfg.s_p = s_p;
    cfg.n_all = n_all;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST(Debias, ZeroPrecisionLeavesEstimate) {
    const Mat u = gaussian(20, 4, 1), x = gaussian(20, 4, 2);
    const Vec y = gaussian(20, 1, 3).col(0);
    const Vec b = gaussian(4, 1, 4).col(0);
    const Vec out = debias_block(b, Mat::Zero(4, 4), u, x, y, Mat::Identity(4, 4), 0.08, 0.05, 1170, 17, 200);
    EXPECT_EQ(out, b);
}

TEST(Debias, ZeroDataZeroEstimate) {
    const Vec out = debias_block(Vec::Zero(3), Mat::Identity(3, 3), Mat::Zero(10, 3), Mat::Zero(10, 3),
                                 Vec::Zero(10), Mat::Identity(3, 3), 0.08, 0.05, 1170, 17, 200);
    EXPECT_TRUE(out.isZero(0.0));
}

TEST(Debias, ArithmeticOracle) {
    const Index rows = 15, p = 3;
    const Mat u = gaussian(rows, p, 5), x = gaussian(rows, p, 6), om = gaussian(p, p, 7);
    const Mat a = gaussian(p, p, 8);
    const Mat v = a * a.transpose();
    const Vec y = gaussian(rows, 1, 9).col(0), b = gaussian(p, 1, 10).col(0);
    const double phi = 0.09, zeta = 0.2, n = 500, k1 = 5, k2 = 40;
    Vec expected = b;
    for (Index j = 0; j < p; ++j) {
        double acc = 0.0;
        for (Index i = 0; i < p; ++i) {
            double score = 0.0;
            for (Index t = 0; t < rows; ++t) {
                double xb = 0.0;
                for (Index k = 0; k < p; ++k) xb += x(t, k) * b(k);
                score += u(t, i) * (y(t) - xb);
            }
            double vb = 0.0;
            for (Index k = 0; k < p; ++k) vb += v(i, k) * b(k);
            score += k2 * zeta * vb;
            acc += om(i, j) * score;
        }
        expected(j) += n / (phi * k1 * k2) * acc;
    }
    const Vec out = debias_block(b, om, u, x, y, v, phi, zeta, n, k1, k2);
    EXPECT_LE((out - expected).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, expected.cwiseAbs().maxCoeff()));
}

TEST(AdjustedGram, Oracle) {
    const Mat u = gaussian(12, 3, 11);
    const Mat v = Mat::Identity(3, 3) * 0.5;
    const Mat s = adjusted_idiosyncratic_gram(u, v, 100, 4, 20, 0.1, 0.3);
    const Mat expected = 100.0 / (0.1 * 4 * 20) * u.transpose() * u - 100.0 * 0.3 / (0.1 * 4) * v;
    EXPECT_LE((s - expected).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(s, s.transpose());
}

TEST(Integrate, Examples) {
    Vec a(2), b(2);
    a << 1.0, 2.0;
    b << 3.0, 4.0;
    const Vec out = integrate({a, b}, 10, 40);
    EXPECT_DOUBLE_EQ(out(0), 1.0);
    EXPECT_DOUBLE_EQ(out(1), 1.5);
    EXPECT_THROW(integrate({}, 10, 40), Error);
    // A constant path over every block of a sample divisible by k2 integrates to the constant.
    std::vector<Vec> path(5, Vec::Constant(3, 0.7));
    EXPECT_LE((integrate(path, 8, 40) - Vec::Constant(3, 0.7)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Threshold, HardSoftIdentity) {
    Vec v(5);
    v << 0.3, -0.05, 0.1, -0.5, 0.0;
    const Vec hard = threshold(v, 0.1, ThresholdKind::Hard);
    const Vec soft = threshold(v, 0.1, ThresholdKind::Soft);
    Vec eh(5), es(5);
    eh << 0.3, 0.0, 0.1, -0.5, 0.0;
    es << 0.2, 0.0, 0.0, -0.4, 0.0;
    EXPECT_LE((hard - eh).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((soft - es).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(threshold(v, 0.0, ThresholdKind::Hard), v);
    EXPECT_THROW(threshold(v, -1.0, ThresholdKind::Hard), Error);
}

TEST(Threshold, Invariants) {
    const Vec v = gaussian(200, 1, 12).col(0);
    const double h = 0.7;
    for (ThresholdKind k : {ThresholdKind::Hard, ThresholdKind::Soft}) {
        const Vec t = threshold(v, h, k);
        for (Index j = 0; j < v.size(); ++j) {
            EXPECT_TRUE(t(j) == 0.0 || (t(j) > 0) == (v(j) > 0));
            if (k == ThresholdKind::Soft) {
                EXPECT_LE(std::abs(t(j) - v(j)), h + 1e-15);
            }
            if (std::abs(v(j)) < h) {
                EXPECT_EQ(t(j), 0.0);
            }
        }
    }
    EXPECT_NEAR(threshold_level(1.0, 7800), std::pow(7800.0, -0.25), 1e-15);
}

TEST(Estimator, NamesRoundTrip) {
    for (EstimatorKind k : {EstimatorKind::Faten, EstimatorKind::Fatec, EstimatorKind::NaiveLasso})
        EXPECT_EQ(parse_estimator(to_string(k)), k);
    EXPECT_EQ(parse_estimator("lasso"), EstimatorKind::NaiveLasso);
    EXPECT_THROW(parse_estimator("ridge"), Error);
}

TEST(Naive, BipowerVariation) {
    Vec r(4);
    r << 1.0, -2.0, 0.5, 3.0;
    EXPECT_NEAR(bipower_variation(r), 0.5 * std::numbers::pi * (2.0 + 1.0 + 1.5), 1e-14);
}

TEST(Naive, ZeroReturnsGiveZero) {
    ObservedPanel panel;
    panel.y = Vec::Zero(101);
    panel.x = Mat::Zero(101, 4);
    const IntegratedEstimate est = run_naive_lasso(panel, PipelineConfig{});
    EXPECT_TRUE(est.I_beta_tilde.isZero(0.0));
    EXPECT_EQ(est.I_beta_tilde.size(), 4);
    EXPECT_EQ(est.estimator, EstimatorKind::NaiveLasso);
}

TEST(Naive, RecoversCleanSignal) {
    // y increments = 2 x1 increments + small noise; no jumps, so nothing is truncated away.
    const Index n = 2000;
    const Mat dx = gaussian(n, 3, 13) * 0.01;
    const Vec dz = gaussian(n, 1, 14).col(0) * 0.001;
    ObservedPanel panel;
    panel.x = Mat::Zero(n + 1, 3);
    panel.y = Vec::Zero(n + 1);
    for (Index i = 0; i < n; ++i) {
        panel.x.row(i + 1) = panel.x.row(i) + dx.row(i);
        panel.y(i + 1) = panel.y(i) + 2.0 * dx(i, 0) + dz(i);
    }
    PipelineConfig cfg;
    cfg.naive_eta_grid = log_grid(1e-8, 1e-2, 7);
    const IntegratedEstimate est = run_naive_lasso(panel, cfg);
    EXPECT_NEAR(est.I_beta_tilde(0), 2.0, 0.05);
    EXPECT_LT(std::abs(est.I_beta_tilde(1)), 0.05);
}

TEST(Prepare, BlockLayout) {
    SyntheticPanel sp = simulate_panel(small_config(8, 1, 2, 1170, 3));
    const PreparedPanel pp = prepare_panel(sp.observe(1170), PipelineConfig{});
    EXPECT_EQ(pp.k1, default_k1(1170));
    EXPECT_EQ(pp.k2, default_k2(1170, pp.k1));
    EXPECT_EQ(static_cast<Index>(pp.blocks.size()), 1170 / pp.k2);
    for (std::size_t b = 0; b < pp.blocks.size(); ++b) {
        EXPECT_EQ(pp.blocks[b].start, static_cast<Index>(b) * pp.k2);
        EXPECT_EQ(pp.blocks[b].y.size(), pp.block_rows());
    }
    EXPECT_EQ(pp.smoothed.y.size(), 1170 - pp.k1 + 1);
    PipelineConfig bad;
    bad.k1 = 50;
    bad.k2 = 40;
    EXPECT_THROW(prepare_panel(sp.observe(1170), bad), Error);
}

TEST(Pipeline, Deterministic) {
    SyntheticPanel sp = simulate_panel(small_config(10, 2, 2, 1170, 4));
    const ObservedPanel panel = sp.observe(1170);
    const std::vector<EstimatorKind> kinds{EstimatorKind::Faten, EstimatorKind::Fatec, EstimatorKind::NaiveLasso};
    const auto a = run_estimators(panel, kinds, PipelineConfig{});
    const auto b = run_estimators(panel, kinds, PipelineConfig{});
    for (EstimatorKind k : kinds) {
        EXPECT_EQ(a.at(k).I_beta_tilde, b.at(k).I_beta_tilde);
        EXPECT_EQ(a.at(k).I_beta_hat, b.at(k).I_beta_hat);
        EXPECT_EQ(a.at(k).r_selected, b.at(k).r_selected);
    }
}

TEST(Pipeline, EstimatorsAgreeWithoutNoiseCorrection) {
    SyntheticPanel sp = simulate_panel(small_config(10, 1, 2, 1170, 5));
    PipelineConfig cfg;
    cfg.rank = 1;
    PreparedPanel pp = prepare_panel(sp.observe(1170), cfg);
    pp.kernel.zeta = 0.0;
    const RankStage st = prepare_rank(pp, 1, cfg);
    const IntegratedEstimate a = fit_at_rank(pp, st, EstimatorKind::Faten, cfg);
    const IntegratedEstimate c = fit_at_rank(pp, st, EstimatorKind::Fatec, cfg);
    EXPECT_EQ(a.I_beta_hat, c.I_beta_hat);
    EXPECT_EQ(a.c_eta, c.c_eta);
}

TEST(Pipeline, PinnedRankAndShapes) {
    SyntheticPanel sp = simulate_panel(small_config(10, 2, 2, 1170, 6));
    PipelineConfig cfg;
    cfg.rank = 2;
    const IntegratedEstimate est = run_faten(sp.observe(1170), cfg);
    EXPECT_EQ(est.r_selected, 2);
    EXPECT_EQ(est.I_beta_tilde.size(), 10);
    EXPECT_EQ(est.rank_mse.size(), 0);
    EXPECT_EQ(est.beta_hat_path.size(), est.blocks.size());
    EXPECT_NEAR(est.h_n, std::pow(1170.0, -0.25), 1e-15);
    cfg.rank = 99;
    EXPECT_THROW(run_faten(sp.observe(1170), cfg), Error);
}

TEST(Pipeline, AutoRankReportsMse) {
    SyntheticPanel sp = simulate_panel(small_config(10, 2, 2, 1170, 7));
    PipelineConfig cfg;
    cfg.r_max = 3;
    const IntegratedEstimate est = run_fatec(sp.observe(1170), cfg);
    ASSERT_EQ(est.rank_mse.size(), 4);
    Index best = 0;
    est.rank_mse.minCoeff(&best);
    EXPECT_EQ(est.r_selected, best);
}

TEST(Pipeline, NoiselessFactorFreeRecovery) {
    SimConfig cfg = small_config(10, 0, 2, 7800, 8);
    cfg.noise_scale = 0.0;
    cfg.jump_intensity_x = 0.0;
    cfg.jump_intensity_y = 0.0;
    SyntheticPanel sp = simulate_panel(cfg);
    PipelineConfig pc;
    pc.rank = 0;
    const IntegratedEstimate est = run_faten(sp.observe(7800), pc);
    const ErrorReport rep = evaluate(est.I_beta_tilde, sp.true_integrated_beta);
    EXPECT_EQ(rep.fn, 0.0);
    EXPECT_EQ(rep.fp, 0.0);
    EXPECT_LT(rep.max_err, 0.25);
}

TEST(Pipeline, NullModelStaysSparse) {
    double fp = 0.0;
    const int reps = 3;
    for (int rep = 0; rep < reps; ++rep) {
        SyntheticPanel sp = simulate_panel(small_config(10, 1, 0, 1170, 100 + rep));
        const IntegratedEstimate est = run_faten(sp.observe(1170), PipelineConfig{});
        fp += evaluate(est.I_beta_tilde, sp.true_integrated_beta).fp;
    }
    EXPECT_LE(fp / reps, 0.2);
}

TEST(ThresholdConstant, PicksBestHoldoutFit) {
    const Mat x = gaussian(100, 3, 20);
    Vec truth(3);
    truth << 1.0, 0.0, 0.0;
    const Vec y = x * truth;
    Vec est(3);
    est << 1.0, 0.2, -0.05;
    Vec grid(3);
    grid << 0.01, 0.5, 20.0;
    // c = 0.5 at n = 16 gives h = 0.25: keeps 1.0, drops the spurious entries.
    EXPECT_EQ(select_threshold_constant(est, 16, grid, y, x, ThresholdKind::Hard), 0.5);
}

TEST(IdiosyncraticPrecision, ClimeBeatsPseudoInverse) {
    // Block 0 of a default panel at n = 7800; Sigma_u(t) = 0.3 xi_u(t) I, averaged over the block.
    const Index n = 7800;
    int wins = 0;
    for (int rep = 0; rep < 20; ++rep) {
        SimConfig cfg = SimConfig::for_dimension(50, 3);
        cfg.seed = derive_seed(71, static_cast<std::uint64_t>(rep));
        const SyntheticPanel sp = simulate_panel(cfg);
        const PreparedPanel pp = prepare_panel(sp.observe(n), PipelineConfig{});
        const FactorDecomposition fd = pca_decompose(pp.blocks[0].x, 3);
        const Mat s = adjusted_idiosyncratic_gram(fd.U, pp.noise.V, static_cast<double>(n), pp.k1, pp.k2,
                                                  pp.kernel.phi, pp.kernel.zeta);
        const TauSelection ts = select_tau(s, default_tau_grid(), tau_scale(static_cast<double>(n), 50));

        const Index steps = static_cast<Index>(pp.k2) * (cfg.n_all / n);
        const double xi_bar = sp.xi_u.head(steps).mean();
        const Mat truth = Mat::Identity(50, 50) / (cfg.idio_scale * xi_bar);
        const Mat pinv = s.completeOrthogonalDecomposition().pseudoInverse();
        const double clime_err = (ts.solution.omega - truth).cwiseAbs().maxCoeff();
        const double pinv_err = (pinv - truth).cwiseAbs().maxCoeff();
        if (clime_err < pinv_err) ++wins;
    }
    EXPECT_GE(wins, 15);
}
