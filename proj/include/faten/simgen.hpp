#pragma once

// Synthetic factor-based regression jump diffusions with i.i.d. Gaussian
// microstructure noise, discretized by Euler-Maruyama on a 1/n_all grid.

#include "faten/core.hpp"
#include "faten/panel.hpp"
#include "faten/rng.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace faten {

struct OuParams {
    double speed = 0.0;
    double mean = 0.0;
    double vol = 0.0;
    double init = 0.0;

    void validate() const {
        require(std::isfinite(speed) && std::isfinite(mean) && std::isfinite(vol) && std::isfinite(init),
                ErrorKind::InvalidParameter, "OU parameters must be finite");
        require(speed >= 0.0 && vol >= 0.0, ErrorKind::InvalidParameter, "OU speed and vol must be >= 0");
    }

    bool operator==(const OuParams&) const = default;
};

inline Vec simulate_ou(const OuParams& params, Index steps, double dt, NormalStream& normal) {
    params.validate();
    require(std::isfinite(dt) && dt > 0.0, ErrorKind::InvalidParameter, "dt must be positive");
    require(steps >= 0, ErrorKind::InvalidParameter, "steps must be >= 0");
    Vec path(steps + 1);
    path(0) = params.init;
    const double sdt = std::sqrt(dt);
    for (Index k = 0; k < steps; ++k) {
        const double xi = normal();
        path(k + 1) = path(k) + params.speed * (params.mean - path(k)) * dt + params.vol * sdt * xi;
    }
    return path;
}

/// x_{k+1} = x_k + speed (mean - x_k) dt + vol sqrt(dt) xi_k.
inline Vec simulate_ou(const OuParams& params, Index steps, double dt, std::uint64_t seed) {
    NormalStream normal(seed, 0);
    return simulate_ou(params, steps, dt, normal);
}

struct SimConfig {
    int p = 200;
    int r = 3;
    int s_p = 5;
    int n_all = 23400;

    double jump_intensity_y = 15.0;
    double jump_intensity_x = 10.0;
    double jump_sd = 0.05;
    double noise_scale = 0.05;  // noise sd as a fraction of sqrt(integrated variance)
    std::uint64_t seed = 1;

    OuParams nu_z{4.0, 0.12, 0.03, 0.15};
    OuParams xi_f{3.0, 0.25, 0.05, 0.25};
    OuParams xi_u{5.0, 0.5, 0.1, 0.45};
    OuParams phi_beta{3.0, 0.25, 0.05, 0.15};
    OuParams phi_loading{3.0, 0.07, 0.02, 0.1};

    double beta_init = 1.0;
    double beta_drift = 0.05;
    double loading_drift = 0.025;
    double loading_init_sd = 0.3;
    double factor_corr = 0.5;  // Sigma_f,ij = xi_f 0.5^{|i-j|}
    double idio_scale = 0.3;   // Sigma_u = 0.3 xi_u I

    bool record_loadings = false;

    /// Simulation-study defaults with s_p = floor(log p).
    static SimConfig for_dimension(int p, int r = 3) {
        SimConfig cfg;
        cfg.p = p;
        cfg.r = r;
        cfg.s_p = std::max(1, static_cast<int>(std::floor(std::log(static_cast<double>(p)))));
        return cfg;
    }

    void validate() const {
        require(p >= 1, ErrorKind::InvalidParameter, "p must be >= 1");
        require(r >= 0 && r <= p, ErrorKind::InvalidParameter, "need 0 <= r <= p");
        require(s_p >= 0 && s_p <= p, ErrorKind::InvalidParameter, "need 0 <= s_p <= p");
        require(n_all >= 2, ErrorKind::InvalidParameter, "n_all must be >= 2");
        require(jump_intensity_y >= 0.0 && jump_intensity_x >= 0.0 && jump_sd >= 0.0,
                ErrorKind::InvalidParameter, "jump intensities and sizes must be >= 0");
        require(noise_scale >= 0.0 && std::isfinite(noise_scale), ErrorKind::InvalidParameter,
                "noise scale must be finite and >= 0");
        for (const OuParams* ou : {&nu_z, &xi_f, &xi_u, &phi_beta, &phi_loading}) ou->validate();
        require(std::isfinite(beta_init) && std::isfinite(beta_drift) && std::isfinite(loading_drift) &&
                    loading_init_sd >= 0.0 && std::abs(factor_corr) < 1.0 && idio_scale >= 0.0,
                ErrorKind::InvalidParameter, "invalid coefficient or loading dynamics");
    }

    bool operator==(const SimConfig&) const = default;
};

struct SyntheticPanel {
    Vec times;                 // t_k = k / n_all
    Vec y_obs;                 // n_all+1
    Mat x_obs;                 // (n_all+1) x p
    Mat beta_path;             // (n_all+1) x p, zero outside the active set
    Vec true_integrated_beta;  // p
    int true_rank = 0;

    // Latent state kept for diagnostics and tests.
    Vec y_latent;
    Vec z_path;
    Vec nu_z, xi_f, xi_u, phi_beta, phi_loading;
    std::vector<Mat> loading_path;  // only with SimConfig::record_loadings
    double noise_sd_y = 0.0;
    Vec noise_sd_x;
    int jumps_y = 0;
    Eigen::VectorXi jumps_x;

    SimConfig config;

    std::vector<int> active_set(double tol = 0.0) const {
        std::vector<int> out;
        for (Index j = 0; j < true_integrated_beta.size(); ++j)
            if (std::abs(true_integrated_beta(j)) > tol) out.push_back(static_cast<int>(j));
        return out;
    }

    /// Every (n_all/n)-th grid point; n must divide n_all.
    ObservedPanel observe(Index n) const {
        const Index n_all = y_obs.size() - 1;
        require(n >= 1 && n <= n_all && n_all % n == 0, ErrorKind::InvalidParameter,
                "n = " + std::to_string(n) + " must divide n_all = " + std::to_string(n_all));
        const Index stride = n_all / n;
        ObservedPanel out;
        out.y.resize(n + 1);
        out.x.resize(n + 1, x_obs.cols());
        for (Index i = 0; i <= n; ++i) {
            out.y(i) = y_obs(i * stride);
            out.x.row(i) = x_obs.row(i * stride);
        }
        return out;
    }

    /// Integrated covariate covariance int Sigma_x dt over [t0, t1] (needs recorded loadings).
    Mat integrated_x_covariance(double t0, double t1) const {
        require(!loading_path.empty(), ErrorKind::InvalidParameter, "loadings were not recorded");
        const Index n_all = y_obs.size() - 1;
        const double dt = 1.0 / static_cast<double>(n_all);
        const Index a = static_cast<Index>(std::lround(t0 * n_all));
        const Index b = static_cast<Index>(std::lround(t1 * n_all));
        const Index p = x_obs.cols(), r = true_rank;
        Mat toeplitz(r, r);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < r; ++j) toeplitz(i, j) = std::pow(config.factor_corr, std::abs(i - j));
        Mat acc = Mat::Zero(p, p);
        for (Index k = a; k < b; ++k) {
            if (r > 0) acc.noalias() += xi_f(k) * dt * loading_path[k] * toeplitz * loading_path[k].transpose();
            acc.diagonal().array() += config.idio_scale * xi_u(k) * dt;
        }
        return acc;
    }
};

namespace detail {

enum SimStream : std::uint64_t {
    kNuZ = 1,
    kXiF,
    kXiU,
    kPhiBeta,
    kPhiLoading,
    kBeta,
    kLoading,
    kFactor,
    kIdio,
    kResidual,
    kJumpY,
    kJumpX,
    kNoiseY,
    kNoiseX,
};

/// Adds compound-Poisson jumps to a vector of increments; returns the jump count.
inline int add_jumps(Eigen::Ref<Vec> increments, double intensity, double size_sd, NormalStream& stream) {
    const Index n_all = increments.size();
    std::poisson_distribution<int> count_dist(intensity > 0.0 ? intensity : 1.0);
    std::uniform_real_distribution<double> when(0.0, 1.0);
    const int count = intensity > 0.0 ? count_dist(stream.engine()) : 0;
    for (int c = 0; c < count; ++c) {
        const double t = when(stream.engine());
        const Index grid = std::clamp<Index>(static_cast<Index>(std::lround(t * n_all)), 1, n_all);
        increments(grid - 1) += size_sd * stream();
    }
    return count;
}

}  // namespace detail

inline SyntheticPanel simulate_panel(const SimConfig& cfg) {
    cfg.validate();
    const Index p = cfg.p, r = cfg.r, s = cfg.s_p, n_all = cfg.n_all;
    const double dt = 1.0 / static_cast<double>(n_all);
    const double sdt = std::sqrt(dt);
    using namespace detail;

    SyntheticPanel out;
    out.config = cfg;
    out.true_rank = cfg.r;
    out.times = Vec::LinSpaced(n_all + 1, 0.0, 1.0);

    {
        NormalStream g1(cfg.seed, kNuZ), g2(cfg.seed, kXiF), g3(cfg.seed, kXiU), g4(cfg.seed, kPhiBeta),
            g5(cfg.seed, kPhiLoading);
        out.nu_z = simulate_ou(cfg.nu_z, n_all, dt, g1);
        out.xi_f = simulate_ou(cfg.xi_f, n_all, dt, g2);
        out.xi_u = simulate_ou(cfg.xi_u, n_all, dt, g3);
        out.phi_beta = simulate_ou(cfg.phi_beta, n_all, dt, g4);
        out.phi_loading = simulate_ou(cfg.phi_loading, n_all, dt, g5);
    }

    NormalStream beta_rng(cfg.seed, kBeta), loading_rng(cfg.seed, kLoading), factor_rng(cfg.seed, kFactor),
        idio_rng(cfg.seed, kIdio), resid_rng(cfg.seed, kResidual);

    // Unit Toeplitz factor; Sigma_f(t) = xi_f(t) * toeplitz so chol scales by sqrt(xi_f(t)).
    Mat chol_toeplitz;
    if (r > 0) {
        Mat toeplitz(r, r);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < r; ++j) toeplitz(i, j) = std::pow(cfg.factor_corr, std::abs(i - j));
        Eigen::LLT<Mat> llt(toeplitz);
        require(llt.info() == Eigen::Success, ErrorKind::NumericDegeneracy, "factor correlation not PD");
        chol_toeplitz = llt.matrixL();
    }

    Mat loadings(p, r);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < r; ++j) loadings(i, j) = cfg.loading_init_sd * loading_rng();
    Vec beta = Vec::Zero(p);
    beta.head(s).setConstant(cfg.beta_init);

    out.beta_path.resize(n_all + 1, p);
    out.beta_path.row(0) = beta.transpose();
    if (cfg.record_loadings) out.loading_path.reserve(n_all + 1);

    Mat dx(n_all, p);
    Vec dy(n_all);
    out.z_path.resize(n_all + 1);
    out.z_path(0) = 0.0;
    double iv_y = 0.0;
    Vec iv_x = Vec::Zero(p);
    Vec df(r), dfz(r), du(p);

    for (Index k = 0; k < n_all; ++k) {
        const double xf = out.xi_f(k), xu = out.xi_u(k);
        if (r > 0)
            require(xf > 0.0, ErrorKind::NumericDegeneracy,
                    "Sigma_f not positive definite at time index " + std::to_string(k));
        require(xu >= 0.0, ErrorKind::NumericDegeneracy,
                "Sigma_u not positive semidefinite at time index " + std::to_string(k));
        if (cfg.record_loadings) out.loading_path.push_back(loadings);

        const double su = std::sqrt(cfg.idio_scale * xu) * sdt;
        for (Index j = 0; j < p; ++j) du(j) = su * idio_rng();
        Vec dxc = du;
        if (r > 0) {
            for (Index j = 0; j < r; ++j) dfz(j) = factor_rng();
            df.noalias() = std::sqrt(xf) * sdt * (chol_toeplitz * dfz);
            dxc.noalias() += loadings * df;
        }
        const double dz = out.nu_z(k) * sdt * resid_rng();
        dx.row(k) = dxc.transpose();
        dy(k) = beta.dot(dxc) + dz;
        out.z_path(k + 1) = out.z_path(k) + dz;

        // Integrated variances for the noise scale rule.
        double y_var = cfg.idio_scale * xu * beta.squaredNorm() + out.nu_z(k) * out.nu_z(k);
        if (r > 0) {
            const Vec gamma = loadings.transpose() * beta;
            y_var += xf * gamma.dot(chol_toeplitz * (chol_toeplitz.transpose() * gamma));
            const Mat bl = loadings * chol_toeplitz;
            iv_x.array() += xf * dt * bl.rowwise().squaredNorm().array();
        }
        iv_x.array() += cfg.idio_scale * xu * dt;
        iv_y += y_var * dt;

        // Coefficient and loading dynamics.
        const double sb = out.phi_beta(k) * sdt;
        for (Index j = 0; j < s; ++j) beta(j) += cfg.beta_drift * dt + sb * beta_rng();
        const double sl = out.phi_loading(k) * sdt;
        for (Index j = 0; j < r; ++j)
            for (Index i = 0; i < p; ++i) loadings(i, j) += cfg.loading_drift * dt + sl * loading_rng();
        out.beta_path.row(k + 1) = beta.transpose();
    }
    if (cfg.record_loadings) out.loading_path.push_back(loadings);

    // Integrated coefficient by the trapezoid rule on the fine grid.
    out.true_integrated_beta =
        dt * (out.beta_path.colwise().sum().transpose() -
              0.5 * (out.beta_path.row(0) + out.beta_path.row(n_all)).transpose());

    NormalStream jy(cfg.seed, kJumpY), jx(cfg.seed, kJumpX);
    out.jumps_y = add_jumps(dy, cfg.jump_intensity_y, cfg.jump_sd, jy);
    out.jumps_x.resize(p);
    for (Index j = 0; j < p; ++j) out.jumps_x(j) = add_jumps(dx.col(j), cfg.jump_intensity_x, cfg.jump_sd, jx);

    out.y_latent.resize(n_all + 1);
    out.y_latent(0) = 0.0;
    for (Index k = 0; k < n_all; ++k) out.y_latent(k + 1) = out.y_latent(k) + dy(k);

    out.noise_sd_y = cfg.noise_scale * std::sqrt(std::max(iv_y, 0.0));
    out.noise_sd_x = cfg.noise_scale * iv_x.array().max(0.0).sqrt().matrix();

    NormalStream ny(cfg.seed, kNoiseY), nx(cfg.seed, kNoiseX);
    out.y_obs.resize(n_all + 1);
    for (Index k = 0; k <= n_all; ++k) out.y_obs(k) = out.y_latent(k) + out.noise_sd_y * ny();
    out.x_obs.resize(n_all + 1, p);
    for (Index j = 0; j < p; ++j) {
        double level = 0.0;
        out.x_obs(0, j) = out.noise_sd_x(j) * nx();
        for (Index k = 0; k < n_all; ++k) {
            level += dx(k, j);
            out.x_obs(k + 1, j) = level + out.noise_sd_x(j) * nx();
        }
    }
    return out;
}

}  // namespace faten
