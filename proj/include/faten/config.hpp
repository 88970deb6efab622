#pragma once

// Run configuration for the command-line driver, stored as JSON with a
// versioned schema tag. Every field has a default, so a partial document is valid.

#include "faten/core.hpp"
#include "faten/pipeline.hpp"
#include "faten/simgen.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace faten {

inline constexpr const char* kRunConfigSchema = "faten-run/1";

enum class RunMode { Simulate, Estimate, Sweep, Evaluate };

inline const char* to_string(RunMode m) {
    switch (m) {
    case RunMode::Simulate: return "simulate";
    case RunMode::Estimate: return "estimate";
    case RunMode::Sweep: return "sweep";
    case RunMode::Evaluate: return "evaluate";
    }
    return "?";
}

inline RunMode parse_mode(const std::string& s) {
    if (s == "simulate") return RunMode::Simulate;
    if (s == "estimate") return RunMode::Estimate;
    if (s == "sweep") return RunMode::Sweep;
    if (s == "evaluate") return RunMode::Evaluate;
    throw Error(ErrorKind::InvalidParameter, "unknown mode '" + s + "'");
}

/// Named pre-averaging kernels; both vanish at 0 and 1.
inline KernelFn kernel_by_name(const std::string& name) {
    if (name == "triangular") return triangular_kernel;
    if (name == "parabolic") return [](double x) { return x * (1.0 - x); };
    throw Error(ErrorKind::InvalidKernel, "unknown kernel '" + name + "'");
}

struct RunConfig {
    RunMode mode = RunMode::Sweep;
    std::vector<EstimatorKind> estimators{EstimatorKind::Faten, EstimatorKind::Fatec, EstimatorKind::NaiveLasso};
    SimConfig sim = SimConfig::for_dimension(200, 3);
    std::vector<int> n_list{1170, 7800, 23400};
    std::string panel_format = "bin";  // bin | csv

    std::string kernel = "triangular";
    int k1 = 0;  // 0: default rule
    int k2 = 0;
    std::string truncation = "practical";  // practical | theoretical
    TheoreticalConstants theoretical;
    std::vector<double> eta_grid = to_std(default_eta_grid());
    std::vector<double> tau_grid = to_std(default_tau_grid());
    std::vector<double> naive_eta_grid = to_std(log_grid(1e-4, 1e4, 17));
    double c_h = 1.0;
    std::string threshold = "hard";  // hard | soft
    int r_max = 5;
    std::optional<int> rank;
    double rho = 10.0;
    int max_iters = 1000;
    double tol = 1e-8;
    bool standardize = true;
    bool warm_start_chain = true;

    int reps = 1;
    std::uint64_t seed = 20240101;
    int threads = 1;
    std::string out_dir = "out";
    std::string panel_path;  // estimate mode
    std::string truth_path;  // optional, estimate mode
    std::string estimate_path;  // evaluate mode

    static std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

    PipelineConfig pipeline() const {
        PipelineConfig pc;
        pc.k1 = k1;
        pc.k2 = k2;
        pc.kernel = kernel_by_name(kernel);
        pc.threshold_mode = truncation == "theoretical" ? ThresholdMode::Theoretical : ThresholdMode::Practical;
        pc.theoretical = theoretical;
        auto vec = [](const std::vector<double>& v) {
            return Vec(Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size())));
        };
        pc.eta_grid = vec(eta_grid);
        pc.tau_grid = vec(tau_grid);
        pc.naive_eta_grid = vec(naive_eta_grid);
        pc.c_h = c_h;
        pc.threshold_kind = threshold == "soft" ? ThresholdKind::Soft : ThresholdKind::Hard;
        pc.r_max = r_max;
        pc.rank = rank;
        pc.rho = rho;
        pc.max_iters = max_iters;
        pc.tol = tol;
        pc.standardize = standardize;
        pc.warm_start_chain = warm_start_chain;
        return pc;
    }

    void validate() const {
        sim.validate();
        require(!estimators.empty(), ErrorKind::InvalidParameter, "estimator list is empty");
        require(reps >= 1, ErrorKind::InvalidParameter, "reps must be >= 1");
        require(threads >= 1, ErrorKind::InvalidParameter, "threads must be >= 1");
        require(panel_format == "bin" || panel_format == "csv", ErrorKind::InvalidParameter,
                "panel_format must be bin or csv");
        require(truncation == "practical" || truncation == "theoretical", ErrorKind::InvalidParameter,
                "truncation must be practical or theoretical");
        require(threshold == "hard" || threshold == "soft", ErrorKind::InvalidParameter,
                "threshold must be hard or soft");
        require(c_h >= 0.0, ErrorKind::InvalidParameter, "c_h must be >= 0");
        require(!eta_grid.empty() && !tau_grid.empty() && !naive_eta_grid.empty(), ErrorKind::InvalidParameter,
                "tuning grids must be nonempty");
        require(r_max >= 0 && (!rank || *rank >= 0), ErrorKind::InvalidParameter, "ranks must be >= 0");
        kernel_by_name(kernel);
        if (mode == RunMode::Simulate || mode == RunMode::Sweep) {
            require(!n_list.empty(), ErrorKind::InvalidParameter, "n list is empty");
            for (int n : n_list)
                require(n >= 1 && n <= sim.n_all && sim.n_all % n == 0, ErrorKind::InvalidParameter,
                        "n = " + std::to_string(n) + " must divide n_all = " + std::to_string(sim.n_all));
        }
        if (mode == RunMode::Estimate)
            require(!panel_path.empty(), ErrorKind::InvalidParameter, "estimate mode needs panel_path");
        if (mode == RunMode::Evaluate)
            require(!estimate_path.empty() && !truth_path.empty(), ErrorKind::InvalidParameter,
                    "evaluate mode needs estimate_path and truth_path");
    }

    bool operator==(const RunConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const OuParams& o) {
    j = {{"speed", o.speed}, {"mean", o.mean}, {"vol", o.vol}, {"init", o.init}};
}

inline void from_json(const nlohmann::json& j, OuParams& o) {
    o.speed = j.value("speed", o.speed);
    o.mean = j.value("mean", o.mean);
    o.vol = j.value("vol", o.vol);
    o.init = j.value("init", o.init);
}

inline nlohmann::json sim_to_json(const SimConfig& s) {
    return {{"p", s.p},
            {"r", s.r},
            {"s_p", s.s_p},
            {"n_all", s.n_all},
            {"jump_intensity_y", s.jump_intensity_y},
            {"jump_intensity_x", s.jump_intensity_x},
            {"jump_sd", s.jump_sd},
            {"noise_scale", s.noise_scale},
            {"nu_z", s.nu_z},
            {"xi_f", s.xi_f},
            {"xi_u", s.xi_u},
            {"phi_beta", s.phi_beta},
            {"phi_loading", s.phi_loading},
            {"beta_init", s.beta_init},
            {"beta_drift", s.beta_drift},
            {"loading_drift", s.loading_drift},
            {"loading_init_sd", s.loading_init_sd},
            {"factor_corr", s.factor_corr},
            {"idio_scale", s.idio_scale},
            {"seed", s.seed},
            {"record_loadings", s.record_loadings}};
}

/// Missing keys keep their defaults; when only p is given, s_p follows floor(log p).
inline SimConfig sim_from_json(const nlohmann::json& j, SimConfig s) {
    if (j.contains("p") && !j.contains("s_p")) s = SimConfig::for_dimension(j.at("p").get<int>(), s.r);
    s.p = j.value("p", s.p);
    s.r = j.value("r", s.r);
    s.s_p = j.value("s_p", s.s_p);
    s.n_all = j.value("n_all", s.n_all);
    s.jump_intensity_y = j.value("jump_intensity_y", s.jump_intensity_y);
    s.jump_intensity_x = j.value("jump_intensity_x", s.jump_intensity_x);
    s.jump_sd = j.value("jump_sd", s.jump_sd);
    s.noise_scale = j.value("noise_scale", s.noise_scale);
    s.nu_z = j.value("nu_z", s.nu_z);
    s.xi_f = j.value("xi_f", s.xi_f);
    s.xi_u = j.value("xi_u", s.xi_u);
    s.phi_beta = j.value("phi_beta", s.phi_beta);
    s.phi_loading = j.value("phi_loading", s.phi_loading);
    s.beta_init = j.value("beta_init", s.beta_init);
    s.beta_drift = j.value("beta_drift", s.beta_drift);
    s.loading_drift = j.value("loading_drift", s.loading_drift);
    s.loading_init_sd = j.value("loading_init_sd", s.loading_init_sd);
    s.factor_corr = j.value("factor_corr", s.factor_corr);
    s.idio_scale = j.value("idio_scale", s.idio_scale);
    s.seed = j.value("seed", s.seed);
    s.record_loadings = j.value("record_loadings", s.record_loadings);
    return s;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    std::vector<std::string> est;
    for (EstimatorKind k : c.estimators) est.emplace_back(to_string(k));
    nlohmann::json j = {
        {"schema", kRunConfigSchema},
        {"mode", to_string(c.mode)},
        {"estimators", est},
        {"sim", sim_to_json(c.sim)},
        {"n", c.n_list},
        {"panel_format", c.panel_format},
        {"kernel", c.kernel},
        {"k1", c.k1},
        {"k2", c.k2},
        {"truncation", c.truncation},
        {"theoretical", {{"c_w", c.theoretical.c_w}, {"c_v", c.theoretical.c_v}, {"c_v2", c.theoretical.c_v2},
                         {"s_p", c.theoretical.s_p}}},
        {"eta_grid", c.eta_grid},
        {"tau_grid", c.tau_grid},
        {"naive_eta_grid", c.naive_eta_grid},
        {"c_h", c.c_h},
        {"threshold", c.threshold},
        {"r_max", c.r_max},
        {"rank", c.rank ? nlohmann::json(*c.rank) : nlohmann::json("auto")},
        {"rho", c.rho},
        {"max_iters", c.max_iters},
        {"tol", c.tol},
        {"standardize", c.standardize},
        {"warm_start_chain", c.warm_start_chain},
        {"reps", c.reps},
        {"seed", c.seed},
        {"threads", c.threads},
        {"out", c.out_dir},
        {"panel", c.panel_path},
        {"truth", c.truth_path},
        {"estimate", c.estimate_path}};
    return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        const std::string schema = j.value("schema", std::string(kRunConfigSchema));
        require(schema == kRunConfigSchema, ErrorKind::InvalidParameter,
                "unsupported config schema '" + schema + "' (expected " + kRunConfigSchema + ")");
        if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
        if (j.contains("estimators")) {
            c.estimators.clear();
            for (const auto& e : j.at("estimators")) c.estimators.push_back(parse_estimator(e.get<std::string>()));
        }
        if (j.contains("sim")) c.sim = sim_from_json(j.at("sim"), c.sim);
        c.n_list = j.value("n", c.n_list);
        c.panel_format = j.value("panel_format", c.panel_format);
        c.kernel = j.value("kernel", c.kernel);
        c.k1 = j.value("k1", c.k1);
        c.k2 = j.value("k2", c.k2);
        c.truncation = j.value("truncation", c.truncation);
        if (j.contains("theoretical")) {
            const auto& t = j.at("theoretical");
            c.theoretical.c_w = t.value("c_w", c.theoretical.c_w);
            c.theoretical.c_v = t.value("c_v", c.theoretical.c_v);
            c.theoretical.c_v2 = t.value("c_v2", c.theoretical.c_v2);
            c.theoretical.s_p = t.value("s_p", c.theoretical.s_p);
        }
        c.eta_grid = j.value("eta_grid", c.eta_grid);
        c.tau_grid = j.value("tau_grid", c.tau_grid);
        c.naive_eta_grid = j.value("naive_eta_grid", c.naive_eta_grid);
        c.c_h = j.value("c_h", c.c_h);
        c.threshold = j.value("threshold", c.threshold);
        c.r_max = j.value("r_max", c.r_max);
        if (j.contains("rank")) {
            const auto& r = j.at("rank");
            if (r.is_string()) {
                require(r.get<std::string>() == "auto", ErrorKind::InvalidParameter, "rank must be an integer or 'auto'");
                c.rank.reset();
            } else {
                c.rank = r.get<int>();
            }
        }
        c.rho = j.value("rho", c.rho);
        c.max_iters = j.value("max_iters", c.max_iters);
        c.tol = j.value("tol", c.tol);
        c.standardize = j.value("standardize", c.standardize);
        c.warm_start_chain = j.value("warm_start_chain", c.warm_start_chain);
        c.reps = j.value("reps", c.reps);
        c.seed = j.value("seed", c.seed);
        c.threads = j.value("threads", c.threads);
        c.out_dir = j.value("out", c.out_dir);
        c.panel_path = j.value("panel", c.panel_path);
        c.truth_path = j.value("truth", c.truth_path);
        c.estimate_path = j.value("estimate", c.estimate_path);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidParameter, std::string("config: ") + e.what());
    }
    return c;
}

}  // namespace faten
