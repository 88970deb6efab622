// faten: simulate panels, run the integrated-coefficient estimators, sweep
// (estimator, n) grids over replications and score estimates against truth.

#include "faten/config.hpp"
#include "faten/io.hpp"
#include "faten/metrics.hpp"
#include "faten/pipeline.hpp"
#include "faten/rng.hpp"
#include "faten/simgen.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace faten;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads, reps;
    std::optional<std::string> out, estimators, n_list;
    std::optional<std::string> panel, truth, estimate;
};

RunConfig resolve(const Overrides& o, RunMode mode) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : config_from_json(io::read_json(o.config_path));
    c.mode = mode;
    if (o.seed) {
        c.seed = *o.seed;
        c.sim.seed = *o.seed;
    }
    if (o.threads) c.threads = *o.threads;
    if (o.reps) c.reps = *o.reps;
    if (o.out) c.out_dir = *o.out;
    if (o.estimators) {
        c.estimators.clear();
        for (const std::string& e : split_list(*o.estimators)) c.estimators.push_back(parse_estimator(e));
    }
    if (o.n_list) {
        c.n_list.clear();
        for (const std::string& n : split_list(*o.n_list))
            c.n_list.push_back(static_cast<int>(io::parse_double(n, "--n")));
    }
    if (o.panel) c.panel_path = *o.panel;
    if (o.truth) c.truth_path = *o.truth;
    if (o.estimate) c.estimate_path = *o.estimate;
    c.validate();
    return c;
}

std::string estimate_name(EstimatorKind k, int n, int rep) {
    return std::string(to_string(k)) + "_n" + std::to_string(n) + "_rep" + std::to_string(rep) + ".json";
}

void write_lines(const fs::path& path, std::string_view header, const std::vector<std::string>& lines) {
    auto out = io::open_out(path);
    out << header << '\n';
    for (const std::string& l : lines) out << l << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

// ---- simulate ----

int cmd_simulate(const RunConfig& c) {
    const fs::path out = c.out_dir;
    for (int rep = 0; rep < c.reps; ++rep) {
        SimConfig sim = c.sim;
        sim.seed = derive_seed(c.seed, static_cast<std::uint64_t>(rep));
        const SyntheticPanel sp = simulate_panel(sim);
        for (int n : c.n_list) {
            const std::string stem = "panel_rep" + std::to_string(rep) + "_n" + std::to_string(n);
            const ObservedPanel panel = sp.observe(n);
            if (c.panel_format == "csv")
                io::write_panel_csv(out / (stem + ".csv"), panel);
            else
                io::write_panel_binary(out / (stem + ".bin"), panel);
        }
        io::write_json(out / ("truth_rep" + std::to_string(rep) + ".json"), io::truth_to_json(io::truth_of(sp)));
    }
    std::cout << "wrote " << c.reps * c.n_list.size() << " panel(s) and " << c.reps << " truth file(s) to "
              << out.string() << '\n';
    return kExitOk;
}

// ---- estimate ----

int cmd_estimate(const RunConfig& c) {
    const ObservedPanel panel = io::read_panel(c.panel_path);
    std::optional<io::Truth> truth;
    if (!c.truth_path.empty()) {
        truth = io::truth_from_json(io::read_json(c.truth_path));
        require(truth->integrated_beta.size() == panel.p(), ErrorKind::ShapeMismatch,
                "truth length does not match panel dimension");
    }
    const auto results = run_estimators(panel, c.estimators, c.pipeline());
    const fs::path out = c.out_dir;
    std::vector<std::string> lines;
    for (const auto& [kind, est] : results) {
        io::write_json(out / ("estimate_" + std::string(to_string(kind)) + ".json"), io::estimate_to_json(est));
        if (truth) {
            const io::MetricsRow row{to_string(kind), panel.n(), panel.p(), 0,
                                     evaluate(est.I_beta_tilde, truth->integrated_beta)};
            lines.push_back(io::metrics_line(row));
            std::cout << lines.back() << '\n';
        } else {
            std::cout << to_string(kind) << ": r = " << est.r_selected << ", nonzeros = "
                      << (est.I_beta_tilde.array() != 0.0).count() << '\n';
        }
    }
    if (truth) write_lines(out / "metrics.csv", io::kMetricsHeader, lines);
    return kExitOk;
}

// ---- evaluate ----

int cmd_evaluate(const RunConfig& c) {
    const IntegratedEstimate est = io::estimate_from_json(io::read_json(c.estimate_path));
    const io::Truth truth = io::truth_from_json(io::read_json(c.truth_path));
    require(truth.integrated_beta.size() == est.I_beta_tilde.size(), ErrorKind::ShapeMismatch,
            "truth length does not match estimate length");
    const io::MetricsRow row{to_string(est.estimator), est.n, est.p, 0,
                             evaluate(est.I_beta_tilde, truth.integrated_beta)};
    const std::string line = io::metrics_line(row);
    std::cout << io::kMetricsHeader << '\n' << line << '\n';
    write_lines(fs::path(c.out_dir) / "metrics.csv", io::kMetricsHeader, {line});
    return kExitOk;
}

// ---- sweep ----

struct CellResult {
    int rep = 0;
    int n = 0;
    std::uint64_t seed = 0;
    std::optional<std::map<EstimatorKind, IntegratedEstimate>> estimates;
    Vec truth;
    double seconds = 0.0;
    std::string error;
};

int cmd_sweep(const RunConfig& c) {
    const fs::path out = c.out_dir;
    const PipelineConfig pc = c.pipeline();
    std::mutex mu;
    std::condition_variable cv;
    std::deque<CellResult> queue;
    std::atomic<int> next_rep{0};
    int finished_workers = 0;
    const int workers = std::max(1, std::min(c.threads, c.reps));

    auto worker = [&] {
        for (int rep = next_rep++; rep < c.reps; rep = next_rep++) {
            const std::uint64_t seed = derive_seed(c.seed, static_cast<std::uint64_t>(rep));
            std::optional<SyntheticPanel> sp;
            std::string sim_error;
            try {
                SimConfig sim = c.sim;
                sim.seed = seed;
                sp = simulate_panel(sim);
            } catch (const std::exception& e) {
                sim_error = std::string("simulate: ") + e.what();
            }
            for (int n : c.n_list) {
                CellResult cell{rep, n, seed, std::nullopt, Vec(), 0.0, sim_error};
                if (sp) {
                    const auto t0 = std::chrono::steady_clock::now();
                    try {
                        cell.estimates = run_estimators(sp->observe(n), c.estimators, pc);
                        cell.truth = sp->true_integrated_beta;
                    } catch (const std::exception& e) {
                        cell.error = e.what();
                    }
                    cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                }
                std::lock_guard lock(mu);
                queue.push_back(std::move(cell));
                cv.notify_one();
            }
        }
        std::lock_guard lock(mu);
        ++finished_workers;
        cv.notify_one();
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);

    // Single writer: estimates are written as cells arrive, tables once at the end.
    std::map<std::tuple<std::string, int, int>, io::MetricsRow> rows;
    json report = json::array();
    std::vector<std::string> failures;
    for (;;) {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return !queue.empty() || finished_workers == workers; });
        if (queue.empty()) break;
        CellResult cell = std::move(queue.front());
        queue.pop_front();
        lock.unlock();

        if (!cell.estimates) {
            failures.push_back("n=" + std::to_string(cell.n) + " rep=" + std::to_string(cell.rep) + ": " + cell.error);
            report.push_back({{"n", cell.n}, {"rep", cell.rep}, {"seed", cell.seed}, {"error", cell.error}});
            continue;
        }
        for (const auto& [kind, est] : *cell.estimates) {
            io::write_json(out / "estimates" / estimate_name(kind, cell.n, cell.rep), io::estimate_to_json(est));
            const ErrorReport er = evaluate(est.I_beta_tilde, cell.truth);
            rows[{to_string(kind), cell.n, cell.rep}] = {to_string(kind), cell.n, est.p, cell.rep, er};
            report.push_back({{"estimator", to_string(kind)},
                              {"n", cell.n},
                              {"rep", cell.rep},
                              {"seed", cell.seed},
                              {"r_selected", est.r_selected},
                              {"eta", est.eta},
                              {"c_eta", est.c_eta},
                              {"tau", est.tau},
                              {"max_err", er.max_err},
                              {"l2_err", er.l2_err},
                              {"seconds", cell.seconds},
                              {"warnings", est.warnings.size()}});
        }
    }
    for (std::thread& t : pool) t.join();

    std::vector<std::string> lines;
    std::map<std::pair<std::string, int>, std::vector<ErrorReport>> cells;
    std::map<std::pair<std::string, int>, Index> cell_p;
    for (const auto& [key, row] : rows) {
        lines.push_back(io::metrics_line(row));
        cells[{row.estimator, row.n}].push_back(row.report);
        cell_p[{row.estimator, row.n}] = row.p;
    }
    write_lines(out / "metrics.csv", io::kMetricsHeader, lines);
    std::vector<std::string> agg;
    for (const auto& [key, reps] : cells)
        for (std::string& l : io::aggregate_lines(key.first, key.second, cell_p[key], aggregate(reps)))
            agg.push_back(std::move(l));
    write_lines(out / "aggregate.csv", io::kAggregateHeader, agg);
    io::write_json(out / "run_report.json", json{{"config", config_to_json(c)}, {"records", report}});

    std::cout << "wrote " << lines.size() << " metrics row(s) to " << (out / "metrics.csv").string() << '\n';
    if (!failures.empty()) {
        std::cerr << failures.size() << " failed cell(s):\n";
        for (const std::string& f : failures) std::cerr << "  " << f << '\n';
        return kExitPartial;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Integrated coefficient estimation for noisy high-frequency factor panels"};
    app.require_subcommand(0, 1);
    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults, "Print the default configuration as JSON and exit");

    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Master seed");
        sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--estimators", o.estimators, "Comma list of FATEN,FATEC,NAIVE_LASSO");
        sub->add_option("--n", o.n_list, "Comma list of sample sizes");
        sub->add_option("--reps", o.reps, "Replications")->check(CLI::PositiveNumber);
    };
    CLI::App* sim = app.add_subcommand("simulate", "Write simulated panels and truth sidecars");
    CLI::App* est = app.add_subcommand("estimate", "Run estimators on one panel file");
    CLI::App* sweep = app.add_subcommand("sweep", "Simulate, estimate and score over an (estimator, n) grid");
    CLI::App* eval = app.add_subcommand("evaluate", "Score an estimate JSON against a truth sidecar");
    for (CLI::App* s : {sim, est, sweep, eval}) add_common(s);
    est->add_option("--panel", o.panel, "Panel file (.bin or .csv)")->required();
    est->add_option("--truth", o.truth, "Truth sidecar JSON");
    eval->add_option("--estimate", o.estimate, "Estimate JSON")->required();
    eval->add_option("--truth", o.truth, "Truth sidecar JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitFatal;
    }

    try {
        if (print_defaults) {
            std::cout << config_to_json(RunConfig{}).dump(2) << '\n';
            return kExitOk;
        }
        if (*sim) return cmd_simulate(resolve(o, RunMode::Simulate));
        if (*est) return cmd_estimate(resolve(o, RunMode::Estimate));
        if (*sweep) return cmd_sweep(resolve(o, RunMode::Sweep));
        if (*eval) return cmd_evaluate(resolve(o, RunMode::Evaluate));
        std::cout << app.help();
        return kExitFatal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFatal;
    }
}
