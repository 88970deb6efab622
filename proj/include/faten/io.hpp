#pragma once

// Panel files (CSV and columnar binary), the truth sidecar, estimate JSON and
// metrics CSV rows.

#include "faten/core.hpp"
#include "faten/metrics.hpp"
#include "faten/panel.hpp"
#include "faten/pipeline.hpp"
#include "faten/simgen.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace faten::io {

using json = nlohmann::json;

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorKind::Io, context + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

inline std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create directory " + path.parent_path().string());
    }
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return in;
}

// ---- panel CSV: header t,y,x1..xp ----

inline void write_panel_csv(std::ostream& out, const ObservedPanel& panel) {
    const Index p = panel.p(), n = panel.n();
    out << "t,y";
    for (Index j = 0; j < p; ++j) out << ",x" << (j + 1);
    out << '\n';
    std::string line;
    for (Index i = 0; i <= n; ++i) {
        line = format_double(static_cast<double>(i) / static_cast<double>(n));
        line += ',';
        line += format_double(panel.y(i));
        for (Index j = 0; j < p; ++j) {
            line += ',';
            line += format_double(panel.x(i, j));
        }
        line += '\n';
        out << line;
    }
}

inline void write_panel_csv(const std::filesystem::path& path, const ObservedPanel& panel) {
    auto out = open_out(path);
    write_panel_csv(out, panel);
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

/// The t column is read and checked to be increasing but not otherwise used.
inline ObservedPanel read_panel_csv(std::istream& in, const std::string& name = "panel") {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::Io, name + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "t" || header[1] != "y")
        throw Error(ErrorKind::Io, name + ": header must start with t,y");
    const Index p = static_cast<Index>(header.size()) - 2;
    for (Index j = 0; j < p; ++j)
        if (header[j + 2] != "x" + std::to_string(j + 1))
            throw Error(ErrorKind::Io, name + ": unexpected column '" + std::string(header[j + 2]) + "'");
    std::vector<double> ys, xs;
    double last_t = -std::numeric_limits<double>::infinity();
    Index row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto cells = split_csv(line);
        const std::string ctx = name + " row " + std::to_string(row);
        if (static_cast<Index>(cells.size()) != p + 2) throw Error(ErrorKind::Io, ctx + ": wrong column count");
        const double t = parse_double(cells[0], ctx);
        if (!(t > last_t)) throw Error(ErrorKind::Io, ctx + ": t not increasing");
        last_t = t;
        ys.push_back(parse_double(cells[1], ctx));
        for (Index j = 0; j < p; ++j) xs.push_back(parse_double(cells[j + 2], ctx));
    }
    ObservedPanel panel;
    const Index rows = static_cast<Index>(ys.size());
    panel.y = Eigen::Map<const Vec>(ys.data(), rows);
    panel.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(xs.data(),
                                                                                                      rows, p);
    panel.validate();
    return panel;
}

inline ObservedPanel read_panel_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_panel_csv(in, path.string());
}

// ---- columnar binary ----
// "FATENPNL" | u32 version | u64 rows | u64 p | rows doubles (y) | p x rows doubles (x, column-major)
// all little-endian.

inline constexpr std::array<char, 8> kPanelMagic{'F', 'A', 'T', 'E', 'N', 'P', 'N', 'L'};
inline constexpr std::uint32_t kPanelVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary panel format assumes a little-endian host");

inline void write_panel_binary(std::ostream& out, const ObservedPanel& panel) {
    const std::uint64_t rows = static_cast<std::uint64_t>(panel.y.size());
    const std::uint64_t p = static_cast<std::uint64_t>(panel.p());
    out.write(kPanelMagic.data(), kPanelMagic.size());
    out.write(reinterpret_cast<const char*>(&kPanelVersion), sizeof kPanelVersion);
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&p), sizeof p);
    out.write(reinterpret_cast<const char*>(panel.y.data()), static_cast<std::streamsize>(rows * sizeof(double)));
    out.write(reinterpret_cast<const char*>(panel.x.data()),
              static_cast<std::streamsize>(rows * p * sizeof(double)));
}

inline void write_panel_binary(const std::filesystem::path& path, const ObservedPanel& panel) {
    auto out = open_out(path, true);
    write_panel_binary(out, panel);
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

inline ObservedPanel read_panel_binary(std::istream& in, const std::string& name = "panel") {
    std::array<char, 8> magic{};
    std::uint32_t version = 0;
    std::uint64_t rows = 0, p = 0;
    in.read(magic.data(), magic.size());
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&p), sizeof p);
    if (!in || magic != kPanelMagic) throw Error(ErrorKind::Io, name + ": not a binary panel file");
    if (version != kPanelVersion) throw Error(ErrorKind::Io, name + ": unsupported version " + std::to_string(version));
    if (rows > (1ull << 32) || p > (1ull << 24)) throw Error(ErrorKind::Io, name + ": implausible dimensions");
    ObservedPanel panel;
    panel.y.resize(static_cast<Index>(rows));
    panel.x.resize(static_cast<Index>(rows), static_cast<Index>(p));
    in.read(reinterpret_cast<char*>(panel.y.data()), static_cast<std::streamsize>(rows * sizeof(double)));
    in.read(reinterpret_cast<char*>(panel.x.data()), static_cast<std::streamsize>(rows * p * sizeof(double)));
    if (!in) throw Error(ErrorKind::Io, name + ": truncated file");
    panel.validate();
    return panel;
}

inline ObservedPanel read_panel_binary(const std::filesystem::path& path) {
    auto in = open_in(path, true);
    return read_panel_binary(in, path.string());
}

/// Dispatches on the extension: .bin is binary, anything else CSV.
inline ObservedPanel read_panel(const std::filesystem::path& path) {
    return path.extension() == ".bin" ? read_panel_binary(path) : read_panel_csv(path);
}

// ---- truth sidecar ----

struct Truth {
    Vec integrated_beta;
    std::vector<int> active_set;
    int r = 0;
    std::uint64_t seed = 0;
};

inline Truth truth_of(const SyntheticPanel& sp) {
    return {sp.true_integrated_beta, sp.active_set(), sp.true_rank, sp.config.seed};
}

inline std::vector<double> to_std(const Eigen::Ref<const Vec>& v) { return {v.data(), v.data() + v.size()}; }

inline Vec to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
}

/// Non-finite entries become null (JSON has no infinity) and read back as +inf.
inline json to_json_lossy(const Eigen::Ref<const Vec>& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(std::isfinite(v(i)) ? json(v(i)) : json(nullptr));
    return a;
}

inline Vec from_json_lossy(const json& a) {
    Vec v(static_cast<Index>(a.size()));
    for (Index i = 0; i < v.size(); ++i)
        v(i) = a[i].is_null() ? std::numeric_limits<double>::infinity() : a[i].get<double>();
    return v;
}

inline json truth_to_json(const Truth& t) {
    return json{{"true_integrated_beta", to_std(t.integrated_beta)},
                {"active_set", t.active_set},
                {"r", t.r},
                {"seed", t.seed}};
}

inline Truth truth_from_json(const json& j) {
    Truth t;
    try {
        t.integrated_beta = to_vec(j.at("true_integrated_beta").get<std::vector<double>>());
        t.active_set = j.at("active_set").get<std::vector<int>>();
        t.r = j.at("r").get<int>();
        t.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Io, std::string("truth sidecar: ") + e.what());
    }
    return t;
}

inline json read_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Io, path.string() + ": " + e.what());
    }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

// ---- estimate JSON ----

inline json estimate_to_json(const IntegratedEstimate& e) {
    json blocks = json::array();
    for (const BlockDiagnostics& b : e.blocks)
        blocks.push_back({{"start", b.start},
                          {"r", b.r},
                          {"iterations", b.iterations},
                          {"converged", b.converged},
                          {"objective", b.objective},
                          {"active", b.active},
                          {"tau", b.tau},
                          {"clime_residual", b.clime_residual},
                          {"clime_pivots", b.clime_pivots},
                          {"pca_ties", b.pca_ties},
                          {"pca_degenerate", b.pca_degenerate}});
    json path = json::array();
    for (const Vec& b : e.beta_debiased_path) path.push_back(to_std(b));
    return json{{"estimator", to_string(e.estimator)},
                {"n", e.n},
                {"p", e.p},
                {"r_selected", e.r_selected},
                {"I_beta_hat", to_std(e.I_beta_hat)},
                {"I_beta_tilde", to_std(e.I_beta_tilde)},
                {"h_n", e.h_n},
                {"threshold", e.kind == ThresholdKind::Hard ? "hard" : "soft"},
                {"eta", e.eta},
                {"tau", e.tau},
                {"diagnostics",
                 {{"k1", e.k1},
                  {"k2", e.k2},
                  {"c_eta", e.c_eta},
                  {"I_beta_undebiased", to_std(e.I_beta_plain)},
                  {"rank_mse", to_json_lossy(e.rank_mse)},
                  {"beta_debiased_path", path},
                  {"blocks", blocks},
                  {"warnings", e.warnings}}}};
}

inline IntegratedEstimate estimate_from_json(const json& j) {
    IntegratedEstimate e;
    try {
        e.estimator = parse_estimator(j.at("estimator").get<std::string>());
        e.n = j.at("n").get<Index>();
        e.p = j.at("p").get<Index>();
        e.r_selected = j.at("r_selected").get<int>();
        e.I_beta_hat = to_vec(j.at("I_beta_hat").get<std::vector<double>>());
        e.I_beta_tilde = to_vec(j.at("I_beta_tilde").get<std::vector<double>>());
        e.h_n = j.at("h_n").get<double>();
        e.kind = j.value("threshold", std::string("hard")) == "soft" ? ThresholdKind::Soft : ThresholdKind::Hard;
        e.eta = j.at("eta").get<double>();
        e.tau = j.at("tau").get<double>();
        if (j.contains("diagnostics")) {
            const json& d = j.at("diagnostics");
            e.k1 = d.value("k1", 0);
            e.k2 = d.value("k2", 0);
            e.c_eta = d.value("c_eta", 0.0);
            e.I_beta_plain = to_vec(d.value("I_beta_undebiased", std::vector<double>{}));
            e.rank_mse = from_json_lossy(d.value("rank_mse", json::array()));
            for (const json& b : d.value("beta_debiased_path", json::array()))
                e.beta_debiased_path.push_back(to_vec(b.get<std::vector<double>>()));
            for (const json& b : d.value("blocks", json::array())) {
                BlockDiagnostics bd;
                bd.start = b.at("start").get<Index>();
                bd.r = b.at("r").get<int>();
                bd.iterations = b.at("iterations").get<int>();
                bd.converged = b.at("converged").get<bool>();
                bd.objective = b.at("objective").get<double>();
                bd.active = b.at("active").get<Index>();
                bd.tau = b.at("tau").get<double>();
                bd.clime_residual = b.at("clime_residual").get<double>();
                bd.clime_pivots = b.at("clime_pivots").get<int>();
                bd.pca_ties = b.at("pca_ties").get<bool>();
                bd.pca_degenerate = b.at("pca_degenerate").get<bool>();
                e.blocks.push_back(bd);
            }
            e.warnings = d.value("warnings", std::vector<std::string>{});
        }
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::Io, std::string("estimate JSON: ") + ex.what());
    }
    return e;
}

// ---- metrics CSV ----

inline constexpr std::string_view kMetricsHeader = "estimator,n,p,rep,max_err,l1_err,l2_err,fp,fn";
inline constexpr std::string_view kAggregateHeader =
    "estimator,n,p,reps,stat,max_err,l1_err,l2_err,fp,fn";

struct MetricsRow {
    std::string estimator;
    Index n = 0, p = 0;
    int rep = 0;
    ErrorReport report;
};

/// NaN rates are written as "NA".
inline std::string format_rate(double v) { return std::isnan(v) ? std::string("NA") : format_double(v); }

inline std::string metrics_line(const MetricsRow& row) {
    const ErrorReport& r = row.report;
    return row.estimator + ',' + std::to_string(row.n) + ',' + std::to_string(row.p) + ',' + std::to_string(row.rep) +
           ',' + format_double(r.max_err) + ',' + format_double(r.l1_err) + ',' + format_double(r.l2_err) + ',' +
           format_rate(r.fp) + ',' + format_rate(r.fn);
}

inline MetricsRow parse_metrics_line(std::string_view line) {
    const auto c = split_csv(line);
    if (c.size() != 9) throw Error(ErrorKind::Io, "metrics row needs 9 columns");
    const std::string ctx = "metrics row";
    auto rate = [&](std::string_view s) {
        return s == "NA" ? std::numeric_limits<double>::quiet_NaN() : parse_double(s, ctx);
    };
    MetricsRow row;
    row.estimator = std::string(c[0]);
    row.n = static_cast<Index>(parse_double(c[1], ctx));
    row.p = static_cast<Index>(parse_double(c[2], ctx));
    row.rep = static_cast<int>(parse_double(c[3], ctx));
    row.report = {parse_double(c[4], ctx), parse_double(c[5], ctx), parse_double(c[6], ctx), rate(c[7]), rate(c[8])};
    return row;
}

/// Three lines (mean, median, sd) for one (estimator, n) cell.
inline std::vector<std::string> aggregate_lines(const std::string& estimator, Index n, Index p,
                                                const AggregateReport& a) {
    std::vector<std::string> out;
    const std::string key = estimator + ',' + std::to_string(n) + ',' + std::to_string(p) + ',' + std::to_string(a.reps);
    auto line = [&](const char* stat, double FieldSummary::*m) {
        return key + ',' + stat + ',' + format_rate(a.max_err.*m) + ',' + format_rate(a.l1_err.*m) + ',' +
               format_rate(a.l2_err.*m) + ',' + format_rate(a.fp.*m) + ',' + format_rate(a.fn.*m);
    };
    out.push_back(line("mean", &FieldSummary::mean));
    out.push_back(line("median", &FieldSummary::median));
    out.push_back(line("sd", &FieldSummary::sd));
    return out;
}

}  // namespace faten::io
