#include "visco/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "visco/control.hpp"
#include "visco/error.hpp"
#include "visco/ingham.hpp"
#include "visco/modal.hpp"
#include "visco/model.hpp"
#include "visco/random.hpp"
#include "visco/series.hpp"
#include "visco/spectrum.hpp"

#ifndef VISCO_VERSION
#define VISCO_VERSION "unknown"
#endif

namespace visco::cli {

namespace {

constexpr double kRootResidualLimit = 1e-9;
constexpr double kOracleLimit = 1e-6;
constexpr double kReachLimit = 1e-3;
constexpr double kDataMatchLimit = 1e-10;
constexpr int kOracleModes = 10;

[[noreturn]] void config_error(int line, std::string_view key, const std::string& what) {
    std::ostringstream os;
    os << "line " << line;
    if (!key.empty()) os << ", field '" << key << "'";
    os << ": " << what;
    throw Error(ErrorKind::Config, os.str());
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_positive(std::string_view value, int line, std::string_view key) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) config_error(line, key, "not a number: '" + std::string(value) + "'");
    if (!(out > 0.0) || !std::isfinite(out)) config_error(line, key, "must be a positive finite number");
    return out;
}

double parse_nonnegative(std::string_view value, int line, std::string_view key) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) config_error(line, key, "not a number: '" + std::string(value) + "'");
    if (!(out >= 0.0) || !std::isfinite(out)) config_error(line, key, "must be a non-negative finite number");
    return out;
}

template <class Int>
Int parse_count(std::string_view value, int line, std::string_view key) {
    Int out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) config_error(line, key, "not an integer: '" + std::string(value) + "'");
    if (out <= 0) config_error(line, key, "must be positive");
    return out;
}

Experiment parse_experiment(std::string_view v, int line) {
    for (auto e : {Experiment::spectrum, Experiment::modal, Experiment::simulate, Experiment::ingham_inverse,
                   Experiment::ingham_direct, Experiment::control}) {
        if (v == to_string(e)) return e;
    }
    config_error(line, "experiment", "unknown experiment '" + std::string(v) + "'");
}

ControlTarget parse_target(std::string_view v, int line) {
    if (v == "mode1-value") return ControlTarget::mode1_value;
    if (v == "mode1-velocity") return ControlTarget::mode1_velocity;
    if (v == "random") return ControlTarget::random;
    config_error(line, "target", "expected mode1-value, mode1-velocity or random, got '" + std::string(v) + "'");
}

// ---------------------------------------------------------------------------

class CsvFile {
public:
    explicit CsvFile(std::initializer_list<std::string_view> header) {
        bool first = true;
        for (auto h : header) {
            if (!first) text_ += ',';
            text_ += h;
            first = false;
        }
        text_ += '\n';
    }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((append(cells, first)), ...);
        text_ += '\n';
    }

    /// Trailing row labelled in the first column with only the last column filled.
    void summary(std::string_view label, double last) {
        text_ += label;
        const auto columns = static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<long>(text_.find('\n')), ',')) + 1;
        text_.append(columns - 1, ',');
        text_ += format_double(last);
        text_ += '\n';
    }

    const std::string& text() const { return text_; }

private:
    void append(double v, bool& first) { sep(first), text_ += format_double(v); }
    void append(int v, bool& first) { sep(first), text_ += std::to_string(v); }
    void append(std::size_t v, bool& first) { sep(first), text_ += std::to_string(v); }
    void sep(bool& first) {
        if (!first) text_ += ',';
        first = false;
    }
    std::string text_;
};

struct Output {
    std::filesystem::path dir;
    RunResult* result;

    void write(const std::string& name, const std::string& text) const {
        std::ofstream out(dir / name, std::ios::binary);
        out << text;
        if (!out) throw Error(ErrorKind::Config, "cannot write " + (dir / name).string());
        result->files.push_back(name);
    }
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double auto_horizon(const ModelParams& params, int N) {
    return 1.5 * control_time_threshold(spectral_limits(params, std::max(N, 10)));
}

void require(bool ok, const std::string& what, RunResult& result) {
    if (!ok) result.failures.push_back(what);
}

// ---------------------------------------------------------------------------
// Experiments

void run_spectrum(const RunConfig& c, const ModelParams& params, const Output& out, RunResult& result) {
    const SpectralBasis basis(params);
    const auto roots = mode_roots(basis, c.N);
    CsvFile csv({"n", "lambda", "omega_re", "omega_im", "rho", "residual", "omega_err_scaled", "rho_err_scaled"});
    double worst = 0.0;
    for (const auto& r : roots) {
        const auto asym = asymptotic_roots(params, r.lambda);
        csv.row(r.n, r.lambda, r.omega.real(), r.omega.imag(), r.rho, r.residual,
                std::sqrt(r.lambda) * std::abs(r.omega - asym.omega), r.lambda * std::abs(r.rho - asym.rho));
        worst = std::max(worst, r.residual);
    }
    out.write("roots.csv", csv.text());

    const auto limits = spectral_limits(params, std::max(c.N, 10), std::span<const double>(&c.epsilon, 1));
    double threshold = std::numeric_limits<double>::quiet_NaN();
    try {
        threshold = control_time_threshold(limits);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoThreshold) throw;
    }
    CsvFile lim({"modes", "gap", "alpha_omega", "alpha_rho", "epsilon", "n0", "T0"});
    const auto it = limits.n0_table.find(c.epsilon);
    lim.row(limits.modes, limits.gap, limits.alpha_omega, limits.alpha_rho, c.epsilon,
            it == limits.n0_table.end() ? 0 : it->second, threshold);
    out.write("limits.csv", lim.text());
    require(worst <= kRootResidualLimit, "root residual " + format_double(worst) + " exceeds 1e-9", result);
}

void run_modal(const RunConfig& c, const ModelParams& params, const Output& out, RunResult& result) {
    const SpectralBasis basis(params);
    const auto data = ingham::random_direct_data(c.N, c.decay.value_or(1.5), c.seed, 0);
    CsvFile csv({"n", "u0", "u1", "C_re", "C_im", "R1", "R2", "C_asym_re", "C_asym_im", "R1_asym", "R2_asym",
                 "remainder_ratio"});
    double worst = 0.0;
    for (int n = 1; n <= c.N; ++n) {
        const auto i = static_cast<std::size_t>(n - 1);
        const auto roots = exact_roots(params, basis.eigenvalue(n), n);
        const auto exact = exact_coefficients(params, roots, data.u0[i], data.u1[i]);
        const auto asym = asymptotic_coefficients(params, basis.eigenvalue(n), data.u0[i], data.u1[i]);
        csv.row(n, data.u0[i], data.u1[i], exact.C.real(), exact.C.imag(), exact.R1, exact.R2, asym.C.real(),
                asym.C.imag(), asym.R1, asym.R2,
                (std::abs(exact.R1) + std::abs(exact.R2)) * std::sqrt(basis.eigenvalue(n)) / std::abs(exact.C));
        const ModalTrajectory traj(params, roots, exact);
        const double scale = std::abs(data.u0[i]) + std::abs(data.u1[i]) / std::sqrt(basis.eigenvalue(n));
        const double mismatch = std::abs(traj.value(0.0) - data.u0[i]) +
                                std::abs(traj.velocity(0.0) - data.u1[i]) / std::sqrt(basis.eigenvalue(n));
        worst = std::max(worst, mismatch / scale);
    }
    out.write("coefficients.csv", csv.text());
    require(worst <= kDataMatchLimit, "coefficients reproduce the data only to " + format_double(worst), result);
}

void run_simulate(const RunConfig& c, const ModelParams& params, double T, const Output& out, RunResult& result) {
    const SpectralBasis basis(params);
    const auto data = ingham::random_direct_data(c.N, c.decay.value_or(1.5), c.seed, 0);
    const auto field = SolutionField::forward(basis, data);

    const auto trace = boundary_trace(field, trace_grid(field, T));
    CsvFile tr({"t", "slope_pi", "stress_pi"});
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        tr.row(trace.times[i], trace.values[i], field.stress(trace.times[i], std::numbers::pi));
    }
    out.write("trace.csv", tr.text());

    CsvFile snap({"x", "u", "u_t"});
    const int points = 8 * c.N;
    for (int j = 0; j <= points; ++j) {
        const double x = std::numbers::pi * j / points;
        snap.row(x, field.evaluate(T, x), field.evaluate_velocity(T, x));
    }
    out.write("snapshot.csv", snap.text());

    CsvFile orc({"n", "steps", "halving_change", "max_rel_error"});
    double worst = 0.0;
    for (int n = 1; n <= std::min(c.N, kOracleModes); ++n) {
        const auto i = static_cast<std::size_t>(n - 1);
        const auto& mode = field.mode(n);
        const auto ref = volterra_oracle(params, basis.eigenvalue(n), data.u0[i], data.u1[i], T,
                                         oracle_steps(T, mode.roots().omega.real()));
        double err = 0.0;
        double scale = 0.0;
        for (std::size_t k = 0; k < ref.times.size(); ++k) {
            err = std::max(err, std::abs(mode.value(ref.times[k]) - ref.values[k]));
            scale = std::max(scale, std::abs(ref.values[k]));
        }
        const double rel = scale > 0.0 ? err / scale : err;
        orc.row(n, ref.steps, ref.halving_change, rel);
        worst = std::max(worst, rel);
    }
    out.write("oracle.csv", orc.text());
    require(worst <= kOracleLimit, "closed form vs oracle error " + format_double(worst) + " exceeds 1e-6", result);
}

void run_inverse(const RunConfig& c, const ModelParams& params, double T, const Output& out, RunResult& result) {
    ingham::InverseOptions opt;
    opt.epsilon = c.epsilon;
    opt.decay = c.decay.value_or(opt.decay);
    const auto ex = ingham::verify_inverse(params, T, c.N, c.trials, c.seed, opt);
    CsvFile rep({"trial", "lhs", "rhs", "ratio"});
    bool all_above = true;
    for (std::size_t k = 0; k < ex.trials.size(); ++k) {
        const auto& t = ex.trials[k];
        rep.row(k, t.lhs, t.rhs_sum, t.ratio);
        if (!(t.ratio > 0.0) || (ex.theorem_constant > 0.0 && !(t.ratio >= ex.theorem_constant))) all_above = false;
    }
    rep.summary("min", ex.min_ratio);
    out.write("report.csv", rep.text());
    CsvFile cons({"T", "epsilon", "theorem_constant", "T0", "min_ratio", "worst_case_ratio"});
    cons.row(T, c.epsilon, ex.theorem_constant, ex.threshold, ex.min_ratio, ex.worst_case_ratio);
    out.write("constants.csv", cons.text());
    require(all_above, "a trial ratio is not positive or falls below the theorem constant", result);
}

void run_direct(const RunConfig& c, const ModelParams& params, double T, const Output& out, RunResult& result) {
    const auto ex = ingham::verify_direct(params, T, c.N, c.trials, c.seed, c.decay.value_or(1.6));
    CsvFile rep({"trial", "lhs", "data_norm", "ratio"});
    for (std::size_t k = 0; k < ex.trials.size(); ++k) {
        rep.row(k, ex.trials[k].lhs, ex.trials[k].data_norm, ex.trials[k].ratio);
    }
    out.write("report.csv", rep.text());
    CsvFile sum({"N", "T", "C0"});
    sum.row(c.N, T, ex.C0);
    out.write("summary.csv", sum.text());
    require(std::isfinite(ex.C0) && ex.C0 > 0.0, "direct constant is not finite and positive", result);
}

control::ModalState control_target(const RunConfig& c) {
    control::ModalState t;
    t.value.assign(static_cast<std::size_t>(c.N), 0.0);
    t.velocity.assign(static_cast<std::size_t>(c.N), 0.0);
    switch (c.target) {
    case ControlTarget::mode1_value: t.value[0] = 1.0; break;
    case ControlTarget::mode1_velocity: t.velocity[0] = 1.0; break;
    case ControlTarget::random: {
        // value_n ~ n^{-decay}, velocity_n ~ n^{1-decay}: comparable L² and H^{-1} weights.
        StreamRng rng(c.seed, 0);
        const double decay = c.decay.value_or(1.5);
        for (int n = 1; n <= c.N; ++n) {
            t.value[static_cast<std::size_t>(n - 1)] = rng.uniform(-1.0, 1.0) * std::pow(n, -decay);
            t.velocity[static_cast<std::size_t>(n - 1)] = rng.uniform(-1.0, 1.0) * std::pow(n, 1.0 - decay);
        }
        break;
    }
    }
    return t;
}

void run_control(const RunConfig& c, const ModelParams& params, double T, const Output& out, RunResult& result) {
    const SpectralBasis basis(params);
    control::HumOptions opt;
    opt.tikhonov = c.tikhonov;
    const auto res = control::solve_hum(basis, control_target(c), T, c.N, opt);
    CsvFile sig({"t", "f"});
    for (std::size_t i = 0; i < res.f.times.size(); ++i) sig.row(res.f.times[i], res.f.values[i]);
    out.write("control.csv", sig.text());
    CsvFile sum({"N", "T", "gram_condition", "target_error", "gram_min_eigenvalue", "control_norm"});
    sum.row(c.N, T, res.gram_condition, res.target_error, res.gram_min_eigenvalue, res.control_norm);
    out.write("summary.csv", sum.text());
    require(res.target_error <= kReachLimit, "target error " + format_double(res.target_error) + " exceeds 1e-3", result);
}

} // namespace

std::string_view to_string(Experiment e) {
    switch (e) {
    case Experiment::spectrum: return "spectrum";
    case Experiment::modal: return "modal";
    case Experiment::simulate: return "simulate";
    case Experiment::ingham_inverse: return "ingham-inverse";
    case Experiment::ingham_direct: return "ingham-direct";
    case Experiment::control: return "control";
    }
    return "unknown";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::Config, "SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::vector<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) config_error(line_no, {}, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) config_error(line_no, {}, "empty key");
        if (value.empty()) config_error(line_no, key, "empty value");
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) config_error(line_no, key, "duplicate key");
        seen.push_back(key);

        if (key == "gamma") c.gamma = parse_positive(value, line_no, key);
        else if (key == "b1") c.b1 = parse_positive(value, line_no, key);
        else if (key == "b2") c.b2 = parse_positive(value, line_no, key);
        else if (key == "r1") c.r1 = parse_positive(value, line_no, key);
        else if (key == "r2") c.r2 = parse_positive(value, line_no, key);
        else if (key == "experiment") c.experiment = parse_experiment(value, line_no);
        else if (key == "N") c.N = parse_count<int>(value, line_no, key);
        else if (key == "T") c.T = value == "auto" ? std::nullopt : std::optional<double>(parse_positive(value, line_no, key));
        else if (key == "trials") c.trials = parse_count<int>(value, line_no, key);
        else if (key == "seed") c.seed = parse_count<std::uint64_t>(value, line_no, key);
        else if (key == "epsilon") {
            c.epsilon = parse_positive(value, line_no, key);
            if (!(c.epsilon < 1.0)) config_error(line_no, key, "must lie in (0, 1)");
        }
        else if (key == "output") c.output = std::string(value);
        else if (key == "decay") c.decay = parse_positive(value, line_no, key);
        else if (key == "tikhonov") c.tikhonov = parse_nonnegative(value, line_no, key);
        else if (key == "target") c.target = parse_target(value, line_no);
        else config_error(line_no, key, "unknown key");
        c.echo.emplace_back(key, std::string(value));
        if (end == text.size()) break;
    }
    for (const char* required : {"gamma", "b1", "b2", "r1", "r2", "experiment"}) {
        if (std::find(seen.begin(), seen.end(), required) == seen.end()) {
            config_error(line_no, required, "missing required field");
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Config, "cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RunResult run(const RunConfig& config) {
    RunResult result;
    const std::string started = utc_now();
    const std::filesystem::path dir(config.output);
    std::optional<double> horizon = config.T;

    try {
        std::filesystem::create_directories(dir);
        const Output out{dir, &result};
        const ModelParams params = validate_params(config.gamma, config.b1, config.b2, config.r1, config.r2);
        auto T = [&] {
            if (!horizon) horizon = auto_horizon(params, config.N);
            return *horizon;
        };
        switch (config.experiment) {
        case Experiment::spectrum: run_spectrum(config, params, out, result); break;
        case Experiment::modal: run_modal(config, params, out, result); break;
        case Experiment::simulate: run_simulate(config, params, T(), out, result); break;
        case Experiment::ingham_inverse: run_inverse(config, params, T(), out, result); break;
        case Experiment::ingham_direct: run_direct(config, params, T(), out, result); break;
        case Experiment::control: run_control(config, params, T(), out, result); break;
        }
        result.exit_code = result.failures.empty() ? 0 : exit_code(ErrorKind::AssertionFailed);
    } catch (const Error& e) {
        result.error = e.what();
        result.exit_code = exit_code(e.kind());
    } catch (const std::exception& e) {
        result.error = e.what();
        result.exit_code = 1;
    }

    nlohmann::ordered_json manifest;
    manifest["version"] = VISCO_VERSION;
    manifest["experiment"] = std::string(to_string(config.experiment));
    nlohmann::ordered_json echo = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config.echo) echo[k] = v;
    manifest["config"] = echo;
    manifest["resolved"] = {{"N", config.N},
                            {"T", horizon ? format_double(*horizon) : std::string("n/a")},
                            {"seed", config.seed},
                            {"trials", config.trials},
                            {"epsilon", format_double(config.epsilon)}};
    manifest["started"] = started;
    manifest["finished"] = utc_now();
    manifest["exit_code"] = result.exit_code;
    manifest["failures"] = result.failures;
    if (!result.error.empty()) manifest["error"] = result.error;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& name : result.files) {
        const std::string bytes = read_file(dir / name);
        files.push_back({{"name", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
    }
    manifest["files"] = files;
    std::error_code ec;
    if (std::filesystem::is_directory(dir, ec)) {
        std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
    }
    return result;
}

} // namespace visco::cli
