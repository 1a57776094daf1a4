// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "common.hpp"
#include "oracles.hpp"
#include "visco/cli.hpp"
#include "visco/control.hpp"
#include "visco/error.hpp"
#include "visco/ingham.hpp"
#include "visco/modal.hpp"
#include "visco/random.hpp"
#include "visco/series.hpp"
#include "visco/spectrum.hpp"

using namespace visco;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const char* name, double limit_seconds, const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("threw ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    std::string timing;
    if (limit_seconds > 0) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "; %.2f s (limit %.0f s)", seconds, limit_seconds);
        timing = buf;
        if (seconds >= limit_seconds) out.pass = false;
    } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "; %.2f s", seconds);
        timing = buf;
    }
    if (!out.pass) ++failures;
    std::printf("AC%-2d %s  %s: %s%s\n", id, out.pass ? "PASS" : "FAIL", name, out.detail.c_str(), timing.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double canonical_T0() { return control_time_threshold(spectral_limits(fixture::canonical(), 100)); }

// Scaled errors for n = 5..200: no value exceeds twice the one at n = 5.
// Values under the roundoff floor carry no trend and count as zero.
bool no_growth(const std::vector<double>& scaled, const std::vector<double>& floor, double& worst_factor) {
    worst_factor = 0.0;
    const double ref = scaled.front();
    bool ok = true;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        const double v = scaled[i] <= floor[i] ? 0.0 : scaled[i];
        if (ref > 0) worst_factor = std::max(worst_factor, v / ref);
        if (v > 2 * ref) ok = false;
    }
    return ok;
}

Outcome root_correctness() {
    const auto p = fixture::canonical();
    double worst = 0, zero = 0;
    for (int n = 1; n <= 200; ++n) {
        const double lambda = double(n) * n;
        const auto r = exact_roots(p, lambda, n);
        for (const auto& s : r.all()) {
            worst = std::max(worst, std::abs(oracle::quartic(oracle::kCanonical, lambda, s)) /
                                        oracle::quartic_scale(oracle::kCanonical, lambda, s));
        }
        zero = std::max(zero, std::abs(oracle::quartic(oracle::kCanonical, lambda, 0.0)) /
                                  oracle::quartic_scale(oracle::kCanonical, lambda, 0.0));
    }
    return {worst <= 1e-9 && zero <= 1e-9, fmt("max relative residual %.2e, at s=0 %.2e (limit 1e-9)", worst, zero)};
}

Outcome asymptotics() {
    const auto p = fixture::canonical();
    std::vector<double> eo, er, ec, e1, e2, fo, fr, fc, f1, f2;
    for (int n = 5; n <= 200; ++n) {
        const double lambda = double(n) * n;
        const auto r = exact_roots(p, lambda, n);
        const auto a = asymptotic_roots(p, lambda);
        eo.push_back(std::sqrt(lambda) * std::abs(r.omega - a.omega));
        er.push_back(lambda * std::abs(r.rho - a.rho));
        fo.push_back(64 * kEps * lambda);
        fr.push_back(64 * kEps * lambda);
        const auto c = exact_coefficients(p, r, 1.0, 1.0);
        const auto d = asymptotic_coefficients(p, lambda, 1.0, 1.0);
        ec.push_back(lambda * std::abs(c.C - d.C));
        e1.push_back(lambda * std::abs(c.R1 - d.R1));
        e2.push_back(lambda * std::abs(c.R2 - d.R2));
        const double amp_floor = 64 * kEps * lambda * 2.0;
        fc.push_back(amp_floor);
        f1.push_back(amp_floor);
        f2.push_back(amp_floor);
    }
    double go, gr, gc, g1, g2;
    const bool ok = no_growth(eo, fo, go) & no_growth(er, fr, gr) & no_growth(ec, fc, gc) & no_growth(e1, f1, g1) &
                    no_growth(e2, f2, g2);
    return {ok, fmt("max/value@5: omega %.3f, rho %.3f, C %.3f, R1 %.3f, R2 %.3f (limit 2)", go, gr, gc, g1, g2)};
}

Outcome oracle_equivalence() {
    const auto p = fixture::canonical();
    const double T = 2 * canonical_T0();
    double worst = 0;
    for (int n = 1; n <= 10; ++n) {
        const double lambda = double(n) * n;
        const auto roots = exact_roots(p, lambda, n);
        for (std::uint64_t k = 0; k < 20; ++k) {
            StreamRng rng(303, static_cast<std::uint64_t>(n) * 100 + k);
            const double u0 = rng.uniform(-1, 1), u1 = rng.uniform(-1, 1) * n;
            const ModalTrajectory mode(p, roots, exact_coefficients(p, roots, u0, u1));
            const auto ref = volterra_oracle(p, lambda, u0, u1, T, oracle_steps(T, roots.omega.real()));
            double err = 0, scale = 0;
            for (std::size_t i = 0; i < ref.times.size(); ++i) {
                err = std::max(err, std::abs(mode.value(ref.times[i]) - ref.values[i]));
                scale = std::max(scale, std::abs(ref.values[i]));
            }
            worst = std::max(worst, err / scale);
        }
    }
    return {worst <= 1e-6, fmt("horizon %.3f, 200 trajectories, max relative Linf error %.2e (limit 1e-6)", T, worst)};
}

Outcome remainder_bound() {
    const auto p = fixture::canonical();
    const int N = 200;
    const auto data = ingham::random_direct_data(N, 2.0, 404, 0);
    std::vector<ModalCoefficients> coeffs;
    std::vector<double> lambdas;
    for (int n = 1; n <= N; ++n) {
        const double lambda = double(n) * n;
        const auto i = static_cast<std::size_t>(n - 1);
        coeffs.push_back(exact_coefficients(p, exact_roots(p, lambda, n), data.u0[i], data.u1[i]));
        lambdas.push_back(lambda);
    }
    const auto rep = remainder_report(coeffs, lambdas);
    std::vector<double> tail;
    for (const auto& [n, ratio] : rep.ratios) {
        if (n >= 5) tail.push_back(ratio);
    }
    const double slope = fixture::log_log_slope(tail, 5);
    return {std::isfinite(rep.M_hat) && slope < 0.0,
            fmt("M_hat %.4g at n=%d, log-log trend of ratios over n=5..200 %.3f (must be < 0)", rep.M_hat, rep.worst_n, slope)};
}

Outcome norm_equivalence_range() {
    const auto p = fixture::canonical();
    const SpectralBasis basis(p);
    const int N = 50;
    std::vector<ModalRoots> roots;
    std::vector<double> lambdas;
    for (int n = 1; n <= N; ++n) {
        lambdas.push_back(double(n) * n);
        roots.push_back(exact_roots(p, lambdas.back(), n));
    }
    RatioRange range;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const auto d = ingham::random_direct_data(N, 1.5, 505, k);
        std::vector<ModalCoefficients> coeffs;
        for (int n = 1; n <= N; ++n) {
            const auto i = static_cast<std::size_t>(n - 1);
            coeffs.push_back(exact_coefficients(p, roots[i], d.u0[i], d.u1[i]));
        }
        range.add(norm_equivalence(coeffs, lambdas, d, basis).ratio());
    }
    return {range.low > 0 && range.high / range.low <= 100,
            fmt("ratios in [%.4f, %.4f], c2/c1 = %.3f (limit 100)", range.low, range.high, range.high / range.low)};
}

Outcome kernel_identity() {
    StreamRng rng(606, 0);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const double T = rng.uniform(7.0, 20.0);
        const cplx w(rng.uniform(-30.0, 30.0), rng.uniform(-0.3, 0.3));
        const cplx ref = oracle::weighted_transform(w, T);
        const cplx closed = std::abs(std::abs(w.real()) - kPi / T) > 1e-6
                                ? (1.0 + std::exp(cplx(0.0, 1.0) * w * T)) * ingham::kernel_G(w, T)
                                : ingham::weighted_transform(w, T);
        worst = std::max(worst, std::abs(closed - ref) / std::max(1.0, std::abs(ref)));
    }
    int violations = 0;
    StreamRng brng(606, 1);
    for (int k = 0; k < 1000; ++k) {
        const double sigma = brng.uniform(0.5, 2.0);
        const double T = 2 * kPi / sigma * brng.uniform(1.01, 3.0);
        const int n = 1 + static_cast<int>(brng.uniform() * 30);
        const cplx w = std::polar(sigma * n * brng.uniform(1.0, 3.0), brng.uniform(-0.3, 0.3) + (brng.uniform() < 0.5 ? 0.0 : kPi));
        if (std::abs(ingham::kernel_G(w, T)) > ingham::kernel_bound(sigma, n, T) * (1 + 1e-14)) ++violations;
    }
    return {worst <= 1e-10 && violations == 0,
            fmt("max transform error %.2e (limit 1e-10), bound violations %d of 1000", worst, violations)};
}

Outcome explicit_constant() {
    const auto limits = spectral_limits(fixture::canonical(), 100);
    const double eps = 0.01;
    const double gap = limits.gap, alpha = limits.alpha_omega;
    const double formula = 2 * kPi / std::sqrt(gap * gap * (1 - eps) - 16 * alpha * alpha * (1 + eps));
    const double step = 1e-3;
    double crossing = std::numeric_limits<double>::quiet_NaN();
    double prev = ingham::theorem_constant(formula - 0.5, eps, limits);
    for (double T = formula - 0.5 + step; T <= formula + 0.5; T += step) {
        const double c = ingham::theorem_constant(T, eps, limits);
        if (prev <= 0 && c > 0) {
            crossing = T;
            break;
        }
        prev = c;
    }
    const double T0 = control_time_threshold(limits);
    const bool ok = std::abs(crossing - formula) <= step && std::abs(T0 - 6.8556) <= 1e-3;
    return {ok, fmt("sign change at %.4f vs formula %.4f (grid %.0e); T0 = %.5f vs 6.8556", crossing, formula, step, T0)};
}

Outcome inverse_inequality() {
    const double T = 1.2 * canonical_T0();
    const auto ex = ingham::verify_inverse(fixture::canonical(), T, 50, 100, 808);
    bool every = ex.theorem_constant > 0;
    for (const auto& t : ex.trials) every = every && t.ratio > 0 && t.ratio >= ex.theorem_constant;
    return {every && ex.min_ratio > 0 && ex.trials.size() == 100,
            fmt("T %.4f, min ratio %.4f, theorem constant %.4f, worst case %.4f", T, ex.min_ratio, ex.theorem_constant,
                ex.worst_case_ratio)};
}

Outcome direct_inequality() {
    const auto p = fixture::canonical();
    const double T = 1.5 * canonical_T0();
    const double c25 = ingham::verify_direct(p, T, 25, 50, 909).C0;
    const double c50 = ingham::verify_direct(p, T, 50, 50, 909).C0;
    const double change = std::abs(c50 - c25) / c50;
    return {std::isfinite(c50) && change <= 0.05, fmt("C0 %.5f (N=25), %.5f (N=50), change %.2f%% (limit 5%%)", c25, c50, 100 * change)};
}

Outcome reachability() {
    const auto p = fixture::canonical();
    const SpectralBasis basis(p);
    const int N = 20;
    const double T = 1.5 * canonical_T0();
    control::ModalState value{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
    auto velocity = value, random = value;
    value.value[0] = 1.0;
    velocity.velocity[0] = 1.0;
    StreamRng rng(1010, 0);
    for (int n = 1; n <= N; ++n) {
        random.value[static_cast<std::size_t>(n - 1)] = rng.uniform(-1, 1) * std::pow(n, -1.5);
        random.velocity[static_cast<std::size_t>(n - 1)] = rng.uniform(-1, 1) * std::pow(n, -0.5);
    }
    double reach = 0;
    for (const auto* target : {&value, &velocity, &random}) reach = std::max(reach, control::solve_hum(basis, *target, T, N).target_error);

    double duality = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        StreamRng r(1011, k);
        double freq[3], phase[3], amp[3];
        for (int j = 0; j < 3; ++j) {
            freq[j] = r.uniform(0.1, 20.0);
            phase[j] = r.uniform(0.0, 2 * kPi);
            amp[j] = r.uniform(-1, 1);
        }
        const double top = *std::max_element(freq, freq + 3);
        auto f = [=](double t) {
            double s = 0;
            for (int j = 0; j < 3; ++j) s += amp[j] * std::sin(freq[j] * t + phase[j]);
            return s;
        };
        control::AdjointDatum z;
        z.horizon = T;
        for (int n = 1; n <= N; ++n) {
            z.z0.push_back(r.uniform(-1, 1) / n);
            z.z1.push_back(r.uniform(-1, 1));
        }
        duality = std::max(duality, control::duality_check(basis, f, top, z).relative_error);
    }
    return {reach <= 1e-3 && duality <= 1e-6,
            fmt("T %.4f, N %d, max final-state error %.2e (limit 1e-3), max duality error %.2e (limit 1e-6)", T, N, reach, duality)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const std::string base = "gamma = 1\nb1 = 0.05\nb2 = 0.15\nr1 = 0.1\nr2 = 0.3\nseed = 42\nN = 10\ntrials = 5\n";
    int compared = 0;
    bool same = true;
    for (const char* e : {"ingham-inverse", "ingham-direct", "control"}) {
        std::vector<std::string> files[2];
        std::filesystem::path dirs[2];
        for (int k = 0; k < 2; ++k) {
            auto c = cli::parse_config(base + "experiment = " + e + (std::string(e) == "control" ? "\ntarget = random\n" : "\n"));
            dirs[k] = std::filesystem::temp_directory_path() / ("visco_acceptance_" + std::string(e) + std::to_string(k));
            std::filesystem::remove_all(dirs[k]);
            c.output = dirs[k].string();
            const auto r = cli::run(c);
            if (r.exit_code != 0) return {false, std::string(e) + " exited with " + std::to_string(r.exit_code)};
            files[k] = r.files;
        }
        if (files[0] != files[1]) same = false;
        for (const auto& f : files[0]) {
            same = same && slurp(dirs[0] / f) == slurp(dirs[1] / f);
            ++compared;
        }
    }
    return {same && compared > 0, fmt("%d CSV files compared byte for byte across two runs", compared)};
}

} // namespace

int main() {
    report(1, "root correctness", 1, root_correctness);
    report(2, "root and amplitude asymptotics", 0, asymptotics);
    report(3, "closed form vs time stepper", 10, oracle_equivalence);
    report(4, "remainder bound", 0, remainder_bound);
    report(5, "norm equivalence", 0, norm_equivalence_range);
    report(6, "kernel identity and bound", 0, kernel_identity);
    report(7, "explicit observability constant", 0, explicit_constant);
    report(8, "inverse inequality", 60, inverse_inequality);
    report(9, "direct inequality", 0, direct_inequality);
    report(10, "reachability and duality", 120, reachability);
    report(11, "determinism", 0, determinism);
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
