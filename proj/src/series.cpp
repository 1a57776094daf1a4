#include "visco/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "visco/error.hpp"

namespace visco {

namespace {

std::vector<ModalTrajectory> build_modes(const SpectralBasis& basis, const InitialData& data) {
    std::vector<ModalTrajectory> modes;
    modes.reserve(static_cast<std::size_t>(data.modes()));
    for (int n = 1; n <= data.modes(); ++n) {
        const auto roots = exact_roots(basis.params(), basis.eigenvalue(n), n);
        const auto i = static_cast<std::size_t>(n - 1);
        const double u1 = i < data.u1.size() ? data.u1[i] : 0.0;
        modes.emplace_back(basis.params(), roots, exact_coefficients(basis.params(), roots, data.u0[i], u1));
    }
    return modes;
}

} // namespace

SolutionField SolutionField::forward(const SpectralBasis& basis, const InitialData& data) {
    SolutionField f(basis, Direction::forward, 0.0);
    f.modes_ = build_modes(basis, data);
    return f;
}

SolutionField SolutionField::time_reversed(const SpectralBasis& basis, const InitialData& data, double horizon) {
    SolutionField f(basis, Direction::time_reversed, horizon);
    f.modes_ = build_modes(basis, data);
    return f;
}

double SolutionField::max_frequency() const { return modes_.empty() ? 0.0 : modes_.back().roots().omega.real(); }

double SolutionField::modal_value(int n, double t) const { return mode(n).value(clock(t)); }

double SolutionField::modal_velocity(int n, double t) const {
    const double v = mode(n).velocity(clock(t));
    return direction_ == Direction::forward ? v : -v;
}

double SolutionField::evaluate(double t, double x) const {
    double sum = 0.0;
    for (int n = 1; n <= modes(); ++n) sum += modal_value(n, t) * std::sin(n * x);
    return basis_.factor() * sum;
}

double SolutionField::evaluate_velocity(double t, double x) const {
    double sum = 0.0;
    for (int n = 1; n <= modes(); ++n) sum += modal_velocity(n, t) * std::sin(n * x);
    return basis_.factor() * sum;
}

double SolutionField::slope(double t, double x) const {
    double sum = 0.0;
    for (int n = 1; n <= modes(); ++n) sum += modal_value(n, t) * n * std::cos(n * x);
    return basis_.factor() * sum;
}

double SolutionField::stress(double t, double x) const {
    const double tau = clock(t);
    double sum = 0.0;
    for (int n = 1; n <= modes(); ++n) sum += mode(n).stress_factor(tau) * n * std::cos(n * x);
    const double g = basis_.params().gamma();
    return g * g * basis_.factor() * sum;
}

std::vector<double> trace_grid(const SolutionField& field, double horizon) {
    const double period = 2.0 * std::numbers::pi / std::max(field.max_frequency(), 1e-12);
    const int intervals = std::max(1, static_cast<int>(std::ceil(horizon / period * kTracePointsPerPeriod)));
    std::vector<double> grid(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) grid[static_cast<std::size_t>(i)] = horizon * i / intervals;
    return grid;
}

TraceSignal boundary_trace(const SolutionField& field, std::span<const double> grid) {
    const double max_step = std::numbers::pi / (4.0 * std::max(field.max_frequency(), 1e-12));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double step = grid[i] - grid[i - 1];
        if (!(step > 0.0) || step > max_step * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "trace grid step " << step << " at index " << i << " exceeds " << max_step
               << " (or grid not increasing)";
            throw Error(ErrorKind::GridTooCoarse, os.str());
        }
    }
    TraceSignal out;
    out.times.assign(grid.begin(), grid.end());
    out.values.reserve(grid.size());
    for (double t : grid) out.values.push_back(field.slope(t, std::numbers::pi));
    return out;
}

int oracle_steps(double horizon, double frequency, double per_radian) {
    return std::max(16, static_cast<int>(std::ceil(horizon * std::max(frequency, 1.0) * per_radian)));
}

namespace {

struct AugmentedRun {
    std::vector<double> v;
    std::vector<double> w;
};

AugmentedRun integrate_augmented(const ModelParams& p, double lambda, double u0n, double u1n, double horizon, int steps) {
    using State = std::array<double, 4>; // v, w, y1, y2
    const double lb1 = lambda * p.b1();
    const double lb2 = lambda * p.b2();
    const double r1 = p.r1();
    const double r2 = p.r2();
    auto rhs = [&](const State& y) -> State {
        return {y[1], -lambda * y[0] + lb1 * y[2] + lb2 * y[3], y[0] - r1 * y[2], y[0] - r2 * y[3]};
    };
    auto axpy = [](const State& a, double h, const State& k) {
        return State{a[0] + h * k[0], a[1] + h * k[1], a[2] + h * k[2], a[3] + h * k[3]};
    };

    AugmentedRun run;
    run.v.reserve(static_cast<std::size_t>(steps) + 1);
    run.w.reserve(static_cast<std::size_t>(steps) + 1);
    State y{u0n, u1n, 0.0, 0.0};
    run.v.push_back(y[0]);
    run.w.push_back(y[1]);
    const double h = horizon / steps;
    for (int i = 0; i < steps; ++i) {
        const State k1 = rhs(y);
        const State k2 = rhs(axpy(y, 0.5 * h, k1));
        const State k3 = rhs(axpy(y, 0.5 * h, k2));
        const State k4 = rhs(axpy(y, h, k3));
        for (int j = 0; j < 4; ++j) y[static_cast<std::size_t>(j)] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        run.v.push_back(y[0]);
        run.w.push_back(y[1]);
    }
    return run;
}

} // namespace

VolterraTrajectory volterra_oracle(const ModelParams& params, double lambda, double u0n, double u1n, double horizon,
                                   int steps, double tolerance) {
    if (steps < 1) throw Error(ErrorKind::NotConverged, "step count must be positive");
    const AugmentedRun coarse = integrate_augmented(params, lambda, u0n, u1n, horizon, steps);
    const AugmentedRun fine = integrate_augmented(params, lambda, u0n, u1n, horizon, 2 * steps);

    double scale = 0.0;
    double change = 0.0;
    for (std::size_t i = 0; i < coarse.v.size(); ++i) {
        scale = std::max(scale, std::abs(fine.v[2 * i]));
        change = std::max(change, std::abs(fine.v[2 * i] - coarse.v[i]));
    }
    VolterraTrajectory out;
    out.steps = 2 * steps;
    out.halving_change = scale > 0.0 ? change / scale : 0.0;
    if (out.halving_change > tolerance) {
        std::ostringstream os;
        os << "step halving changed the trajectory by " << out.halving_change << " (tolerance " << tolerance
           << ", steps " << steps << ")";
        throw Error(ErrorKind::NotConverged, os.str());
    }
    out.values = fine.v;
    out.velocities = fine.w;
    out.times.resize(fine.v.size());
    for (std::size_t i = 0; i < out.times.size(); ++i) out.times[i] = horizon * static_cast<double>(i) / out.steps;
    return out;
}

} // namespace visco
