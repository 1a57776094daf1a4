#include "visco/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "visco/error.hpp"
#include "visco/modal.hpp"
#include "visco/parallel.hpp"

namespace visco::control {

namespace {

constexpr double kGramGate = 1e-9;
constexpr double kMaxCondition = 1e12;
constexpr double kStepsPerRadian = 150.0;

double entry(const std::vector<double>& v, int n) {
    const auto i = static_cast<std::size_t>(n - 1);
    return i < v.size() ? v[i] : 0.0;
}

double frequency_of_mode(const SpectralBasis& basis, int n) {
    return exact_roots(basis.params(), basis.eigenvalue(n), n).omega.real();
}

// RK4 over the modal states (v, w, y1, y2) of every mode plus the shared memories of f.
// `forcing` holds f on a grid of 2·steps intervals (samples at whole and half steps).
ModalState integrate_controlled(const SpectralBasis& basis, std::span<const double> forcing, int stride,
                                double horizon, int modes, int steps) {
    const ModelParams& p = basis.params();
    const auto N = static_cast<Eigen::Index>(modes);
    Eigen::ArrayXd lambda(N), gain(N);
    for (int n = 1; n <= modes; ++n) {
        lambda(n - 1) = basis.eigenvalue(n);
        gain(n - 1) = boundary_gain(basis, n);
    }
    const double b1 = p.b1(), b2 = p.b2(), r1 = p.r1(), r2 = p.r2();

    struct State {
        Eigen::ArrayXd v, w, y1, y2;
        double m1 = 0.0, m2 = 0.0; // ∫ e^{−r_i(t−s)} f(s) ds
    };
    auto zero = [&] {
        State s;
        s.v = s.w = s.y1 = s.y2 = Eigen::ArrayXd::Zero(N);
        return s;
    };
    auto rhs = [&](const State& s, double f) {
        State d;
        d.v = s.w;
        d.w = -lambda * s.v + lambda * (b1 * s.y1 + b2 * s.y2) + gain * (f - b1 * s.m1 - b2 * s.m2);
        d.y1 = s.v - r1 * s.y1;
        d.y2 = s.v - r2 * s.y2;
        d.m1 = f - r1 * s.m1;
        d.m2 = f - r2 * s.m2;
        return d;
    };
    auto axpy = [](const State& a, double h, const State& k) {
        State out;
        out.v = a.v + h * k.v;
        out.w = a.w + h * k.w;
        out.y1 = a.y1 + h * k.y1;
        out.y2 = a.y2 + h * k.y2;
        out.m1 = a.m1 + h * k.m1;
        out.m2 = a.m2 + h * k.m2;
        return out;
    };

    State s = zero();
    const double h = horizon / steps;
    for (int i = 0; i < steps; ++i) {
        const auto base = static_cast<std::size_t>(2 * i * stride);
        const double f0 = forcing[base];
        const double fh = forcing[base + static_cast<std::size_t>(stride)];
        const double f1 = forcing[base + 2 * static_cast<std::size_t>(stride)];
        const State k1 = rhs(s, f0);
        const State k2 = rhs(axpy(s, 0.5 * h, k1), fh);
        const State k3 = rhs(axpy(s, 0.5 * h, k2), fh);
        const State k4 = rhs(axpy(s, h, k3), f1);
        s.v += h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
        s.w += h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
        s.y1 += h / 6.0 * (k1.y1 + 2.0 * k2.y1 + 2.0 * k3.y1 + k4.y1);
        s.y2 += h / 6.0 * (k1.y2 + 2.0 * k2.y2 + 2.0 * k3.y2 + k4.y2);
        s.m1 += h / 6.0 * (k1.m1 + 2.0 * k2.m1 + 2.0 * k3.m1 + k4.m1);
        s.m2 += h / 6.0 * (k1.m2 + 2.0 * k2.m2 + 2.0 * k3.m2 + k4.m2);
    }
    ModalState out;
    out.value.assign(s.v.begin(), s.v.end());
    out.velocity.assign(s.w.begin(), s.w.end());
    return out;
}

ModalState difference(const ModalState& a, const ModalState& b, int modes) {
    ModalState d;
    for (int n = 1; n <= modes; ++n) {
        d.value.push_back(entry(a.value, n) - entry(b.value, n));
        d.velocity.push_back(entry(a.velocity, n) - entry(b.velocity, n));
    }
    return d;
}

} // namespace

bool ModalState::is_zero() const {
    return std::all_of(value.begin(), value.end(), [](double v) { return v == 0.0; }) &&
           std::all_of(velocity.begin(), velocity.end(), [](double v) { return v == 0.0; });
}

double l2_hminus1_norm_sq(const SpectralBasis& basis, const ModalState& state) {
    double sum = 0.0;
    for (double v : state.value) sum += v * v;
    for (std::size_t i = 0; i < state.velocity.size(); ++i) {
        sum += state.velocity[i] * state.velocity[i] / basis.eigenvalue(static_cast<int>(i + 1));
    }
    return sum;
}

double AdjointDatum::energy(const SpectralBasis& basis) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < z0.size(); ++i) sum += basis.eigenvalue(static_cast<int>(i + 1)) * z0[i] * z0[i];
    for (double v : z1) sum += v * v;
    return sum;
}

SolutionField adjoint_field(const SpectralBasis& basis, const AdjointDatum& datum) {
    InitialData data;
    data.u0 = datum.z0;
    data.u1.resize(datum.z0.size(), 0.0);
    for (std::size_t i = 0; i < data.u1.size() && i < datum.z1.size(); ++i) data.u1[i] = -datum.z1[i];
    return SolutionField::time_reversed(basis, data, datum.horizon);
}

double observation(const SolutionField& adjoint, double t) { return -adjoint.stress(t, std::numbers::pi); }

double boundary_gain(const SpectralBasis& basis, int n) {
    const double g = basis.params().gamma();
    return g * g * basis.factor() * n * (n % 2 == 1 ? 1.0 : -1.0);
}

Eigen::MatrixXd adjoint_trace_basis(const SpectralBasis& basis, double horizon, int modes,
                                    const quadrature::PanelRule& rule, TraceKind kind) {
    const auto rows = static_cast<Eigen::Index>(rule.size());
    Eigen::MatrixXd traces(rows, 2 * modes);
    const double g2 = basis.params().gamma() * basis.params().gamma();
    parallel_for(2 * modes, [&](int column) {
        const int n = column % modes + 1;
        const double lambda = basis.eigenvalue(n);
        const auto roots = exact_roots(basis.params(), lambda, n);
        // (e_n/√λ_n, 0) starts the free mode at (1/√λ_n, 0); (0, e_n) at (0, −1).
        const bool value_datum = column < modes;
        const auto coeffs = exact_coefficients(basis.params(), roots, value_datum ? 1.0 / std::sqrt(lambda) : 0.0,
                                               value_datum ? 0.0 : -1.0);
        const ModalTrajectory mode(basis.params(), roots, coeffs);
        const double gain = boundary_gain(basis, n);
        for (Eigen::Index j = 0; j < rows; ++j) {
            const double tau = horizon - rule.nodes[static_cast<std::size_t>(j)];
            traces(j, column) = kind == TraceKind::stress ? gain * mode.stress_factor(tau) : -gain / g2 * mode.value(tau);
        }
    });
    return traces;
}

GramMatrix gram_matrix(const Eigen::MatrixXd& traces, const quadrature::PanelRule& rule, double uncertainty) {
    const Eigen::Index dim = traces.cols();
    const Eigen::Map<const Eigen::VectorXd> w(rule.weights.data(), static_cast<Eigen::Index>(rule.size()));
    const Eigen::MatrixXd weighted = w.asDiagonal() * traces;
    GramMatrix out;
    out.matrix.resize(dim, dim);
    parallel_for(static_cast<int>(dim), [&](int k) { out.matrix.col(k) = traces.transpose() * weighted.col(k); });
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix, Eigen::EigenvaluesOnly);
    out.eigenvalues = eig.eigenvalues();
    out.min_eigenvalue = out.eigenvalues(0);
    const double top = out.eigenvalues(dim - 1);
    const double floor =
        std::max(64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(dim), uncertainty) * top;
    if (!(out.min_eigenvalue > floor)) {
        std::ostringstream os;
        os << "smallest Gram eigenvalue " << out.min_eigenvalue << " is not above " << floor
           << " (largest " << top << "); raise T or lower N";
        throw Error(ErrorKind::NotPositiveDefinite, os.str());
    }
    out.condition = top / out.min_eigenvalue;
    return out;
}

ControlSignal::ControlSignal(const SpectralBasis& basis, const AdjointDatum& datum)
    : datum_(datum), field_(adjoint_field(basis, datum)) {}

double ControlSignal::operator()(double t) const { return observation(field_, t); }

TraceSignal ControlSignal::sample(std::span<const double> grid) const {
    TraceSignal out;
    out.times.assign(grid.begin(), grid.end());
    out.values.reserve(grid.size());
    for (double t : grid) out.values.push_back((*this)(t));
    return out;
}

ControlVerification verify_control(const SpectralBasis& basis, const ControlFunction& f, const ModalState& target,
                                   double horizon, int modes, VerifyOptions options) {
    if (!(horizon > 0.0) || modes < 1) throw Error(ErrorKind::HypothesisViolated, "verify_control needs T > 0 and N ≥ 1");
    const int steps = options.steps > 0
                          ? options.steps
                          : std::max(64, static_cast<int>(std::ceil(horizon * frequency_of_mode(basis, modes) *
                                                                    kStepsPerRadian)));
    // Quarter-step samples serve the coarse run (stride 2) and the halved run (stride 1).
    const int intervals = 4 * steps;
    std::vector<double> forcing(static_cast<std::size_t>(intervals) + 1);
    for (int k = 0; k <= intervals; ++k) forcing[static_cast<std::size_t>(k)] = f(horizon * k / intervals);

    const ModalState coarse = integrate_controlled(basis, forcing, 2, horizon, modes, steps);
    const ModalState fine = integrate_controlled(basis, forcing, 1, horizon, modes, 2 * steps);

    ControlVerification out;
    out.steps = 2 * steps;
    const double scale = std::sqrt(l2_hminus1_norm_sq(basis, fine));
    const double change = std::sqrt(l2_hminus1_norm_sq(basis, difference(fine, coarse, modes)));
    out.halving_change = scale > 0.0 ? change / scale : change;
    if (out.halving_change > options.tolerance) {
        std::ostringstream os;
        os << "controlled solve moved by " << out.halving_change << " under step halving (" << steps << " steps)";
        throw Error(ErrorKind::NotConverged, os.str());
    }
    out.achieved = fine;
    const double err = std::sqrt(l2_hminus1_norm_sq(basis, difference(fine, target, modes)));
    ModalState truncated = difference(target, ModalState{}, modes);
    const double ref = std::sqrt(l2_hminus1_norm_sq(basis, truncated));
    out.target_error = ref > 0.0 ? err / ref : err;
    return out;
}

Eigen::VectorXd load_vector(const SpectralBasis& basis, const ModalState& target, int modes) {
    Eigen::VectorXd b(2 * modes);
    for (int n = 1; n <= modes; ++n) {
        b(n - 1) = entry(target.velocity, n) / std::sqrt(basis.eigenvalue(n));
        b(modes + n - 1) = -entry(target.value, n);
    }
    return b;
}

ControlResult solve_hum(const SpectralBasis& basis, const ModalState& target, double horizon, int modes,
                        HumOptions options) {
    if (!(horizon > 0.0) || modes < 1) throw Error(ErrorKind::HypothesisViolated, "solve_hum needs T > 0 and N ≥ 1");
    // Products of two traces oscillate at up to twice the fastest mode.
    const auto coarse = quadrature::oscillatory_rule(0.0, horizon, 2.0 * frequency_of_mode(basis, modes));
    const auto fine = quadrature::refined(coarse);
    const Eigen::MatrixXd w_coarse = adjoint_trace_basis(basis, horizon, modes, coarse);
    const Eigen::MatrixXd w_fine = adjoint_trace_basis(basis, horizon, modes, fine);

    const Eigen::Map<const Eigen::VectorXd> wc(coarse.weights.data(), static_cast<Eigen::Index>(coarse.size()));
    const Eigen::MatrixXd gram_coarse = w_coarse.transpose() * wc.asDiagonal() * w_coarse;
    const Eigen::Map<const Eigen::VectorXd> wf(fine.weights.data(), static_cast<Eigen::Index>(fine.size()));
    const Eigen::MatrixXd gram_fine = w_fine.transpose() * wf.asDiagonal() * w_fine;

    ControlResult out;
    out.quadrature_change = (gram_fine - gram_coarse).norm() / gram_fine.norm();
    if (out.quadrature_change > kGramGate) {
        std::ostringstream os;
        os << "Gram entries moved by " << out.quadrature_change << " under panel halving";
        throw Error(ErrorKind::QuadratureNotConverged, os.str());
    }
    const GramMatrix gram = gram_matrix(w_fine, fine, out.quadrature_change);
    out.gram_condition = gram.condition;
    out.gram_min_eigenvalue = gram.min_eigenvalue;
    if (gram.condition > kMaxCondition) {
        std::ostringstream os;
        os << "Gram condition number " << gram.condition << " exceeds " << kMaxCondition << "; lower N or raise T";
        throw Error(ErrorKind::IllConditioned, os.str());
    }

    Eigen::MatrixXd system = gram.matrix;
    system.diagonal().array() += options.tikhonov;
    const Eigen::VectorXd b = load_vector(basis, target, modes);
    const Eigen::VectorXd c = system.ldlt().solve(b);
    out.coefficients.assign(c.data(), c.data() + c.size());

    out.datum.horizon = horizon;
    for (int n = 1; n <= modes; ++n) {
        out.datum.z0.push_back(c(n - 1) / std::sqrt(basis.eigenvalue(n)));
        out.datum.z1.push_back(c(modes + n - 1));
    }
    out.control_norm = std::sqrt(std::max(0.0, c.dot(gram.matrix * c)));

    const ControlSignal signal(basis, out.datum);
    const auto grid = trace_grid(adjoint_field(basis, out.datum), horizon);
    out.f = signal.sample(grid);

    const auto check = verify_control(basis, std::cref(signal), target, horizon, modes, options.verify);
    out.achieved = check.achieved;
    out.target_error = check.target_error;
    return out;
}

DualityCheck duality_check(const SpectralBasis& basis, const ControlFunction& f, double signal_frequency,
                           const AdjointDatum& datum, VerifyOptions options) {
    const int modes = static_cast<int>(datum.z0.size());
    const double T = datum.horizon;
    const auto forward = verify_control(basis, f, ModalState{}, T, modes, options);

    DualityCheck out;
    for (int n = 1; n <= modes; ++n) {
        out.pairing += entry(forward.achieved.velocity, n) * entry(datum.z0, n) -
                       entry(forward.achieved.value, n) * entry(datum.z1, n);
    }
    const SolutionField z = adjoint_field(basis, datum);
    const double frequency = signal_frequency + z.max_frequency();
    out.integral = quadrature::integrate_gated([&](double t) { return f(t) * observation(z, t); }, 0.0, T, frequency).value;
    const double scale = std::max(std::abs(out.pairing), std::abs(out.integral));
    out.relative_error = scale > 0.0 ? std::abs(out.pairing - out.integral) / scale : 0.0;
    return out;
}

} // namespace visco::control
