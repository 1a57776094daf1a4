#include "visco/ingham.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "visco/error.hpp"
#include "visco/modal.hpp"
#include "visco/parallel.hpp"
#include "visco/random.hpp"

namespace visco::ingham {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGateTolerance = 1e-9;
const cplx kI(0.0, 1.0);

// e^z − 1 without cancellation for small |z|.
cplx expm1_complex(cplx z) {
    const double x = z.real();
    const double y = z.imag();
    const double s = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

void check_gate(double coarse, double fine, double scale, const char* what) {
    const double change = std::abs(fine - coarse);
    if (change > kGateTolerance * scale && change > 1e-300) {
        std::ostringstream os;
        os << what << ": panel halving changed the integral by " << change << " (scale " << scale << ")";
        throw Error(ErrorKind::QuadratureNotConverged, os.str());
    }
}

} // namespace

double weight_g(double t, double T) {
    if (t < 0.0 || t > T) return 0.0;
    return std::sin(kPi * t / T);
}

cplx kernel_G(cplx w, double T) {
    const double pole = kPi / T;
    if (std::abs(w - pole) < 1e-8 || std::abs(w + pole) < 1e-8) {
        std::ostringstream os;
        os << "w=" << w << " is within 1e-8 of the pole ±" << pole;
        throw Error(ErrorKind::NearPole, os.str());
    }
    return -T * kPi / (T * T * w * w - kPi * kPi);
}

cplx weighted_transform(cplx w, double T) {
    const double a = kPi / T;
    // Near ±a both factors vanish; write 1 + e^{iwT} = −expm1(iδT) with δ = w ∓ a.
    if (std::abs(w - a) < 0.5 * a) {
        const cplx d = w - a;
        if (d == 0.0) return kI * (0.5 * T);
        return a * expm1_complex(kI * d * T) / (d * (2.0 * a + d));
    }
    if (std::abs(w + a) < 0.5 * a) {
        const cplx d = w + a;
        if (d == 0.0) return -kI * (0.5 * T);
        return -a * expm1_complex(kI * d * T) / (d * (2.0 * a - d));
    }
    return (1.0 + std::exp(kI * w * T)) * (-T * kPi / (T * T * w * w - kPi * kPi));
}

double kernel_bound(double sigma, int n, double T) {
    if (!(T > 2.0 * kPi / sigma)) {
        std::ostringstream os;
        os << "kernel bound needs T > 2π/σ = " << 2.0 * kPi / sigma << ", got T=" << T;
        throw Error(ErrorKind::HypothesisViolated, os.str());
    }
    return 4.0 * kPi / (T * sigma * sigma * (4.0 * n * n - 1.0));
}

WeightSetup WeightSetup::make(double T, double epsilon, const SpectralLimits& limits, std::span<const ModalRoots> roots,
                              double M, double nu) {
    const double minimum = 2.0 * kPi / (limits.gap * std::sqrt(1.0 - epsilon));
    if (!(T > minimum)) {
        std::ostringstream os;
        os << "T=" << T << " must exceed 2π/(gap√(1−ε)) = " << minimum;
        throw Error(ErrorKind::HypothesisViolated, os.str());
    }
    WeightSetup s;
    s.T = T;
    s.epsilon = epsilon;
    s.n0 = gap_lemma_index(roots, limits.gap, epsilon);
    s.nu = nu;
    s.M = M;
    return s;
}

double tail_threshold(const WeightSetup& setup, const SpectralLimits& limits) {
    const double g = limits.gap;
    return kPi * setup.epsilon / (setup.T * g * g * (1.0 - setup.epsilon));
}

int tail_index(const WeightSetup& setup, const SpectralLimits& limits, std::span<const ModalRoots> roots, double a) {
    const int count = static_cast<int>(roots.size());
    if (count == 0) throw Error(ErrorKind::NotFoundWithinRange, "no retained modes");
    if (a <= 0.0) return roots.front().n;

    const double threshold = tail_threshold(setup, limits);
    const double sigma = limits.gap * std::sqrt(1.0 - setup.epsilon);
    const int last = roots.back().n;
    // Σ_{n>N} 4π/(Tσ²(4n²−1)) telescopes to 4π/(Tσ²) · 1/(2(2N+1)).
    const double beyond = 4.0 * kPi / (setup.T * sigma * sigma) / (2.0 * (2.0 * last + 1.0));

    std::vector<double> magnitude(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) magnitude[static_cast<std::size_t>(i)] = std::abs(kernel_G(roots[static_cast<std::size_t>(i)].omega, setup.T));

    double suffix_sum = 0.0;
    double suffix_max = 0.0;
    int best = -1;
    for (int i = count - 1; i >= 0; --i) {
        suffix_sum += magnitude[static_cast<std::size_t>(i)];
        suffix_max = std::max(suffix_max, magnitude[static_cast<std::size_t>(i)]);
        if (a * suffix_max <= threshold && a * (suffix_sum + beyond) <= threshold) {
            best = i;
        } else {
            break;
        }
    }
    if (best < 0) {
        std::ostringstream os;
        os << "a=" << a << ": tail bound " << threshold << " not met within " << count << " modes";
        throw Error(ErrorKind::NotFoundWithinRange, os.str());
    }
    return roots[static_cast<std::size_t>(best)].n;
}

double theorem_constant(double T, double epsilon, const SpectralLimits& limits) {
    const double a = limits.alpha_omega;
    const double g = limits.gap;
    return 2.0 * kPi * T * (1.0 / (kPi * kPi + 4.0 * T * T * a * a * (1.0 + epsilon)) - 4.0 / (T * T * g * g * (1.0 - epsilon)));
}

double positivity_threshold(double epsilon, const SpectralLimits& limits) {
    const double a = limits.alpha_omega;
    const double g = limits.gap;
    const double radicand = g * g * (1.0 - epsilon) - 16.0 * a * a * (1.0 + epsilon);
    if (!(radicand > 0.0)) {
        std::ostringstream os;
        os << "γ²(1−ε) − 16α_ω²(1+ε) = " << radicand << " is not positive";
        throw Error(ErrorKind::NoThreshold, os.str());
    }
    return 2.0 * kPi / std::sqrt(radicand);
}

// ---------------------------------------------------------------------------
// Inverse inequality

InverseObservation::InverseObservation(const ModelParams& params, double T, int modes, double epsilon)
    : params_(params), T_(T), epsilon_(epsilon) {
    const SpectralBasis basis(params);
    roots_ = mode_roots(basis, modes);
    constant_ = theorem_constant(T, epsilon, spectral_limits(params, std::max(modes, 10)));
    // The exponents {0, iω_n, conj(iω_n), ρ_n} must be pairwise distinct across modes.
    for (std::size_t a = 0; a < roots_.size(); ++a) {
        for (std::size_t b = a + 1; b < roots_.size(); ++b) {
            const bool omega_clash = std::abs(roots_[a].omega - roots_[b].omega) <= 1e-10 * (1.0 + std::abs(roots_[a].omega));
            const bool rho_clash = std::abs(roots_[a].rho - roots_[b].rho) <= 1e-10 * (1.0 + std::abs(roots_[a].rho));
            if (omega_clash || rho_clash) {
                std::ostringstream os;
                os << "modes " << roots_[a].n << " and " << roots_[b].n << " share an exponent ("
                   << (omega_clash ? "omega" : "rho") << ")";
                throw Error(ErrorKind::HypothesisViolated, os.str());
            }
        }
    }

    unit_.reserve(roots_.size());
    for (const auto& r : roots_) {
        const auto a = exact_coefficients(params, r, 1.0, 0.0);
        const auto b = exact_coefficients(params, r, 0.0, 1.0);
        unit_.push_back({{a.C, b.C}, {a.R1, b.R1}, {a.R2, b.R2}});
    }

    coarse_ = quadrature::oscillatory_rule(0.0, T, roots_.empty() ? 1.0 : roots_.back().omega.real());
    fine_ = quadrature::refined(coarse_);
    auto tabulate = [&](const quadrature::PanelRule& rule, std::vector<std::vector<cplx>>& osc,
                        std::vector<std::vector<double>>& decay) {
        osc.assign(roots_.size(), std::vector<cplx>(rule.size()));
        decay.assign(roots_.size(), std::vector<double>(rule.size()));
        for (std::size_t m = 0; m < roots_.size(); ++m) {
            const cplx s = roots_[m].oscillating_root();
            for (std::size_t j = 0; j < rule.size(); ++j) {
                osc[m][j] = std::exp(s * rule.nodes[j]);
                decay[m][j] = std::exp(roots_[m].rho * rule.nodes[j]);
            }
        }
    };
    tabulate(coarse_, osc_coarse_, rho_coarse_);
    tabulate(fine_, osc_fine_, rho_fine_);
}

std::pair<double, double> InverseObservation::remainders(int n, cplx C) const {
    const auto& u = unit_[static_cast<std::size_t>(n - 1)];
    Eigen::Matrix2d M;
    M << u.C[0].real(), u.C[1].real(), u.C[0].imag(), u.C[1].imag();
    const Eigen::Vector2d d = M.partialPivLu().solve(Eigen::Vector2d(C.real(), C.imag()));
    return {d(0) * u.R1[0] + d(1) * u.R1[1], d(0) * u.R2[0] + d(1) * u.R2[1]};
}

std::vector<double> InverseObservation::values_on(const quadrature::PanelRule& rule,
                                                  const std::vector<std::vector<cplx>>& osc,
                                                  const std::vector<std::vector<double>>& decay,
                                                  std::span<const cplx> amplitudes) const {
    std::vector<double> values(rule.size(), 0.0);
    for (std::size_t m = 0; m < roots_.size() && m < amplitudes.size(); ++m) {
        const cplx C = amplitudes[m];
        if (C == 0.0) continue;
        const auto [R1, R2] = remainders(static_cast<int>(m + 1), C);
        for (std::size_t j = 0; j < rule.size(); ++j) {
            values[j] += 2.0 * (C * osc[m][j]).real() + R1 + R2 * decay[m][j];
        }
    }
    return values;
}

double InverseObservation::series_value(std::span<const cplx> amplitudes, double t) const {
    double sum = 0.0;
    for (std::size_t m = 0; m < roots_.size() && m < amplitudes.size(); ++m) {
        const cplx C = amplitudes[m];
        if (C == 0.0) continue;
        const auto [R1, R2] = remainders(static_cast<int>(m + 1), C);
        sum += 2.0 * (C * std::exp(roots_[m].oscillating_root() * t)).real() + R1 + R2 * std::exp(roots_[m].rho * t);
    }
    return sum;
}

InequalityReport InverseObservation::evaluate(std::span<const cplx> amplitudes) const {
    InequalityReport rep;
    rep.rhs_constant = constant_;
    rep.theorem_constant_positive = constant_ > 0.0;
    for (std::size_t m = 0; m < roots_.size() && m < amplitudes.size(); ++m) {
        rep.rhs_sum += (1.0 + std::exp(-2.0 * roots_[m].omega.imag() * T_)) * std::norm(amplitudes[m]);
    }
    if (rep.rhs_sum == 0.0) {
        rep.ratio = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    const auto vc = values_on(coarse_, osc_coarse_, rho_coarse_, amplitudes);
    const auto vf = values_on(fine_, osc_fine_, rho_fine_, amplitudes);
    double coarse = 0.0;
    double fine = 0.0;
    for (std::size_t j = 0; j < vc.size(); ++j) coarse += coarse_.weights[j] * vc[j] * vc[j];
    for (std::size_t j = 0; j < vf.size(); ++j) fine += fine_.weights[j] * vf[j] * vf[j];
    check_gate(coarse, fine, fine, "inverse inequality");
    rep.lhs = fine;
    rep.ratio = rep.lhs / rep.rhs_sum;
    return rep;
}

double InverseObservation::worst_case_ratio() const {
    const int dim = 2 * modes();
    Eigen::MatrixXd F(static_cast<Eigen::Index>(fine_.size()), dim);
    for (int m = 0; m < modes(); ++m) {
        const double norm = 1.0 / std::sqrt(1.0 + std::exp(-2.0 * roots_[static_cast<std::size_t>(m)].omega.imag() * T_));
        const cplx unit[2] = {cplx(1.0, 0.0), cplx(0.0, 1.0)};
        for (int k = 0; k < 2; ++k) {
            const cplx amps_C = unit[k];
            const auto [R1, R2] = remainders(m + 1, amps_C);
            for (std::size_t j = 0; j < fine_.size(); ++j) {
                const double v = 2.0 * (amps_C * osc_fine_[static_cast<std::size_t>(m)][j]).real() + R1 +
                                 R2 * rho_fine_[static_cast<std::size_t>(m)][j];
                F(static_cast<Eigen::Index>(j), 2 * m + k) = norm * v;
            }
        }
    }
    const Eigen::Map<const Eigen::VectorXd> w(fine_.weights.data(), static_cast<Eigen::Index>(fine_.size()));
    Eigen::MatrixXd gram = F.transpose() * w.asDiagonal() * F;
    gram = 0.5 * (gram + gram.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

std::vector<cplx> random_amplitudes(int modes, double decay, std::uint64_t seed, std::uint64_t stream) {
    StreamRng rng(seed, stream);
    std::vector<cplx> out(static_cast<std::size_t>(modes));
    for (int n = 1; n <= modes; ++n) {
        const double magnitude = rng.uniform() * std::pow(static_cast<double>(n), -decay);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        out[static_cast<std::size_t>(n - 1)] = std::polar(magnitude, phase);
    }
    return out;
}

InverseExperiment verify_inverse(const ModelParams& params, double T, int modes, int trials, std::uint64_t seed,
                                 InverseOptions options) {
    InverseExperiment ex;
    ex.T = T;
    ex.modes = modes;
    ex.epsilon = options.epsilon;
    ex.limits = spectral_limits(params, std::max(modes, 10), std::span<const double>(&options.epsilon, 1));
    ex.threshold = control_time_threshold(ex.limits);
    if (!(T > ex.threshold)) {
        std::ostringstream os;
        os << "T=" << T << " does not exceed the control-time threshold " << ex.threshold;
        throw Error(ErrorKind::HypothesisViolated, os.str());
    }
    const InverseObservation obs(params, T, modes, options.epsilon);
    ex.theorem_constant = theorem_constant(T, options.epsilon, ex.limits);
    ex.trials.resize(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int k) {
        const auto C = random_amplitudes(modes, options.decay, seed, static_cast<std::uint64_t>(k));
        ex.trials[static_cast<std::size_t>(k)] = obs.evaluate(C);
    });
    ex.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& t : ex.trials) {
        if (!std::isnan(t.ratio)) ex.min_ratio = std::min(ex.min_ratio, t.ratio);
    }
    ex.worst_case_ratio = obs.worst_case_ratio();
    return ex;
}

// ---------------------------------------------------------------------------
// Weighted lower bound over the tail n ≥ n0

WeightedBound weighted_lower_bound(std::span<const ModalRoots> roots, std::span<const cplx> amplitudes, int n0, double T,
                                   double epsilon, double gap) {
    WeightedBound out;
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < roots.size() && i < amplitudes.size(); ++i) {
        if (roots[i].n >= n0 && amplitudes[i] != 0.0) active.push_back(i);
    }
    if (active.empty()) return out;

    const double penalty = 4.0 / (T * T * gap * gap * (1.0 - epsilon));
    for (std::size_t i : active) {
        const double im = roots[i].omega.imag();
        out.rhs += 2.0 * kPi * T * (1.0 / (kPi * kPi + 4.0 * T * T * im * im) - penalty) *
                   (1.0 + std::exp(-2.0 * im * T)) * std::norm(amplitudes[i]);
    }
    double max_freq = 0.0;
    for (std::size_t i : active) max_freq = std::max(max_freq, roots[i].omega.real());
    auto integrand = [&](double t) {
        double sum = 0.0;
        for (std::size_t i : active) sum += 2.0 * (amplitudes[i] * std::exp(roots[i].oscillating_root() * t)).real();
        return weight_g(t, T) * sum * sum;
    };
    out.lhs = quadrature::integrate_gated(integrand, 0.0, T, max_freq, kGateTolerance).value;
    return out;
}

WeightedBoundReport verify_weighted_lower_bound(const ModelParams& params, double T, double epsilon, int modes,
                                                int draws, std::uint64_t seed, double decay) {
    const auto roots = mode_roots(SpectralBasis(params), modes);
    const auto limits = spectral_limits(params, std::max(modes, 10), std::span<const double>(&epsilon, 1));
    const WeightSetup setup = WeightSetup::make(T, epsilon, limits, roots, 0.0);

    WeightedBoundReport rep;
    rep.n0 = setup.n0;
    rep.draws.resize(static_cast<std::size_t>(draws));
    parallel_for(draws, [&](int k) {
        auto C = random_amplitudes(modes, decay, seed, static_cast<std::uint64_t>(k));
        rep.draws[static_cast<std::size_t>(k)] = weighted_lower_bound(roots, C, setup.n0, T, epsilon, limits.gap);
    });
    rep.worst_violation = -std::numeric_limits<double>::infinity();
    for (const auto& d : rep.draws) {
        if (d.rhs == 0.0 && d.lhs == 0.0) continue;
        rep.worst_violation = std::max(rep.worst_violation, (d.rhs - d.lhs) / std::abs(d.rhs));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Direct inequality

namespace {

// Free-solution boundary slopes are linear in the data:
// u_x(t, x) = c Σ n cos(nx) (u0n A_n(t) + u1n B_n(t)), A/B the unit-data trajectories.
class DirectObservation {
public:
    DirectObservation(const SpectralBasis& basis, double T, int modes) : factor_(basis.factor()) {
        const auto roots = mode_roots(basis, modes);
        coarse_ = quadrature::oscillatory_rule(0.0, T, roots.back().omega.real());
        fine_ = quadrature::refined(coarse_);
        tabulate(basis, roots, coarse_, a_coarse_, b_coarse_);
        tabulate(basis, roots, fine_, a_fine_, b_fine_);
    }

    double boundary_energy(const InitialData& data) const {
        const double coarse = energy(data, coarse_, a_coarse_, b_coarse_);
        const double fine = energy(data, fine_, a_fine_, b_fine_);
        check_gate(coarse, fine, fine, "direct inequality");
        return fine;
    }

private:
    static void tabulate(const SpectralBasis& basis, const std::vector<ModalRoots>& roots,
                         const quadrature::PanelRule& rule, Eigen::MatrixXd& a, Eigen::MatrixXd& b) {
        const auto rows = static_cast<Eigen::Index>(rule.size());
        const auto cols = static_cast<Eigen::Index>(roots.size());
        a.resize(rows, cols);
        b.resize(rows, cols);
        for (Eigen::Index m = 0; m < cols; ++m) {
            const auto& r = roots[static_cast<std::size_t>(m)];
            const ModalTrajectory ta(basis.params(), r, exact_coefficients(basis.params(), r, 1.0, 0.0));
            const ModalTrajectory tb(basis.params(), r, exact_coefficients(basis.params(), r, 0.0, 1.0));
            for (Eigen::Index j = 0; j < rows; ++j) {
                a(j, m) = ta.value(rule.nodes[static_cast<std::size_t>(j)]);
                b(j, m) = tb.value(rule.nodes[static_cast<std::size_t>(j)]);
            }
        }
    }

    double energy(const InitialData& data, const quadrature::PanelRule& rule, const Eigen::MatrixXd& a,
                  const Eigen::MatrixXd& b) const {
        const Eigen::Index cols = a.cols();
        Eigen::VectorXd left0(cols), left1(cols), right0(cols), right1(cols);
        for (Eigen::Index m = 0; m < cols; ++m) {
            const double n = static_cast<double>(m + 1);
            const double sign = (m % 2 == 0) ? -1.0 : 1.0; // cos(nπ)
            const auto i = static_cast<std::size_t>(m);
            const double u0 = i < data.u0.size() ? data.u0[i] : 0.0;
            const double u1 = i < data.u1.size() ? data.u1[i] : 0.0;
            left0(m) = factor_ * n * u0;
            left1(m) = factor_ * n * u1;
            right0(m) = sign * left0(m);
            right1(m) = sign * left1(m);
        }
        const Eigen::VectorXd at_zero = a * left0 + b * left1;
        const Eigen::VectorXd at_pi = a * right0 + b * right1;
        double sum = 0.0;
        for (std::size_t j = 0; j < rule.size(); ++j) {
            const auto k = static_cast<Eigen::Index>(j);
            sum += rule.weights[j] * (at_zero(k) * at_zero(k) + at_pi(k) * at_pi(k));
        }
        return sum;
    }

    double factor_;
    quadrature::PanelRule coarse_, fine_;
    Eigen::MatrixXd a_coarse_, b_coarse_, a_fine_, b_fine_;
};

double data_norm(const SpectralBasis& basis, const InitialData& data) {
    return data.d_sqrt_l_norm_sq(basis) + data.h_norm_sq();
}

} // namespace

DirectTrial direct_ratio(const SpectralBasis& basis, double T, const InitialData& data) {
    DirectTrial out;
    out.data_norm = data_norm(basis, data);
    if (out.data_norm == 0.0) return out;
    const DirectObservation obs(basis, T, data.modes());
    out.lhs = obs.boundary_energy(data);
    out.ratio = out.lhs / out.data_norm;
    return out;
}

InitialData random_direct_data(int modes, double decay, std::uint64_t seed, std::uint64_t stream) {
    StreamRng rng(seed, stream);
    InitialData d;
    d.u0.resize(static_cast<std::size_t>(modes));
    d.u1.resize(static_cast<std::size_t>(modes));
    for (int n = 1; n <= modes; ++n) {
        const double scale = std::pow(static_cast<double>(n), -decay);
        d.u0[static_cast<std::size_t>(n - 1)] = rng.uniform(-1.0, 1.0) * scale;
        d.u1[static_cast<std::size_t>(n - 1)] = rng.uniform(-1.0, 1.0) * scale;
    }
    return d;
}

DirectExperiment verify_direct(const ModelParams& params, double T, int modes, int trials, std::uint64_t seed,
                               double decay) {
    if (!(T > 0.0)) throw Error(ErrorKind::HypothesisViolated, "direct inequality needs T > 0");
    const SpectralBasis basis(params);
    const DirectObservation obs(basis, T, modes);
    DirectExperiment ex;
    ex.trials.resize(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int k) {
        const InitialData data = random_direct_data(modes, decay, seed, static_cast<std::uint64_t>(k));
        DirectTrial t;
        t.data_norm = data_norm(basis, data);
        t.lhs = obs.boundary_energy(data);
        t.ratio = t.data_norm > 0.0 ? t.lhs / t.data_norm : 0.0;
        ex.trials[static_cast<std::size_t>(k)] = t;
    });
    for (const auto& t : ex.trials) ex.C0 = std::max(ex.C0, t.ratio);
    return ex;
}

} // namespace visco::ingham
