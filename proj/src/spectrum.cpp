#include "visco/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "visco/error.hpp"

namespace visco {

namespace {

cplx horner(const std::array<double, 5>& c, cplx s) {
    cplx acc = c[4];
    for (int k = 3; k >= 0; --k) acc = acc * s + c[static_cast<std::size_t>(k)];
    return acc;
}

cplx horner_derivative(const std::array<double, 5>& c, cplx s) {
    cplx acc = 4.0 * c[4];
    for (int k = 3; k >= 1; --k) acc = acc * s + static_cast<double>(k) * c[static_cast<std::size_t>(k)];
    return acc;
}

double scale_at(const std::array<double, 5>& c, cplx s) {
    double scale = 0.0;
    double power = 1.0;
    for (double ck : c) {
        scale += std::abs(ck) * power;
        power *= std::abs(s);
    }
    return scale;
}

double residual_of(const std::array<double, 5>& c, cplx s) {
    const double scale = scale_at(c, s);
    return scale > 0.0 ? std::abs(horner(c, s)) / scale : 0.0;
}

cplx newton_polish(const std::array<double, 5>& c, cplx s) {
    const cplx d = horner_derivative(c, s);
    if (d == 0.0) return s;
    const cplx next = s - horner(c, s) / d;
    return residual_of(c, next) <= residual_of(c, s) ? next : s;
}

} // namespace

std::array<double, 5> quartic_coefficients(const ModelParams& p, double lambda) {
    const double rs = p.r_sum();
    const double rp = p.r1() * p.r2();
    return {
        lambda * (rp - p.b1() * p.r2() - p.b2() * p.r1()),
        lambda * (rs - p.b_sum()),
        rp + lambda,
        rs,
        1.0,
    };
}

cplx characteristic_poly(const ModelParams& params, double lambda, cplx s) {
    return horner(quartic_coefficients(params, lambda), s);
}

cplx characteristic_poly_derivative(const ModelParams& params, double lambda, cplx s) {
    return horner_derivative(quartic_coefficients(params, lambda), s);
}

double relative_residual(const ModelParams& params, double lambda, cplx s) {
    return residual_of(quartic_coefficients(params, lambda), s);
}

std::array<cplx, 4> ModalRoots::all() const {
    const cplx s = oscillating_root();
    return {cplx(0.0), s, std::conj(s), cplx(rho)};
}

ModalRoots exact_roots(const ModelParams& params, double lambda, int n) {
    const auto c = quartic_coefficients(params, lambda);

    // Monic cubic s³ + c3 s² + c2 s + c1 after removing the forced root s = 0.
    Eigen::Matrix3d companion;
    companion << -c[3], -c[2], -c[1],
                 1.0, 0.0, 0.0,
                 0.0, 1.0, 0.0;
    Eigen::EigenSolver<Eigen::Matrix3d> solver(companion, false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::RootClassificationFailure, "companion eigenvalue iteration failed");
    }
    const auto eig = solver.eigenvalues();

    std::vector<cplx> complex_roots;
    std::vector<double> real_roots;
    for (int i = 0; i < 3; ++i) {
        const cplx s = eig(i);
        if (std::abs(s.imag()) > 1e-10 * (1.0 + std::abs(s))) {
            complex_roots.push_back(s);
        } else {
            real_roots.push_back(s.real());
        }
    }
    if (complex_roots.size() != 2 || real_roots.size() != 1) {
        std::ostringstream os;
        os.precision(17);
        os << "lambda=" << lambda << " gives " << real_roots.size() << " real and " << complex_roots.size()
           << " complex cubic roots; expected one real root and a conjugate pair";
        throw Error(ErrorKind::RootClassificationFailure, os.str());
    }

    cplx s = complex_roots[0].imag() > 0.0 ? complex_roots[0] : complex_roots[1];
    s = newton_polish(c, s);
    const double rho = newton_polish(c, cplx(real_roots[0])).real();

    ModalRoots out;
    out.n = n;
    out.lambda = lambda;
    out.omega = cplx(s.imag(), -s.real());
    out.rho = rho;

    const double zero_residual = std::abs(c[0]) / (lambda * params.r1() * params.r2());
    out.residual = std::max({zero_residual, residual_of(c, s), residual_of(c, std::conj(s)), residual_of(c, cplx(rho))});

    if (!(out.rho < 0.0) || !(out.omega.imag() > 0.0) || !(out.omega.real() > 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "lambda=" << lambda << ": unexpected root signs, omega=" << out.omega << " rho=" << out.rho;
        throw Error(ErrorKind::RootClassificationFailure, os.str());
    }
    return out;
}

std::vector<ModalRoots> mode_roots(const SpectralBasis& basis, int modes) {
    std::vector<ModalRoots> out;
    out.reserve(static_cast<std::size_t>(std::max(modes, 0)));
    for (int n = 1; n <= modes; ++n) out.push_back(exact_roots(basis.params(), basis.eigenvalue(n), n));
    return out;
}

AsymptoticRoots asymptotic_roots(const ModelParams& params, double lambda) {
    return {cplx(std::sqrt(lambda), 0.5 * params.b_sum()), params.b_sum() - params.r_sum()};
}

int gap_lemma_index(std::span<const ModalRoots> roots, double gap, double epsilon) {
    const double sigma = gap * std::sqrt(1.0 - epsilon);
    const int count = static_cast<int>(roots.size());
    // A violating pair (n, m) forces n0 > min(n, m).
    int n0 = 1;
    for (int i = 0; i < count; ++i) {
        const double re_i = roots[static_cast<std::size_t>(i)].omega.real();
        if (re_i < sigma * (i + 1)) n0 = std::max(n0, i + 2);
        for (int j = i + 1; j < count; ++j) {
            const double re_j = roots[static_cast<std::size_t>(j)].omega.real();
            if (std::abs(re_j - re_i) < sigma * (j - i)) n0 = std::max(n0, i + 2);
        }
    }
    if (n0 > count) {
        throw Error(ErrorKind::NotFoundWithinRange,
                    "no gap-lemma index within " + std::to_string(count) + " modes for epsilon=" + std::to_string(epsilon));
    }
    return n0;
}

SpectralLimits spectral_limits(const ModelParams& params, int modes, std::span<const double> epsilons) {
    if (modes < 10) throw Error(ErrorKind::HypothesisViolated, "spectral_limits needs at least 10 modes");
    const auto roots = mode_roots(SpectralBasis(params), modes);

    SpectralLimits lim;
    lim.modes = modes;
    lim.gap = std::numeric_limits<double>::infinity();
    for (int n = modes / 2; n < modes; ++n) {
        const double d = roots[static_cast<std::size_t>(n)].omega.real() - roots[static_cast<std::size_t>(n - 1)].omega.real();
        lim.gap = std::min(lim.gap, d);
    }
    if (!(lim.gap > 0.0)) {
        throw Error(ErrorKind::GapDegenerate, "measured gap " + std::to_string(lim.gap) + " is not positive");
    }
    lim.alpha_omega = roots.back().omega.imag();
    lim.alpha_rho = roots.back().rho;

    const double default_eps[] = {kDefaultEpsilon};
    if (epsilons.empty()) epsilons = default_eps;
    for (double eps : epsilons) lim.n0_table[eps] = gap_lemma_index(roots, lim.gap, eps);
    return lim;
}

double control_time_threshold(const SpectralLimits& limits) {
    const double margin = limits.gap * limits.gap - 16.0 * limits.alpha_omega * limits.alpha_omega;
    if (!(margin > 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "gap " << limits.gap << " <= 4*alpha_omega = " << 4.0 * limits.alpha_omega;
        throw Error(ErrorKind::NoThreshold, os.str());
    }
    return 2.0 * std::numbers::pi / std::sqrt(margin);
}

} // namespace visco
