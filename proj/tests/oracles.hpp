#pragma once

// Reference computations that share no code with the library: Cardano roots of the
// deflated cubic, Laplace residues for the modal amplitudes, adaptive Gauss-Kronrod
// quadrature, and the Duhamel integral for boundary-forced modes.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

using cplx = std::complex<double>;
using lcplx = std::complex<long double>;

struct Params {
    double gamma, b1, b2, r1, r2;
};

inline constexpr Params kCanonical{1.0, 0.05, 0.15, 0.1, 0.3};

/// p(s) = (s² + λ)(s + r1)(s + r2) − λ b1 (s + r2) − λ b2 (s + r1), evaluated as written.
inline cplx quartic(const Params& p, double lambda, cplx s) {
    return (s * s + lambda) * (s + p.r1) * (s + p.r2) - lambda * p.b1 * (s + p.r2) - lambda * p.b2 * (s + p.r1);
}

inline cplx quartic_derivative(const Params& p, double lambda, cplx s) {
    return 2.0 * s * (s + p.r1) * (s + p.r2) + (s * s + lambda) * (2.0 * s + p.r1 + p.r2) - lambda * (p.b1 + p.b2);
}

/// Σ |c_k| |s|^k for the expanded quartic, the scale of |p(s)|.
inline double quartic_scale(const Params& p, double lambda, cplx s) {
    const double a = std::abs(s);
    const double c3 = p.r1 + p.r2;
    const double c2 = p.r1 * p.r2 + lambda;
    const double c1 = lambda * std::abs(p.r1 + p.r2 - p.b1 - p.b2);
    // The constant term cancels exactly; its unexpanded parts set the roundoff floor.
    const double c0 = lambda * (p.r1 * p.r2 + p.b1 * p.r2 + p.b2 * p.r1);
    return a * a * a * a + c3 * a * a * a + c2 * a * a + c1 * a + c0;
}

/// Roots of s³ + a s² + b s + c by Cardano in long double.
inline std::array<cplx, 3> cardano(long double a, long double b, long double c) {
    const long double p = b - a * a / 3.0L;
    const long double q = 2.0L * a * a * a / 27.0L - a * b / 3.0L + c;
    const lcplx disc = std::sqrt(lcplx(q * q / 4.0L + p * p * p / 27.0L));
    lcplx u = std::pow(-q / 2.0L + disc, 1.0L / 3.0L);
    if (std::abs(u) < 1e-30L) u = std::pow(-q / 2.0L - disc, 1.0L / 3.0L);
    const lcplx w(-0.5L, std::sqrt(3.0L) / 2.0L);
    std::array<cplx, 3> out;
    lcplx uk = u;
    for (int k = 0; k < 3; ++k) {
        const lcplx t = uk - p / (3.0L * uk);
        out[static_cast<std::size_t>(k)] = cplx(static_cast<double>((t - a / 3.0L).real()),
                                                static_cast<double>((t - a / 3.0L).imag()));
        uk *= w;
    }
    return out;
}

struct Roots {
    cplx oscillating; ///< iω, imaginary part positive
    double rho;
};

/// The cubic p(s)/s, solved by Cardano and sorted into the conjugate pair and the real root.
inline Roots cubic_roots(const Params& p, double lambda) {
    const auto r = cardano(p.r1 + p.r2, p.r1 * p.r2 + lambda, lambda * (p.r1 + p.r2 - p.b1 - p.b2));
    Roots out{};
    double smallest_imag = INFINITY;
    for (const auto& s : r) {
        if (s.imag() > 0 && std::abs(s.imag()) > std::abs(out.oscillating.imag())) out.oscillating = s;
        if (std::abs(s.imag()) < smallest_imag) {
            smallest_imag = std::abs(s.imag());
            out.rho = s.real();
        }
    }
    return out;
}

/// Residue of (s u0 + u1)(s + r1)(s + r2)/p(s) at a simple root: the amplitude of e^{s t}.
inline cplx residue(const Params& p, double lambda, cplx s, double u0, double u1) {
    return (s * u0 + u1) * (s + p.r1) * (s + p.r2) / quartic_derivative(p, lambda, s);
}

/// v(t) = Σ residues · e^{s t} over {0, iω, conj(iω), ρ}.
struct ModeSolution {
    std::array<cplx, 4> exponents;
    std::array<cplx, 4> amplitudes;
    Params params;

    double value(double t) const {
        cplx sum = 0.0;
        for (std::size_t k = 0; k < 4; ++k) sum += amplitudes[k] * std::exp(exponents[k] * t);
        return sum.real();
    }
    double derivative(double t) const {
        cplx sum = 0.0;
        for (std::size_t k = 0; k < 4; ++k) sum += amplitudes[k] * exponents[k] * std::exp(exponents[k] * t);
        return sum.real();
    }
    /// Σ_i b_i ∫₀ᵗ e^{−r_i(t−σ)} v(σ) dσ, term by term.
    double memory(double t) const {
        cplx sum = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            for (const auto& [b, r] : {std::pair{params.b1, params.r1}, std::pair{params.b2, params.r2}}) {
                sum += b * amplitudes[k] * (std::exp(exponents[k] * t) - std::exp(-r * t)) / (exponents[k] + r);
            }
        }
        return sum.real();
    }
};

inline ModeSolution mode_solution(const Params& p, double lambda, double u0, double u1) {
    const auto r = cubic_roots(p, lambda);
    ModeSolution m{};
    m.params = p;
    m.exponents = {cplx(0.0), r.oscillating, std::conj(r.oscillating), cplx(r.rho)};
    for (std::size_t k = 0; k < 4; ++k) m.amplitudes[k] = residue(p, lambda, m.exponents[k], u0, u1);
    return m;
}

/// Adaptive 61-point Gauss-Kronrod on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 30, tol);
}

/// ∫₀ᵀ sin(πt/T) e^{iwt} dt by quadrature of the real and imaginary parts.
inline cplx weighted_transform(cplx w, double T) {
    auto part = [&](bool imag) {
        return integrate(
            [&, imag](double t) {
                const cplx v = std::sin(std::numbers::pi * t / T) * std::exp(cplx(0.0, 1.0) * w * t);
                return imag ? v.imag() : v.real();
            },
            0.0, T);
    };
    return {part(false), part(true)};
}

/// Forced mode from rest, v'' + λ v − λ (k * v) = κ (f − k * f), with f(t) = sin(a t):
/// (v, v')(T) = κ ∫₀ᵀ (h, h')(T − s) g(s) ds, h the free mode from (0, 1), g = f − k * f in closed form.
inline std::pair<double, double> duhamel_sine(const Params& p, double lambda, double kappa, double a, double T) {
    const ModeSolution h = mode_solution(p, lambda, 0.0, 1.0);
    auto g = [&](double s) {
        double out = std::sin(a * s);
        for (const auto& [b, r] : {std::pair{p.b1, p.r1}, std::pair{p.b2, p.r2}}) {
            out -= b * (r * std::sin(a * s) - a * std::cos(a * s) + a * std::exp(-r * s)) / (r * r + a * a);
        }
        return out;
    };
    const double value = kappa * integrate([&](double s) { return h.value(T - s) * g(s); }, 0.0, T);
    const double velocity = kappa * integrate([&](double s) { return h.derivative(T - s) * g(s); }, 0.0, T);
    return {value, velocity};
}

} // namespace oracle
