#pragma once

#include <array>
#include <complex>
#include <map>
#include <span>
#include <vector>

#include "visco/model.hpp"

namespace visco {

using cplx = std::complex<double>;

// Each Fourier mode of the memory equation behaves like e^{st}, s a root of
//   p(s) = (s² + λ)(s + r1)(s + r2) − λ b1 (s + r2) − λ b2 (s + r1).
// b1/r1 + b2/r2 = 1 makes p(0) = 0; the other three roots are i·ω, conj(i·ω), ρ.

/// c[k] multiplies s^k.
std::array<double, 5> quartic_coefficients(const ModelParams& params, double lambda);
cplx characteristic_poly(const ModelParams& params, double lambda, cplx s);
cplx characteristic_poly_derivative(const ModelParams& params, double lambda, cplx s);
/// |p(s)| / Σ |c_k| |s|^k.
double relative_residual(const ModelParams& params, double lambda, cplx s);

struct ModalRoots {
    int n = 0;
    double lambda = 0.0;
    cplx omega;          // Re ω > 0, Im ω > 0
    double rho = 0.0;    // < 0
    double residual = 0; // max relative residual over the four roots

    /// s = iω, the root carrying e^{iωt}.
    cplx oscillating_root() const { return {-omega.imag(), omega.real()}; }
    /// {0, iω, conj(iω), ρ}.
    std::array<cplx, 4> all() const;
};

/// Deflates s = 0, solves the cubic by companion-matrix eigenvalues and polishes
/// each root with a Newton step on the quartic. Throws RootClassificationFailure
/// when the cubic has three real roots (or a root with the wrong sign).
ModalRoots exact_roots(const ModelParams& params, double lambda, int n = 0);

/// exact_roots for n = 1..modes of the basis.
std::vector<ModalRoots> mode_roots(const SpectralBasis& basis, int modes);

struct AsymptoticRoots {
    cplx omega; // √λ + i(b1+b2)/2
    double rho; // b1 + b2 − r1 − r2
};

AsymptoticRoots asymptotic_roots(const ModelParams& params, double lambda);

struct SpectralLimits {
    double gap = 0.0;         // min of Re ω_{n+1} − Re ω_n over the upper half of the retained modes
    double alpha_omega = 0.0; // Im ω_N
    double alpha_rho = 0.0;   // ρ_N
    int modes = 0;
    std::map<double, int> n0_table; // ε → minimal verified gap-lemma index
};

inline constexpr double kDefaultEpsilon = 0.01;

/// Throws GapDegenerate if the measured gap is not positive.
SpectralLimits spectral_limits(const ModelParams& params, int modes,
                               std::span<const double> epsilons = std::span<const double>());

/// Smallest n0 with |Re ω_n − Re ω_m| ≥ gap√(1−ε)|n−m| and Re ω_n ≥ gap√(1−ε) n
/// for all retained n, m ≥ n0. Throws NotFoundWithinRange.
int gap_lemma_index(std::span<const ModalRoots> roots, double gap, double epsilon);

/// T₀ = 2π / √(gap² − 16 α_ω²); NoThreshold when gap ≤ 4 α_ω.
double control_time_threshold(const SpectralLimits& limits);

} // namespace visco
