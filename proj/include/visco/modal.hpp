#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "visco/model.hpp"
#include "visco/spectrum.hpp"

namespace visco {

/// Amplitudes of one mode, v(t) = C e^{iωt} + conj(C) e^{−i·conj(ω)t} + R1 + R2 e^{ρt}.
struct ModalCoefficients {
    int n = 0;
    cplx C;
    double R1 = 0.0;
    double R2 = 0.0;
};

/// Matches v(0) = u0, v'(0) = u1, v''(0) = −λu0, v'''(0) = −λu1 + λ(b1+b2)u0.
/// The last two follow from the equation because both memory integrals vanish at t = 0.
/// Throws SingularSystem for (near-)confluent roots.
ModalCoefficients exact_coefficients(const ModelParams& params, const ModalRoots& roots, double u0n, double u1n);

/// Leading terms of the large-λ expansions of C, R1 and R2.
ModalCoefficients asymptotic_coefficients(const ModelParams& params, double lambda, double u0n, double u1n);

/// Modal data (u0n, u1n) whose exact amplitude is the prescribed C.
std::pair<double, double> data_for_amplitude(const ModelParams& params, const ModalRoots& roots, cplx C);

/// ∫₀ᵗ e^{−r(t−σ)} e^{sσ} dσ, stable when s ≈ −r.
cplx exp_convolution(cplx s, double r, double t);

/// Closed-form time evolution of one mode.
class ModalTrajectory {
public:
    ModalTrajectory(const ModelParams& params, const ModalRoots& roots, const ModalCoefficients& coeffs)
        : params_(params), roots_(roots), coeffs_(coeffs) {}

    const ModalRoots& roots() const { return roots_; }
    const ModalCoefficients& coefficients() const { return coeffs_; }

    /// d^k v / dt^k.
    double derivative(double t, int order) const;
    double value(double t) const { return derivative(t, 0); }
    double velocity(double t) const { return derivative(t, 1); }

    /// (k * v)(t) = Σ_i b_i ∫₀ᵗ e^{−r_i(t−s)} v(s) ds.
    double memory(double t) const;

    /// v(t) − (k * v)(t); the modal factor of the boundary stress.
    double stress_factor(double t) const { return value(t) - memory(t); }

    /// v'' + λ v − λ (k * v); zero for an exact solution.
    double equation_residual(double t) const;

private:
    ModelParams params_;
    ModalRoots roots_;
    ModalCoefficients coeffs_;
};

struct RemainderReport {
    double M_hat = 0.0; ///< max (|R1|+|R2|)·√λ_n / |C_n|
    double nu = 1.0;    ///< √λ_n = γ n, so the bound decays like n^{-1}
    int worst_n = 0;
    std::vector<std::pair<int, double>> ratios; ///< per retained mode
};

/// Skips modes with |C_n| < 1e-14. Throws AllAmplitudesZero.
RemainderReport remainder_report(std::span<const ModalCoefficients> coeffs, std::span<const double> lambdas);

struct NormComparison {
    double coefficient_energy = 0.0; ///< Σ λ_n |C_n|²
    double data_energy = 0.0;        ///< ‖u0‖²_{D(√L)} + ‖u1‖²_H
    double ratio() const { return coefficient_energy / data_energy; }
};

/// Throws ZeroData when either side vanishes.
NormComparison norm_equivalence(std::span<const ModalCoefficients> coeffs, std::span<const double> lambdas,
                                const InitialData& data, const SpectralBasis& basis);

/// Running [min, max] of norm ratios over many draws.
struct RatioRange {
    double low = std::numeric_limits<double>::infinity();
    double high = 0.0;
    void add(double r) {
        low = std::min(low, r);
        high = std::max(high, r);
    }
};

} // namespace visco
