#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "visco/model.hpp"
#include "visco/quadrature.hpp"
#include "visco/spectrum.hpp"

namespace visco::ingham {

// Sine weight on [0, T] and its transform
//   ∫₀^∞ g(t) e^{iwt} dt = (1 + e^{iwT}) G(w),   G(w) = −Tπ / (T²w² − π²).

double weight_g(double t, double T);

/// Throws NearPole within 1e-8 of ±π/T; use weighted_transform() there.
cplx kernel_G(cplx w, double T);

/// (1 + e^{iwT}) G(w), continuous across w = ±π/T (value ±iT/2 there).
cplx weighted_transform(cplx w, double T);

/// 4π / (Tσ²(4n² − 1)), a bound on |G(w)| for |w| ≥ σn. HypothesisViolated unless T > 2π/σ.
double kernel_bound(double sigma, int n, double T);

struct WeightSetup {
    double T = 0.0;
    double epsilon = kDefaultEpsilon;
    int n0 = 1;
    double nu = 1.0;
    double M = 0.0;

    /// Takes n0 from the gap lemma on the retained roots. HypothesisViolated unless
    /// T > 2π/(gap·√(1−ε)).
    static WeightSetup make(double T, double epsilon, const SpectralLimits& limits,
                            std::span<const ModalRoots> roots, double M, double nu = 1.0);
};

/// πε / (T γ² (1 − ε)) with γ the measured gap.
double tail_threshold(const WeightSetup& setup, const SpectralLimits& limits);

/// Smallest n0 with a|G(ω_n)| ≤ tail_threshold for all retained n ≥ n0 and
/// a·(Σ_{n0≤n≤N} |G(ω_n)| + analytic bound on n > N) ≤ tail_threshold.
/// Throws NotFoundWithinRange.
int tail_index(const WeightSetup& setup, const SpectralLimits& limits, std::span<const ModalRoots> roots, double a);

/// 2πT (1/(π² + 4T²α_ω²(1+ε)) − 4/(T²γ²(1−ε))).
double theorem_constant(double T, double epsilon, const SpectralLimits& limits);

/// The horizon where theorem_constant changes sign, 2π/√(γ²(1−ε) − 16α_ω²(1+ε)).
/// Throws NoThreshold when the radicand is not positive.
double positivity_threshold(double epsilon, const SpectralLimits& limits);

struct InequalityReport {
    double lhs = 0.0;          ///< ∫₀ᵀ (series)² dt
    double rhs_constant = 0.0; ///< theorem_constant at (T, ε)
    double rhs_sum = 0.0;      ///< Σ (1 + e^{−2 Im ω_n T}) |C_n|²
    double ratio = 0.0;        ///< lhs / rhs_sum (NaN when rhs_sum = 0)
    bool theorem_constant_positive = false;
};

/// The series Σ_n [2 Re(C_n e^{iω_n t}) + R_{1,n} + R_{2,n} e^{ρ_n t}] on [0, T] with R_{1,n}, R_{2,n}
/// those of the initial data producing C_n. Quadrature tables are built once.
class InverseObservation {
public:
    InverseObservation(const ModelParams& params, double T, int modes, double epsilon = kDefaultEpsilon);

    int modes() const { return static_cast<int>(roots_.size()); }
    double horizon() const { return T_; }
    const std::vector<ModalRoots>& roots() const { return roots_; }

    /// Remainder amplitudes (R1, R2) that accompany amplitude C on mode n.
    std::pair<double, double> remainders(int n, cplx C) const;

    double series_value(std::span<const cplx> amplitudes, double t) const;

    /// Throws QuadratureNotConverged when panel halving moves the integral by more than 1e-9 relative.
    InequalityReport evaluate(std::span<const cplx> amplitudes) const;

    /// min over all amplitude vectors of lhs / rhs_sum: the smallest generalized eigenvalue.
    double worst_case_ratio() const;

private:
    struct UnitResponse {
        cplx C[2];     // amplitude for data (1,0) and (0,1)
        double R1[2];
        double R2[2];
    };

    std::vector<double> values_on(const quadrature::PanelRule& rule, const std::vector<std::vector<cplx>>& osc,
                                  const std::vector<std::vector<double>>& decay, std::span<const cplx> amplitudes) const;

    ModelParams params_;
    double T_;
    double epsilon_;
    double constant_ = 0.0;
    std::vector<ModalRoots> roots_;
    std::vector<UnitResponse> unit_;
    quadrature::PanelRule coarse_, fine_;
    std::vector<std::vector<cplx>> osc_coarse_, osc_fine_;   // e^{s_n t} per mode, per node
    std::vector<std::vector<double>> rho_coarse_, rho_fine_; // e^{ρ_n t}
};

/// Amplitudes with |C_n| = U(0,1)·n^{−decay} and uniform phases.
std::vector<cplx> random_amplitudes(int modes, double decay, std::uint64_t seed, std::uint64_t stream);

struct InverseExperiment {
    double T = 0.0;
    int modes = 0;
    double epsilon = kDefaultEpsilon;
    double threshold = 0.0;        ///< T₀ from the measured spectrum
    double theorem_constant = 0.0; ///< at (T, ε)
    double min_ratio = 0.0;
    double worst_case_ratio = 0.0;
    SpectralLimits limits;
    std::vector<InequalityReport> trials;
};

struct InverseOptions {
    double epsilon = kDefaultEpsilon;
    double decay = 1.5;
};

/// HypothesisViolated unless T exceeds the control-time threshold.
InverseExperiment verify_inverse(const ModelParams& params, double T, int modes, int trials, std::uint64_t seed,
                                 InverseOptions options = {});

struct WeightedBound {
    double lhs = 0.0; ///< ∫ g (Σ_{n≥n0} 2 Re(C_n e^{iω_n t}))² dt
    double rhs = 0.0; ///< 2πT Σ_{n≥n0} (1/(π²+4T²(Im ω_n)²) − 4/(T²γ²(1−ε))) (1+e^{−2 Im ω_n T}) |C_n|²
};

/// `amplitudes[i]` belongs to roots[i]; only indices with roots[i].n ≥ n0 enter.
WeightedBound weighted_lower_bound(std::span<const ModalRoots> roots, std::span<const cplx> amplitudes, int n0,
                                   double T, double epsilon, double gap);

struct WeightedBoundReport {
    int n0 = 1;
    std::vector<WeightedBound> draws;
    double worst_violation = 0.0; ///< max (rhs − lhs)/|rhs|, ≤ 0 when the bound holds with slack
};

/// HypothesisViolated unless T > 2π/(gap√(1−ε)).
WeightedBoundReport verify_weighted_lower_bound(const ModelParams& params, double T, double epsilon, int modes,
                                                int draws, std::uint64_t seed, double decay = 1.5);

struct DirectTrial {
    double lhs = 0.0;       ///< ∫₀ᵀ (u_x(t,0)² + u_x(t,π)²) dt
    double data_norm = 0.0; ///< ‖u0‖²_{H¹₀} + ‖u1‖²_{L²}
    double ratio = 0.0;
};

/// Boundary energy of the free solution with the given data (orthonormal coefficients).
DirectTrial direct_ratio(const SpectralBasis& basis, double T, const InitialData& data);

/// u0n, u1n = U(−1,1)·n^{−decay}, drawn so that the first N values do not depend on N.
InitialData random_direct_data(int modes, double decay, std::uint64_t seed, std::uint64_t stream);

struct DirectExperiment {
    std::vector<DirectTrial> trials;
    double C0 = 0.0; ///< max ratio over trials
};

DirectExperiment verify_direct(const ModelParams& params, double T, int modes, int trials, std::uint64_t seed,
                               double decay = 1.6);

} // namespace visco::ingham
