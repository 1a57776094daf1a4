#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "visco/model.hpp"
#include "visco/quadrature.hpp"
#include "visco/series.hpp"

namespace visco::control {

// Boundary control u(t, π) = f(t) of the memory equation, steered from rest.
//
// Pairing with an adjoint solution z of final data (z0, z1) at T:
//   ⟨u_t(T), z0⟩ − ⟨u(T), z1⟩ = ∫₀ᵀ f(t) o(t) dt,
//   o(t) = −γ² (∂ₓz − memory of ∂ₓz)(t, π).
// Mode n of o is κ_n (v_n − k * v_n)(T − t), κ_n = γ² c n (−1)^{n+1}, with v_n the free
// mode started from (z0_n, −z1_n).

/// Modal coefficients of a state at one instant; velocity is measured in H^{-1}.
struct ModalState {
    std::vector<double> value;
    std::vector<double> velocity;

    int modes() const { return static_cast<int>(value.size()); }
    bool is_zero() const;
};

/// Σ value_n² + Σ velocity_n² / λ_n.
double l2_hminus1_norm_sq(const SpectralBasis& basis, const ModalState& state);

/// Final data of the adjoint problem; z0 in H¹₀ scale, z1 in L².
struct AdjointDatum {
    std::vector<double> z0;
    std::vector<double> z1;
    double horizon = 0.0;

    /// Σ λ_n z0_n² + Σ z1_n².
    double energy(const SpectralBasis& basis) const;
};

/// z(t) for t ∈ [0, T], as the time reversal of the free solution from (z0, −z1).
SolutionField adjoint_field(const SpectralBasis& basis, const AdjointDatum& datum);

/// o(t) = −(boundary stress at π) of an adjoint field; the function the control pairs with.
double observation(const SolutionField& adjoint, double t);

/// κ_n, the boundary-to-mode gain.
double boundary_gain(const SpectralBasis& basis, int n);

enum class TraceKind {
    stress, ///< o(t), memory-corrected; the HUM observation
    slope   ///< plain ∂ₓz(t, π)
};

/// Columns are traces of the 2N unit adjoint data (e_j/√λ_j, 0) and (0, e_j), j = 1..N,
/// evaluated on the nodes of `rule`. Each datum has unit H¹₀ × L² energy.
Eigen::MatrixXd adjoint_trace_basis(const SpectralBasis& basis, double horizon, int modes,
                                    const quadrature::PanelRule& rule, TraceKind kind = TraceKind::stress);

struct GramMatrix {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd eigenvalues; ///< ascending
    double min_eigenvalue = 0.0;
    double condition = 0.0;
};

/// Λ_jk = ∫₀ᵀ φ_j φ_k dt with the weights of `rule`, symmetrized. Throws NotPositiveDefinite when
/// the smallest eigenvalue is not above max(64·eps·dim, `uncertainty`) times the largest.
GramMatrix gram_matrix(const Eigen::MatrixXd& traces, const quadrature::PanelRule& rule, double uncertainty = 0.0);

/// Control synthesized from an adjoint datum: f(t) = o(t) of that datum.
class ControlSignal {
public:
    ControlSignal(const SpectralBasis& basis, const AdjointDatum& datum);

    double operator()(double t) const;
    const AdjointDatum& datum() const { return datum_; }
    /// Fastest oscillation of the signal, Re ω_N.
    double max_frequency() const { return field_.max_frequency(); }
    TraceSignal sample(std::span<const double> grid) const;

private:
    AdjointDatum datum_;
    SolutionField field_;
};

struct VerifyOptions {
    int steps = 0;               ///< RK4 steps of the coarse run; 0 picks ≈ 150 per radian of Re ω_N
    double tolerance = 1e-8;     ///< step-halving gate, relative to the largest final-state entry
};

struct ControlVerification {
    ModalState achieved;
    double target_error = 0.0; ///< relative in L² × H^{-1}; absolute when the target is zero
    double halving_change = 0.0;
    int steps = 0;
};

using ControlFunction = std::function<double(double)>;

/// Forward controlled modal system from rest,
///   û_n'' + λ_n û_n − λ_n (k * û_n) = κ_n (f − k * f),
/// with both memories carried as augmented states. Throws NotConverged at the gate.
ControlVerification verify_control(const SpectralBasis& basis, const ControlFunction& f, const ModalState& target,
                                   double horizon, int modes, VerifyOptions options = {});

struct HumOptions {
    double tikhonov = 0.0; ///< diagonal shift added to Λ; exploration only, off by default
    VerifyOptions verify;
};

struct ControlResult {
    TraceSignal f;                ///< control on the trace grid
    std::vector<double> coefficients;
    AdjointDatum datum;           ///< optimal adjoint final data
    double gram_condition = 0.0;
    double gram_min_eigenvalue = 0.0;
    double quadrature_change = 0.0; ///< ‖Λ_fine − Λ_coarse‖ / ‖Λ_fine‖
    ModalState achieved;
    double target_error = 0.0;
    double control_norm = 0.0;    ///< ‖f‖_{L²(0,T)}
};

/// Load vector pairing the target with the unit adjoint data: [u1_j/√λ_j ; −u0_j].
Eigen::VectorXd load_vector(const SpectralBasis& basis, const ModalState& target, int modes);

/// Throws NotPositiveDefinite, IllConditioned (condition > 1e12) or QuadratureNotConverged.
ControlResult solve_hum(const SpectralBasis& basis, const ModalState& target, double horizon, int modes,
                        HumOptions options = {});

struct DualityCheck {
    double pairing = 0.0;  ///< ⟨u_t(T), z0⟩ − ⟨u(T), z1⟩ from the forward solve
    double integral = 0.0; ///< ∫₀ᵀ f o dt
    double relative_error = 0.0;
};

/// `signal_frequency` bounds the angular frequency content of f for the quadrature.
DualityCheck duality_check(const SpectralBasis& basis, const ControlFunction& f, double signal_frequency,
                           const AdjointDatum& datum, VerifyOptions options = {});

} // namespace visco::control
