#pragma once

#include <span>
#include <vector>

#include "visco/modal.hpp"
#include "visco/model.hpp"

namespace visco {

enum class Direction {
    forward,      ///< u(t) from data at t = 0
    time_reversed ///< z(t) = u(T − t), the substitution turning the backward adjoint problem into a Cauchy problem
};

/// Truncated nonharmonic Fourier series
///   u(t, x) = Σ_{n≤N} [2 Re(C_n e^{iω_n t}) + R_{1,n} + R_{2,n} e^{ρ_n t}] e_n(x).
class SolutionField {
public:
    static SolutionField forward(const SpectralBasis& basis, const InitialData& data);
    /// Built from the data of u at t = 0; evaluates u(T − t).
    static SolutionField time_reversed(const SpectralBasis& basis, const InitialData& data, double horizon);

    const SpectralBasis& basis() const { return basis_; }
    Direction direction() const { return direction_; }
    double horizon() const { return horizon_; }
    int modes() const { return static_cast<int>(modes_.size()); }
    const ModalTrajectory& mode(int n) const { return modes_[static_cast<std::size_t>(n - 1)]; }

    /// Fastest oscillation, Re ω_N.
    double max_frequency() const;

    /// Modal time factor of mode n at field time t.
    double modal_value(int n, double t) const;
    double modal_velocity(int n, double t) const;

    double evaluate(double t, double x) const;
    double evaluate_velocity(double t, double x) const;

    /// ∂ₓ of the field at (t, x).
    double slope(double t, double x) const;
    /// γ² (∂ₓu − k * ∂ₓu)(t, x): the viscoelastic boundary stress. For a time-reversed
    /// field the memory runs over [t, T], as in the adjoint equation.
    double stress(double t, double x) const;

private:
    SolutionField(const SpectralBasis& basis, Direction dir, double horizon) : basis_(basis), direction_(dir), horizon_(horizon) {}
    double clock(double t) const { return direction_ == Direction::forward ? t : horizon_ - t; }

    SpectralBasis basis_;
    Direction direction_;
    double horizon_;
    std::vector<ModalTrajectory> modes_;
};

struct TraceSignal {
    std::vector<double> times;
    std::vector<double> values;
};

inline constexpr int kTracePointsPerPeriod = 32;

/// Uniform grid on [0, T] with 32 points per period of the fastest retained mode.
std::vector<double> trace_grid(const SolutionField& field, double horizon);

/// u_x(t, π) on the grid. Throws GridTooCoarse when a step exceeds π/(4 Re ω_N).
TraceSignal boundary_trace(const SolutionField& field, std::span<const double> grid);

struct VolterraTrajectory {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> velocities;
    int steps = 0;               ///< steps of the returned (finer) run
    double halving_change = 0.0; ///< max |v_h − v_{h/2}| / max |v|
};

/// Independent solution of the scalar memory equation by classical RK4 on the
/// augmented system v' = w, w' = −λv + λ b1 y1 + λ b2 y2, y_i' = v − r_i y_i.
/// Runs `steps` and `2·steps`; throws NotConverged when they differ by more than `tolerance`.
VolterraTrajectory volterra_oracle(const ModelParams& params, double lambda, double u0n, double u1n, double horizon,
                                   int steps, double tolerance = 1e-8);

/// Step count giving RK4 ω·h ≈ 1/`per_radian` for the oscillating root of λ.
int oracle_steps(double horizon, double frequency, double per_radian = 400.0);

} // namespace visco
