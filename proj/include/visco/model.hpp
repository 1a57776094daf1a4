#pragma once

#include <span>
#include <vector>

namespace visco {

/// Physical constants of the two-kernel (Burgers) viscoelastic wave equation
///
///   u_tt = γ² u_xx − Σ_i b_i ∫₀ᵗ e^{−r_i(t−s)} γ² u_xx(s) ds   on (0, π).
///
/// Instances only come out of validate_params(), so every ModelParams satisfies
/// b1/r1 + b2/r2 = 1 (to 1e-12) and r1 + r2 > b1 + b2.
class ModelParams {
public:
    double gamma() const { return gamma_; }
    double b1() const { return b1_; }
    double b2() const { return b2_; }
    double r1() const { return r1_; }
    double r2() const { return r2_; }

    double b_sum() const { return b1_ + b2_; }
    double r_sum() const { return r1_ + r2_; }

    /// (3/2)(b1 + b2) < r1 + r2. Informational only.
    bool strong_condition() const { return strong_; }

    /// Composite memory kernel k(t) = b1 e^{−r1 t} + b2 e^{−r2 t}.
    double kernel(double t) const;
    double kernel_derivative(double t) const;
    /// ∫₀ᵗ k = b1/r1 (1 − e^{−r1 t}) + b2/r2 (1 − e^{−r2 t}); strictly below 1.
    double kernel_integral(double t) const;

private:
    friend ModelParams validate_params(double, double, double, double, double);
    ModelParams(double gamma, double b1, double b2, double r1, double r2, bool strong)
        : gamma_(gamma), b1_(b1), b2_(b2), r1_(r1), r2_(r2), strong_(strong) {}

    double gamma_, b1_, b2_, r1_, r2_;
    bool strong_;
};

inline constexpr double kBurgersTolerance = 1e-12;

/// Throws Error(ConstraintViolation) naming the first failing condition.
ModelParams validate_params(double gamma, double b1, double b2, double r1, double r2);

enum class Normalization {
    bare,       ///< e_n(x) = sin(nx)
    orthonormal ///< e_n(x) = √(2/π) sin(nx)
};

/// Dirichlet eigenbasis of L = −γ² ∂²ₓ on (0, π).
class SpectralBasis {
public:
    explicit SpectralBasis(ModelParams params, Normalization norm = Normalization::orthonormal)
        : params_(params), norm_(norm) {}

    const ModelParams& params() const { return params_; }
    Normalization normalization() const { return norm_; }

    /// λ_n = γ² n².
    double eigenvalue(int n) const;
    /// 1 or √(2/π).
    double factor() const;
    double eigenfunction(int n, double x) const;
    /// e_n'(x).
    double eigenfunction_slope(int n, double x) const;

    /// Expansion coefficients of u in this basis, n = 1..modes (⟨u, e_n⟩ when
    /// orthonormal), from samples of u on the uniform grid
    /// x_j = jπ/(M−1), j = 0..M−1. Needs M − 1 ≥ 4·modes (8 points per shortest
    /// wavelength), otherwise GridTooCoarse.
    std::vector<double> project(std::span<const double> samples, int modes) const;

    /// Σ c_n e_n(x).
    double synthesize(std::span<const double> coeffs, double x) const;

    /// Converts a coefficient sequence from this basis's normalization to `target`.
    std::vector<double> convert(std::span<const double> coeffs, Normalization target) const;

private:
    ModelParams params_;
    Normalization norm_;
};

/// Modal initial data u_{0n}, u_{1n}, n = 1..N (orthonormal coefficients unless stated).
struct InitialData {
    std::vector<double> u0;
    std::vector<double> u1;

    int modes() const { return static_cast<int>(u0.size()); }
    bool is_zero() const;
    /// ‖u0‖²_{D(√L)} = Σ λ_n u_{0n}².
    double d_sqrt_l_norm_sq(const SpectralBasis& basis) const;
    /// ‖u1‖²_H = Σ u_{1n}².
    double h_norm_sq() const;
};

} // namespace visco
