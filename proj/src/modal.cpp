#include "visco/modal.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "visco/error.hpp"

namespace visco {

namespace {

constexpr double kSkipAmplitude = 1e-14;

} // namespace

ModalCoefficients exact_coefficients(const ModelParams& params, const ModalRoots& roots, double u0n, double u1n) {
    const double lambda = roots.lambda;
    const cplx s = roots.oscillating_root();
    const double rho = roots.rho;

    // Unknowns (Re C, Im C, R1, R2). Row k: d^k/dt^k v(0).
    Eigen::Matrix4d A;
    Eigen::Vector4d rhs(u0n, u1n, -lambda * u0n, -lambda * u1n + lambda * params.b_sum() * u0n);
    cplx sk = 1.0;
    double rk = 1.0;
    for (int k = 0; k < 4; ++k) {
        A(k, 0) = 2.0 * sk.real();
        A(k, 1) = -2.0 * sk.imag();
        A(k, 2) = k == 0 ? 1.0 : 0.0;
        A(k, 3) = rk;
        sk *= s;
        rk *= rho;
    }
    for (int k = 0; k < 4; ++k) {
        const double row_scale = A.row(k).cwiseAbs().maxCoeff();
        A.row(k) /= row_scale;
        rhs(k) /= row_scale;
    }

    Eigen::JacobiSVD<Eigen::Matrix4d> svd(A);
    const auto& sv = svd.singularValues();
    if (!(sv(3) > 1e-14 * sv(0))) {
        std::ostringstream os;
        os.precision(17);
        os << "mode n=" << roots.n << ": initial-condition system is singular (roots 0, " << s << ", " << std::conj(s)
           << ", " << rho << " are near-confluent)";
        throw Error(ErrorKind::SingularSystem, os.str());
    }

    const Eigen::FullPivLU<Eigen::Matrix4d> lu(A);
    Eigen::Vector4d x = lu.solve(rhs);
    x += lu.solve(rhs - A * x);

    return {roots.n, cplx(x(0), x(1)), x(2), x(3)};
}

ModalCoefficients asymptotic_coefficients(const ModelParams& p, double lambda, double u0n, double u1n) {
    const double bs = p.b_sum();
    const double rs = p.r_sum();
    const double sq = std::sqrt(lambda);
    ModalCoefficients out;
    out.C = cplx(0.5 * u0n, -0.25 * (bs * u0n + 2.0 * u1n) / sq);
    out.R1 = p.r1() * p.r2() * u1n / ((rs - bs) * lambda);
    out.R2 = (bs - p.r1()) * (bs - p.r2()) * (u0n * (bs - rs) + u1n) / ((bs - rs) * lambda);
    return out;
}

std::pair<double, double> data_for_amplitude(const ModelParams& params, const ModalRoots& roots, cplx C) {
    const cplx ca = exact_coefficients(params, roots, 1.0, 0.0).C;
    const cplx cb = exact_coefficients(params, roots, 0.0, 1.0).C;
    Eigen::Matrix2d M;
    M << ca.real(), cb.real(), ca.imag(), cb.imag();
    const Eigen::Vector2d u = M.partialPivLu().solve(Eigen::Vector2d(C.real(), C.imag()));
    return {u(0), u(1)};
}

cplx exp_convolution(cplx s, double r, double t) {
    const cplx z = (s + r) * t;
    if (std::abs(z) < 1e-3) {
        // e^{−rt} · t · (e^z − 1)/z
        const cplx phi = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0;
        return std::exp(-r * t) * t * phi;
    }
    return (std::exp(s * t) - std::exp(-r * t)) / (s + r);
}

double ModalTrajectory::derivative(double t, int order) const {
    const cplx s = roots_.oscillating_root();
    double out = 2.0 * (coeffs_.C * std::pow(s, order) * std::exp(s * t)).real();
    out += coeffs_.R2 * std::pow(roots_.rho, order) * std::exp(roots_.rho * t);
    if (order == 0) out += coeffs_.R1;
    return out;
}

double ModalTrajectory::memory(double t) const {
    const cplx s = roots_.oscillating_root();
    double out = 0.0;
    const double b[] = {params_.b1(), params_.b2()};
    const double r[] = {params_.r1(), params_.r2()};
    for (int i = 0; i < 2; ++i) {
        double term = 2.0 * (coeffs_.C * exp_convolution(s, r[i], t)).real();
        term += coeffs_.R1 * exp_convolution(0.0, r[i], t).real();
        term += coeffs_.R2 * exp_convolution(roots_.rho, r[i], t).real();
        out += b[i] * term;
    }
    return out;
}

double ModalTrajectory::equation_residual(double t) const {
    const double lambda = roots_.lambda;
    return derivative(t, 2) + lambda * value(t) - lambda * memory(t);
}

RemainderReport remainder_report(std::span<const ModalCoefficients> coeffs, std::span<const double> lambdas) {
    RemainderReport rep;
    rep.M_hat = -1.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const auto& c = coeffs[i];
        if (std::abs(c.C) < kSkipAmplitude) continue;
        const double ratio = (std::abs(c.R1) + std::abs(c.R2)) * std::sqrt(lambdas[i]) / std::abs(c.C);
        rep.ratios.emplace_back(c.n, ratio);
        if (ratio > rep.M_hat) {
            rep.M_hat = ratio;
            rep.worst_n = c.n;
        }
    }
    if (rep.ratios.empty()) throw Error(ErrorKind::AllAmplitudesZero, "every |C_n| is below 1e-14");
    return rep;
}

NormComparison norm_equivalence(std::span<const ModalCoefficients> coeffs, std::span<const double> lambdas,
                                const InitialData& data, const SpectralBasis& basis) {
    NormComparison out;
    for (std::size_t i = 0; i < coeffs.size(); ++i) out.coefficient_energy += lambdas[i] * std::norm(coeffs[i].C);
    out.data_energy = data.d_sqrt_l_norm_sq(basis) + data.h_norm_sq();
    if (!(out.data_energy > 0.0) || !(out.coefficient_energy > 0.0)) {
        throw Error(ErrorKind::ZeroData, "norm comparison needs nonzero data");
    }
    return out;
}

} // namespace visco
