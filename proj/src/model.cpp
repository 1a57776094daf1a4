#include "visco/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "visco/error.hpp"

namespace visco {

namespace {

std::string describe(double gamma, double b1, double b2, double r1, double r2) {
    std::ostringstream os;
    os.precision(17);
    os << "(gamma=" << gamma << ", b1=" << b1 << ", b2=" << b2 << ", r1=" << r1 << ", r2=" << r2 << ")";
    return os.str();
}

} // namespace

double ModelParams::kernel(double t) const { return b1_ * std::exp(-r1_ * t) + b2_ * std::exp(-r2_ * t); }

double ModelParams::kernel_derivative(double t) const {
    return -b1_ * r1_ * std::exp(-r1_ * t) - b2_ * r2_ * std::exp(-r2_ * t);
}

double ModelParams::kernel_integral(double t) const {
    return -(b1_ / r1_) * std::expm1(-r1_ * t) - (b2_ / r2_) * std::expm1(-r2_ * t);
}

ModelParams validate_params(double gamma, double b1, double b2, double r1, double r2) {
    const std::string tag = describe(gamma, b1, b2, r1, r2);
    const double values[] = {gamma, b1, b2, r1, r2};
    const char* names[] = {"gamma", "b1", "b2", "r1", "r2"};
    for (int i = 0; i < 5; ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
            throw Error(ErrorKind::ConstraintViolation, std::string(names[i]) + " must be a positive finite number " + tag);
        }
    }
    const double ratio_sum = b1 / r1 + b2 / r2;
    if (std::abs(ratio_sum - 1.0) > kBurgersTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "b1/r1 + b2/r2 = " << ratio_sum << " != 1 " << tag;
        throw Error(ErrorKind::ConstraintViolation, os.str());
    }
    if (!(r1 + r2 - b1 - b2 > 0.0)) {
        throw Error(ErrorKind::ConstraintViolation, "r1 + r2 - b1 - b2 must be positive " + tag);
    }
    const bool strong = 1.5 * (b1 + b2) < r1 + r2;
    return ModelParams(gamma, b1, b2, r1, r2, strong);
}

double SpectralBasis::eigenvalue(int n) const {
    const double g = params_.gamma();
    return g * g * static_cast<double>(n) * static_cast<double>(n);
}

double SpectralBasis::factor() const {
    return norm_ == Normalization::orthonormal ? std::sqrt(2.0 / std::numbers::pi) : 1.0;
}

double SpectralBasis::eigenfunction(int n, double x) const { return factor() * std::sin(n * x); }

double SpectralBasis::eigenfunction_slope(int n, double x) const { return factor() * n * std::cos(n * x); }

std::vector<double> SpectralBasis::project(std::span<const double> samples, int modes) const {
    const int intervals = static_cast<int>(samples.size()) - 1;
    if (modes < 1 || intervals < 4 * modes) {
        throw Error(ErrorKind::GridTooCoarse, std::to_string(samples.size()) + " samples cannot resolve " +
                                                  std::to_string(modes) + " modes (need at least " +
                                                  std::to_string(4 * modes + 1) + ")");
    }
    // Trapezoid rule on the uniform grid; exact for sine polynomials of degree < 2·intervals.
    const double h = std::numbers::pi / intervals;
    std::vector<double> out(static_cast<std::size_t>(modes), 0.0);
    for (int n = 1; n <= modes; ++n) {
        double sum = 0.0;
        for (int j = 1; j < intervals; ++j) sum += samples[static_cast<std::size_t>(j)] * std::sin(n * j * h);
        out[static_cast<std::size_t>(n - 1)] = h * sum * factor();
    }
    // For the bare-sine basis the projection ⟨u, sin(n·)⟩ is not the expansion
    // coefficient; rescale so that synthesize() inverts project().
    if (norm_ == Normalization::bare) {
        for (double& c : out) c *= 2.0 / std::numbers::pi;
    }
    return out;
}

double SpectralBasis::synthesize(std::span<const double> coeffs, double x) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) sum += coeffs[i] * std::sin(static_cast<double>(i + 1) * x);
    return factor() * sum;
}

std::vector<double> SpectralBasis::convert(std::span<const double> coeffs, Normalization target) const {
    std::vector<double> out(coeffs.begin(), coeffs.end());
    if (target == norm_) return out;
    // u = Σ c_n · f_from · sin = Σ c'_n · f_to · sin
    const double from = factor();
    const double to = target == Normalization::orthonormal ? std::sqrt(2.0 / std::numbers::pi) : 1.0;
    for (double& c : out) c *= from / to;
    return out;
}

bool InitialData::is_zero() const {
    return std::all_of(u0.begin(), u0.end(), [](double v) { return v == 0.0; }) &&
           std::all_of(u1.begin(), u1.end(), [](double v) { return v == 0.0; });
}

double InitialData::d_sqrt_l_norm_sq(const SpectralBasis& basis) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) sum += basis.eigenvalue(static_cast<int>(i + 1)) * u0[i] * u0[i];
    return sum;
}

double InitialData::h_norm_sq() const {
    double sum = 0.0;
    for (double v : u1) sum += v * v;
    return sum;
}

} // namespace visco
