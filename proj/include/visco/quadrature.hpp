#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "visco/error.hpp"

namespace visco::quadrature {

inline constexpr int kNodesPerPanel = 16;

// Composite Gauss-Legendre rule on [a, b]: `panels` equal panels, 16 nodes each.
struct PanelRule {
    double a = 0.0;
    double b = 0.0;
    int panels = 0;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

PanelRule gauss_panels(double a, double b, int panels);

// Smallest panel count keeping every panel within a quarter period of `max_frequency`.
int panels_for(double length, double max_frequency);

// Rule sized for an oscillatory integrand whose fastest angular frequency is `max_frequency`.
PanelRule oscillatory_rule(double a, double b, double max_frequency);

// Same interval, every panel halved.
PanelRule refined(const PanelRule& rule);

template <class F>
double integrate(const PanelRule& rule, F&& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(rule.nodes[i]);
    return sum;
}

struct GatedIntegral {
    double value = 0.0;
    double change = 0.0; // |I(h/2) - I(h)|
    double scale = 0.0;  // integral of |f|, the reference for the relative gate
    int panels = 0;
};

// Integrates with the frequency-aware rule and again with halved panels.
// Throws QuadratureNotConverged when the two differ by more than rel_tol * integral(|f|).
template <class F>
GatedIntegral integrate_gated(F&& f, double a, double b, double max_frequency, double rel_tol = 1e-9) {
    const PanelRule coarse = oscillatory_rule(a, b, max_frequency);
    const PanelRule fine = refined(coarse);
    double coarse_sum = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) coarse_sum += coarse.weights[i] * f(coarse.nodes[i]);
    double fine_sum = 0.0;
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const double v = f(fine.nodes[i]);
        fine_sum += fine.weights[i] * v;
        abs_sum += fine.weights[i] * std::abs(v);
    }
    GatedIntegral out{fine_sum, std::abs(fine_sum - coarse_sum), abs_sum, fine.panels};
    if (out.change > rel_tol * out.scale && out.change > 1e-300) {
        throw Error(ErrorKind::QuadratureNotConverged,
                    "panel halving changed the integral by " + std::to_string(out.change) +
                        " (scale " + std::to_string(out.scale) + ")");
    }
    return out;
}

} // namespace visco::quadrature
