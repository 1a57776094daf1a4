#include "visco/quadrature.hpp"

#include <algorithm>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace visco::quadrature {

namespace {

struct ReferenceRule {
    std::vector<double> x; // nodes on [-1, 1], ascending
    std::vector<double> w;
};

const ReferenceRule& reference_rule() {
    static const ReferenceRule rule = [] {
        using gauss = boost::math::quadrature::gauss<double, kNodesPerPanel>;
        const auto& abscissa = gauss::abscissa();
        const auto& weights = gauss::weights();
        ReferenceRule r;
        // Boost stores the non-negative half; mirror it.
        for (std::size_t i = abscissa.size(); i-- > 0;) {
            if (abscissa[i] == 0.0) continue;
            r.x.push_back(-abscissa[i]);
            r.w.push_back(weights[i]);
        }
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            r.x.push_back(abscissa[i]);
            r.w.push_back(weights[i]);
        }
        return r;
    }();
    return rule;
}

} // namespace

PanelRule gauss_panels(double a, double b, int panels) {
    if (panels < 1) throw Error(ErrorKind::GridTooCoarse, "panel count must be positive");
    const ReferenceRule& ref = reference_rule();
    PanelRule rule;
    rule.a = a;
    rule.b = b;
    rule.panels = panels;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * ref.x.size());
    rule.weights.reserve(rule.nodes.capacity());
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double left = a + p * h;
        const double mid = left + 0.5 * h;
        for (std::size_t i = 0; i < ref.x.size(); ++i) {
            rule.nodes.push_back(mid + 0.5 * h * ref.x[i]);
            rule.weights.push_back(0.5 * h * ref.w[i]);
        }
    }
    return rule;
}

int panels_for(double length, double max_frequency) {
    const double quarter_period = std::numbers::pi / (2.0 * std::max(max_frequency, 1e-12));
    return std::max(1, static_cast<int>(std::ceil(length / quarter_period)));
}

PanelRule oscillatory_rule(double a, double b, double max_frequency) {
    return gauss_panels(a, b, panels_for(b - a, max_frequency));
}

PanelRule refined(const PanelRule& rule) { return gauss_panels(rule.a, rule.b, 2 * rule.panels); }

} // namespace visco::quadrature
