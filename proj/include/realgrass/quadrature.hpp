#pragma once
/**
 * @file quadrature.hpp
 * @brief Gauss-Legendre rules of arbitrary order and composite panel
 *        integration with a panel-doubling error check.
 */

#include <realgrass/errors.hpp>

#include <cmath>
#include <numbers>
#include <vector>

namespace realgrass::quadrature {

/// n-point Gauss-Legendre rule on [-1, 1]; nodes by Newton iteration on P_n.
class GaussLegendreRule {
public:
    explicit GaussLegendreRule(int n) : nodes_(static_cast<std::size_t>(n)), weights_(static_cast<std::size_t>(n))
    {
        detail::require_domain(n >= 1 && n <= 512, "GaussLegendreRule: order must lie in [1, 512]");
        const int half = (n + 1) / 2;
        for (int i = 0; i < half; ++i) {
            // Tricomi initial guess
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0;
                double p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            // recompute the derivative at the converged node
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            const auto lo = static_cast<std::size_t>(i);
            const auto hi = static_cast<std::size_t>(n - 1 - i);
            nodes_[lo] = -x;
            nodes_[hi] = x;
            weights_[lo] = w;
            weights_[hi] = w;
        }
        if (n % 2 == 1) nodes_[static_cast<std::size_t>(n / 2)] = 0.0;
    }

    [[nodiscard]] int order() const { return static_cast<int>(nodes_.size()); }
    [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }

    template <typename F>
    double integrate(F&& f, double a, double b) const
    {
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(mid + half * nodes_[i]);
        return half * s;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

template <typename F>
double composite(const GaussLegendreRule& rule, F&& f, double a, double b, int panels)
{
    detail::require_domain(panels >= 1, "composite quadrature: need at least one panel");
    const double h = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) s += rule.integrate(f, a + p * h, p + 1 == panels ? b : a + (p + 1) * h);
    return s;
}

struct QuadResult {
    double value = 0.0;
    double error = 0.0; ///< |I(2P) - I(P)|
};

/// Composite rule on 2P panels, with the P-panel value as error reference.
template <typename F>
QuadResult composite_checked(int points_per_panel, F&& f, double a, double b, int panels)
{
    const GaussLegendreRule rule(points_per_panel);
    const double coarse = composite(rule, f, a, b, panels);
    const double fine = composite(rule, f, a, b, 2 * panels);
    return {fine, std::abs(fine - coarse)};
}

} // namespace realgrass::quadrature
