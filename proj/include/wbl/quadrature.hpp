// quadrature.hpp — Gauss–Legendre nodes/weights and panel integration.

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace wbl {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Nodes by Newton iteration on the Legendre polynomial.
inline GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

// ∫_a^b f dε with panel-wise Gauss–Legendre.
template <typename F>
double integrate_panels(F&& f, double a, double b, int panels,
                        int points_per_panel) {
    const GaussRule rule = gauss_legendre(points_per_panel);
    const double w = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * w;
        for (int g = 0; g < points_per_panel; ++g) {
            const double x = lo + 0.5 * w * (rule.nodes[g] + 1.0);
            sum += 0.5 * w * rule.weights[g] * f(x);
        }
    }
    return sum;
}

}  // namespace wbl
