// expint.hpp — scaled complex exponential integral and the occupied-window
// resolvent integral ∫_a^b e^{iεt/ħ}/(ε − λ) dε it evaluates.

#pragma once

#include "wbl/matrix.hpp"
#include "wbl/units.hpp"

#include <cmath>
#include <complex>

namespace wbl {

struct PoleOnContour : NumericError {
    using NumericError::NumericError;
};

namespace detail {

// e^z E1(z) via the power series of E1, usable for moderate |z|.
inline Complex e1_scaled_series(Complex z) {
    constexpr double kEulerGamma = 0.5772156649015328606;
    Complex sum = 0.0;
    Complex term = 1.0;
    for (int k = 1; k <= 60; ++k) {
        term *= -z / static_cast<double>(k);
        const Complex contrib = -term / static_cast<double>(k);
        sum += contrib;
        if (std::abs(contrib) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return std::exp(z) * (-kEulerGamma - std::log(z) + sum);
}

// e^z E1(z) via the continued fraction
//   E1(z) = e^{-z} / (z + 1 - 1²/(z + 3 - 2²/(z + 5 - ...)))
// evaluated with the modified Lentz algorithm.
inline Complex e1_scaled_cf(Complex z) {
    constexpr double kTiny = 1e-290;
    Complex b = z + 1.0;
    Complex f = (std::abs(b) < kTiny) ? Complex(kTiny) : b;
    Complex c = f;
    Complex d = 0.0;
    for (int k = 1; k <= 400; ++k) {
        const Complex a = -static_cast<double>(k) * static_cast<double>(k);
        b += 2.0;
        d = b + a * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + a / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const Complex delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / f;
}

}  // namespace detail

// e^z E1(z) for Re z ≥ 0, z ≠ 0. Scaled form stays bounded (~1/z) for
// large |z| where e^z and E1(z) would individually over/underflow.
inline Complex e1_scaled(Complex z) {
    if (z == Complex(0.0)) {
        throw NumericError("e1_scaled: z = 0");
    }
    return (std::abs(z) <= 4.0) ? detail::e1_scaled_series(z)
                                : detail::e1_scaled_cf(z);
}

// ∫_a^b e^{iεt/ħ}/(ε − λ) dε for a pole λ off the real segment [a, b].
//
// t = 0 reduces to the principal logarithm; t > 0 is expressed through the
// scaled exponential integral with the unimodular boundary phases factored
// out, so no intermediate quantity grows with t:
//   I = e^{iat/ħ} E1s(z_a) − e^{ibt/ħ} E1s(z_b),  z_x = (it/ħ)(λ − x).
// For Im λ < 0 both z_x lie in the right half-plane, clear of the E1
// branch cut.
inline Complex fermi_window_integral(Complex lambda, double t, double a,
                                     double b) {
    if (std::abs(lambda.imag()) < 1e-12 && lambda.real() >= a &&
        lambda.real() <= b) {
        throw PoleOnContour("fermi_window_integral: eigenvalue " +
                            std::to_string(lambda.real()) +
                            " lies on the integration window");
    }
    if (t == 0.0) {
        return std::log(b - lambda) - std::log(a - lambda);
    }
    const Complex s(0.0, t / kHbar);
    const Complex za = s * (lambda - a);
    const Complex zb = s * (lambda - b);
    const Complex pa = std::exp(Complex(0.0, a * t / kHbar));
    const Complex pb = std::exp(Complex(0.0, b * t / kHbar));
    return pa * e1_scaled(za) - pb * e1_scaled(zb);
}

}  // namespace wbl
