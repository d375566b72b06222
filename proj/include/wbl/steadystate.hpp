// steadystate.hpp — frequency-domain solver: retarded Green's function,
// transmission, Landauer current and the stationary dissipation matrix.
// Serves as the independent cross-check for transient long-time limits.

#pragma once

#include "wbl/dissipation.hpp"
#include "wbl/matrix.hpp"
#include "wbl/model.hpp"
#include "wbl/quadrature.hpp"
#include "wbl/units.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace wbl {

struct QuadratureNotConverged : NumericError {
    using NumericError::NumericError;
};

struct SingularSylvester : NumericError {
    using NumericError::NumericError;
};

struct SteadyConfig {
    SystemSpec spec;
    double de_L = 0.0;  // settled level shift Δε^L(∞), eV
    double de_R = 0.0;
    CMatrix h_inf;      // settled h_D(∞), eV
    int panels = 64;
    int points_per_panel = 32;

    // Settled configuration implied by the spec's bias profiles. The
    // charging term is left out: it would require self-consistency and the
    // benchmark systems run with it off.
    static SteadyConfig settled(const SystemSpec& spec) {
        SteadyConfig cfg;
        cfg.spec = spec;
        cfg.de_L = spec.lead_L.level_shift_inf();
        cfg.de_R = spec.lead_R.level_shift_inf();
        const Eigen::Index n = spec.device.n_orbitals();
        cfg.h_inf = spec.device.h0 +
                    0.5 * (cfg.de_L + cfg.de_R) *
                        CMatrix::Identity(n, n);
        return cfg;
    }

    double de(Lead l) const { return l == Lead::L ? de_L : de_R; }
    // occupied-window boundary of lead α: μ⁰ shifted with Δε^α
    double mu(Lead l) const { return spec.mu0 + de(l); }
};

// G^r(ε) = (εI − h_D(∞) + iΛ)⁻¹
inline CMatrix greens_retarded(const SteadyConfig& cfg, double eps) {
    const Eigen::Index n = cfg.h_inf.rows();
    const CMatrix a = eps * CMatrix::Identity(n, n) - cfg.h_inf +
                      Complex(0.0, 1.0) * cfg.spec.lambda_total();
    return solve(a, CMatrix::Identity(n, n));
}

// Transmission probability T(ε) = 4 tr[G^r Λ^R G^a Λ^L]; the prefactor is
// fixed so a symmetric single resonance peaks at unity and the Landauer
// current below matches the transient steady current.
inline double transmission(const SteadyConfig& cfg, double eps) {
    const CMatrix gr = greens_retarded(cfg, eps);
    return 4.0 * (gr * cfg.spec.lead_R.lambda * gr.adjoint() *
                  cfg.spec.lead_L.lambda)
                    .trace()
                    .real();
}

namespace detail {

inline double landauer_window_integral(const SteadyConfig& cfg,
                                       int points_per_panel) {
    const double lo = std::min(cfg.mu(Lead::L), cfg.mu(Lead::R));
    const double hi = std::max(cfg.mu(Lead::L), cfg.mu(Lead::R));
    return integrate_panels([&](double e) { return transmission(cfg, e); },
                            lo, hi, cfg.panels, points_per_panel);
}

}  // namespace detail

// Zero-temperature Landauer current through lead L, in nA:
//   J_L = (1/πħ) ∫ [f_L(ε) − f_R(ε)] T(ε) dε,
// with the lead occupation windows terminating at μ⁰ + Δε^α(∞).
inline double landauer_current(const SteadyConfig& cfg) {
    if (cfg.mu(Lead::L) == cfg.mu(Lead::R)) {
        return 0.0;  // empty bias window
    }
    const double coarse =
        detail::landauer_window_integral(cfg, cfg.points_per_panel);
    const double fine =
        detail::landauer_window_integral(cfg, 2 * cfg.points_per_panel);
    if (std::abs(fine - coarse) > 1e-6 * std::max(1e-300, std::abs(fine))) {
        throw QuadratureNotConverged(
            "landauer_current: doubling panel points changes the result by "
            "more than 1e-6 relative");
    }
    const double sign = cfg.mu(Lead::L) > cfg.mu(Lead::R) ? 1.0 : -1.0;
    return sign * fine / (std::numbers::pi * kHbar) * kNanoampPerElectronFs;
}

// Stationary P^α(∞) = −(2i/π) ∫_{ε_min}^{μ⁰}
//   (ε − h_D(∞) + iΛ + Δε^α(∞))⁻¹ dε Λ^α, evaluated spectrally.
inline CMatrix p_alpha_steady(const SteadyConfig& cfg, Lead l) {
    const LeadSpec& lead = cfg.spec.lead(l);
    const Eigen::Index n = cfg.h_inf.rows();
    if (lead.lambda.isZero(0.0)) {
        return CMatrix::Zero(n, n);
    }
    const CMatrix shifted = cfg.h_inf -
                            Complex(0.0, 1.0) * cfg.spec.lambda_total() -
                            cfg.de(l) * CMatrix::Identity(n, n);
    const EigDecomposition d = eig_general(shifted);
    const CMatrix window = fermi_resolvent_integral(
        d, 0.0, cfg.spec.mu0, cfg.spec.band_bottom);
    return Complex(0.0, -2.0 / std::numbers::pi) * window * lead.lambda;
}

inline CMatrix k_alpha_steady(const SteadyConfig& cfg, Lead l) {
    const CMatrix p = p_alpha_steady(cfg, l);
    return p + p.adjoint();
}

// Stationary σ from the settled EOM: 0 = −i[h_∞, σ] − Σ_α (K^α + {Λ^α, σ}),
// i.e. A σ − σ A† = i Σ_α K^α with A = h_∞ − iΛ, solved element-wise in the
// eigenbasis of A.
inline CMatrix steady_sigma(const SteadyConfig& cfg) {
    const Eigen::Index n = cfg.h_inf.rows();
    const CMatrix lambda = cfg.spec.lambda_total();
    const CMatrix k_sum =
        k_alpha_steady(cfg, Lead::L) + k_alpha_steady(cfg, Lead::R);
    const EigDecomposition d =
        eig_general(cfg.h_inf - Complex(0.0, 1.0) * lambda);
    const CMatrix c = d.inverse_vectors * (Complex(0.0, 1.0) * k_sum) *
                      d.inverse_vectors.adjoint();
    CMatrix x(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const Complex denom =
                d.eigenvalues[j] - std::conj(d.eigenvalues[k]);
            if (std::abs(denom) < 1e-12) {
                throw SingularSylvester(
                    "steady_sigma: vanishing denominator, lambda has a zero "
                    "eigenvalue on a conserved subspace");
            }
            x(j, k) = c(j, k) / denom;
        }
    }
    CMatrix sigma = d.right_vectors * x * d.right_vectors.adjoint();
    sigma = 0.5 * (sigma + sigma.adjoint().eval());
    return sigma;
}

// Steady currents (J_L, J_R) in nA from the settled dissipation matrices.
inline std::pair<double, double> steady_currents(const SteadyConfig& cfg) {
    const CMatrix sigma = steady_sigma(cfg);
    std::pair<double, double> out{0.0, 0.0};
    double* slot[2] = {&out.first, &out.second};
    int idx = 0;
    for (Lead l : {Lead::L, Lead::R}) {
        const LeadSpec& lead = cfg.spec.lead(l);
        const CMatrix q = k_alpha_steady(cfg, l) + lead.lambda * sigma +
                          sigma * lead.lambda;
        *slot[idx++] =
            -q.trace().real() / kHbar * kNanoampPerElectronFs;
    }
    return out;
}

}  // namespace wbl
