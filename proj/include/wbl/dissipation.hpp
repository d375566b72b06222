// dissipation.hpp — the wide-band-limit dissipation functional
//   Q_α(t) = K^α(t) + {Λ^α, σ_D(t)},  K^α = P^α + (P^α)†,
//   P^α = P^(−) + P^(+),
// with the accumulated lead propagator U^α(t), the adiabatic form of
// P^(+), and the exact double-integral form retained for validation.

#pragma once

#include "wbl/expint.hpp"
#include "wbl/matrix.hpp"
#include "wbl/model.hpp"
#include "wbl/units.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace wbl {

struct InsufficientHistory : NumericError {
    using NumericError::NumericError;
};

struct HermiticityViolation : NumericError {
    using NumericError::NumericError;
};

// Accumulated propagator U^α(t) = T exp{−(i/ħ)∫₀ᵗ [h_D − iΛ − Δε^α I] dτ}
// together with the scalar bias phase ∫₀ᵗ Δε^α dτ / ħ.
struct PropagatorState {
    Lead lead = Lead::L;
    CMatrix u_accum;
    double phase_accum = 0.0;
    double t_current = 0.0;

    static PropagatorState initial(Lead l, Eigen::Index dim) {
        return {l, CMatrix::Identity(dim, dim), 0.0, 0.0};
    }

    // U^(−)(t): the bias-free contractive propagator; the scalar Δε phase
    // factors out of the ordered exponential exactly.
    CMatrix u_minus() const {
        return std::exp(Complex(0.0, -phase_accum)) * u_accum;
    }
};

// One multiplicative step u ← u · exp(−i[h_mid − iΛ − de_mid·I] dt / ħ).
// h_mid and de_mid are averages of h_D and Δε^α over the step; a plain
// midpoint sample gives a second-order ordered product, a Simpson average
// keeps fourth-order accuracy in the commuting case.
inline PropagatorState propagator_advance(const PropagatorState& state,
                                          const CMatrix& h_mid, double de_mid,
                                          const CMatrix& lambda_total,
                                          double dt) {
    if (dt <= 0.0) {
        throw NumericError("propagator_advance: dt must be positive");
    }
    const Eigen::Index n = h_mid.rows();
    const Complex mi(0.0, -1.0);
    const CMatrix arg =
        mi * (h_mid - Complex(0.0, 1.0) * lambda_total -
              de_mid * CMatrix::Identity(n, n)) * (dt / kHbar);
    PropagatorState next = state;
    next.u_accum = state.u_accum * mat_exp(arg);
    next.phase_accum = state.phase_accum + de_mid * dt / kHbar;
    next.t_current = state.t_current + dt;
    return next;
}

// V diag(I_k) V⁻¹ with I_k = ∫_{eps_min}^{mu0} e^{iεt/ħ}/(ε − λ_k) dε,
// for the eigendecomposition of the (shifted) non-Hermitian h − iΛ.
inline CMatrix fermi_resolvent_integral(const EigDecomposition& decomp,
                                        double t, double mu0,
                                        double eps_min) {
    return decomp.apply([&](Complex lam) {
        return fermi_window_integral(lam, t, eps_min, mu0);
    });
}

// P^(−)(t) = −(2i/π) e^{i∫Δε/ħ} U^(−)(t) ∫_{ε_min}^{μ⁰} e^{iεt/ħ}
//            (ε − h_D(0) + iΛ)⁻¹ dε Λ^α.
// The scalar phase times U^(−) equals the full U^α(t) held in the state.
inline CMatrix p_minus(const PropagatorState& state,
                       const EigDecomposition& decomp0, const LeadSpec& lead,
                       double t, const SystemSpec& spec) {
    if (lead.lambda.isZero(0.0)) {
        return CMatrix::Zero(lead.lambda.rows(), lead.lambda.cols());
    }
    const Complex pref(0.0, -2.0 / std::numbers::pi);
    const CMatrix window =
        fermi_resolvent_integral(decomp0, t, spec.mu0, spec.band_bottom);
    return pref * state.u_accum * window * lead.lambda;
}

// Adiabatic P^(+)(t) ≈ −(2i/π) ∫_{ε_min}^{μ⁰} [I − U^α(t) e^{iεt/ħ}]
//                      (ε − h_D(t) + iΛ + Δε^α(t))⁻¹ dε Λ^α,
// evaluated in the diagonal representation of h_D(t) − iΛ − Δε^α(t)·I.
inline CMatrix p_plus_adiabatic(const PropagatorState& state,
                                const LeadSpec& lead, const CMatrix& h_now,
                                double t, const SystemSpec& spec) {
    const Eigen::Index n = h_now.rows();
    if (lead.lambda.isZero(0.0)) {
        return CMatrix::Zero(n, n);
    }
    const CMatrix lambda_tot = spec.lambda_total();
    const double de_now = level_shift(lead, t);
    const CMatrix shifted = h_now -
                            Complex(0.0, 1.0) * lambda_tot -
                            de_now * CMatrix::Identity(n, n);
    const EigDecomposition decomp = eig_general(shifted);
    const CMatrix resolvent_part =
        fermi_resolvent_integral(decomp, 0.0, spec.mu0, spec.band_bottom);
    const CMatrix oscillatory_part =
        state.u_accum *
        fermi_resolvent_integral(decomp, t, spec.mu0, spec.band_bottom);
    const Complex pref(0.0, -2.0 / std::numbers::pi);
    return pref * (resolvent_part - oscillatory_part) * lead.lambda;
}

// Uniformly sampled h_D(t_k) and per-lead Δε^α(t_k) backing the exact
// time-ordered double integral.
struct HistoryBuffer {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<CMatrix> h_samples;
    std::vector<double> de_L;
    std::vector<double> de_R;

    void append(double t, CMatrix h, double de_l, double de_r) {
        if (!times.empty()) {
            const double step = t - times.back();
            if (step <= 0.0) {
                throw NumericError("HistoryBuffer: times must increase");
            }
            if (dt == 0.0) {
                dt = step;
            } else if (std::abs(step - dt) > 1e-9 * dt) {
                throw NumericError("HistoryBuffer: spacing must be uniform");
            }
        }
        times.push_back(t);
        h_samples.push_back(std::move(h));
        de_L.push_back(de_l);
        de_R.push_back(de_r);
    }

    const std::vector<double>& de(Lead l) const {
        return l == Lead::L ? de_L : de_R;
    }

    std::size_t size() const { return times.size(); }
};

namespace detail {

// ∫₀¹ e^{zu} du and ∫₀¹ u e^{zu} du, stable for small |z|.
inline void exp_moments(Complex z, Complex& p0, Complex& p1) {
    if (std::abs(z) < 1e-4) {
        p0 = 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
        p1 = 0.5 + z * (1.0 / 3.0 + z * (0.125 + z / 30.0));
        return;
    }
    const Complex ez = std::exp(z);
    p0 = (ez - 1.0) / z;
    p1 = (ez * (z - 1.0) + 1.0) / (z * z);
}

}  // namespace detail

// Exact P^(+)(t) = −(2/π) ∫_{ε_min}^{μ⁰} dε ∫₀ᵗ dτ
//                  e^{−(i/ħ)∫_τ^t [h_D − iΛ − Δε^α − ε] dt̄} Λ^α.
//
// The scalar ε commutes out of the ordered exponential, leaving
// W(t,τ) e^{iε(t−τ)/ħ} with W composed from per-step exponentials over the
// stored history. The τ-integral is trapezoidal in W with the ε phase
// integrated exactly on each step (Filon weights); the ε-integral uses
// panel-wise Gauss–Legendre with ≥20 points per oscillation period 2πħ/t.
// Cost O(N_t · N_ε + N_t · n³) per call — validation use only.
inline CMatrix p_plus_exact(const HistoryBuffer& history, const LeadSpec& lead,
                            double t, const SystemSpec& spec) {
    const Eigen::Index n = spec.device.n_orbitals();
    if (lead.lambda.isZero(0.0) || t == 0.0) {
        return CMatrix::Zero(n, n);
    }
    if (history.size() < 2 || history.times.front() > 0.0 ||
        history.times.back() < t - 1e-9 * history.dt) {
        throw InsufficientHistory(
            "p_plus_exact: history must cover [0, t] at integrator "
            "resolution");
    }
    const double dt = history.dt;
    const auto n_steps =
        static_cast<std::size_t>(std::llround(t / dt));
    if (std::abs(n_steps * dt - t) > 1e-6 * dt || n_steps + 1 > history.size()) {
        throw InsufficientHistory("p_plus_exact: t must lie on the history "
                                  "grid");
    }
    const CMatrix lambda_tot = spec.lambda_total();
    const std::vector<double>& de = history.de(lead.label);

    // W(t, τ_j) accumulated backwards from τ = t with per-step midpoint
    // exponentials.
    std::vector<CMatrix> w(n_steps + 1);
    w[n_steps] = CMatrix::Identity(n, n);
    const Complex mi(0.0, -1.0);
    for (std::size_t j = n_steps; j-- > 0;) {
        const CMatrix h_mid = 0.5 * (history.h_samples[j] +
                                     history.h_samples[j + 1]);
        const double de_mid = 0.5 * (de[j] + de[j + 1]);
        const CMatrix arg =
            mi * (h_mid - Complex(0.0, 1.0) * lambda_tot -
                  de_mid * CMatrix::Identity(n, n)) * (dt / kHbar);
        w[j] = w[j + 1] * mat_exp(arg);
    }

    // Per-node scalar coefficients c_j = ∫dε Σ_steps (Filon weights),
    // accumulated over Gauss–Legendre nodes in ε.
    static constexpr int kGaussPts = 10;
    static constexpr double kGx[kGaussPts] = {
        -0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
        -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
        0.4333953941292472,  0.6794095682990244,  0.8650633666889845,
        0.9739065285171717};
    static constexpr double kGw[kGaussPts] = {
        0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
        0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
        0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
        0.0666713443086881};

    const double a = spec.band_bottom;
    const double b = spec.mu0;
    const double period = 2.0 * std::numbers::pi * kHbar / t;
    const double max_panel = 0.5 * period;  // 20 Gauss points per period
    const int n_panels = std::max(
        16, static_cast<int>(std::ceil((b - a) / max_panel)));
    const double panel_w = (b - a) / n_panels;

    std::vector<Complex> coef(n_steps + 1, Complex(0.0));
    for (int p = 0; p < n_panels; ++p) {
        const double e_lo = a + p * panel_w;
        for (int g = 0; g < kGaussPts; ++g) {
            const double eps = e_lo + 0.5 * panel_w * (kGx[g] + 1.0);
            const double weight = 0.5 * panel_w * kGw[g];
            const Complex z(0.0, -eps * dt / kHbar);
            Complex p0, p1;
            detail::exp_moments(z, p0, p1);
            const Complex wa = dt * (p0 - p1);  // weight of the left node
            const Complex wb = dt * p1;         // weight of the right node
            // phase e^{iε(t−τ_j)/ħ} at τ_j = j·dt, stepped multiplicatively
            Complex phase = std::exp(Complex(0.0, eps * t / kHbar));
            const Complex phase_step = std::exp(Complex(0.0, -eps * dt / kHbar));
            for (std::size_t j = 0; j < n_steps; ++j) {
                coef[j] += weight * wa * phase;
                coef[j + 1] += weight * wb * phase;
                phase *= phase_step;
            }
        }
    }

    CMatrix acc = CMatrix::Zero(n, n);
    for (std::size_t j = 0; j <= n_steps; ++j) {
        acc += coef[j] * w[j];
    }
    // the τ measure carries 1/ħ: the exponent is (i/ħ)∫(...)dt̄
    return (-2.0 / (std::numbers::pi * kHbar)) * acc * lead.lambda;
}

// Full per-lead dissipation at one instant.
struct DissipationResult {
    CMatrix q_alpha;
    CMatrix k_alpha;
    CMatrix p_minus;
    CMatrix p_plus;
};

// Q_α = K^α + Λ^α σ + σ Λ^α, asserting the Hermiticity contracts.
inline DissipationResult q_wbl(const CMatrix& sigma, const CMatrix& k_alpha,
                               const LeadSpec& lead) {
    const double scale = std::max(1.0, k_alpha.norm());
    if (hermiticity_defect(k_alpha) > 1e-10 * scale) {
        throw HermiticityViolation("q_wbl: K^alpha not Hermitian, defect " +
                                   std::to_string(hermiticity_defect(k_alpha)));
    }
    if (hermiticity_defect(sigma) > 1e-8 * std::max(1.0, sigma.norm())) {
        throw HermiticityViolation("q_wbl: sigma not Hermitian, defect " +
                                   std::to_string(hermiticity_defect(sigma)));
    }
    DissipationResult r;
    r.k_alpha = k_alpha;
    r.q_alpha = k_alpha + lead.lambda * sigma + sigma * lead.lambda;
    return r;
}

// Assembles P^(−), adiabatic P^(+), K^α and Q_α for one lead. decomp0 is the
// frozen decomposition of h_D(0) − iΛ; state must be advanced to time t.
inline DissipationResult lead_dissipation(const SystemSpec& spec,
                                          const LeadSpec& lead,
                                          const PropagatorState& state,
                                          const EigDecomposition& decomp0,
                                          const CMatrix& h_now, double t,
                                          const CMatrix& sigma) {
    const Eigen::Index n = spec.device.n_orbitals();
    if (lead.lambda.isZero(0.0)) {
        // Isolated limit: exact zeros, no integrals.
        DissipationResult r;
        r.q_alpha = r.k_alpha = r.p_minus = r.p_plus = CMatrix::Zero(n, n);
        return r;
    }
    DissipationResult r;
    r.p_minus = p_minus(state, decomp0, lead, t, spec);
    r.p_plus = p_plus_adiabatic(state, lead, h_now, t, spec);
    const CMatrix p = r.p_minus + r.p_plus;
    r.k_alpha = p + p.adjoint();
    const DissipationResult q = q_wbl(sigma, r.k_alpha, lead);
    r.q_alpha = q.q_alpha;
    return r;
}

}  // namespace wbl
