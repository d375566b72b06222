// propagate.hpp — time-domain driver: equilibrium initialization, RK4
// integration of the closed EOM, current extraction, transient records.

#pragma once

#include "wbl/dissipation.hpp"
#include "wbl/matrix.hpp"
#include "wbl/model.hpp"
#include "wbl/units.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace wbl {

struct StationarityFailure : NumericError {
    double residual;
    explicit StationarityFailure(double res)
        : NumericError("equilibrium density does not make the EOM RHS "
                       "vanish, residual " + std::to_string(res)),
          residual(res) {}
};

struct PropagationFailure : NumericError {
    using NumericError::NumericError;
};

struct ReducedDensityMatrix {
    CMatrix sigma;   // dimensionless occupation, Hermitian
    double t = 0.0;  // fs
};

struct TransientRecord {
    std::vector<double> times;       // fs
    std::vector<double> j_L;         // nA
    std::vector<double> j_R;         // nA
    std::vector<double> occupation;  // tr σ_D
    CMatrix final_sigma;
    double max_hermiticity_drift = 0.0;
};

// Frozen pieces shared by all RHS evaluations of a run.
struct DissipationContext {
    EigDecomposition decomp0;  // h_D(0) − iΛ
    std::array<PropagatorState, 2> states;  // L, R
    double trace0 = 0.0;       // tr σ_D(0), feeds the charging term

    const PropagatorState& state(Lead l) const {
        return states[l == Lead::L ? 0 : 1];
    }
};

inline DissipationContext make_context(const SystemSpec& spec,
                                       double trace0) {
    const Eigen::Index n = spec.device.n_orbitals();
    DissipationContext ctx;
    if (!spec.lambda_total().isZero(0.0)) {
        ctx.decomp0 = eig_general(
            spec.device.h0 - Complex(0.0, 1.0) * spec.lambda_total());
    }
    ctx.states = {PropagatorState::initial(Lead::L, n),
                  PropagatorState::initial(Lead::R, n)};
    ctx.trace0 = trace0;
    return ctx;
}

// σ_D(0) = (2/π) ∫_{ε_min}^{μ⁰} G^r(ε) Λ G^a(ε) dε with
// G^{r,a}(ε) = (εI − h_D(0) ± iΛ)⁻¹, evaluated spectrally: with
// h_D(0) − iΛ = V D V⁻¹ the (j,k) element of the ε-integral reduces to
// [log terms]/(λ_j − λ_k*), which is exact on the finite window.
inline ReducedDensityMatrix equilibrium_density(const SystemSpec& spec) {
    const Eigen::Index n = spec.device.n_orbitals();
    const CMatrix lambda = spec.lambda_total();
    ReducedDensityMatrix out;
    out.t = 0.0;
    if (lambda.isZero(0.0)) {
        // Zero-broadening limit: twice the spectral projector below μ⁰.
        Eigen::SelfAdjointEigenSolver<CMatrix> es(spec.device.h0);
        CMatrix sigma = CMatrix::Zero(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (es.eigenvalues()[k] < spec.mu0) {
                sigma += 2.0 * es.eigenvectors().col(k) *
                         es.eigenvectors().col(k).adjoint();
            }
        }
        out.sigma = sigma;
        return out;
    }

    const EigDecomposition d =
        eig_general(spec.device.h0 - Complex(0.0, 1.0) * lambda);
    const CMatrix c = d.inverse_vectors * lambda * d.inverse_vectors.adjoint();
    const double a = spec.band_bottom;
    const double b = spec.mu0;
    CMatrix x(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const Complex lj = d.eigenvalues[j];
            const Complex mk = std::conj(d.eigenvalues[k]);
            const Complex num = std::log(b - lj) - std::log(a - lj) -
                                std::log(b - mk) + std::log(a - mk);
            x(j, k) = c(j, k) * num / (lj - mk);
        }
    }
    CMatrix sigma = (2.0 / std::numbers::pi) *
                    (d.right_vectors * x * d.right_vectors.adjoint());
    sigma = 0.5 * (sigma + sigma.adjoint().eval());
    out.sigma = sigma;
    return out;
}

// RHS of the closed EOM in 1/fs:
//   σ̇ = (−i/ħ)[h_D(t), σ] − (1/ħ) Σ_α Q_α(t).
// diss_states inside ctx must be advanced to time t.
inline CMatrix rhs(const SystemSpec& spec, double t, const CMatrix& sigma,
                   const DissipationContext& ctx) {
    const CMatrix h = h_d_at(spec, t, sigma, ctx.trace0);
    const Complex mi(0.0, -1.0);
    CMatrix out = (mi / kHbar) * (h * sigma - sigma * h);
    for (Lead l : {Lead::L, Lead::R}) {
        const LeadSpec& lead = spec.lead(l);
        if (lead.lambda.isZero(0.0)) continue;
        const DissipationResult q = lead_dissipation(
            spec, lead, ctx.state(l), ctx.decomp0, h, t, sigma);
        out -= q.q_alpha / kHbar;
    }
    return out;
}

namespace detail {

// Advance both lead propagators over [t, t + dt] with Simpson-averaged
// h_D and Δε across the step; the average is midpoint-consistent for the
// ordered product and keeps the commuting benchmark at fourth order.
inline void advance_states(const SystemSpec& spec, DissipationContext& ctx,
                           double t, double dt, double occupation_shift) {
    const CMatrix lambda_tot = spec.lambda_total();
    const CMatrix h_avg =
        (h_d_at(spec, t, occupation_shift) +
         4.0 * h_d_at(spec, t + 0.5 * dt, occupation_shift) +
         h_d_at(spec, t + dt, occupation_shift)) / 6.0;
    for (auto& state : ctx.states) {
        const LeadSpec& lead = spec.lead(state.lead);
        const double de_avg = (level_shift(lead, t) +
                               4.0 * level_shift(lead, t + 0.5 * dt) +
                               level_shift(lead, t + dt)) / 6.0;
        state = propagator_advance(state, h_avg, de_avg, lambda_tot, dt);
    }
}

}  // namespace detail

// One classical RK4 step on σ with stage-consistent dissipation states:
// provisional propagators at t+dt/2 and t+dt serve the inner stages and the
// full-step one is committed with the accepted step.
inline void rk4_step(const SystemSpec& spec, ReducedDensityMatrix& state,
                     DissipationContext& ctx, double dt) {
    if (dt <= 0.0) {
        throw NumericError("rk4_step: dt must be positive");
    }
    const double t = state.t;
    const CMatrix& s0 = state.sigma;
    const double occ0 = s0.trace().real() - ctx.trace0;

    const CMatrix k1 = rhs(spec, t, s0, ctx);

    DissipationContext ctx_half = ctx;
    detail::advance_states(spec, ctx_half, t, 0.5 * dt, occ0);
    const CMatrix k2 = rhs(spec, t + 0.5 * dt,
                           s0 + (0.5 * dt) * k1, ctx_half);
    const CMatrix k3 = rhs(spec, t + 0.5 * dt,
                           s0 + (0.5 * dt) * k2, ctx_half);

    DissipationContext ctx_full = std::move(ctx_half);
    const double occ_mid =
        (s0 + (0.5 * dt) * k3).trace().real() - ctx.trace0;
    detail::advance_states(spec, ctx_full, t + 0.5 * dt, 0.5 * dt, occ_mid);
    const CMatrix k4 = rhs(spec, t + dt, s0 + dt * k3, ctx_full);

    state.sigma = s0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    state.t = t + dt;
    ctx = std::move(ctx_full);
}

struct RunOptions {
    double dt = 0.02;    // fs
    double t_end = 25.0; // fs
    int stride = 1;      // record every Nth step
    double hermiticity_limit = 1e-8;
    std::optional<CMatrix> initial_sigma;  // overrides equilibrium init
    bool check_stationarity = true;        // only meaningful for zero bias
};

// Instantaneous lead currents in electrons/fs, J_α = −tr Q_α / ħ.
inline std::array<double, 2> lead_currents(const SystemSpec& spec, double t,
                                           const CMatrix& sigma,
                                           const DissipationContext& ctx) {
    const CMatrix h = h_d_at(spec, t, sigma, ctx.trace0);
    std::array<double, 2> j{0.0, 0.0};
    int idx = 0;
    for (Lead l : {Lead::L, Lead::R}) {
        const LeadSpec& lead = spec.lead(l);
        if (!lead.lambda.isZero(0.0)) {
            const DissipationResult q = lead_dissipation(
                spec, lead, ctx.state(l), ctx.decomp0, h, t, sigma);
            j[idx] = -q.q_alpha.trace().real() / kHbar;
        }
        ++idx;
    }
    return j;
}

inline TransientRecord run_transient(const SystemSpec& spec,
                                     const RunOptions& opts = {}) {
    if (opts.dt <= 0.0 || opts.t_end <= 0.0 || opts.stride < 1) {
        throw NumericError("run_transient: dt, t_end and stride must be "
                           "positive");
    }
    ReducedDensityMatrix state;
    if (opts.initial_sigma) {
        state.sigma = *opts.initial_sigma;
        state.t = 0.0;
    } else {
        state = equilibrium_density(spec);
    }
    DissipationContext ctx = make_context(spec, state.sigma.trace().real());

    if (!opts.initial_sigma && opts.check_stationarity &&
        !spec.lambda_total().isZero(0.0)) {
        const double residual = rhs(spec, 0.0, state.sigma, ctx).norm() * kHbar;
        if (residual > 1e-6) {
            throw StationarityFailure(residual);
        }
    }

    const auto n_steps =
        static_cast<long>(std::ceil(opts.t_end / opts.dt - 1e-9));
    TransientRecord rec;
    auto record = [&]() {
        const auto j = lead_currents(spec, state.t, state.sigma, ctx);
        rec.times.push_back(state.t);
        rec.j_L.push_back(j[0] * kNanoampPerElectronFs);
        rec.j_R.push_back(j[1] * kNanoampPerElectronFs);
        rec.occupation.push_back(state.sigma.trace().real());
    };
    record();
    for (long step = 0; step < n_steps; ++step) {
        rk4_step(spec, state, ctx, opts.dt);
        const double drift = hermiticity_defect(state.sigma);
        rec.max_hermiticity_drift =
            std::max(rec.max_hermiticity_drift, drift);
        if (!all_finite(state.sigma)) {
            throw PropagationFailure("run_transient: non-finite sigma at t = " +
                                     std::to_string(state.t));
        }
        if (drift > opts.hermiticity_limit) {
            throw PropagationFailure(
                "run_transient: hermiticity drift " + std::to_string(drift) +
                " at t = " + std::to_string(state.t) +
                "; check dt and eps_min");
        }
        if ((step + 1) % opts.stride == 0 || step + 1 == n_steps) {
            record();
        }
    }
    rec.final_sigma = state.sigma;
    return rec;
}

}  // namespace wbl
