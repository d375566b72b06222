// model.hpp — physical problem definition: device Hamiltonian block,
// lead line-widths, bias profiles, level-shift rule, validation.

#pragma once

#include "wbl/matrix.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace wbl {

enum class Lead { L, R };

inline const char* lead_name(Lead l) { return l == Lead::L ? "L" : "R"; }

// Device block: equilibrium Hamiltonian h_D(0) plus an optional capacitive
// mean-field term charging_strength · (tr σ_D(t) − tr σ_D(0)) · I.
struct DeviceSpec {
    CMatrix h0;                       // eV, Hermitian
    double charging_strength = 0.0;   // eV per electron

    Eigen::Index n_orbitals() const { return h0.rows(); }
};

// One lead: line-width Λ^α, asymptotic bias ΔV^α, turn-on constant a.
struct LeadSpec {
    Lead label = Lead::L;
    CMatrix lambda;              // eV, Hermitian non-negative definite
    double bias_amplitude = 0.0; // V, ΔV^α
    double smoothing_a = 1.0;    // fs

    // settled level shift Δε^α(∞) = −ΔV^α
    double level_shift_inf() const { return -bias_amplitude; }
};

struct SystemSpec {
    DeviceSpec device;
    LeadSpec lead_L;
    LeadSpec lead_R;
    double mu0 = 0.0;           // eV
    double band_bottom = -200.0; // eV, lower cutoff ε_min of energy integrals

    const LeadSpec& lead(Lead l) const {
        return l == Lead::L ? lead_L : lead_R;
    }
    CMatrix lambda_total() const { return lead_L.lambda + lead_R.lambda; }
};

// Δε^α(t) = −ΔV^α (1 − e^{−t/a})
inline double level_shift(const LeadSpec& lead, double t) {
    if (lead.bias_amplitude == 0.0) return 0.0;
    return -lead.bias_amplitude * (1.0 - std::exp(-t / lead.smoothing_a));
}

// rigid device level shift δh_D(t) = ½[Δε^L(t) + Δε^R(t)]
inline double device_shift(const SystemSpec& spec, double t) {
    return 0.5 * (level_shift(spec.lead_L, t) + level_shift(spec.lead_R, t));
}

// h_D(t) = h_D(0) + δh_D(t)·I (+ mean-field charging term).
// occupation_shift is tr σ_D(t) − tr σ_D(0).
inline CMatrix h_d_at(const SystemSpec& spec, double t,
                      double occupation_shift = 0.0) {
    const Eigen::Index n = spec.device.n_orbitals();
    double shift = device_shift(spec, t);
    if (spec.device.charging_strength != 0.0) {
        shift += spec.device.charging_strength * occupation_shift;
    }
    return spec.device.h0 + shift * CMatrix::Identity(n, n);
}

inline CMatrix h_d_at(const SystemSpec& spec, double t, const CMatrix& sigma,
                      double trace_sigma0) {
    if (sigma.rows() != spec.device.n_orbitals()) {
        throw DimensionMismatch("h_d_at: sigma dimension mismatch");
    }
    return h_d_at(spec, t, sigma.trace().real() - trace_sigma0);
}

struct ValidationCheck {
    std::string name;
    bool pass = true;
    bool warning_only = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool ok() const {
        for (const auto& c : checks) {
            if (!c.pass && !c.warning_only) return false;
        }
        return true;
    }
    std::string summary() const {
        std::ostringstream os;
        for (const auto& c : checks) {
            os << (c.pass ? "pass" : (c.warning_only ? "warn" : "FAIL"))
               << "  " << c.name;
            if (!c.detail.empty()) os << ": " << c.detail;
            os << "\n";
        }
        return os.str();
    }
};

namespace detail {

inline void check_lead(const SystemSpec& spec, const LeadSpec& lead,
                       ValidationReport& rep) {
    const std::string tag = std::string("lead_") + lead_name(lead.label);
    const Eigen::Index n = spec.device.n_orbitals();
    if (lead.lambda.rows() != n || lead.lambda.cols() != n) {
        rep.checks.push_back({tag + ".lambda dimension", false, false,
                              "lambda must match the device block"});
        return;
    }
    if (!is_hermitian(lead.lambda, 1e-12)) {
        rep.checks.push_back({tag + ".lambda hermitian", false, false,
                              "defect " +
                              std::to_string(hermiticity_defect(lead.lambda))});
    } else {
        rep.checks.push_back({tag + ".lambda hermitian", true, false, ""});
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(lead.lambda,
                                              Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    rep.checks.push_back({tag + ".lambda non-negative definite",
                          min_eig >= -1e-12, false,
                          min_eig < -1e-12
                              ? "lambda not non-negative definite, min "
                                "eigenvalue " + std::to_string(min_eig)
                              : ""});
    rep.checks.push_back({tag + ".smoothing_a positive",
                          lead.smoothing_a > 0.0, false,
                          lead.smoothing_a > 0.0
                              ? ""
                              : "smoothing_a = " +
                                std::to_string(lead.smoothing_a)});
}

}  // namespace detail

// Checks every spec invariant; returns per-check results, never throws.
inline ValidationReport validate(const SystemSpec& spec) {
    ValidationReport rep;
    const CMatrix& h0 = spec.device.h0;
    if (h0.rows() != h0.cols() || h0.rows() == 0) {
        rep.checks.push_back({"device.h0 square", false, false,
                              "h0 must be square and non-empty"});
        return rep;
    }
    rep.checks.push_back({"device.h0 finite", all_finite(h0), false, ""});
    rep.checks.push_back(
        {"device.h0 hermitian", is_hermitian(h0, 1e-12), false,
         is_hermitian(h0, 1e-12)
             ? ""
             : "defect " + std::to_string(hermiticity_defect(h0))});
    detail::check_lead(spec, spec.lead_L, rep);
    detail::check_lead(spec, spec.lead_R, rep);
    rep.checks.push_back({"band_bottom below mu0",
                          spec.band_bottom < spec.mu0, false,
                          spec.band_bottom < spec.mu0
                              ? ""
                              : "band_bottom must lie below mu0"});
    if (spec.lead_L.lambda.rows() == h0.rows() &&
        spec.lead_R.lambda.rows() == h0.rows()) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(spec.lambda_total(),
                                                  Eigen::EigenvaluesOnly);
        const double max_eig = es.eigenvalues().maxCoeff();
        const double depth = spec.mu0 - spec.band_bottom;
        rep.checks.push_back(
            {"band depth dominates broadening", depth >= 10.0 * max_eig,
             true,
             depth >= 10.0 * max_eig
                 ? ""
                 : "mu0 - band_bottom = " + std::to_string(depth) +
                   " < 10 x max eigenvalue of lambda_total"});
    }
    return rep;
}

}  // namespace wbl
