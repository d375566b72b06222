// io.hpp — configuration ingestion, run orchestration and CSV output.

#pragma once

#include "wbl/model.hpp"
#include "wbl/propagate.hpp"
#include "wbl/steadystate.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace wbl {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RunMode { transient, steady, transmission, selftest };

enum class CurrentUnit { nA, uA };

struct TransmissionGrid {
    double min = -5.0;  // eV
    double max = 5.0;
    int count = 400;
};

struct RunConfig {
    RunMode mode = RunMode::transient;
    SystemSpec system;
    double dt = 0.02;        // fs
    double t_end = 25.0;     // fs
    int panels = 64;
    int points_per_panel = 32;
    TransmissionGrid grid;
    std::string output_path = "out.csv";
    CurrentUnit unit = CurrentUnit::nA;
    int stride = 1;
};

namespace detail {

using nlohmann::json;

inline CMatrix parse_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) {
        throw ParseError(field + ": expected a non-empty nested array of "
                         "[re, im] pairs");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    CMatrix m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array()) {
            throw ParseError(field + ": row " + std::to_string(r) +
                             " is not an array");
        }
        if (r == 0) {
            m.resize(rows, static_cast<Eigen::Index>(row.size()));
        }
        if (static_cast<Eigen::Index>(row.size()) != m.cols()) {
            throw ParseError(field + ": ragged rows");
        }
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const json& e = row[static_cast<std::size_t>(c)];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
                !e[1].is_number()) {
                throw ParseError(field + ": entry (" + std::to_string(r) +
                                 "," + std::to_string(c) +
                                 ") must be a [re, im] pair");
            }
            m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

inline json matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline LeadSpec parse_lead(const json& j, Lead label) {
    const std::string tag = std::string("system.leads.") + lead_name(label);
    if (!j.contains("lambda")) {
        throw ValidationError(tag + ".lambda is required");
    }
    LeadSpec lead;
    lead.label = label;
    lead.lambda = parse_matrix(j.at("lambda"), tag + ".lambda");
    lead.bias_amplitude = j.value("bias_amplitude", 0.0);
    lead.smoothing_a = j.value("smoothing_a", 1.0);
    return lead;
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    using detail::json;
    RunConfig cfg;

    const std::string mode = j.value("mode", "transient");
    if (mode == "transient") cfg.mode = RunMode::transient;
    else if (mode == "steady") cfg.mode = RunMode::steady;
    else if (mode == "transmission") cfg.mode = RunMode::transmission;
    else if (mode == "selftest") cfg.mode = RunMode::selftest;
    else throw ParseError("mode: unknown mode '" + mode + "'");

    if (!j.contains("system")) throw ParseError("system section is required");
    const json& sys = j.at("system");
    if (!sys.contains("h0")) throw ValidationError("system.h0 is required");
    cfg.system.device.h0 = detail::parse_matrix(sys.at("h0"), "system.h0");
    cfg.system.device.charging_strength = sys.value("charging_strength", 0.0);
    cfg.system.mu0 = sys.value("mu0", 0.0);
    if (!sys.contains("leads") || !sys.at("leads").contains("L") ||
        !sys.at("leads").contains("R")) {
        throw ValidationError("system.leads must define both L and R");
    }
    cfg.system.lead_L = detail::parse_lead(sys.at("leads").at("L"), Lead::L);
    cfg.system.lead_R = detail::parse_lead(sys.at("leads").at("R"), Lead::R);

    const json numerics = j.value("numerics", json::object());
    cfg.dt = numerics.value("dt", 0.02);
    cfg.t_end = numerics.value("t_end", 25.0);
    cfg.system.band_bottom =
        numerics.value("eps_min", cfg.system.mu0 - 200.0);
    cfg.panels = numerics.value("panels", 64);
    cfg.points_per_panel = numerics.value("points_per_panel", 32);
    if (numerics.contains("transmission_grid")) {
        const json& g = numerics.at("transmission_grid");
        cfg.grid.min = g.value("min", -5.0);
        cfg.grid.max = g.value("max", 5.0);
        cfg.grid.count = g.value("count", 400);
    }

    const json output = j.value("output", json::object());
    cfg.output_path = output.value("path", "out.csv");
    const std::string unit = output.value("unit", "nA");
    if (unit == "nA") cfg.unit = CurrentUnit::nA;
    else if (unit == "uA") cfg.unit = CurrentUnit::uA;
    else throw ParseError("output.unit: expected 'nA' or 'uA'");
    cfg.stride = output.value("stride", 1);

    if (cfg.dt <= 0.0) throw ValidationError("dt must be positive");
    if (cfg.t_end <= 0.0) throw ValidationError("t_end must be positive");
    if (cfg.stride < 1) throw ValidationError("stride must be >= 1");
    if (cfg.panels < 1) throw ValidationError("panels must be >= 1");
    if (cfg.points_per_panel < 16) {
        throw ValidationError("points_per_panel must be >= 16");
    }
    if (cfg.grid.count < 2) {
        throw ValidationError("transmission_grid.count must be >= 2");
    }

    const ValidationReport rep = validate(cfg.system);
    if (!rep.ok()) {
        throw ValidationError("invalid system:\n" + rep.summary());
    }
    for (const auto& c : rep.checks) {
        if (!c.pass && c.warning_only) {
            std::cerr << "warning: " << c.name << ": " << c.detail << "\n";
        }
    }
    return cfg;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    using detail::json;
    json j;
    switch (cfg.mode) {
        case RunMode::transient: j["mode"] = "transient"; break;
        case RunMode::steady: j["mode"] = "steady"; break;
        case RunMode::transmission: j["mode"] = "transmission"; break;
        case RunMode::selftest: j["mode"] = "selftest"; break;
    }
    json sys;
    sys["h0"] = detail::matrix_to_json(cfg.system.device.h0);
    sys["charging_strength"] = cfg.system.device.charging_strength;
    sys["mu0"] = cfg.system.mu0;
    for (Lead l : {Lead::L, Lead::R}) {
        const LeadSpec& lead = cfg.system.lead(l);
        json jl;
        jl["lambda"] = detail::matrix_to_json(lead.lambda);
        jl["bias_amplitude"] = lead.bias_amplitude;
        jl["smoothing_a"] = lead.smoothing_a;
        sys["leads"][lead_name(l)] = std::move(jl);
    }
    j["system"] = std::move(sys);
    j["numerics"] = {{"dt", cfg.dt},
                     {"t_end", cfg.t_end},
                     {"eps_min", cfg.system.band_bottom},
                     {"panels", cfg.panels},
                     {"points_per_panel", cfg.points_per_panel},
                     {"transmission_grid",
                      {{"min", cfg.grid.min},
                       {"max", cfg.grid.max},
                       {"count", cfg.grid.count}}}};
    j["output"] = {{"path", cfg.output_path},
                   {"unit", cfg.unit == CurrentUnit::nA ? "nA" : "uA"},
                   {"stride", cfg.stride}};
    return j;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open config file: " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

namespace detail {

inline std::string fmt_sig(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

inline double unit_scale(CurrentUnit u) {
    return u == CurrentUnit::nA ? 1.0 : 1e-3;  // record currents are in nA
}

}  // namespace detail

inline void write_transient_csv(const TransientRecord& rec, CurrentUnit unit,
                                std::ostream& os) {
    const double s = detail::unit_scale(unit);
    os << "t_fs,J_L,J_R,occupation\n";
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        os << detail::fmt_sig(rec.times[i]) << ','
           << detail::fmt_sig(rec.j_L[i] * s) << ','
           << detail::fmt_sig(rec.j_R[i] * s) << ','
           << detail::fmt_sig(rec.occupation[i]) << '\n';
    }
}

namespace detail {

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    return out;
}

inline int run_transient_mode(const RunConfig& cfg) {
    RunOptions opts;
    opts.dt = cfg.dt;
    opts.t_end = cfg.t_end;
    opts.stride = cfg.stride;
    const TransientRecord rec = run_transient(cfg.system, opts);
    auto out = open_output(cfg.output_path);
    write_transient_csv(rec, cfg.unit, out);
    return 0;
}

inline int run_steady_mode(const RunConfig& cfg) {
    SteadyConfig sc = SteadyConfig::settled(cfg.system);
    sc.panels = cfg.panels;
    sc.points_per_panel = cfg.points_per_panel;
    const double s = unit_scale(cfg.unit);
    const auto [j_l, j_r] = steady_currents(sc);
    const CMatrix sigma = steady_sigma(sc);
    // residual of the settled EOM under the solved sigma
    const CMatrix k_sum =
        k_alpha_steady(sc, Lead::L) + k_alpha_steady(sc, Lead::R);
    const CMatrix lambda = cfg.system.lambda_total();
    const Complex mi(0.0, -1.0);
    const CMatrix res = mi * (sc.h_inf * sigma - sigma * sc.h_inf) -
                        (k_sum + lambda * sigma + sigma * lambda);
    auto out = open_output(cfg.output_path);
    out << "J_L,J_R,trace_sigma,residual\n"
        << fmt_sig(j_l * s) << ',' << fmt_sig(j_r * s) << ','
        << fmt_sig(sigma.trace().real()) << ',' << fmt_sig(res.norm())
        << '\n';
    return 0;
}

inline int run_transmission_mode(const RunConfig& cfg) {
    SteadyConfig sc = SteadyConfig::settled(cfg.system);
    sc.panels = cfg.panels;
    sc.points_per_panel = cfg.points_per_panel;
    auto out = open_output(cfg.output_path);
    out << "eps_eV,T\n";
    const double step = (cfg.grid.max - cfg.grid.min) / (cfg.grid.count - 1);
    for (int i = 0; i < cfg.grid.count; ++i) {
        const double eps = cfg.grid.min + i * step;
        out << fmt_sig(eps) << ',' << fmt_sig(transmission(sc, eps)) << '\n';
    }
    return 0;
}

inline int run_selftest_mode(const RunConfig& cfg, std::ostream& os) {
    int failures = 0;
    auto check = [&](const std::string& name, bool pass,
                     const std::string& detail = "") {
        os << (pass ? "pass" : "FAIL") << "  " << name;
        if (!detail.empty()) os << "  (" << detail << ")";
        os << "\n";
        if (!pass) ++failures;
    };

    const SystemSpec& spec = cfg.system;
    const Eigen::Index n = spec.device.n_orbitals();

    // P^(+)(0) = 0 for both forms
    {
        DissipationContext ctx = make_context(spec, 0.0);
        const CMatrix h0 = h_d_at(spec, 0.0);
        const CMatrix pp = p_plus_adiabatic(ctx.state(Lead::R),
                                            spec.lead_R, h0, 0.0, spec);
        HistoryBuffer hist;
        hist.append(0.0, h0, 0.0, 0.0);
        hist.append(cfg.dt, h_d_at(spec, cfg.dt),
                    level_shift(spec.lead_L, cfg.dt),
                    level_shift(spec.lead_R, cfg.dt));
        const CMatrix ppx = p_plus_exact(hist, spec.lead_R, 0.0, spec);
        check("p_plus(0) vanishes",
              pp.norm() == 0.0 && ppx.norm() == 0.0,
              "adiabatic " + fmt_sig(pp.norm()) + ", exact " +
                  fmt_sig(ppx.norm()));
    }

    // equilibrium stationarity at zero bias
    {
        SystemSpec zero_bias = spec;
        zero_bias.lead_L.bias_amplitude = 0.0;
        zero_bias.lead_R.bias_amplitude = 0.0;
        if (zero_bias.lambda_total().isZero(0.0)) {
            check("equilibrium stationarity", true, "skipped, lambda = 0");
        } else {
            const ReducedDensityMatrix eq = equilibrium_density(zero_bias);
            DissipationContext ctx =
                make_context(zero_bias, eq.sigma.trace().real());
            const double res =
                rhs(zero_bias, 0.0, eq.sigma, ctx).norm() * kHbar;
            check("equilibrium stationarity", res < 1e-6,
                  "residual " + fmt_sig(res) + " eV");
        }
    }

    // short transient: hermiticity preserved
    {
        RunOptions opts;
        opts.dt = cfg.dt;
        opts.t_end = std::min(cfg.t_end, 2.0);
        opts.stride = 1000000;
        const TransientRecord rec = run_transient(spec, opts);
        check("sigma stays Hermitian", rec.max_hermiticity_drift < 1e-10,
              "max drift " + fmt_sig(rec.max_hermiticity_drift));
    }

    // isolated limit conserves the occupation
    {
        SystemSpec isolated = spec;
        isolated.lead_L.lambda = CMatrix::Zero(n, n);
        isolated.lead_R.lambda = CMatrix::Zero(n, n);
        isolated.lead_L.bias_amplitude = 0.0;
        isolated.lead_R.bias_amplitude = 0.0;
        RunOptions opts;
        opts.dt = cfg.dt;
        opts.t_end = std::min(cfg.t_end, 5.0);
        opts.stride = 1000000;
        CMatrix sigma0 = CMatrix::Zero(n, n);
        sigma0(0, 0) = 1.0;
        opts.initial_sigma = sigma0;
        const TransientRecord rec = run_transient(isolated, opts);
        const double drift =
            std::abs(rec.occupation.back() - rec.occupation.front());
        check("closed-system occupation conserved", drift < 1e-8,
              "drift " + fmt_sig(drift));
    }

    os << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
    return failures == 0 ? 0 : 2;
}

}  // namespace detail

// Executes the configured run; returns the process exit status
// (0 success, 1 validation error, 2 numeric failure).
inline int run(const RunConfig& cfg) {
    try {
        switch (cfg.mode) {
            case RunMode::transient: return detail::run_transient_mode(cfg);
            case RunMode::steady: return detail::run_steady_mode(cfg);
            case RunMode::transmission:
                return detail::run_transmission_mode(cfg);
            case RunMode::selftest:
                return detail::run_selftest_mode(cfg, std::cout);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace wbl
