// wbltrans — transient and steady-state quantum transport through a
// two-lead device with wide-band-limit dissipation.
//
//   wbltrans <transient|steady|transmission|selftest> --config <path>
//            [--out <path>] [--unit nA|uA] [--stride N]

#include "wbl/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"transient/steady quantum transport with WBL dissipation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string unit;
    int stride = 0;

    auto add_mode = [&](const char* name, const char* desc,
                        bool config_required) {
        CLI::App* sub = app.add_subcommand(name, desc);
        auto* opt = sub->add_option("--config", config_path, "config file");
        if (config_required) opt->required();
        sub->add_option("--out", out_path, "output file (overrides config)");
        sub->add_option("--unit", unit, "current unit, nA or uA")
            ->check(CLI::IsMember({"nA", "uA"}));
        sub->add_option("--stride", stride, "record every Nth step")
            ->check(CLI::PositiveNumber);
        return sub;
    };

    add_mode("transient", "integrate the EOM and write J_L(t), J_R(t)", true);
    add_mode("steady", "settled-bias steady-state summary", true);
    add_mode("transmission", "transmission curve T(eps)", true);
    add_mode("selftest", "run the built-in invariant checks", false);

    CLI11_PARSE(app, argc, argv);
    const std::string mode = app.get_subcommands().front()->get_name();

    wbl::RunConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = wbl::load_config(config_path);
        } else {
            // selftest without a config: single-site default system
            nlohmann::json j = {
                {"mode", "selftest"},
                {"system",
                 {{"h0", {{{0.0, 0.0}}}},
                  {"mu0", 0.0},
                  {"leads",
                   {{"L", {{"lambda", {{{0.1, 0.0}}}}}},
                    {"R",
                     {{"lambda", {{{0.1, 0.0}}}},
                      {"bias_amplitude", -2.0},
                      {"smoothing_a", 0.1}}}}}}},
            };
            cfg = wbl::config_from_json(j);
        }
    } catch (const wbl::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const wbl::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (mode == "transient") cfg.mode = wbl::RunMode::transient;
    else if (mode == "steady") cfg.mode = wbl::RunMode::steady;
    else if (mode == "transmission") cfg.mode = wbl::RunMode::transmission;
    else cfg.mode = wbl::RunMode::selftest;

    if (!out_path.empty()) cfg.output_path = out_path;
    if (!unit.empty()) {
        cfg.unit = unit == "nA" ? wbl::CurrentUnit::nA : wbl::CurrentUnit::uA;
    }
    if (stride > 0) cfg.stride = stride;

    return wbl::run(cfg);
}
