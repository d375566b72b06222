#include "wbl/model.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using wbl::CMatrix;
using wbl::Complex;
using wbl::Lead;
using wbl::SystemSpec;

TEST_CASE("level_shift follows the exponential turn-on") {
    wbl::LeadSpec lead;
    lead.bias_amplitude = -2.0;  // settled shift +2 eV
    lead.smoothing_a = 0.5;
    CHECK(wbl::level_shift(lead, 0.0) == 0.0);
    CHECK(wbl::level_shift(lead, 1000.0) == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(wbl::level_shift(lead, 0.5) ==
          Catch::Approx(2.0 * (1.0 - std::exp(-1.0))).epsilon(1e-12));
    CHECK(lead.level_shift_inf() == 2.0);

    wbl::LeadSpec unbiased;
    unbiased.smoothing_a = 0.5;
    CHECK(wbl::level_shift(unbiased, 3.0) == 0.0);
}

TEST_CASE("device shift is the mean of the two lead shifts") {
    SystemSpec s = oracle::single_site(2.0, 0.1, 0.5);
    const double de_R = wbl::level_shift(s.lead_R, 1.3);
    CHECK(wbl::device_shift(s, 1.3) == Catch::Approx(0.5 * de_R));
}

TEST_CASE("h_d_at applies rigid shift and charging") {
    SystemSpec s;
    s.device.h0 = oracle::random_hermitian(3, 61);
    s.lead_L.lambda = CMatrix::Zero(3, 3);
    s.lead_R.lambda = CMatrix::Zero(3, 3);
    s.lead_R.label = Lead::R;
    s.lead_R.bias_amplitude = -2.0;
    s.lead_R.smoothing_a = 0.1;

    SECTION("zero bias returns h0 exactly") {
        SystemSpec flat = s;
        flat.lead_R.bias_amplitude = 0.0;
        CHECK((wbl::h_d_at(flat, 7.0) - flat.device.h0).norm() == 0.0);
    }

    SECTION("settled bias adds half the level shift") {
        const CMatrix h = wbl::h_d_at(s, 500.0);
        const CMatrix expect =
            s.device.h0 + 1.0 * CMatrix::Identity(3, 3);
        CHECK((h - expect).norm() < 1e-10);
    }

    SECTION("charging term tracks the occupation shift") {
        SystemSpec c = s;
        c.lead_R.bias_amplitude = 0.0;
        c.device.charging_strength = 1.0;
        const CMatrix h = wbl::h_d_at(c, 1.0, 0.1);
        CHECK((h - (c.device.h0 + 0.1 * CMatrix::Identity(3, 3))).norm() <
              1e-12);
    }

    SECTION("sigma overload checks dimensions") {
        CHECK_THROWS_AS(wbl::h_d_at(s, 1.0, CMatrix::Zero(2, 2), 0.0),
                        wbl::DimensionMismatch);
        const CMatrix sigma = 0.4 * CMatrix::Identity(3, 3);
        const CMatrix h = wbl::h_d_at(s, 0.0, sigma, 1.2);
        CHECK((h - s.device.h0).norm() == 0.0);  // charging off
    }
}

TEST_CASE("validate accepts a sound spec") {
    const SystemSpec s = oracle::single_site(2.0, 0.1);
    const wbl::ValidationReport rep = wbl::validate(s);
    CHECK(rep.ok());
    CHECK(rep.summary().find("FAIL") == std::string::npos);
}

TEST_CASE("validate flags broken specs") {
    SECTION("non-Hermitian device block") {
        SystemSpec s = oracle::single_site(2.0, 0.1);
        s.device.h0 = CMatrix::Zero(2, 2);
        s.device.h0(0, 1) = Complex(0.0, 1.0);
        s.lead_L.lambda = 0.1 * CMatrix::Identity(2, 2);
        s.lead_R.lambda = 0.1 * CMatrix::Identity(2, 2);
        CHECK_FALSE(wbl::validate(s).ok());
    }
    SECTION("negative-definite line-width") {
        SystemSpec s = oracle::single_site(2.0, 0.1);
        s.lead_L.lambda = -0.1 * CMatrix::Identity(1, 1);
        CHECK_FALSE(wbl::validate(s).ok());
    }
    SECTION("lambda dimension mismatch") {
        SystemSpec s = oracle::single_site(2.0, 0.1);
        s.lead_R.lambda = 0.1 * CMatrix::Identity(2, 2);
        CHECK_FALSE(wbl::validate(s).ok());
    }
    SECTION("non-positive smoothing constant") {
        SystemSpec s = oracle::single_site(2.0, 0.1);
        s.lead_R.smoothing_a = 0.0;
        CHECK_FALSE(wbl::validate(s).ok());
    }
    SECTION("band bottom above the chemical potential") {
        SystemSpec s = oracle::single_site(2.0, 0.1);
        s.band_bottom = 1.0;
        CHECK_FALSE(wbl::validate(s).ok());
    }
    SECTION("shallow band is a warning, not an error") {
        SystemSpec s = oracle::single_site(2.0, 0.1);
        s.band_bottom = -1.0;  // under 10x the total broadening... still ok
        const wbl::ValidationReport rep = wbl::validate(s);
        CHECK(rep.ok());
        bool warned = false;
        for (const auto& c : rep.checks) {
            if (!c.pass && c.warning_only) warned = true;
        }
        CHECK(warned);
    }
}

TEST_CASE("spec accessors") {
    const SystemSpec s = oracle::single_site(2.0, 0.1);
    CHECK(&s.lead(Lead::L) == &s.lead_L);
    CHECK(&s.lead(Lead::R) == &s.lead_R);
    CHECK((s.lambda_total() - 0.2 * CMatrix::Identity(1, 1)).norm() < 1e-15);
    CHECK(std::string(wbl::lead_name(Lead::L)) == "L");
    CHECK(std::string(wbl::lead_name(Lead::R)) == "R");
}
