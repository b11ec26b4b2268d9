/*
 * Copyright 2026 The tapesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "tapesim/config.hpp"
#include "tapesim/geometry.hpp"

using namespace tapesim;

TEST_CASE("enterprise document parses") {
    const SimConfig c = testing::enterprise();
    CHECK(c.num_cartridges == 6720);
    CHECK(c.vertical_dim == 40);
    CHECK(c.cartridge_capacity == 12e6);
    CHECK(c.num_robots == 2);
    CHECK(c.robot_xph == 150);
    CHECK(c.num_drives == 80);
    CHECK(c.drive_rate == 300);
    CHECK(c.protocol == Protocol::Redundant);
    CHECK(c.effective_dispatch() == 6);
    CHECK(c.horizon_steps() == 72 * 3600);
    const LibraryGrid g = build_grid(c);
    CHECK(g.rows() == 40);
    CHECK(g.cols() == 168);
    // 6720 x 12 TB, in units of 10^3 TB.
    CHECK(c.library_capacity_mb() / 1e9 == doctest::Approx(80.64));
}

TEST_CASE("rail library geometry is 21 x 32") {
    const SimConfig c = testing::rail();
    const LibraryGrid g = build_grid(c);
    CHECK(g.rows() == 21);
    CHECK(g.cols() == 32);
}

TEST_CASE("validation errors name the field") {
    try {
        testing::enterprise({{"code_k", "2"}, {"code_n", "1"}});
        FAIL("expected a validation error");
    } catch (const ConfigValidationError& e) {
        CHECK(e.field() == "code_n");
    }
    try {
        testing::enterprise({{"vertical_dim", "41"}});
        FAIL("expected a validation error");
    } catch (const ConfigValidationError& e) {
        CHECK(e.field() == "vertical_dim");
    }
    CHECK_THROWS_AS(testing::enterprise({{"drive_fail_prob", "1"}}), ConfigValidationError);
    CHECK_THROWS_AS(testing::enterprise({{"num_robots", "0"}}), ConfigValidationError);
}

TEST_CASE("parse errors name the key") {
    try {
        parse_config(testing::kEnterprise + "bogus = 1\n");
        FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
        CHECK(e.key() == "bogus");
    }
    try {
        testing::enterprise({{"num_drives", "many"}});
        FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
        CHECK(e.key() == "num_drives");
    }
    CHECK_THROWS_AS(parse_config("num_cartridges = 10\n"), ConfigParseError);  // mandatory keys missing
    CHECK_THROWS_AS(parse_config(testing::kEnterprise + "num_drives = 3\n"), ConfigParseError);
}

TEST_CASE("short spellings") {
    const SimConfig c = testing::enterprise({{"threshold", "42"}, {"seed", "9"}});
    CHECK(c.failure_threshold_steps == 42);
    CHECK(c.rng_seed == 9);
    CHECK(canonical_key("libraries") == "num_libraries");
    CHECK_THROWS_AS(canonical_key("nope"), ConfigParseError);
}

TEST_CASE("serialization round trip") {
    for (const auto& c : {testing::enterprise(), testing::rail(),
                          testing::enterprise({{"protocol", "failure"}, {"user_weights", "1,2,3,4"},
                                               {"num_users", "4"}, {"drive_positions", "0:0;1:5"},
                                               {"num_drives", "2"}, {"motion_model", "zero"}})}) {
        const SimConfig back = parse_config(serialize_config(c));
        CHECK(back == c);
        CHECK(serialize_config(back) == serialize_config(c));
    }
}

TEST_CASE("touch rate by hand") {
    // 100 * 1000 * 0.5 * 2 * 1 / (1 * 10 * 1)
    CHECK(touch_rate(100, 1000.0, 0.5, 2.0, 1, 1, 10.0, 1.0) == 10000.0);
    // k = n, full, AOTR 1: NoC * C_t / mu_o
    CHECK(touch_rate(720, 3.0, 1.0, 1.0, 4, 4, 6.0, 1.0) == 360.0);
}

TEST_CASE("touch rate on random tuples") {
    std::mt19937_64 gen(20260101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const std::int64_t noc = 1 + static_cast<std::int64_t>(u(gen) * 20000);
        const double ct = 1e3 + u(gen) * 2e7;
        const double fill = 0.05 + 0.95 * u(gen);
        const double aotr = 0.1 + 10 * u(gen);
        const int n = 1 + static_cast<int>(u(gen) * 10);
        const int k = 1 + static_cast<int>(u(gen) * n);
        const double mu = 10 + 1e4 * u(gen);
        const double period = 1 + 1e7 * u(gen);
        // Independent arithmetic in extended precision, different order.
        const long double expect = (static_cast<long double>(aotr) * fill) * (static_cast<long double>(k) / n) *
                                   (static_cast<long double>(ct) / mu) * (static_cast<long double>(noc) / period);
        const double got = touch_rate(noc, ct, fill, aotr, k, n, mu, period);
        CAPTURE(i);
        CHECK(std::fabs(static_cast<long double>(got) - expect) <= 4 * std::numeric_limits<double>::epsilon() * expect);
    }
}

TEST_CASE("a manual touch rate wins") {
    const SimConfig c = testing::enterprise({{"aotr", "7"}, {"fill_ratio", "0.3"}});
    CHECK(derive_arrival_rate(c) == doctest::Approx(600.0 / 86400.0).epsilon(1e-15));
    SimConfig d = testing::enterprise({{"step_seconds", "2"}});
    CHECK(derive_arrival_rate(d) == doctest::Approx(600.0 * 2 / 86400.0).epsilon(1e-15));
}

TEST_CASE("formula rate when no manual rate is given") {
    SimConfig c = testing::enterprise();
    c.objects_touched_per_day.reset();
    c.aotr = 0.5;
    c.code_n = 6;
    c.code_k = 1;
    const double per_year = 6720.0 * 12e6 * 1.0 * 0.5 * 1 / (6 * 5000.0);
    CHECK(derive_arrival_rate(c) == doctest::Approx(per_year / (365 * 86400.0)).epsilon(1e-14));
}
