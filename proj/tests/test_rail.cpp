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
#include <map>
#include <set>

#include "helpers.hpp"
#include "tapesim/rail.hpp"

using namespace tapesim;

namespace {

TraceRecord dr(std::int64_t block, int frag, Step q_in, Step d_in, Step data_out) {
    TraceRecord r;
    r.queue = QueueId::DR;
    r.mid = {block, frag};
    r.q_in = q_in;
    r.q_out = q_in;
    r.d_in = d_in;
    r.data_out = data_out;
    r.d_out = data_out == kNoStep ? kNoStep : data_out + 5;
    r.q_len = 1;
    return r;
}

}  // namespace

TEST_CASE("binomial pmf") {
    CHECK(binomial_pmf(2, 1, 0.5) == doctest::Approx(0.5));
    CHECK(binomial_pmf(10, 0, 0.0) == 1.0);
    CHECK(binomial_pmf(10, 11, 0.3) == 0.0);
    double total = 0.0;
    for (int x = 0; x <= 20; ++x) {
        // C(20, x) p^x q^(20-x) by direct products.
        double choose = 1.0;
        for (int i = 1; i <= x; ++i) choose = choose * (20 - x + i) / i;
        const double direct = choose * std::pow(0.3, x) * std::pow(0.7, 20 - x);
        CHECK(binomial_pmf(20, x, 0.3) == doctest::Approx(direct).epsilon(1e-10));
        total += binomial_pmf(20, x, 0.3);
    }
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("rates and the failure correction") {
    CHECK(failure_multiplier(6, 1, 10) == doctest::Approx(4.5));
    CHECK(failure_multiplier(4, 4, 10) == 0.0);
    CHECK(inflated_rate(2.0, 0.0, 6, 1, 10) == 2.0);
    CHECK(inflated_rate(2.0, 0.5, 3, 3, 10) == 2.0);
    CHECK(inflated_rate(2.0, 0.01, 6, 1, 10) == doctest::Approx(2.0 * (1 + 0.045)));
    CHECK(per_library_rate(0.3, 6, 10) == doctest::Approx(0.18));
    CHECK(failure_touch_rate(0.01, 6, 1, 10) == doctest::Approx(450.0));
    CHECK(std::isinf(failure_touch_rate(0.0, 6, 1, 10)));
}

TEST_CASE("library dispatch") {
    Rng rng(3);
    std::vector<int> hits(10);
    for (int i = 0; i < 20000; ++i) {
        const auto libs = dispatch_across_libraries(6, 10, rng);
        REQUIRE(libs.size() == 6);
        CHECK(std::set<int>(libs.begin(), libs.end()).size() == 6);
        for (int l : libs) ++hits[static_cast<std::size_t>(l)];
    }
    for (int h : hits) CHECK(h == doctest::Approx(12000).epsilon(0.03));
    CHECK_THROWS_AS(dispatch_across_libraries(3, 2, rng), ConfigValidationError);
}

TEST_CASE("object latency is the k-th fragment latency") {
    const std::vector<std::vector<TraceRecord>> traces = {
        {dr(1, 1, 0, 5, 12)}, {dr(1, 2, 0, 20, 30)}, {dr(1, 3, 0, 40, 45)}};
    auto one = aggregate_latency(traces, 1);
    REQUIRE(one.objects.size() == 1);
    CHECK(*one.objects[0].last_byte == 12);
    CHECK(*one.objects[0].first_byte == 5);
    auto two = aggregate_latency(traces, 2);
    CHECK(*two.objects[0].last_byte == 30);
    CHECK(*two.objects[0].first_byte == 20);
    CHECK(two.integrity_errors.empty());
    auto same = aggregate_latency({{dr(4, 1, 3, 5, 20)}, {dr(4, 2, 3, 6, 20)}, {dr(4, 3, 3, 7, 20)}}, 3);
    CHECK(*same.objects[0].last_byte == 17);
}

TEST_CASE("data-in is the earliest queue entry") {
    auto a = aggregate_latency({{dr(1, 1, 10, 12, 30)}, {dr(1, 2, 4, 8, 50)}}, 1);
    CHECK(a.objects[0].data_in == 4);
    CHECK(*a.objects[0].last_byte == 26);
}

TEST_CASE("unfinished and failed objects") {
    auto pending = aggregate_latency({{dr(1, 1, 0, 5, kNoStep)}}, 1);
    CHECK(pending.in_flight == 1);
    CHECK_FALSE(pending.objects[0].last_byte);
    TraceRecord failed = dr(2, 1, 0, 5, kNoStep);
    failed.d_out = 80;
    auto lost = aggregate_latency({{failed}}, 1);
    CHECK(lost.retrieval_failures == 1);
}

TEST_CASE("integrity errors") {
    TraceRecord ret;
    ret.queue = QueueId::R;
    ret.mid = {9, 1};
    auto orphan = aggregate_latency({{dr(1, 1, 0, 5, 10), ret}}, 1);
    CHECK(orphan.integrity_errors.size() == 1);
    auto dup = aggregate_latency({{dr(1, 1, 0, 5, 10)}, {dr(1, 1, 0, 6, 11)}}, 1);
    CHECK(dup.integrity_errors.size() == 1);
    auto bg = aggregate_latency({{dr(kBackgroundBlockBase + 3, 1, 0, 5, 10)}}, 1);
    CHECK(bg.objects.empty());
}

TEST_CASE("one library is the single-library run") {
    const SimConfig cfg = testing::enterprise({{"sim_duration", "12"}});
    const RailResult r = run_rail(cfg);
    const SimResult s = run_simulation(cfg);
    REQUIRE(r.libraries.size() == 1);
    CHECK(r.libraries[0].trace == s.trace);
    CHECK(r.num_libraries == 1);
}

TEST_CASE("array runs are deterministic and libraries are seeded separately") {
    const SimConfig cfg = testing::rail({{"sim_duration", "12"}});
    const RailResult a = run_rail(cfg);
    const RailResult b = run_rail(cfg);
    REQUIRE(a.libraries.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(a.libraries[i].trace == b.libraries[i].trace);
    CHECK(a.aggregate.integrity_errors.empty());

    RailOptions opts;
    opts.noise_seed_override[3] = 123456;
    const RailResult c = run_rail(cfg, opts);
    for (std::size_t i = 0; i < 10; ++i) {
        CAPTURE(i);
        if (i == 3)
            CHECK(c.libraries[i].trace != a.libraries[i].trace);
        else
            CHECK(c.libraries[i].trace == a.libraries[i].trace);
    }
    // Different libraries draw different homes.
    CHECK(a.libraries[0].trace != a.libraries[1].trace);
}

TEST_CASE("every object sends one copy to six distinct libraries") {
    const RailResult r = run_rail(testing::rail({{"sim_duration", "12"}}));
    std::map<std::int64_t, std::set<std::size_t>> libs;
    std::map<std::int64_t, int> rows;
    for (std::size_t i = 0; i < r.libraries.size(); ++i)
        for (const auto& row : r.libraries[i].trace)
            if (row.queue == QueueId::DR) {
                libs[row.mid.block].insert(i);
                ++rows[row.mid.block];
            }
    CHECK(static_cast<std::int64_t>(libs.size()) == r.objects);
    for (const auto& [b, l] : libs) CHECK(l.size() == 6);
    for (const auto& [b, n] : rows) CHECK(n == 6);
}

TEST_CASE("failure protocol arrays carry background load") {
    const RailResult r = run_rail(testing::rail({{"protocol", "failure"}, {"drive_fail_prob", "0.2"}}));
    CHECK(r.multiplier == doctest::Approx(4.5));
    CHECK(r.lambda_prime_j == doctest::Approx(r.lambda_j * (1 + 0.2 * 4.5)));
    std::int64_t bg = 0, frags = 0;
    for (auto n : r.background_per_library) bg += n;
    for (auto n : r.fragments_per_library) frags += n;
    CHECK(frags == r.objects);
    // Expected ratio p_d (n - k)(N - 1)/N = 0.9.
    CHECK(static_cast<double>(bg) / frags == doctest::Approx(0.9).epsilon(0.15));
}
