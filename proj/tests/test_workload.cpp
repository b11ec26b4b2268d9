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

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "tapesim/workload.hpp"

using namespace tapesim;

TEST_CASE("zero rate gives no arrivals") {
    const SimConfig c = testing::enterprise();
    Rng rng(1);
    CHECK(generate_arrivals(c, 0.0, c.horizon_steps(), rng).empty());
}

TEST_CASE("600 per day over three days") {
    const SimConfig c = testing::enterprise();
    for (std::uint64_t seed : {1, 2, 3}) {
        Rng rng = make_stream(seed, 0, "arrivals");
        const auto reqs = generate_arrivals(c, derive_arrival_rate(c), c.horizon_steps(), rng);
        CHECK(std::fabs(static_cast<double>(reqs.size()) - 1800.0) <= 3 * std::sqrt(1800.0));
        Step last = 0;
        for (const auto& r : reqs) {
            CHECK(r.arrival_step >= last);
            CHECK(r.arrival_step < c.horizon_steps());
            last = r.arrival_step;
            CHECK(r.object_size == 5000.0);
            CHECK(r.user_id >= 0);
            CHECK(r.user_id < 40);
            REQUIRE(r.fragment_homes.size() == 6);
            std::set<CartridgeId> homes(r.fragment_homes.begin(), r.fragment_homes.end());
            CHECK(homes.size() == 6);
            CHECK(*homes.begin() >= 0);
            CHECK(*homes.rbegin() < 6720);
        }
    }
}

TEST_CASE("shape-1 Weibull sizes are exponential") {
    // Kolmogorov-Smirnov against the exponential CDF, alpha = 0.01.
    const SimConfig c = testing::enterprise({{"object_size_fixed", "false"}, {"object_size_shape", "1"},
                                             {"object_size_scale", "5000"}});
    Rng rng(77);
    const int n = 100000;
    std::vector<double> x(n);
    double sum = 0.0;
    for (auto& v : x) sum += (v = sample_object_size(c, rng));
    CHECK(sum / n == doctest::Approx(5000).epsilon(0.02));
    std::sort(x.begin(), x.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = 1.0 - std::exp(-x[static_cast<std::size_t>(i)] / 5000.0);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("weighted users") {
    const SimConfig c = testing::enterprise({{"num_users", "2"}, {"user_weights", "1,3"}});
    Rng rng(2);
    const auto reqs = generate_arrivals(c, 0.5, 40000, rng);
    const auto heavy = std::count_if(reqs.begin(), reqs.end(), [](const auto& r) { return r.user_id == 1; });
    CHECK(static_cast<double>(heavy) / reqs.size() == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("placement draws distinct cartridges") {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const auto homes = place_fragments(rng, 10, 10);
        CHECK(std::set<CartridgeId>(homes.begin(), homes.end()).size() == 10);
    }
}

namespace {
DataRequest req(std::int64_t id, int user, double size, Step t) {
    DataRequest r;
    r.request_id = id;
    r.user_id = user;
    r.object_size = size;
    r.arrival_step = t;
    r.fragment_homes = {id};
    return r;
}
}  // namespace

TEST_CASE("collocation merges every tenth 10 MB request") {
    CollocationBuffer buf(1, 100.0);
    int merged = 0;
    for (int i = 0; i < 1000; ++i) {
        auto out = buf.collocate(req(i, 0, 10.0, i));
        if (out) {
            ++merged;
            CHECK(out->object_size == doctest::Approx(100.0));
            CHECK(out->arrival_step == i);
            CHECK(out->request_id == i - 9);
        }
    }
    CHECK(merged == 100);
    CHECK(buf.total_in() == doctest::Approx(buf.total_out()));
}

TEST_CASE("collocation is per user and conserves bytes") {
    CollocationBuffer buf(3, 50.0);
    Rng rng(9);
    double emitted = 0.0;
    for (int i = 0; i < 500; ++i) {
        if (auto out = buf.collocate(req(i, static_cast<int>(uniform_index(rng, 3)), uniform(rng, 1, 20), i)))
            emitted += out->object_size;
    }
    double buffered = 0.0;
    for (int u = 0; u < 3; ++u) buffered += buf.buffered_volume(u);
    CHECK(emitted + buffered == doctest::Approx(buf.total_in()));
    for (const auto& r : buf.flush_all(600)) emitted += r.object_size;
    CHECK(emitted == doctest::Approx(buf.total_in()));
    for (int u = 0; u < 3; ++u) CHECK(buf.buffered_volume(u) == 0.0);
}

TEST_CASE("collocation disabled or oversized") {
    CollocationBuffer off(2, 0.0);
    CHECK_FALSE(off.enabled());
    for (int i = 0; i < 5; ++i) {
        auto out = off.collocate(req(i, 1, 3.0, i));
        REQUIRE(out);
        CHECK(out->request_id == i);
        CHECK(out->object_size == 3.0);
    }
    CollocationBuffer on(1, 100.0);
    auto big = on.collocate(req(7, 0, 250.0, 3));
    REQUIRE(big);
    CHECK(big->request_id == 7);
    CHECK(big->object_size == 250.0);
}
