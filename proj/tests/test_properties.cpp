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


// Lifecycle and conservation properties over random valid configurations.

#include <doctest.h>

#include <map>
#include <set>

#include "tapesim/kpi.hpp"
#include "tapesim/rail.hpp"

#include "property_checks.hpp"

using namespace tapesim;

namespace {

constexpr int kConfigs = 240;

void check_run(const SimConfig& cfg, const SimResult& r) {
    for (const auto& v : testing::check_run(cfg, r)) FAIL_CHECK(v);
}

SimConfig random_config(Rng& rng) { return testing::random_config(rng); }

}  // namespace

TEST_CASE("random configurations keep every invariant") {
    Rng rng = make_stream(2026, 0, "properties");
    int runs = 0;
    for (int i = 0; i < kConfigs; ++i) {
        const SimConfig cfg = random_config(rng);
        CAPTURE(i);
        INFO(serialize_config(cfg));
        RunOptions opts;
        opts.paranoid = true;
        SimResult r;
        REQUIRE_NOTHROW(r = run_simulation(cfg, opts));
        check_run(cfg, r);
        ++runs;
        if (i % 8 == 0) {
            RunOptions slow = opts;
            slow.single_step = true;
            CHECK(run_simulation(cfg, slow).trace == r.trace);
        }
    }
    CHECK(runs >= 200);
}

TEST_CASE("random arrays keep their traces consistent") {
    Rng rng = make_stream(2026, 1, "properties");
    for (int i = 0; i < 40; ++i) {
        SimConfig cfg = random_config(rng);
        cfg.num_libraries = cfg.code_n + static_cast<int>(uniform_index(rng, 4));
        cfg.collocation_threshold = 0.0;
        CAPTURE(i);
        INFO(serialize_config(cfg));
        RailOptions opts;
        opts.run.paranoid = true;
        RailResult r;
        REQUIRE_NOTHROW(r = run_rail(cfg, opts));
        CHECK(r.aggregate.integrity_errors.empty());
        std::int64_t frags = 0;
        for (auto n : r.fragments_per_library) frags += n;
        if (cfg.protocol == Protocol::Redundant) CHECK(frags == r.objects * cfg.effective_dispatch());
        else CHECK(frags == r.objects * cfg.code_k);
        CHECK(r.last_byte.count + r.aggregate.retrieval_failures + r.aggregate.in_flight ==
              static_cast<std::int64_t>(r.aggregate.objects.size()));
    }
}

TEST_CASE("the checker notices broken runs") {
    Rng rng = make_stream(2026, 2, "properties");
    SimConfig cfg = random_config(rng);
    cfg.objects_touched_per_day = 2000;
    SimResult r = run_simulation(cfg);
    REQUIRE(testing::check_run(cfg, r).empty());
    auto row = std::find_if(r.trace.begin(), r.trace.end(),
                            [](const auto& t) { return t.queue == QueueId::DR && t.q_out != kNoStep; });
    REQUIRE(row != r.trace.end());
    SimResult broken = r;
    broken.trace[static_cast<std::size_t>(row - r.trace.begin())].q_out = row->q_in - 1;
    CHECK_FALSE(testing::check_run(cfg, broken).empty());
    broken = r;
    broken.counters.enqueued += 1;
    CHECK_FALSE(testing::check_run(cfg, broken).empty());
    broken = r;
    broken.collocation_out *= 1.01;
    CHECK_FALSE(testing::check_run(cfg, broken).empty());
}
