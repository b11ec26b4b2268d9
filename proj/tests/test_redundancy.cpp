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
#include <map>
#include <set>

#include "helpers.hpp"
#include "tapesim/kpi.hpp"
#include "tapesim/redundancy.hpp"
#include "tapesim/simulation.hpp"

using namespace tapesim;

namespace {
Codeword cw_of(int n, int k, bool systematic = true) {
    Codeword cw;
    cw.n = n;
    cw.k = k;
    cw.systematic = systematic;
    return cw;
}
}  // namespace

TEST_CASE("redundant dispatch") {
    Codeword cw = cw_of(6, 1);
    CHECK(dispatch_redundant(cw, 6) == std::vector<int>{1, 2, 3, 4, 5, 6});
    CHECK(cw.dispatched.size() == 6);
    Codeword one = cw_of(1, 1);
    CHECK(dispatch_redundant(one, 1) == std::vector<int>{1});
    CHECK(record_completion(one, 1));
    CHECK(one.complete());
}

TEST_CASE("object completes at the k-th fragment") {
    Codeword cw = cw_of(4, 2);
    dispatch_redundant(cw, 3);
    // Completions at steps 40, 55, 90; the second one finishes the object.
    std::map<Step, int> when = {{40, 2}, {55, 1}, {90, 3}};
    Step done = kNoStep;
    for (const auto& [t, f] : when)
        if (record_completion(cw, f) && done == kNoStep) done = t;
    CHECK(done == 55);
    CHECK(kth_smallest(std::vector<Step>{90, 40, 55}, 2) == 55);
}

TEST_CASE("order statistics") {
    const std::vector<int> v = {12, 30, 45};
    CHECK(kth_smallest(v, 1) == 12);
    CHECK(kth_smallest(v, 2) == 30);
    CHECK(kth_smallest(v, 3) == 45);
    CHECK(kth_smallest(std::vector<double>(5, 7.5), 3) == 7.5);
    CHECK_THROWS_AS(kth_smallest(v, 4), std::out_of_range);
    CHECK_THROWS_AS(kth_smallest(v, 0), std::out_of_range);
}

TEST_CASE("failure dispatch draws a k-subset") {
    Rng rng(2);
    std::map<int, int> seen;
    for (int i = 0; i < 6000; ++i) {
        Codeword cw = cw_of(6, 2);
        const auto f = dispatch_failure(cw, rng);
        REQUIRE(f.size() == 2);
        CHECK(f[0] < f[1]);
        CHECK(f[0] >= 1);
        CHECK(f[1] <= 6);
        for (int x : f) ++seen[x];
    }
    for (const auto& [idx, count] : seen) CHECK(count == doctest::Approx(2000).epsilon(0.1));
}

TEST_CASE("one timeout, one replacement from the unused indices") {
    Rng rng(1);
    Codeword cw = cw_of(6, 1);
    const auto first = dispatch_failure(cw, rng);
    REQUIRE(first.size() == 1);
    const auto repl = record_failure(cw, first[0], Protocol::Failure, rng);
    REQUIRE(repl);
    CHECK(*repl != first[0]);
    CHECK(*repl >= 1);
    CHECK(*repl <= 6);
    CHECK(cw.replacements == 1);
    CHECK(cw.dispatched.size() == 2);
    CHECK_FALSE(cw.unrecoverable);
}

TEST_CASE("(3,2) runs out of replacements") {
    Rng rng(1);
    Codeword cw = cw_of(3, 2);
    cw.block = 77;
    const auto first = dispatch_failure(cw, rng);
    const auto r1 = record_failure(cw, first[0], Protocol::Failure, rng);
    CHECK(r1);
    CHECK_FALSE(cw.unrecoverable);
    const auto r2 = record_failure(cw, first[1], Protocol::Failure, rng);
    CHECK_FALSE(r2);  // t = 2 > n - k = 1
    CHECK(cw.unrecoverable);
    CHECK(cw.replacements >= 2);
}

TEST_CASE("redundant copies are lost only when too few remain") {
    Rng rng(1);
    Codeword cw = cw_of(3, 1);
    dispatch_redundant(cw, 3);
    CHECK_FALSE(record_failure(cw, 1, Protocol::Redundant, rng));
    CHECK_FALSE(cw.unrecoverable);
    record_failure(cw, 2, Protocol::Redundant, rng);
    CHECK_FALSE(cw.unrecoverable);
    record_failure(cw, 3, Protocol::Redundant, rng);
    CHECK(cw.unrecoverable);
}

TEST_CASE("decode penalty") {
    Codeword sys = cw_of(4, 2);
    sys.completed = {1, 2};
    CHECK(decode_latency_penalty(sys, 5.0) == 0.0);
    sys.completed = {1, 3};
    CHECK(decode_latency_penalty(sys, 5.0) == 5.0);
    Codeword non = cw_of(4, 2, false);
    non.completed = {1, 2};
    CHECK(decode_latency_penalty(non, 5.0) == 5.0);
}

TEST_CASE("fragment counts per protocol") {
    for (const char* proto : {"redundant", "failure"}) {
        const SimConfig cfg = testing::enterprise({{"sim_duration", "12"}, {"protocol", proto},
                                                   {"drive_fail_prob", "0"}, {"code_n", "6"}, {"code_k", "2"},
                                                   {"dispatch_count", "4"}});
        const SimResult r = run_simulation(cfg);
        std::map<std::int64_t, std::set<int>> per_block;
        for (const auto& row : r.trace)
            if (row.queue == QueueId::DR) per_block[row.mid.block].insert(row.mid.fragment);
        const std::size_t want = std::string(proto) == "redundant" ? 4 : 2;
        CAPTURE(proto);
        CHECK(per_block.size() == r.objects.size());
        for (const auto& [b, frags] : per_block) CHECK(frags.size() == want);
        for (const auto& o : r.objects) CHECK(o.fragments_dispatched == static_cast<int>(want));
    }
}

TEST_CASE("failure protocol re-dispatches on read errors") {
    const SimConfig cfg = testing::enterprise({{"sim_duration", "24"}, {"protocol", "failure"},
                                               {"drive_fail_prob", "0.2"}, {"threshold", "60"}});
    const SimResult r = run_simulation(cfg);
    const KpiReport k = compute_kpis(r);
    CHECK(k.read_errors > 0);
    std::int64_t extra = 0;
    for (const auto& o : r.objects) {
        // The replacement that would exceed n - k is counted but never sent.
        const int sent = std::min(o.replacements, 5);
        CHECK(o.fragments_dispatched == 1 + sent);
        if (o.replacements > 5) CHECK(o.status == ObjectStatus::Unrecoverable);
        extra += sent;
    }
    CHECK(extra > 0);
    CHECK(k.fragment_requests == static_cast<std::int64_t>(r.objects.size()) + extra);
}
