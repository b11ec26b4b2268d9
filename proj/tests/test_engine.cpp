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

#include "helpers.hpp"
#include "tapesim/engine.hpp"
#include "tapesim/kpi.hpp"
#include "tapesim/simulation.hpp"

using namespace tapesim;

namespace {

FragmentRequest frag(std::int64_t block, CartridgeId cart, double size = 100.0, Step data_in = 0) {
    FragmentRequest f;
    f.mid = {block, 1};
    f.cartridge = cart;
    f.size = size;
    f.data_in = data_in;
    return f;
}

Library make_library(const SimConfig& cfg, std::uint64_t seed = 1) {
    return Library(cfg, build_motion_model(cfg), Rng(seed));
}

void run_until(Library& lib, Step t) {
    while (lib.now() < t) lib.step();
}

}  // namespace

TEST_CASE("idle step only advances the clock") {
    Library lib = make_library(testing::tiny());
    const auto events = lib.step();
    CHECK(events.empty());
    CHECK(lib.now() == 1);
    CHECK(lib.trace().empty());
    CHECK(lib.counters().exchanges == 0);
    CHECK(lib.counters().returns == 0);
    CHECK(lib.dr_queue_length() == 0);
    for (const auto& r : lib.robots()) CHECK(r.state == RobotState::Free);
    for (const auto& d : lib.drives()) CHECK(d.state == DriveState::Free);
}

TEST_CASE("single request schedule") {
    // Every motion is 900 / 90 = 10 s, no load or positioning, 100 MB at
    // 10 MB/s. Exchange ends at 4 * 10, data is read by 40 + 10, the return
    // trip takes another 10.
    Library lib = make_library(testing::tiny());
    const FragmentRequest f = frag(0, 0);
    lib.step({&f, 1});
    run_until(lib, 200);
    REQUIRE(lib.trace().size() == 2);
    const TraceRecord& dr = lib.trace()[0];
    CHECK(dr.queue == QueueId::DR);
    CHECK(dr.q_in == 0);
    CHECK(dr.q_out == 0);
    CHECK(dr.d_in == 40);
    CHECK(dr.data_out == 50);
    CHECK(dr.d_out == 60);
    CHECK(dr.q_len == 1);
    const TraceRecord& r = lib.trace()[1];
    CHECK(r.queue == QueueId::R);
    CHECK(r.mid == dr.mid);
    CHECK(r.q_in == 50);
    CHECK(r.q_out == 50);
    CHECK(r.d_in == 50);
    CHECK(r.d_out == 60);
    CHECK(lib.counters().exchanges == 1);
    CHECK(lib.counters().returns == 1);
    CHECK(lib.counters().robot_busy_seconds == doctest::Approx(50.0));
}

TEST_CASE("requests sharing one drive are served one after another") {
    Library lib = make_library(testing::tiny());
    const FragmentRequest fs[] = {frag(0, 0), frag(1, 1)};
    lib.step(fs);
    run_until(lib, 300);
    REQUIRE(lib.trace().size() == 4);
    const auto& first = lib.trace()[0];
    const auto& second = lib.trace()[1];
    CHECK(second.mid.block == 1);
    CHECK(second.q_len == 2);
    // The drive is free again at first.d_out and not before.
    CHECK(second.q_out >= first.d_out);
    CHECK(second.d_in == first.d_out + 40);
    CHECK(second.data_out == second.d_in + 10);
}

TEST_CASE("deferred dismount serves a queued request for the mounted cartridge") {
    SimConfig cfg = testing::tiny({{"num_cartridges", "4"}});
    Library lib = make_library(cfg);
    const FragmentRequest a = frag(0, 0);
    lib.step({&a, 1});
    const FragmentRequest rest[] = {frag(1, 1), frag(2, 2), frag(3, 0)};
    lib.step(rest);
    run_until(lib, 2000);
    const auto& tr = lib.trace();
    auto row = [&](std::int64_t block) {
        return *std::find_if(tr.begin(), tr.end(), [&](const auto& r) {
            return r.queue == QueueId::DR && r.mid.block == block;
        });
    };
    const auto first = row(0);
    const auto third_in_line = row(3);
    // Block 3 sat behind blocks 1 and 2 but wanted the mounted cartridge.
    CHECK(third_in_line.q_out == first.data_out);
    CHECK(third_in_line.d_in == first.data_out);
    CHECK(first.d_out == first.data_out);
    CHECK(row(1).q_out > third_in_line.data_out);
    CHECK(lib.counters().deferred_serves == 1);
    CHECK(lib.counters().exchanges == 3);
    // No R row for block 0: its cartridge stayed in the drive.
    CHECK(std::none_of(tr.begin(), tr.end(), [](const auto& r) { return r.queue == QueueId::R && r.mid.block == 0; }));
}

TEST_CASE("deferred dismount saves exchanges on the same request stream") {
    SimConfig base = testing::tiny({{"num_cartridges", "8"}, {"vertical_dim", "2"}, {"num_drives", "2"},
                                    {"objects_touched_per_day", "2000"}, {"sim_duration", "6"}});
    std::int64_t exchanges[2] = {};
    std::int64_t motions[2] = {};
    for (int on = 0; on < 2; ++on) {
        SimConfig cfg = base;
        cfg.deferred_dismount = on == 1;
        const SimResult r = run_simulation(cfg);
        exchanges[on] = r.counters.exchanges;
        motions[on] = r.counters.motion_count[static_cast<std::size_t>(MotionKind::R2D)];
        if (on) {
            CHECK(r.counters.deferred_serves > 0);
            // Deferred serves cost no robot motion.
            std::int64_t robot_served = 0;
            for (std::size_t i = 0; i < r.trace.size(); ++i)
                if (r.trace[i].queue == QueueId::DR && r.trace[i].q_out != kNoStep && !r.fragment_info[i].deferred)
                    ++robot_served;
            CHECK(motions[on] == robot_served);
        } else {
            CHECK(r.counters.deferred_serves == 0);
        }
    }
    CHECK(exchanges[1] < exchanges[0]);
}

TEST_CASE("read service") {
    const SimConfig cfg = testing::enterprise({{"drive_fail_prob", "0"}});
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const ReadOutcome r = service_read(cfg, 5000, RequestKind::Read, false, rng);
        CHECK(r.retries == 0);
        CHECK(r.load >= 0);
        CHECK(r.load <= 36);
        CHECK(r.position <= 100);
        CHECK(r.duration() == doctest::Approx(r.load + r.position + 5000.0 / 300.0));
        CHECK_FALSE(r.failed());
    }
    CHECK(service_read(cfg, 5000, RequestKind::Read, false, rng).transfer == doctest::Approx(16.6667).epsilon(1e-4));
    CHECK(service_read(cfg, 5000, RequestKind::Read, true, rng).load == 0.0);
}

TEST_CASE("retries are binomial") {
    const SimConfig cfg = testing::enterprise();
    Rng rng(5);
    const int n = 100000;
    long retries = 0;
    for (int i = 0; i < n; ++i) retries += service_read(cfg, 5000, RequestKind::Read, false, rng).retries;
    CHECK(static_cast<double>(retries) / n == doctest::Approx(0.1).epsilon(0.05));
    for (int i = 0; i < 100; ++i) CHECK(service_read(cfg, 5000, RequestKind::Write, false, rng).retries == 0);
}

TEST_CASE("retry phase beyond the threshold times out under the Failure protocol only") {
    SimConfig fail = testing::enterprise({{"protocol", "failure"}, {"drive_fail_prob", "0.5"}, {"threshold", "100"}});
    SimConfig red = fail;
    red.protocol = Protocol::Redundant;
    Rng a(8), b(8);
    int timeouts = 0;
    for (int i = 0; i < 2000; ++i) {
        const ReadOutcome f = service_read(fail, 5000, RequestKind::Read, false, a);
        const ReadOutcome r = service_read(red, 5000, RequestKind::Read, false, b);
        CHECK(f.timed_out == (f.retry_time > 100.0));
        CHECK(f.exhausted == (f.retries == 10));
        CHECK_FALSE(r.timed_out);
        timeouts += f.timed_out;
    }
    CHECK(timeouts > 0);
}

TEST_CASE("object latency checkpoints") {
    const SimConfig cfg = testing::tiny();
    ObjectOutcome o;
    o.data_in = 0;
    o.first_byte_step = 10;
    o.completion_step = 25;
    o.status = ObjectStatus::Complete;
    CHECK(*o.first_byte_seconds(cfg) == 10.0);
    CHECK(*o.last_byte_seconds(cfg) == 25.0);
    o.status = ObjectStatus::InFlight;
    CHECK_FALSE(o.last_byte_seconds(cfg));
}

TEST_CASE("robot exchange rate is exchanges over hours") {
    SimResult r = run_simulation(testing::tiny({{"sim_duration", "0.25"}}));
    r.robots[0].exchange_count = 36;
    CHECK(compute_kpis(r).robot_xph[0] == doctest::Approx(144.0));
}

TEST_CASE("skipping idle steps changes nothing") {
    for (const char* load : {"300", "1500"}) {
        SimConfig cfg = testing::enterprise({{"sim_duration", "6"}, {"objects_touched_per_day", load},
                                             {"protocol", "failure"}, {"drive_fail_prob", "0.1"}});
        RunOptions fast, slow;
        slow.single_step = true;
        slow.paranoid = true;
        const SimResult a = run_simulation(cfg, fast);
        const SimResult b = run_simulation(cfg, slow);
        CHECK(a.trace == b.trace);
        CHECK(a.counters.exchanges == b.counters.exchanges);
        CHECK(a.counters.dr_queue_area_by_hour == b.counters.dr_queue_area_by_hour);
        CHECK(a.counters.dr_len_steps == b.counters.dr_len_steps);
    }
}

TEST_CASE("hourly robot exchanges never exceed the rate") {
    // Far more work than two robots can do.
    const SimConfig cfg = testing::enterprise({{"sim_duration", "12"}, {"objects_touched_per_day", "6000"}});
    const SimResult r = run_simulation(cfg);
    const KpiReport k = compute_kpis(r);
    CHECK(k.max_robot_hourly <= 150);
    for (const auto& hours : r.robot_hourly)
        for (auto n : hours) CHECK(n <= 150);
}

TEST_CASE("failure protocol beats redundant copies on the enterprise library") {
    const KpiReport red = compute_kpis(run_simulation(testing::enterprise()));
    const KpiReport fail = compute_kpis(run_simulation(testing::enterprise({{"protocol", "failure"}})));
    REQUIRE(red.last_byte.has_data());
    REQUIRE(fail.last_byte.has_data());
    CHECK(fail.last_byte.mean < red.last_byte.mean);
    CHECK(fail.objects_touched < red.objects_touched);
}
