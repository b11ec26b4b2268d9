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

/**
 * @file engine.hpp
 * @brief Fixed-step discrete-event model of one tape library.
 *
 * Two FIFO queues share a pool of robots and drives:
 *
 *   DR queue  fragment requests waiting for a free drive and a free robot.
 *             The robot performs a full exchange (r2d, d2c, c2c, c2d) and
 *             the drive then loads, positions, retries and reads.
 *   D queue   drives that finished reading and wait for a robot to carry
 *             the cartridge home (one d2c motion). The drive returns to the
 *             pool when the cartridge is shelved.
 *
 * Every step runs the same phases:
 *
 *   begin_step()  robots and drives whose work ends at now() complete;
 *                 finished reads and read errors are reported as events.
 *   enqueue()     callers add requests with Q-in = now().
 *   end_step()    drives that just finished keep their cartridge if a queued
 *                 request wants it (deferred dismount) or join the D queue;
 *                 the DR queue is served, then the D queue (order swaps when
 *                 dr_priority is off); the clock advances one step.
 *
 * Steps in which nothing can happen may be skipped with advance_to(); the
 * resulting state and trace are identical to stepping one by one.
 */

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <list>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "tapesim/config.hpp"
#include "tapesim/geometry.hpp"
#include "tapesim/random.hpp"
#include "tapesim/trace.hpp"
#include "tapesim/workload.hpp"

namespace tapesim {

struct FragmentRequest {
    MessageId mid;
    double size = 0.0;  // MB
    CartridgeId cartridge = 0;
    Step data_in = 0;
    RequestKind kind = RequestKind::Read;
};

/// Timing of one drive service, in seconds.
struct ReadOutcome {
    double load = 0.0;
    double position = 0.0;
    int retries = 0;
    double retry_time = 0.0;  // summed re-positioning time over all retries
    double transfer = 0.0;
    bool exhausted = false;   // all max_retries retries used up
    bool timed_out = false;   // retry phase longer than the failure threshold

    bool failed() const { return exhausted || timed_out; }
    /// Seconds from cartridge insertion to the end of the read.
    double duration() const { return load + position + retry_time + (exhausted ? 0.0 : transfer); }
};

/// Samples one drive service: load ~ U(0, 2 mean_load) unless the cartridge
/// is already mounted, position ~ U(0, 2 mean_position), retries ~
/// Binomial(max_retries, p_d) each costing a fresh positioning draw, and the
/// transfer size / drive_rate. Writes never retry.
ReadOutcome service_read(const SimConfig& cfg, double size, RequestKind kind, bool mounted, Rng& rng);

enum class RobotState { Free, Busy };
enum class RobotJob { None, Exchange, Return };

struct Robot {
    int id = 0;
    RobotState state = RobotState::Free;
    RobotJob job = RobotJob::None;
    Step busy_until = 0;
    int drive = -1;
    std::int64_t exchange_count = 0;
    std::int64_t busy_steps = 0;
    double busy_seconds = 0.0;
};

enum class DriveState { Free, Busy, Idle };

struct Drive {
    int id = 0;
    DriveState state = DriveState::Free;
    std::optional<CartridgeId> loaded;
    std::size_t record = 0;     // DR trace row of the current or last request
    Step read_end = kNoStep;    // end of the current read; kNoStep when not reading
    Step error_step = kNoStep;  // when the current read is reported as failed
    bool read_failed = false;
    std::int64_t occupation_steps = 0;
};

enum class FragmentEventKind { DataAccess, ReadError };

struct FragmentEvent {
    FragmentEventKind kind;
    MessageId mid;
    Step step;
    std::size_t record;
};

/// Per-row facts that do not appear in the CSV columns.
struct FragmentInfo {
    Step data_in = kNoStep;
    bool read_error = false;
    bool deferred = false;  // served from an already mounted cartridge
    ReadOutcome read;
};

struct LibraryCounters {
    std::int64_t exchanges = 0;
    std::int64_t objects_touched = 0;  // cartridge-to-drive deliveries
    std::int64_t returns = 0;
    std::int64_t deferred_serves = 0;
    std::int64_t read_errors = 0;
    std::int64_t enqueued = 0;
    std::int64_t dequeued = 0;
    std::int64_t rate_cap_delays = 0;
    double robot_busy_seconds = 0.0;
    std::int64_t drive_busy_steps = 0;   // sum of DR-out - Q-out
    std::int64_t data_busy_steps = 0;    // sum of Data-access - Q-in
    std::array<double, 4> motion_seconds{};  // by MotionKind
    std::array<std::int64_t, 4> motion_count{};
    std::vector<std::int64_t> exchanges_by_hour;
    std::vector<std::int64_t> read_errors_by_hour;
    std::vector<double> dr_queue_area_by_hour;  // queue length x steps
    std::vector<double> d_queue_area_by_hour;
    std::vector<std::int64_t> dr_len_steps;     // steps spent at each DR length
    std::vector<std::int64_t> d_len_steps;
};

class Library {
public:
    Library(const SimConfig& cfg, MotionTimeModel motion, Rng service_rng);

    Step now() const { return now_; }
    const SimConfig& config() const { return cfg_; }
    const MotionTimeModel& motion() const { return motion_; }

    /// Completes work due at now() and reports finished reads and read errors
    /// in drive order.
    std::vector<FragmentEvent> begin_step();

    /// Places a request on the DR queue with Q-in = now(); returns its row.
    std::size_t enqueue(const FragmentRequest& request);

    /// Dismount decisions, queue service, clock advance.
    void end_step();

    /// begin_step(), enqueue(arrivals), end_step().
    std::vector<FragmentEvent> step(std::span<const FragmentRequest> arrivals = {});

    /// Earliest step >= now() at which begin_step or end_step has work.
    /// Returns a very large value when the library is idle forever.
    Step next_event_step() const;

    /// Jumps the clock to `t` (>= now()). Only valid when next_event_step()
    /// >= t, i.e. no step in between would change anything.
    void advance_to(Step t);

    /// Would end_step() at now() reserve a robot or drive?
    bool can_dispatch() const;

    const std::vector<TraceRecord>& trace() const { return trace_; }
    const std::vector<FragmentInfo>& fragment_info() const { return info_; }
    const LibraryCounters& counters() const { return counters_; }
    const std::vector<Robot>& robots() const { return robots_; }
    const std::vector<Drive>& drives() const { return drives_; }
    std::size_t dr_queue_length() const { return dr_queue_.size(); }
    std::size_t d_queue_length() const { return d_queue_.size(); }

    /// Exchanges completed by `robot` in clock hour `hour`.
    std::int64_t robot_exchanges_in_hour(int robot, std::int64_t hour) const;
    /// Exchanges per robot per clock hour, by completion hour.
    const std::vector<std::vector<std::int64_t>>& robot_hourly() const { return robot_hourly_; }
    std::int64_t hour_of(Step s) const { return s / steps_per_hour_; }

    /// Throws std::logic_error when pool accounting or queue contents are
    /// inconsistent. Runs after every end_step() when `paranoid` is set.
    void check_invariants() const;
    void set_paranoid(bool on) { paranoid_ = on; }

private:
    struct DrEntry {
        std::size_t record;
        FragmentRequest request;
    };

    int pick_robot();
    bool any_free_robot() const;
    int first_free_drive() const;
    void start_exchange(DrEntry entry, int drive);
    void start_read(int drive, const DrEntry& entry, Step dr_in, bool mounted);
    void start_return(int drive);
    void finish_return(Robot& robot);
    void release_drive(int drive, Step at);
    void serve_dr_queue();
    void serve_d_queue();
    void record_motion(MotionKind kind, double seconds);
    void accumulate_queues(Step from, Step to);
    template <typename T>
    static T& hour_slot(std::vector<T>& v, std::int64_t hour);

    SimConfig cfg_;
    MotionTimeModel motion_;
    Rng rng_;
    Step now_ = 0;
    Step steps_per_hour_;
    std::int64_t rate_cap_;
    bool paranoid_ = false;

    std::vector<Robot> robots_;
    std::vector<Drive> drives_;
    using DrQueue = std::list<DrEntry>;
    DrQueue dr_queue_;
    std::deque<int> d_queue_;
    std::vector<std::size_t> d_queue_records_;  // R row per drive while queued
    // Queued entries per cartridge in FIFO order, for deferred dismount.
    std::unordered_map<CartridgeId, std::deque<DrQueue::iterator>> dr_cartridges_;
    std::vector<int> just_finished_;
    std::vector<std::vector<std::int64_t>> robot_hourly_;

    std::vector<TraceRecord> trace_;
    std::vector<FragmentInfo> info_;
    LibraryCounters counters_;
};

}  // namespace tapesim
