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

#include "tapesim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace tapesim {

namespace {

constexpr Step kNever = std::numeric_limits<Step>::max();

[[noreturn]] void invariant_failure(const std::string& what) {
    throw std::logic_error("library invariant violated: " + what);
}

}  // namespace

ReadOutcome service_read(const SimConfig& cfg, double size, RequestKind kind, bool mounted, Rng& rng) {
    ReadOutcome out;
    const double load = uniform(rng, 0.0, 2.0 * cfg.mean_load_time);
    out.load = mounted ? 0.0 : load;
    out.position = uniform(rng, 0.0, 2.0 * cfg.mean_position_time);
    if (kind == RequestKind::Read && cfg.drive_fail_prob > 0.0) {
        for (int i = 0; i < cfg.max_retries; ++i)
            if (uniform01(rng) < cfg.drive_fail_prob) ++out.retries;
        for (int i = 0; i < out.retries; ++i)
            out.retry_time += uniform(rng, 0.0, 2.0 * cfg.mean_position_time);
        out.exhausted = out.retries == cfg.max_retries;
        // The threshold is a Failure protocol setting; redundant copies just
        // keep retrying.
        out.timed_out = cfg.protocol == Protocol::Failure &&
                        out.retry_time > static_cast<double>(cfg.failure_threshold_steps) * cfg.step_seconds;
    }
    out.transfer = size / cfg.drive_rate;
    return out;
}

Library::Library(const SimConfig& cfg, MotionTimeModel motion, Rng service_rng)
    : cfg_(cfg),
      motion_(std::move(motion)),
      rng_(std::move(service_rng)),
      steps_per_hour_(cfg.steps_per_hour()),
      rate_cap_(std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(cfg.robot_xph)))) {
    robots_.resize(static_cast<std::size_t>(cfg_.num_robots));
    for (int i = 0; i < cfg_.num_robots; ++i) robots_[static_cast<std::size_t>(i)].id = i;
    drives_.resize(static_cast<std::size_t>(cfg_.num_drives));
    for (int i = 0; i < cfg_.num_drives; ++i) drives_[static_cast<std::size_t>(i)].id = i;
    d_queue_records_.assign(drives_.size(), 0);
    robot_hourly_.resize(robots_.size());
}

template <typename T>
T& Library::hour_slot(std::vector<T>& v, std::int64_t hour) {
    if (static_cast<std::size_t>(hour) >= v.size()) v.resize(static_cast<std::size_t>(hour) + 1, T{});
    return v[static_cast<std::size_t>(hour)];
}

std::int64_t Library::robot_exchanges_in_hour(int robot, std::int64_t hour) const {
    const auto& v = robot_hourly_.at(static_cast<std::size_t>(robot));
    return static_cast<std::size_t>(hour) < v.size() ? v[static_cast<std::size_t>(hour)] : 0;
}

std::size_t Library::enqueue(const FragmentRequest& request) {
    const std::size_t record = trace_.size();
    TraceRecord row;
    row.queue = QueueId::DR;
    row.mid = request.mid;
    row.q_in = now_;
    row.q_len = static_cast<std::int64_t>(dr_queue_.size()) + 1;
    trace_.push_back(row);
    FragmentInfo info;
    info.data_in = request.data_in;
    info_.push_back(info);
    dr_queue_.push_back({record, request});
    dr_cartridges_[request.cartridge].push_back(std::prev(dr_queue_.end()));
    ++counters_.enqueued;
    return record;
}

std::vector<FragmentEvent> Library::begin_step() {
    std::vector<FragmentEvent> events;
    for (auto& robot : robots_) {
        if (robot.state != RobotState::Busy || robot.busy_until > now_) continue;
        if (robot.job == RobotJob::Exchange) {
            ++robot.exchange_count;
            ++counters_.exchanges;
            ++counters_.objects_touched;
            ++hour_slot(counters_.exchanges_by_hour, hour_of(now_));
        } else if (robot.job == RobotJob::Return) {
            finish_return(robot);
        }
        robot.state = RobotState::Free;
        robot.job = RobotJob::None;
        robot.drive = -1;
    }
    for (auto& drive : drives_) {
        if (drive.state != DriveState::Busy || drive.read_end == kNoStep) continue;
        if (drive.error_step != kNoStep && drive.error_step <= now_) {
            events.push_back({FragmentEventKind::ReadError, trace_[drive.record].mid, now_, drive.record});
            ++counters_.read_errors;
            ++hour_slot(counters_.read_errors_by_hour, hour_of(now_));
            drive.error_step = kNoStep;
        }
        if (drive.read_end <= now_) {
            if (!drive.read_failed) {
                auto& row = trace_[drive.record];
                row.data_out = now_;
                counters_.data_busy_steps += now_ - row.q_in;
                events.push_back({FragmentEventKind::DataAccess, row.mid, now_, drive.record});
            }
            drive.read_end = kNoStep;
            just_finished_.push_back(drive.id);
        }
    }
    return events;
}

void Library::end_step() {
    for (int id : just_finished_) {
        auto& drive = drives_[static_cast<std::size_t>(id)];
        if (cfg_.deferred_dismount && drive.loaded) {
            auto hit = dr_cartridges_.find(*drive.loaded);
            if (hit != dr_cartridges_.end()) {
                const auto it = hit->second.front();
                hit->second.pop_front();
                if (hit->second.empty()) dr_cartridges_.erase(hit);
                DrEntry entry = std::move(*it);
                dr_queue_.erase(it);
                ++counters_.dequeued;
                ++counters_.deferred_serves;
                auto& prev = trace_[drive.record];
                prev.d_out = now_;
                counters_.drive_busy_steps += now_ - prev.q_out;
                drive.occupation_steps += now_ - prev.q_out;
                trace_[entry.record].q_out = now_;
                trace_[entry.record].d_in = now_;
                info_[entry.record].deferred = true;
                start_read(id, entry, now_, true);
                continue;
            }
        }
        drive.state = DriveState::Idle;
        d_queue_.push_back(id);
        TraceRecord row;
        row.queue = QueueId::R;
        row.mid = trace_[drive.record].mid;
        row.q_in = now_;
        row.q_len = static_cast<std::int64_t>(d_queue_.size());
        d_queue_records_[static_cast<std::size_t>(id)] = trace_.size();
        trace_.push_back(row);
        info_.push_back({});
    }
    just_finished_.clear();

    if (cfg_.dr_priority) {
        serve_dr_queue();
        serve_d_queue();
    } else {
        serve_d_queue();
        serve_dr_queue();
    }
    if (paranoid_) check_invariants();
    accumulate_queues(now_, now_ + 1);
    ++now_;
}

std::vector<FragmentEvent> Library::step(std::span<const FragmentRequest> arrivals) {
    auto events = begin_step();
    for (const auto& r : arrivals) enqueue(r);
    end_step();
    return events;
}

bool Library::any_free_robot() const {
    return std::any_of(robots_.begin(), robots_.end(),
                       [](const Robot& r) { return r.state == RobotState::Free; });
}

int Library::first_free_drive() const {
    for (const auto& d : drives_)
        if (d.state == DriveState::Free) return d.id;
    return -1;
}

int Library::pick_robot() {
    int free_count = 0;
    int first = -1;
    for (const auto& r : robots_) {
        if (r.state != RobotState::Free) continue;
        if (first < 0) first = r.id;
        ++free_count;
    }
    if (free_count == 0) invariant_failure("robot requested with none free");
    if (!cfg_.balanced_robots || free_count == 1) return first;
    auto pick = static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(free_count)));
    for (const auto& r : robots_) {
        if (r.state != RobotState::Free) continue;
        if (pick-- == 0) return r.id;
    }
    return first;
}

void Library::record_motion(MotionKind kind, double seconds) {
    counters_.motion_seconds[static_cast<std::size_t>(kind)] += seconds;
    ++counters_.motion_count[static_cast<std::size_t>(kind)];
}

void Library::serve_dr_queue() {
    while (!dr_queue_.empty()) {
        const int drive = first_free_drive();
        if (drive < 0 || !any_free_robot()) return;
        DrEntry entry = std::move(dr_queue_.front());
        auto hit = dr_cartridges_.find(entry.request.cartridge);
        if (hit == dr_cartridges_.end() || hit->second.front() != dr_queue_.begin())
            invariant_failure("cartridge index out of sync with DR queue");
        hit->second.pop_front();
        if (hit->second.empty()) dr_cartridges_.erase(hit);
        dr_queue_.pop_front();
        ++counters_.dequeued;
        start_exchange(std::move(entry), drive);
    }
}

void Library::serve_d_queue() {
    while (!d_queue_.empty() && any_free_robot()) {
        const int drive = d_queue_.front();
        d_queue_.pop_front();
        start_return(drive);
    }
}

void Library::start_exchange(DrEntry entry, int drive_id) {
    auto& robot = robots_[static_cast<std::size_t>(pick_robot())];
    const CartridgeId target = entry.request.cartridge;
    double exchange = 0.0;
    for (MotionKind kind : kExchangeMotions) {
        const bool pinned = kind == MotionKind::C2C || kind == MotionKind::C2D;
        const double t = motion_.sample(kind, rng_, drive_id,
                                        pinned ? std::optional<CartridgeId>(target) : std::nullopt);
        record_motion(kind, t);
        exchange += t;
    }
    Step dr_in = now_ + cfg_.to_steps(exchange);

    // The exchange completes at dr_in and counts towards that clock hour. A
    // robot whose hour is already full waits for the next hour.
    if (cfg_.robot_rate_cap && cfg_.motion_model == MotionModel::Geometry) {
        auto& hourly = robot_hourly_[static_cast<std::size_t>(robot.id)];
        while (hour_slot(hourly, hour_of(dr_in)) >= rate_cap_) {
            dr_in = (hour_of(dr_in) + 1) * steps_per_hour_;
            ++counters_.rate_cap_delays;
        }
    }
    ++hour_slot(robot_hourly_[static_cast<std::size_t>(robot.id)], hour_of(dr_in));

    robot.busy_seconds += exchange;
    robot.busy_steps += dr_in - now_;
    counters_.robot_busy_seconds += exchange;
    if (dr_in == now_) {
        ++robot.exchange_count;
        ++counters_.exchanges;
        ++counters_.objects_touched;
        ++hour_slot(counters_.exchanges_by_hour, hour_of(now_));
    } else {
        robot.state = RobotState::Busy;
        robot.job = RobotJob::Exchange;
        robot.busy_until = dr_in;
        robot.drive = drive_id;
    }

    auto& row = trace_[entry.record];
    row.q_out = now_;
    row.d_in = dr_in;
    start_read(drive_id, entry, dr_in, false);
}

void Library::start_read(int drive_id, const DrEntry& entry, Step dr_in, bool mounted) {
    auto& drive = drives_[static_cast<std::size_t>(drive_id)];
    const ReadOutcome read = service_read(cfg_, entry.request.size, entry.request.kind, mounted, rng_);
    drive.state = DriveState::Busy;
    drive.loaded = entry.request.cartridge;
    drive.record = entry.record;
    drive.read_end = dr_in + cfg_.to_steps(read.duration());
    drive.read_failed = read.failed();
    drive.error_step = kNoStep;
    if (read.failed()) {
        Step at = drive.read_end;
        if (read.timed_out)
            at = std::min(at, dr_in + cfg_.to_steps(read.load + read.position) +
                                  cfg_.failure_threshold_steps);
        drive.error_step = at;
    }
    auto& info = info_[entry.record];
    info.read = read;
    info.read_error = read.failed();
}

void Library::start_return(int drive_id) {
    auto& drive = drives_[static_cast<std::size_t>(drive_id)];
    if (drive.state != DriveState::Idle || !drive.loaded)
        invariant_failure("D queue holds a drive that is not idle with a cartridge");
    auto& robot = robots_[static_cast<std::size_t>(pick_robot())];
    const double t = motion_.sample(MotionKind::D2C, rng_, drive_id, *drive.loaded);
    record_motion(MotionKind::D2C, t);
    const Step done = now_ + cfg_.to_steps(t);
    auto& row = trace_[d_queue_records_[static_cast<std::size_t>(drive_id)]];
    row.q_out = now_;
    row.d_in = now_;
    robot.busy_seconds += t;
    robot.busy_steps += done - now_;
    counters_.robot_busy_seconds += t;
    robot.state = RobotState::Busy;
    robot.job = RobotJob::Return;
    robot.busy_until = done;
    robot.drive = drive_id;
    if (done == now_) {
        finish_return(robot);
        robot.state = RobotState::Free;
        robot.job = RobotJob::None;
        robot.drive = -1;
    }
}

void Library::finish_return(Robot& robot) {
    const int drive_id = robot.drive;
    trace_[d_queue_records_[static_cast<std::size_t>(drive_id)]].d_out = now_;
    ++counters_.returns;
    release_drive(drive_id, now_);
}

void Library::release_drive(int drive_id, Step at) {
    auto& drive = drives_[static_cast<std::size_t>(drive_id)];
    auto& row = trace_[drive.record];
    row.d_out = at;
    counters_.drive_busy_steps += at - row.q_out;
    drive.occupation_steps += at - row.q_out;
    drive.state = DriveState::Free;
    drive.loaded.reset();
}

void Library::accumulate_queues(Step from, Step to) {
    if (to <= from) return;
    const auto dr = dr_queue_.size();
    const auto d = d_queue_.size();
    hour_slot(counters_.dr_len_steps, static_cast<std::int64_t>(dr)) += to - from;
    hour_slot(counters_.d_len_steps, static_cast<std::int64_t>(d)) += to - from;
    if (dr == 0 && d == 0) {
        // Keep the hourly vectors long enough to cover the interval.
        hour_slot(counters_.dr_queue_area_by_hour, hour_of(to - 1));
        hour_slot(counters_.d_queue_area_by_hour, hour_of(to - 1));
        return;
    }
    Step t = from;
    while (t < to) {
        const auto hour = hour_of(t);
        const Step end = std::min(to, (hour + 1) * steps_per_hour_);
        const auto span = static_cast<double>(end - t);
        hour_slot(counters_.dr_queue_area_by_hour, hour) += static_cast<double>(dr) * span;
        hour_slot(counters_.d_queue_area_by_hour, hour) += static_cast<double>(d) * span;
        t = end;
    }
}

bool Library::can_dispatch() const {
    if (!just_finished_.empty()) return true;
    const bool robot = any_free_robot();
    if (!robot) return false;
    if (!d_queue_.empty()) return true;
    return !dr_queue_.empty() && first_free_drive() >= 0;
}

Step Library::next_event_step() const {
    if (can_dispatch()) return now_;
    Step next = kNever;
    for (const auto& r : robots_)
        if (r.state == RobotState::Busy) next = std::min(next, r.busy_until);
    for (const auto& d : drives_) {
        if (d.state != DriveState::Busy || d.read_end == kNoStep) continue;
        next = std::min(next, d.read_end);
        if (d.error_step != kNoStep) next = std::min(next, d.error_step);
    }
    return std::max(next, now_);
}

void Library::advance_to(Step t) {
    if (t < now_) throw std::invalid_argument("advance_to cannot move the clock backwards");
    if (t > next_event_step()) invariant_failure("advance_to would skip pending work");
    accumulate_queues(now_, t);
    now_ = t;
}

void Library::check_invariants() const {
    std::size_t busy_robots = 0;
    for (const auto& r : robots_) {
        if (r.state == RobotState::Free) {
            if (r.job != RobotJob::None) invariant_failure("free robot holds a job");
            continue;
        }
        ++busy_robots;
        if (r.drive < 0 || r.drive >= static_cast<int>(drives_.size()))
            invariant_failure("busy robot without a drive");
        const auto& d = drives_[static_cast<std::size_t>(r.drive)];
        if (r.job == RobotJob::Exchange && d.state != DriveState::Busy)
            invariant_failure("exchange targets a drive that is not busy");
        if (r.job == RobotJob::Return && d.state != DriveState::Idle)
            invariant_failure("return targets a drive that is not idle");
    }
    if (busy_robots > robots_.size()) invariant_failure("robot pool overflow");

    std::set<int> queued(d_queue_.begin(), d_queue_.end());
    if (queued.size() != d_queue_.size()) invariant_failure("drive queued twice in D queue");
    std::size_t idle = 0;
    for (const auto& d : drives_) {
        if (d.state == DriveState::Idle) {
            ++idle;
            if (!d.loaded) invariant_failure("idle drive without a cartridge");
            const bool returning = std::any_of(robots_.begin(), robots_.end(), [&](const Robot& r) {
                return r.job == RobotJob::Return && r.drive == d.id;
            });
            if (queued.count(d.id) == returning)
                invariant_failure("idle drive must be either queued or being returned");
        } else if (queued.count(d.id)) {
            invariant_failure("non-idle drive in D queue");
        }
        if (d.state == DriveState::Free && d.loaded) invariant_failure("free drive still loaded");
    }
    if (counters_.enqueued != counters_.dequeued + static_cast<std::int64_t>(dr_queue_.size()))
        invariant_failure("DR queue in/out counts do not balance");

    std::size_t indexed = 0;
    for (const auto& [cart, entries] : dr_cartridges_) {
        if (entries.empty()) invariant_failure("empty cartridge index entry");
        for (const auto& it : entries)
            if (it->request.cartridge != cart) invariant_failure("cartridge index points at the wrong entry");
        indexed += entries.size();
    }
    if (indexed != dr_queue_.size())
        invariant_failure("cartridge index out of sync with DR queue");
}

}  // namespace tapesim
