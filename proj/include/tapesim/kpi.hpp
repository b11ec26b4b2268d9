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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tapesim/simulation.hpp"

namespace tapesim {

/// Summary of a sample. Empty (count == 0) samples have no min/mean/max.
struct LatencyStats {
    std::int64_t count = 0;
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
    double stddev = 0.0;  // population standard deviation

    bool has_data() const { return count > 0; }
};

LatencyStats summarize(std::span<const double> values);

struct KpiReport {
    double hours = 0.0;
    double total_capacity_mb = 0.0;
    double total_capacity_pb = 0.0;

    std::int64_t arrivals = 0;
    double request_rate_per_day = 0.0;
    std::int64_t objects_dispatched = 0;
    std::int64_t objects_complete = 0;
    std::int64_t objects_unrecoverable = 0;
    std::int64_t objects_in_flight = 0;
    std::int64_t fragment_requests = 0;
    std::int64_t fragments_unfinished = 0;  // DR rows without DR-out at the horizon

    LatencyStats first_byte;  // seconds
    LatencyStats last_byte;   // seconds

    std::int64_t objects_touched = 0;
    std::int64_t exchanges = 0;
    std::int64_t returns = 0;
    std::int64_t deferred_serves = 0;
    std::int64_t read_errors = 0;
    std::int64_t rate_cap_delays = 0;

    double exchange_rate = 0.0;            // exchanges per hour, all robots
    std::vector<double> robot_xph;         // per robot, over the horizon
    std::int64_t max_robot_hourly = 0;     // most exchanges any robot finished in one clock hour
    double robot_busy_seconds = 0.0;
    double drive_busy_seconds = 0.0;       // sum of DR-out - Q-out
    double data_busy_seconds = 0.0;        // sum of Data-access - Q-in
    double robot_utilization = 0.0;
    double drive_utilization = 0.0;

    double mean_dr_queue = 0.0;
    double mean_d_queue = 0.0;
    std::size_t final_dr_queue = 0;
    std::size_t final_d_queue = 0;
    std::vector<double> dr_len_distribution;  // fraction of time at each length
    std::vector<double> d_len_distribution;

    std::array<double, 4> motion_mean_observed{};  // seconds, by MotionKind
    std::array<std::int64_t, 4> motion_count{};
    std::vector<double> motion_mean_model;

    // Hourly series over the horizon.
    std::vector<std::int64_t> exchanges_by_hour;
    std::vector<std::int64_t> read_errors_by_hour;
    std::vector<double> dr_queue_by_hour;  // time-averaged length
    std::vector<double> d_queue_by_hour;
    std::vector<double> latency_by_hour;   // mean last-byte seconds of objects completed that hour; NaN if none
    std::vector<std::int64_t> completions_by_hour;

    /// (completion step, last-byte seconds) for each completed object.
    std::vector<std::pair<Step, double>> latency_series;

    // Service statistics for the analytic estimate.
    double mean_exchange_seconds = 0.0;
    double mean_drive_service_seconds = 0.0;  // DR-in to DR-out, seconds
    double drive_service_cv2 = 0.0;
};

/// Incomplete objects and fragments are counted separately and never enter
/// the latency statistics.
KpiReport compute_kpis(const SimResult& result);

}  // namespace tapesim
