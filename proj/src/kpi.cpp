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

#include "tapesim/kpi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tapesim {

LatencyStats summarize(std::span<const double> values) {
    LatencyStats s;
    if (values.empty()) return s;
    s.count = static_cast<std::int64_t>(values.size());
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.count);
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(s.count));
    return s;
}

namespace {

template <typename T>
std::vector<T> fit_hours(const std::vector<T>& v, std::size_t hours) {
    std::vector<T> out(hours, T{});
    std::copy_n(v.begin(), std::min(hours, v.size()), out.begin());
    return out;
}

std::vector<double> normalize(const std::vector<std::int64_t>& counts) {
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    std::vector<double> out;
    for (auto c : counts) out.push_back(total > 0 ? static_cast<double>(c) / total : 0.0);
    return out;
}

}  // namespace

KpiReport compute_kpis(const SimResult& r) {
    const SimConfig& cfg = r.cfg;
    KpiReport k;
    const double horizon_s = cfg.to_seconds(r.horizon);
    k.hours = horizon_s / kSecondsPerHour;
    const auto sph = cfg.steps_per_hour();
    const auto hours = static_cast<std::size_t>((r.horizon + sph - 1) / sph);

    k.total_capacity_mb = cfg.library_capacity_mb();
    k.total_capacity_pb = k.total_capacity_mb / 1e9;
    k.arrivals = r.arrivals;
    k.request_rate_per_day = horizon_s > 0 ? static_cast<double>(r.arrivals) * kSecondsPerDay / horizon_s : 0.0;

    std::vector<double> first, last;
    k.latency_by_hour.assign(hours, 0.0);
    k.completions_by_hour.assign(hours, 0);
    for (const auto& o : r.objects) {
        ++k.objects_dispatched;
        switch (o.status) {
            case ObjectStatus::Complete: {
                ++k.objects_complete;
                first.push_back(*o.first_byte_seconds(cfg));
                const double lb = *o.last_byte_seconds(cfg);
                last.push_back(lb);
                k.latency_series.emplace_back(o.completion_step, lb);
                const auto h = static_cast<std::size_t>(o.completion_step / sph);
                if (h < hours) {
                    k.latency_by_hour[h] += lb;
                    ++k.completions_by_hour[h];
                }
                break;
            }
            case ObjectStatus::Unrecoverable: ++k.objects_unrecoverable; break;
            case ObjectStatus::InFlight: ++k.objects_in_flight; break;
        }
    }
    for (std::size_t h = 0; h < hours; ++h)
        k.latency_by_hour[h] = k.completions_by_hour[h] > 0
                                   ? k.latency_by_hour[h] / static_cast<double>(k.completions_by_hour[h])
                                   : std::numeric_limits<double>::quiet_NaN();
    k.first_byte = summarize(first);
    k.last_byte = summarize(last);

    std::vector<double> drive_service;
    for (const auto& row : r.trace) {
        if (row.queue != QueueId::DR) continue;
        ++k.fragment_requests;
        if (row.d_out == kNoStep) {
            ++k.fragments_unfinished;
            continue;
        }
        drive_service.push_back(cfg.to_seconds(row.d_out - row.d_in));
    }
    const auto ds = summarize(drive_service);
    k.mean_drive_service_seconds = ds.mean;
    k.drive_service_cv2 = ds.mean > 0 ? (ds.stddev * ds.stddev) / (ds.mean * ds.mean) : 0.0;

    const auto& c = r.counters;
    k.objects_touched = c.objects_touched;
    k.exchanges = c.exchanges;
    k.returns = c.returns;
    k.deferred_serves = c.deferred_serves;
    k.read_errors = c.read_errors;
    k.rate_cap_delays = c.rate_cap_delays;
    k.exchange_rate = k.hours > 0 ? static_cast<double>(c.exchanges) / k.hours : 0.0;
    for (const auto& robot : r.robots)
        k.robot_xph.push_back(k.hours > 0 ? static_cast<double>(robot.exchange_count) / k.hours : 0.0);
    for (const auto& per_hour : r.robot_hourly)
        for (std::size_t h = 0; h < std::min(hours, per_hour.size()); ++h)
            k.max_robot_hourly = std::max(k.max_robot_hourly, per_hour[h]);
    k.robot_busy_seconds = c.robot_busy_seconds;
    k.drive_busy_seconds = cfg.to_seconds(c.drive_busy_steps);
    k.data_busy_seconds = cfg.to_seconds(c.data_busy_steps);
    if (horizon_s > 0) {
        k.robot_utilization = c.robot_busy_seconds / (horizon_s * cfg.num_robots);
        k.drive_utilization = k.drive_busy_seconds / (horizon_s * cfg.num_drives);
    }

    double dr_area = 0.0, d_area = 0.0;
    for (double a : c.dr_queue_area_by_hour) dr_area += a;
    for (double a : c.d_queue_area_by_hour) d_area += a;
    if (r.horizon > 0) {
        k.mean_dr_queue = dr_area / static_cast<double>(r.horizon);
        k.mean_d_queue = d_area / static_cast<double>(r.horizon);
    }
    k.final_dr_queue = r.final_dr_queue;
    k.final_d_queue = r.final_d_queue;
    k.dr_len_distribution = normalize(c.dr_len_steps);
    k.d_len_distribution = normalize(c.d_len_steps);

    for (std::size_t i = 0; i < 4; ++i) {
        k.motion_count[i] = c.motion_count[i];
        k.motion_mean_observed[i] =
            c.motion_count[i] > 0 ? c.motion_seconds[i] / static_cast<double>(c.motion_count[i]) : 0.0;
    }
    k.motion_mean_model = r.motion_mean_seconds;
    const auto exchange_motions = c.motion_count[static_cast<std::size_t>(MotionKind::C2D)];
    if (exchange_motions > 0) {
        double total = 0.0;
        for (MotionKind kind : kExchangeMotions)
            if (kind != MotionKind::D2C) total += c.motion_seconds[static_cast<std::size_t>(kind)];
        // D2C is shared with returns; use its per-motion mean once per exchange.
        total += k.motion_mean_observed[static_cast<std::size_t>(MotionKind::D2C)] *
                 static_cast<double>(exchange_motions);
        k.mean_exchange_seconds = total / static_cast<double>(exchange_motions);
    }

    k.exchanges_by_hour = fit_hours(c.exchanges_by_hour, hours);
    k.read_errors_by_hour = fit_hours(c.read_errors_by_hour, hours);
    k.dr_queue_by_hour = fit_hours(c.dr_queue_area_by_hour, hours);
    k.d_queue_by_hour = fit_hours(c.d_queue_area_by_hour, hours);
    for (std::size_t h = 0; h < hours; ++h) {
        const Step len = std::min<Step>(sph, r.horizon - static_cast<Step>(h) * sph);
        k.dr_queue_by_hour[h] /= static_cast<double>(len);
        k.d_queue_by_hour[h] /= static_cast<double>(len);
    }
    return k;
}

}  // namespace tapesim
