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
 * @file simulation.hpp
 * @brief Single-library runs: workload, protocol dispatch and the engine loop.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tapesim/config.hpp"
#include "tapesim/engine.hpp"
#include "tapesim/redundancy.hpp"
#include "tapesim/workload.hpp"

namespace tapesim {

enum class ObjectStatus { Complete, Unrecoverable, InFlight };

struct ObjectOutcome {
    std::int64_t block = 0;
    int user = 0;
    double size = 0.0;
    Step data_in = 0;
    ObjectStatus status = ObjectStatus::InFlight;
    Step first_byte_step = kNoStep;  // k-th smallest DR-in over completed fragments
    Step completion_step = kNoStep;  // k-th smallest Data-access
    double decode_seconds = 0.0;
    int fragments_dispatched = 0;
    int replacements = 0;

    /// Seconds from Data-in to the first byte, decode excluded.
    std::optional<double> first_byte_seconds(const SimConfig& cfg) const;
    /// Seconds from Data-in to the last byte, decode included.
    std::optional<double> last_byte_seconds(const SimConfig& cfg) const;
};

/// Receives per-step arrivals and engine events. The loop calls
/// next_arrival_step() to know how far it may skip.
class Dispatcher {
public:
    virtual ~Dispatcher() = default;
    /// Smallest step >= now with pending arrivals, or nullopt.
    virtual std::optional<Step> next_arrival_step(Step now) const = 0;
    /// Handles the events of begin_step() and enqueues this step's arrivals.
    virtual void on_step(Library& lib, const std::vector<FragmentEvent>& events) = 0;
};

/// Advances `lib` to `horizon`, skipping idle stretches unless `single_step`.
void drive_library(Library& lib, Dispatcher& dispatcher, Step horizon, bool single_step = false);

struct SimResult {
    SimConfig cfg;
    double arrival_rate = 0.0;  // object requests per step, before collocation
    Step horizon = 0;
    std::int64_t arrivals = 0;  // object requests generated
    std::vector<TraceRecord> trace;
    std::vector<FragmentInfo> fragment_info;
    LibraryCounters counters;
    std::vector<Robot> robots;
    std::vector<Drive> drives;
    std::vector<std::vector<std::int64_t>> robot_hourly;  // [robot][hour] exchanges
    std::vector<ObjectOutcome> objects;  // one per dispatched (possibly merged) object
    std::size_t final_dr_queue = 0;
    std::size_t final_d_queue = 0;
    double collocation_in = 0.0;
    double collocation_out = 0.0;
    double collocation_buffered = 0.0;  // still buffered at the horizon (0 when flushed)
    std::vector<double> motion_mean_seconds;  // per MotionKind, from the calibrated model
};

struct RunOptions {
    /// Check pool and queue invariants after every step.
    bool paranoid = false;
    /// Flush partial collocation buffers at the last step of the horizon.
    bool flush_collocation = true;
    /// Advance one step at a time instead of skipping idle stretches.
    bool single_step = false;
};

/// One library, one configuration. Random streams:
///   "arrivals"  object requests
///   "placement" fragment home cartridges
///   "service"   robot motions, loading, positioning, retries, robot choice
///   "dispatch"  Failure protocol subset and replacement choices
SimResult run_simulation(const SimConfig& cfg, const RunOptions& options = {});

/// Same as run_simulation but over a given request stream (homes must be set).
SimResult run_simulation(const SimConfig& cfg, const std::vector<DataRequest>& requests,
                         const RunOptions& options = {});

/// A fragment request due at a given step.
struct TimedFragment {
    Step step = 0;
    FragmentRequest request;
};

/// Runs one library over a fixed fragment stream (sorted by step) with the
/// given service stream. No protocol logic: read errors are only counted, and
/// SimResult::objects stays empty.
SimResult run_fragment_stream(const SimConfig& cfg, const std::vector<TimedFragment>& fragments,
                              Rng service, const RunOptions& options = {});

MotionTimeModel build_motion_model(const SimConfig& cfg);

}  // namespace tapesim
