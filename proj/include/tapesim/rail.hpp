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
 * @file rail.hpp
 * @brief Arrays of independent libraries.
 *
 * N identical libraries are simulated one after another. All of them see the
 * same object request stream: every object sends one fragment to each of s
 * distinct libraries (k under the Failure protocol). Streams:
 *
 *   (seed, 0, "arrivals")    object arrivals, sizes and users, shared
 *   (seed, 0, "libraries")   library subset of every object, shared
 *   (seed, i, "placement")   home cartridges inside library i
 *   (seed, i, "service")     motions, loading, positioning, retries in library i
 *   (seed, i, "inflation")   background load of library i (Failure protocol)
 *
 * Failed fragments are not re-sent to another library. Instead every library
 * carries extra background requests at the averaged rate
 * lambda_j * p_d * (n - k)(N - 1)/N, so the libraries stay independent.
 * Background requests use block ids from kBackgroundBlockBase upwards.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tapesim/kpi.hpp"
#include "tapesim/simulation.hpp"

namespace tapesim {

inline constexpr std::int64_t kBackgroundBlockBase = 1'000'000'000;

/// P(X = x) for X ~ Binomial(trials, p).
double binomial_pmf(int trials, int x, double p);

/// lambda_j = s * lambda / N.
double per_library_rate(double lambda, int s, int num_libraries);

/// Extra requests per read failure, averaged over the array: (n - k)(N - 1)/N.
double failure_multiplier(int n, int k, int num_libraries);

/// lambda'_j = lambda_j * (1 + p_d * (n - k)(N - 1)/N).
double inflated_rate(double lambda_j, double p_d, int n, int k, int num_libraries);

/// (n - k)(N - 1) / (p_d N), the touch-rate form of the same correction.
/// Infinite for p_d = 0.
double failure_touch_rate(double p_d, int n, int k, int num_libraries);

/// `count` distinct library indices drawn uniformly from [0, N), in draw order.
std::vector<int> dispatch_across_libraries(int count, int num_libraries, Rng& rng);

struct FragmentLatency {
    MessageId mid;
    int library = 0;
    Step data_in = 0;
    Step dr_in = kNoStep;
    Step data_access = kNoStep;
};

struct AggregatedObject {
    std::int64_t block = 0;
    Step data_in = 0;
    int fragments = 0;
    int pending = 0;  // DR rows still without DR-out at the horizon
    std::vector<FragmentLatency> completed;  // sorted by Data-access
    std::optional<Step> first_byte;          // steps after Data-in
    std::optional<Step> last_byte;
};

struct AggregateResult {
    std::vector<AggregatedObject> objects;  // by block id
    std::int64_t retrieval_failures = 0;    // fewer than k completions, nothing pending
    std::int64_t in_flight = 0;             // fewer than k completions, some fragment pending
    std::vector<std::string> integrity_errors;
};

/// Joins per-library traces by message id. An object's Data-in is the
/// earliest Q_in among its DR rows; its latency is the k-th smallest
/// Data_out - Data-in. Duplicate message ids and R rows without a matching
/// DR row are integrity errors. Blocks at or above kBackgroundBlockBase are
/// skipped.
AggregateResult aggregate_latency(const std::vector<std::vector<TraceRecord>>& traces, int k);

struct RailOptions {
    RunOptions run;
    /// Replaces the "service" stream seed of individual libraries.
    std::map<int, std::uint64_t> noise_seed_override;
};

struct RailResult {
    SimConfig cfg;
    int num_libraries = 1;
    double lambda = 0.0;          // object requests per step
    double lambda_j = 0.0;        // expected fragment requests per library per step
    double lambda_prime_j = 0.0;  // including background load
    double multiplier = 0.0;      // (n - k)(N - 1)/N
    double touch_correction = 0.0;       // (n - k)(N - 1)/(p_d N)
    std::int64_t objects = 0;
    std::vector<std::int64_t> fragments_per_library;   // object fragments only
    std::vector<std::int64_t> background_per_library;
    std::vector<SimResult> libraries;
    AggregateResult aggregate;
    LatencyStats first_byte;  // seconds
    LatencyStats last_byte;   // seconds
    /// (1 / min_i m_i) * sum over objects of the k-th smallest latency, seconds.
    std::optional<double> kth_latency_estimate;
};

/// N = 1 runs the single-library simulation with the same seed.
RailResult run_rail(const SimConfig& cfg, const RailOptions& options = {});

}  // namespace tapesim
