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

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tapesim/config.hpp"
#include "tapesim/geometry.hpp"
#include "tapesim/random.hpp"

namespace tapesim {

enum class RequestKind { Read, Write };

/// One user object request.
struct DataRequest {
    std::int64_t request_id = 0;
    int user_id = 0;
    Step arrival_step = 0;
    double object_size = 0.0;  // MB
    /// Home cartridge of fragment i+1. Empty when placement is left to the
    /// receiving library (multi-library runs).
    std::vector<CartridgeId> fragment_homes;
    RequestKind kind = RequestKind::Read;
};

/// Exponential(mean) via inversion.
inline double sample_exponential(Rng& rng, double mean) {
    return -mean * std::log1p(-uniform01(rng));
}

/// Weibull(shape, scale) via inversion.
inline double sample_weibull(Rng& rng, double shape, double scale) {
    return scale * std::pow(-std::log1p(-uniform01(rng)), 1.0 / shape);
}

/// Draws `count` distinct cartridges uniformly from [0, num_cartridges).
std::vector<CartridgeId> place_fragments(Rng& rng, std::int64_t num_cartridges, int count);

/// Object size per configuration (fixed or Weibull).
double sample_object_size(const SimConfig& cfg, Rng& rng);

/// Poisson arrivals of `rate` requests per step over [0, horizon). Arrival
/// instants are built from exponential gaps and floored to steps, so the count
/// in each step is Poisson(rate). Users are drawn uniformly (or by
/// cfg.user_weights). When `place` is set every request also gets code_n
/// distinct home cartridges.
std::vector<DataRequest> generate_arrivals(const SimConfig& cfg, double rate, Step horizon, Rng& rng,
                                           bool place = true);

/// Per-user collocation buffer. Requests accumulate until the buffered volume
/// reaches the threshold, then leave as one merged request.
class CollocationBuffer {
public:
    CollocationBuffer(int num_users, double threshold);

    double threshold() const { return threshold_; }
    bool enabled() const { return threshold_ > 0.0; }

    /// Adds `incoming`; returns the merged request if this arrival fills the
    /// user's buffer. With collocation disabled every request passes through.
    /// The merged request keeps the first buffered request's id and homes,
    /// takes the arrival step of the flushing request and the summed size.
    std::optional<DataRequest> collocate(const DataRequest& incoming);

    /// Empties every nonempty buffer at `step`, in user order.
    std::vector<DataRequest> flush_all(Step step);

    double buffered_volume(int user) const;
    double total_in() const { return total_in_; }
    double total_out() const { return total_out_; }

private:
    struct UserBuffer {
        std::vector<DataRequest> pending;
        double volume = 0.0;
    };
    DataRequest merge(UserBuffer& buf, Step step);

    double threshold_;
    std::vector<UserBuffer> buffers_;
    double total_in_ = 0.0;
    double total_out_ = 0.0;
};

/// Writes arrival_step,user,size_mb,cartridges rows (cartridges `;`-joined).
void write_workload_csv(const std::vector<DataRequest>& requests, const std::string& path);

}  // namespace tapesim
