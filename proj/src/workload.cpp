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

#include "tapesim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace tapesim {

std::vector<CartridgeId> place_fragments(Rng& rng, std::int64_t num_cartridges, int count) {
    if (count > num_cartridges) throw std::invalid_argument("more fragments than cartridges");
    std::vector<CartridgeId> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(out.size()) < count) {
        const auto c = static_cast<CartridgeId>(
            uniform_index(rng, static_cast<std::uint64_t>(num_cartridges)));
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
}

double sample_object_size(const SimConfig& cfg, Rng& rng) {
    if (cfg.object_size_fixed) return cfg.object_size_scale;
    return sample_weibull(rng, cfg.object_size_shape, cfg.object_size_scale);
}

std::vector<DataRequest> generate_arrivals(const SimConfig& cfg, double rate, Step horizon, Rng& rng,
                                           bool place) {
    std::vector<DataRequest> out;
    if (rate <= 0.0 || horizon <= 0) return out;

    std::vector<double> cumulative;
    if (!cfg.user_weights.empty()) {
        cumulative.resize(cfg.user_weights.size());
        std::partial_sum(cfg.user_weights.begin(), cfg.user_weights.end(), cumulative.begin());
    }
    const double mean_gap = 1.0 / rate;
    double t = 0.0;
    std::int64_t next_id = 0;
    while (true) {
        t += sample_exponential(rng, mean_gap);
        const auto step = static_cast<Step>(std::floor(t));
        if (step >= horizon) break;
        DataRequest r;
        r.request_id = next_id++;
        r.arrival_step = step;
        if (cumulative.empty()) {
            r.user_id = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cfg.num_users)));
        } else {
            const double u = uniform01(rng) * cumulative.back();
            r.user_id = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                         cumulative.begin());
            r.user_id = std::min(r.user_id, cfg.num_users - 1);
        }
        r.object_size = sample_object_size(cfg, rng);
        if (cfg.read_fraction < 1.0)
            r.kind = uniform01(rng) < cfg.read_fraction ? RequestKind::Read : RequestKind::Write;
        if (place) r.fragment_homes = place_fragments(rng, cfg.num_cartridges, cfg.code_n);
        out.push_back(std::move(r));
    }
    return out;
}

CollocationBuffer::CollocationBuffer(int num_users, double threshold)
    : threshold_(threshold), buffers_(static_cast<std::size_t>(num_users)) {}

DataRequest CollocationBuffer::merge(UserBuffer& buf, Step step) {
    DataRequest merged = buf.pending.front();
    merged.arrival_step = step;
    merged.object_size = buf.volume;
    total_out_ += buf.volume;
    buf.pending.clear();
    buf.volume = 0.0;
    return merged;
}

std::optional<DataRequest> CollocationBuffer::collocate(const DataRequest& incoming) {
    total_in_ += incoming.object_size;
    if (!enabled()) {
        total_out_ += incoming.object_size;
        return incoming;
    }
    auto& buf = buffers_.at(static_cast<std::size_t>(incoming.user_id));
    buf.pending.push_back(incoming);
    buf.volume += incoming.object_size;
    if (buf.volume >= threshold_) return merge(buf, incoming.arrival_step);
    return std::nullopt;
}

std::vector<DataRequest> CollocationBuffer::flush_all(Step step) {
    std::vector<DataRequest> out;
    for (auto& buf : buffers_)
        if (!buf.pending.empty()) out.push_back(merge(buf, step));
    return out;
}

double CollocationBuffer::buffered_volume(int user) const {
    return buffers_.at(static_cast<std::size_t>(user)).volume;
}

void write_workload_csv(const std::vector<DataRequest>& requests, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write workload trace '" + path + "'");
    out << "arrival_step,user,size_mb,cartridges\n";
    for (const auto& r : requests) {
        out << r.arrival_step << ',' << r.user_id << ',' << r.object_size << ',';
        for (std::size_t i = 0; i < r.fragment_homes.size(); ++i)
            out << (i ? ";" : "") << r.fragment_homes[i];
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace tapesim
