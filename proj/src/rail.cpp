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

#include "tapesim/rail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace tapesim {

double binomial_pmf(int trials, int x, double p) {
    if (x < 0 || x > trials) return 0.0;
    if (p <= 0.0) return x == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return x == trials ? 1.0 : 0.0;
    const double log_choose = std::lgamma(trials + 1.0) - std::lgamma(x + 1.0) - std::lgamma(trials - x + 1.0);
    return std::exp(log_choose + x * std::log(p) + (trials - x) * std::log1p(-p));
}

double per_library_rate(double lambda, int s, int num_libraries) {
    return s * lambda / num_libraries;
}

double failure_multiplier(int n, int k, int num_libraries) {
    return static_cast<double>(n - k) * (num_libraries - 1) / num_libraries;
}

double inflated_rate(double lambda_j, double p_d, int n, int k, int num_libraries) {
    return lambda_j * (1.0 + p_d * failure_multiplier(n, k, num_libraries));
}

double failure_touch_rate(double p_d, int n, int k, int num_libraries) {
    if (p_d <= 0.0) return std::numeric_limits<double>::infinity();
    return failure_multiplier(n, k, num_libraries) / p_d;
}

std::vector<int> dispatch_across_libraries(int count, int num_libraries, Rng& rng) {
    if (count > num_libraries)
        throw ConfigValidationError("dispatch_count",
                                    "cannot send " + std::to_string(count) + " fragments to " +
                                        std::to_string(num_libraries) + " distinct libraries");
    std::vector<int> pool(static_cast<std::size_t>(num_libraries));
    for (int i = 0; i < num_libraries; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < count; ++i) {
        const auto j = static_cast<std::size_t>(i) +
                       uniform_index(rng, static_cast<std::uint64_t>(num_libraries - i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    return {pool.begin(), pool.begin() + count};
}

AggregateResult aggregate_latency(const std::vector<std::vector<TraceRecord>>& traces, int k) {
    AggregateResult out;
    std::map<std::int64_t, AggregatedObject> objects;
    std::set<MessageId> seen;
    for (std::size_t lib = 0; lib < traces.size(); ++lib) {
        std::set<MessageId> dr_here;
        for (const auto& row : traces[lib]) {
            if (row.queue == QueueId::R) continue;
            dr_here.insert(row.mid);
            if (row.mid.block >= kBackgroundBlockBase) continue;
            if (!seen.insert(row.mid).second) {
                out.integrity_errors.push_back("duplicate message id " + row.mid.str() + " in library " +
                                               std::to_string(lib));
                continue;
            }
            auto [it, fresh] = objects.try_emplace(row.mid.block);
            auto& obj = it->second;
            obj.block = row.mid.block;
            obj.data_in = fresh ? row.q_in : std::min(obj.data_in, row.q_in);
            ++obj.fragments;
            if (row.d_out == kNoStep) ++obj.pending;
            if (row.data_out != kNoStep)
                obj.completed.push_back({row.mid, static_cast<int>(lib), kNoStep, row.d_in, row.data_out});
        }
        for (const auto& row : traces[lib])
            if (row.queue == QueueId::R && !dr_here.count(row.mid))
                out.integrity_errors.push_back("drive return " + row.mid.str() + " in library " +
                                               std::to_string(lib) + " has no request row");
    }
    for (auto& [block, obj] : objects) {
        for (auto& f : obj.completed) f.data_in = obj.data_in;
        std::sort(obj.completed.begin(), obj.completed.end(), [](const auto& a, const auto& b) {
            return std::tie(a.data_access, a.mid) < std::tie(b.data_access, b.mid);
        });
        if (static_cast<int>(obj.completed.size()) >= k) {
            std::vector<Step> first, last;
            for (const auto& f : obj.completed) {
                first.push_back(f.dr_in - obj.data_in);
                last.push_back(f.data_access - obj.data_in);
            }
            obj.first_byte = kth_smallest(first, k);
            obj.last_byte = kth_smallest(last, k);
        } else if (obj.pending > 0) {
            ++out.in_flight;
        } else {
            ++out.retrieval_failures;
        }
        out.objects.push_back(std::move(obj));
    }
    return out;
}

namespace {

RailResult run_single(const SimConfig& cfg, const RailOptions& options) {
    RailResult res;
    res.cfg = cfg;
    res.num_libraries = 1;
    SimResult sim = run_simulation(cfg, options.run);
    res.lambda = sim.arrival_rate;
    res.lambda_j = res.lambda * cfg.initial_fragments();
    res.lambda_prime_j = res.lambda_j;
    res.multiplier = failure_multiplier(cfg.code_n, cfg.code_k, 1);
    res.touch_correction = failure_touch_rate(cfg.drive_fail_prob, cfg.code_n, cfg.code_k, 1);
    res.objects = static_cast<std::int64_t>(sim.objects.size());
    std::int64_t fragments = 0;
    for (const auto& row : sim.trace)
        if (row.queue == QueueId::DR) ++fragments;
    res.fragments_per_library = {fragments};
    res.background_per_library = {0};
    res.aggregate = aggregate_latency({sim.trace}, cfg.code_k);
    const KpiReport kpi = compute_kpis(sim);
    res.first_byte = kpi.first_byte;
    res.last_byte = kpi.last_byte;
    if (fragments > 0) {
        double sum = 0.0;
        for (const auto& o : sim.objects)
            if (auto l = o.last_byte_seconds(cfg)) sum += *l;
        res.kth_latency_estimate = sum / static_cast<double>(fragments);
    }
    res.libraries.push_back(std::move(sim));
    return res;
}

}  // namespace

RailResult run_rail(const SimConfig& cfg, const RailOptions& options) {
    validate(cfg);
    const int N = cfg.num_libraries;
    if (N == 1) return run_single(cfg, options);

    RailResult res;
    res.cfg = cfg;
    res.num_libraries = N;
    const Step horizon = cfg.horizon_steps();
    const int per_object = cfg.initial_fragments();

    res.lambda = derive_arrival_rate(cfg);
    res.lambda_j = per_library_rate(res.lambda, per_object, N);
    res.multiplier = failure_multiplier(cfg.code_n, cfg.code_k, N);
    res.touch_correction = failure_touch_rate(cfg.drive_fail_prob, cfg.code_n, cfg.code_k, N);
    res.lambda_prime_j = cfg.protocol == Protocol::Failure
                             ? inflated_rate(res.lambda_j, cfg.drive_fail_prob, cfg.code_n, cfg.code_k, N)
                             : res.lambda_j;

    Rng arrivals = make_stream(cfg.rng_seed, 0, "arrivals");
    const auto requests = generate_arrivals(cfg, res.lambda, horizon, arrivals, false);
    res.objects = static_cast<std::int64_t>(requests.size());

    std::vector<std::vector<TimedFragment>> streams(static_cast<std::size_t>(N));
    std::vector<Rng> placement;
    for (int i = 0; i < N; ++i) placement.push_back(make_stream(cfg.rng_seed, static_cast<std::uint64_t>(i), "placement"));
    Rng libraries = make_stream(cfg.rng_seed, 0, "libraries");
    for (const auto& req : requests) {
        Codeword cw;
        cw.block = req.request_id;
        cw.n = cfg.code_n;
        cw.k = cfg.code_k;
        const auto fragments = cfg.protocol == Protocol::Redundant ? dispatch_redundant(cw, per_object)
                                                                   : dispatch_failure(cw, libraries);
        const auto targets = dispatch_across_libraries(per_object, N, libraries);
        for (std::size_t f = 0; f < fragments.size(); ++f) {
            const auto lib = static_cast<std::size_t>(targets[f]);
            FragmentRequest fr;
            fr.mid = {req.request_id, fragments[f]};
            fr.size = req.object_size / cfg.code_k;
            fr.cartridge = place_fragments(placement[lib], cfg.num_cartridges, 1).front();
            fr.data_in = req.arrival_step;
            fr.kind = req.kind;
            streams[lib].push_back({req.arrival_step, fr});
        }
    }
    for (const auto& s : streams) res.fragments_per_library.push_back(static_cast<std::int64_t>(s.size()));

    // Background load standing in for cross-library re-dispatch.
    const double extra = res.lambda_prime_j - res.lambda_j;
    res.background_per_library.assign(static_cast<std::size_t>(N), 0);
    if (extra > 0.0) {
        for (int i = 0; i < N; ++i) {
            Rng rng = make_stream(cfg.rng_seed, static_cast<std::uint64_t>(i), "inflation");
            auto bg = generate_arrivals(cfg, extra, horizon, rng, false);
            auto& stream = streams[static_cast<std::size_t>(i)];
            std::vector<TimedFragment> merged;
            merged.reserve(stream.size() + bg.size());
            std::size_t a = 0;
            for (const auto& b : bg) {
                while (a < stream.size() && stream[a].step <= b.arrival_step) merged.push_back(stream[a++]);
                FragmentRequest fr;
                fr.mid = {kBackgroundBlockBase + b.request_id, 1};
                fr.size = b.object_size / cfg.code_k;
                fr.cartridge = place_fragments(rng, cfg.num_cartridges, 1).front();
                fr.data_in = b.arrival_step;
                merged.push_back({b.arrival_step, fr});
            }
            merged.insert(merged.end(), stream.begin() + static_cast<std::ptrdiff_t>(a), stream.end());
            res.background_per_library[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(bg.size());
            stream = std::move(merged);
        }
    }

    std::vector<std::vector<TraceRecord>> traces;
    for (int i = 0; i < N; ++i) {
        const auto it = options.noise_seed_override.find(i);
        Rng service = it != options.noise_seed_override.end()
                          ? Rng(it->second)
                          : make_stream(cfg.rng_seed, static_cast<std::uint64_t>(i), "service");
        res.libraries.push_back(
            run_fragment_stream(cfg, streams[static_cast<std::size_t>(i)], std::move(service), options.run));
        traces.push_back(res.libraries.back().trace);
    }

    res.aggregate = aggregate_latency(traces, cfg.code_k);
    std::vector<double> first, last;
    double kth_sum = 0.0;
    for (const auto& obj : res.aggregate.objects) {
        if (!obj.last_byte) continue;
        Codeword cw;
        cw.k = cfg.code_k;
        cw.systematic = cfg.systematic;
        for (const auto& f : obj.completed) cw.completed.push_back(f.mid.fragment);
        const double decode = decode_latency_penalty(cw, cfg.decode_seconds);
        first.push_back(cfg.to_seconds(*obj.first_byte));
        last.push_back(cfg.to_seconds(*obj.last_byte) + decode);
        kth_sum += last.back();
    }
    res.first_byte = summarize(first);
    res.last_byte = summarize(last);
    const auto min_m = *std::min_element(res.fragments_per_library.begin(), res.fragments_per_library.end());
    if (min_m > 0) res.kth_latency_estimate = kth_sum / static_cast<double>(min_m);
    return res;
}

}  // namespace tapesim
