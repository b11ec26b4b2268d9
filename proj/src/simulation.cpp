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

#include "tapesim/simulation.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace tapesim {

std::optional<double> ObjectOutcome::first_byte_seconds(const SimConfig& cfg) const {
    if (status != ObjectStatus::Complete) return std::nullopt;
    return cfg.to_seconds(first_byte_step - data_in);
}

std::optional<double> ObjectOutcome::last_byte_seconds(const SimConfig& cfg) const {
    if (status != ObjectStatus::Complete) return std::nullopt;
    return cfg.to_seconds(completion_step - data_in) + decode_seconds;
}

void drive_library(Library& lib, Dispatcher& dispatcher, Step horizon, bool single_step) {
    while (lib.now() < horizon) {
        const auto events = lib.begin_step();
        dispatcher.on_step(lib, events);
        lib.end_step();
        if (single_step || lib.now() >= horizon) continue;
        Step next = std::min(lib.next_event_step(), horizon);
        if (auto a = dispatcher.next_arrival_step(lib.now())) next = std::min(next, *a);
        if (next > lib.now()) lib.advance_to(next);
    }
}

MotionTimeModel build_motion_model(const SimConfig& cfg) {
    const LibraryGrid grid = build_grid(cfg);
    if (cfg.motion_model == MotionModel::Zero) return MotionTimeModel::zero(grid);
    return MotionTimeModel(grid, cfg.robot_xph);
}

namespace {

class ProtocolDispatcher final : public Dispatcher {
public:
    ProtocolDispatcher(const SimConfig& cfg, const std::vector<DataRequest>& requests, Step flush_step)
        : cfg_(cfg),
          requests_(requests),
          flush_step_(flush_step),
          buffer_(cfg.num_users, cfg.collocation_threshold),
          rng_(make_stream(cfg.rng_seed, 0, "dispatch")) {}

    std::optional<Step> next_arrival_step(Step now) const override {
        std::optional<Step> next;
        if (next_ < requests_.size()) next = std::max(now, requests_[next_].arrival_step);
        if (flush_step_ != kNoStep && !flushed_ && buffer_.enabled() &&
            buffer_.total_in() > buffer_.total_out())
            next = std::min(next.value_or(flush_step_), std::max(now, flush_step_));
        return next;
    }

    void on_step(Library& lib, const std::vector<FragmentEvent>& events) override {
        for (const auto& ev : events) handle(lib, ev);
        const Step t = lib.now();
        while (next_ < requests_.size() && requests_[next_].arrival_step <= t) {
            if (auto obj = buffer_.collocate(requests_[next_])) dispatch(lib, *obj, t);
            ++next_;
        }
        if (t == flush_step_ && !flushed_) {
            for (const auto& obj : buffer_.flush_all(t)) dispatch(lib, obj, t);
            flushed_ = true;
        }
    }

    std::vector<ObjectOutcome> take_outcomes() { return std::move(outcomes_); }
    const CollocationBuffer& buffer() const { return buffer_; }

private:
    struct Tracked {
        Codeword cw;
        std::vector<std::size_t> records;  // DR row per fragment index, 0-based slot i-1
        double size = 0.0;
        RequestKind kind = RequestKind::Read;
    };

    void dispatch(Library& lib, const DataRequest& obj, Step t) {
        const std::size_t slot = tracked_.size();
        Tracked tr{make_codeword(obj.request_id, cfg_, obj.fragment_homes, t),
                   std::vector<std::size_t>(static_cast<std::size_t>(cfg_.code_n), 0), obj.object_size,
                   obj.kind};
        if (static_cast<int>(tr.cw.homes.size()) != cfg_.code_n)
            throw std::invalid_argument("request does not carry one home per fragment");
        ObjectOutcome out;
        out.block = obj.request_id;
        out.user = obj.user_id;
        out.size = obj.object_size;
        out.data_in = t;
        outcomes_.push_back(out);
        tracked_.push_back(std::move(tr));

        auto& cw = tracked_[slot].cw;
        const auto fragments = cfg_.protocol == Protocol::Redundant
                                   ? dispatch_redundant(cw, cfg_.effective_dispatch())
                                   : dispatch_failure(cw, rng_);
        for (int f : fragments) enqueue(lib, slot, f);
    }

    void enqueue(Library& lib, std::size_t slot, int fragment) {
        auto& tr = tracked_[slot];
        FragmentRequest req;
        req.mid = {tr.cw.block, fragment};
        req.size = tr.size / tr.cw.k;
        req.cartridge = tr.cw.homes[static_cast<std::size_t>(fragment - 1)];
        req.data_in = tr.cw.timestamp;
        req.kind = tr.kind;
        const std::size_t record = lib.enqueue(req);
        tr.records[static_cast<std::size_t>(fragment - 1)] = record;
        owner_[record] = {slot, fragment};
        ++outcomes_[slot].fragments_dispatched;
    }

    void handle(Library& lib, const FragmentEvent& ev) {
        const auto it = owner_.find(ev.record);
        if (it == owner_.end()) return;
        const auto [slot, fragment] = it->second;
        auto& tr = tracked_[slot];
        auto& out = outcomes_[slot];
        if (ev.kind == FragmentEventKind::DataAccess) {
            if (!record_completion(tr.cw, fragment) || out.status != ObjectStatus::InFlight) return;
            std::vector<Step> dr_in;
            for (int f : tr.cw.completed)
                dr_in.push_back(lib.trace()[tr.records[static_cast<std::size_t>(f - 1)]].d_in);
            out.status = ObjectStatus::Complete;
            out.completion_step = ev.step;
            out.first_byte_step = kth_smallest(dr_in, tr.cw.k);
            out.decode_seconds = decode_latency_penalty(tr.cw, cfg_.decode_seconds);
            return;
        }
        const auto replacement = record_failure(tr.cw, fragment, cfg_.protocol, rng_);
        out.replacements = tr.cw.replacements;
        if (replacement) enqueue(lib, slot, *replacement);
        if (tr.cw.unrecoverable && out.status == ObjectStatus::InFlight)
            out.status = ObjectStatus::Unrecoverable;
    }

    const SimConfig& cfg_;
    const std::vector<DataRequest>& requests_;
    std::size_t next_ = 0;
    Step flush_step_;
    bool flushed_ = false;
    CollocationBuffer buffer_;
    Rng rng_;
    std::vector<Tracked> tracked_;
    std::vector<ObjectOutcome> outcomes_;
    std::unordered_map<std::size_t, std::pair<std::size_t, int>> owner_;
};

class StreamDispatcher final : public Dispatcher {
public:
    explicit StreamDispatcher(const std::vector<TimedFragment>& fragments) : fragments_(fragments) {}

    std::optional<Step> next_arrival_step(Step now) const override {
        if (next_ >= fragments_.size()) return std::nullopt;
        return std::max(now, fragments_[next_].step);
    }

    void on_step(Library& lib, const std::vector<FragmentEvent>&) override {
        while (next_ < fragments_.size() && fragments_[next_].step <= lib.now())
            lib.enqueue(fragments_[next_++].request);
    }

private:
    const std::vector<TimedFragment>& fragments_;
    std::size_t next_ = 0;
};

void collect(SimResult& res, const Library& lib) {
    res.trace = lib.trace();
    res.fragment_info = lib.fragment_info();
    res.counters = lib.counters();
    res.robots = lib.robots();
    res.drives = lib.drives();
    res.robot_hourly = lib.robot_hourly();
    res.final_dr_queue = lib.dr_queue_length();
    res.final_d_queue = lib.d_queue_length();
}

}  // namespace

SimResult run_fragment_stream(const SimConfig& cfg, const std::vector<TimedFragment>& fragments,
                              Rng service, const RunOptions& options) {
    validate(cfg);
    SimResult res;
    res.cfg = cfg;
    res.horizon = cfg.horizon_steps();
    res.arrivals = static_cast<std::int64_t>(fragments.size());
    MotionTimeModel motion = build_motion_model(cfg);
    for (MotionKind kind : kExchangeMotions) res.motion_mean_seconds.push_back(motion.mean_time(kind));
    Library lib(cfg, std::move(motion), std::move(service));
    lib.set_paranoid(options.paranoid);
    StreamDispatcher dispatcher(fragments);
    drive_library(lib, dispatcher, res.horizon, options.single_step);
    collect(res, lib);
    return res;
}

SimResult run_simulation(const SimConfig& cfg, const std::vector<DataRequest>& requests,
                         const RunOptions& options) {
    validate(cfg);
    SimResult res;
    res.cfg = cfg;
    res.horizon = cfg.horizon_steps();
    res.arrivals = static_cast<std::int64_t>(requests.size());

    MotionTimeModel motion = build_motion_model(cfg);
    for (MotionKind kind : kExchangeMotions) res.motion_mean_seconds.push_back(motion.mean_time(kind));
    Library lib(cfg, std::move(motion), make_stream(cfg.rng_seed, 0, "service"));
    lib.set_paranoid(options.paranoid);

    ProtocolDispatcher dispatcher(cfg, requests, options.flush_collocation ? res.horizon - 1 : kNoStep);
    drive_library(lib, dispatcher, res.horizon, options.single_step);

    collect(res, lib);
    res.objects = dispatcher.take_outcomes();
    res.collocation_in = dispatcher.buffer().total_in();
    res.collocation_out = dispatcher.buffer().total_out();
    for (int u = 0; u < cfg.num_users; ++u) res.collocation_buffered += dispatcher.buffer().buffered_volume(u);
    return res;
}

SimResult run_simulation(const SimConfig& cfg, const RunOptions& options) {
    validate(cfg);
    Rng arrivals = make_stream(cfg.rng_seed, 0, "arrivals");
    const double rate = derive_arrival_rate(cfg);
    auto requests = generate_arrivals(cfg, rate, cfg.horizon_steps(), arrivals, false);
    // Homes come from their own stream so that the arrival stream matches a
    // multi-library run with the same seed.
    Rng placement = make_stream(cfg.rng_seed, 0, "placement");
    for (auto& r : requests) r.fragment_homes = place_fragments(placement, cfg.num_cartridges, cfg.code_n);
    SimResult res = run_simulation(cfg, requests, options);
    res.arrival_rate = rate;
    return res;
}

}  // namespace tapesim
