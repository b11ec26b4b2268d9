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

#include "tapesim/export.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tapesim/simulation.hpp"

namespace tapesim {

namespace {

template <typename Int>
Int parse_int(std::string_view s, const char* what) {
    Int v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::invalid_argument(std::string("malformed ") + what + " '" + std::string(s) + "'");
    return v;
}

Step parse_step(std::string_view s) { return s.empty() ? kNoStep : parse_int<Step>(s, "step"); }

void put_step(std::string& out, Step s) {
    if (s != kNoStep) out += std::to_string(s);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

void check_written(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace

MessageId MessageId::parse(std::string_view text) {
    const auto dot = text.find('.');
    if (dot == std::string_view::npos) throw std::invalid_argument("message id without '.'");
    MessageId m;
    m.block = parse_int<std::int64_t>(text.substr(0, dot), "message id block");
    m.fragment = parse_int<int>(text.substr(dot + 1), "message id fragment");
    return m;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string trace_file_name(std::optional<int> library) {
    return library ? "simQ" + std::to_string(*library) + ".csv" : "simQ.csv";
}

std::string format_trace_row(const TraceRecord& row) {
    std::string out;
    out += to_string(row.queue);
    out += ',';
    out += row.mid.str();
    for (Step s : {row.q_in, row.d_in, row.q_out, row.d_out}) {
        out += ',';
        put_step(out, s);
    }
    out += ',';
    out += std::to_string(row.q_len);
    out += ',';
    put_step(out, row.data_out);
    return out;
}

TraceRecord parse_trace_row(const std::string& line) {
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
        const auto comma = rest.find(',');
        f.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (f.size() != 8) throw std::invalid_argument("trace row needs 8 fields: '" + line + "'");
    TraceRecord r;
    if (f[0] == "DR")
        r.queue = QueueId::DR;
    else if (f[0] == "R")
        r.queue = QueueId::R;
    else
        throw std::invalid_argument("unknown QID '" + std::string(f[0]) + "'");
    r.mid = MessageId::parse(f[1]);
    r.q_in = parse_step(f[2]);
    r.d_in = parse_step(f[3]);
    r.q_out = parse_step(f[4]);
    r.d_out = parse_step(f[5]);
    r.q_len = parse_int<std::int64_t>(f[6], "Q_len");
    r.data_out = parse_step(f[7]);
    return r;
}

void write_trace(const std::vector<TraceRecord>& records, std::ostream& out) {
    out << kTraceHeader << '\n';
    for (const auto& r : records) out << format_trace_row(r) << '\n';
}

void write_trace(const std::vector<TraceRecord>& records, const std::string& path) {
    auto out = open_out(path);
    write_trace(records, out);
    check_written(out, path);
}

std::vector<TraceRecord> read_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw std::invalid_argument("trace does not start with the expected header");
    std::vector<TraceRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(parse_trace_row(line));
    }
    return out;
}

std::vector<TraceRecord> read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
    try {
        return read_trace(in);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

namespace {

void put_stats(std::ostringstream& o, const std::string& name, const LatencyStats& s) {
    const char* keys[] = {"min", "mean", "max", "stddev"};
    const double vals[] = {s.min, s.mean, s.max, s.stddev};
    o << name << "_count = " << s.count << '\n';
    for (int i = 0; i < 4; ++i) {
        o << name << '_' << keys[i] << "_minutes = ";
        if (s.has_data())
            o << format_double(vals[i] / 60.0);
        else
            o << kNoData;
        o << '\n';
    }
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        if constexpr (std::is_floating_point_v<T>)
            out += format_double(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

std::string format_report(const KpiReport& k, const SimConfig& cfg) {
    std::ostringstream o;
    o << "protocol = " << to_string(cfg.protocol) << '\n';
    o << "code = (" << cfg.code_n << "," << cfg.code_k << ")\n";
    o << "dispatch_count = " << cfg.effective_dispatch() << '\n';
    o << "hours = " << format_double(k.hours) << '\n';
    o << "total_capacity_mb = " << format_double(k.total_capacity_mb) << '\n';
    o << "total_capacity_pb = " << format_double(k.total_capacity_pb) << '\n';
    o << "object_requests = " << k.arrivals << '\n';
    o << "request_rate_per_day = " << format_double(k.request_rate_per_day) << '\n';
    o << "objects_dispatched = " << k.objects_dispatched << '\n';
    o << "objects_complete = " << k.objects_complete << '\n';
    o << "objects_unrecoverable = " << k.objects_unrecoverable << '\n';
    o << "objects_in_flight = " << k.objects_in_flight << '\n';
    o << "fragment_requests = " << k.fragment_requests << '\n';
    o << "fragments_unfinished = " << k.fragments_unfinished << '\n';
    put_stats(o, "first_byte_latency", k.first_byte);
    put_stats(o, "last_byte_latency", k.last_byte);
    o << "objects_touched = " << k.objects_touched << '\n';
    o << "exchanges = " << k.exchanges << '\n';
    o << "returns = " << k.returns << '\n';
    o << "deferred_dismount_serves = " << k.deferred_serves << '\n';
    o << "read_errors = " << k.read_errors << '\n';
    o << "exchange_rate_per_hour = " << format_double(k.exchange_rate) << '\n';
    o << "robot_xph = " << join(k.robot_xph) << '\n';
    o << "max_robot_exchanges_in_an_hour = " << k.max_robot_hourly << '\n';
    o << "rate_cap_delays = " << k.rate_cap_delays << '\n';
    o << "robot_busy_seconds = " << format_double(k.robot_busy_seconds) << '\n';
    o << "drive_busy_seconds = " << format_double(k.drive_busy_seconds) << '\n';
    o << "data_busy_seconds = " << format_double(k.data_busy_seconds) << '\n';
    o << "robot_utilization = " << format_double(k.robot_utilization) << '\n';
    o << "drive_utilization = " << format_double(k.drive_utilization) << '\n';
    o << "mean_dr_queue = " << format_double(k.mean_dr_queue) << '\n';
    o << "mean_d_queue = " << format_double(k.mean_d_queue) << '\n';
    o << "final_dr_queue = " << k.final_dr_queue << '\n';
    o << "final_d_queue = " << k.final_d_queue << '\n';
    for (MotionKind kind : kExchangeMotions) {
        const auto i = static_cast<std::size_t>(kind);
        o << "motion_" << to_string(kind) << "_count = " << k.motion_count[i] << '\n';
        o << "motion_" << to_string(kind) << "_mean_seconds = " << format_double(k.motion_mean_observed[i])
          << '\n';
    }
    o << "mean_exchange_seconds = " << format_double(k.mean_exchange_seconds) << '\n';
    o << "mean_drive_service_seconds = " << format_double(k.mean_drive_service_seconds) << '\n';
    o << "read_errors_by_hour = " << join(k.read_errors_by_hour) << '\n';
    o << "exchanges_by_hour = " << join(k.exchanges_by_hour) << '\n';
    return o.str();
}

void write_report(const KpiReport& k, const SimConfig& cfg, const std::string& dir,
                  const std::string& prefix) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto path = [&](const char* name) { return (fs::path(dir) / (prefix + name)).string(); };

    {
        const auto p = path("report.txt");
        auto out = open_out(p);
        out << format_report(k, cfg);
        check_written(out, p);
    }
    {
        const auto p = path("hourly.csv");
        auto out = open_out(p);
        out << "hour,exchanges,read_errors,mean_dr_queue,mean_d_queue,completions,mean_latency_seconds\n";
        for (std::size_t h = 0; h < k.exchanges_by_hour.size(); ++h) {
            out << h << ',' << k.exchanges_by_hour[h] << ',' << k.read_errors_by_hour[h] << ','
                << format_double(k.dr_queue_by_hour[h]) << ',' << format_double(k.d_queue_by_hour[h]) << ','
                << k.completions_by_hour[h] << ',';
            if (k.completions_by_hour[h] > 0) out << format_double(k.latency_by_hour[h]);
            out << '\n';
        }
        check_written(out, p);
    }
    {
        const auto p = path("latency.csv");
        auto out = open_out(p);
        out << "completion_step,hour,last_byte_seconds\n";
        const auto sph = cfg.steps_per_hour();
        for (const auto& [step, lat] : k.latency_series)
            out << step << ',' << step / sph << ',' << format_double(lat) << '\n';
        check_written(out, p);
    }
    {
        const auto p = path("queue_lengths.csv");
        auto out = open_out(p);
        out << "length,dr_fraction,d_fraction\n";
        const auto n = std::max(k.dr_len_distribution.size(), k.d_len_distribution.size());
        for (std::size_t i = 0; i < n; ++i) {
            out << i << ',' << format_double(i < k.dr_len_distribution.size() ? k.dr_len_distribution[i] : 0.0)
                << ',' << format_double(i < k.d_len_distribution.size() ? k.d_len_distribution[i] : 0.0)
                << '\n';
        }
        check_written(out, p);
    }
    {
        const auto p = path("motion_histogram.csv");
        auto out = open_out(p);
        out << "kind,bin_upper_seconds,probability\n";
        if (cfg.motion_model == MotionModel::Geometry) {
            const MotionTimeModel model = build_motion_model(cfg);
            Rng rng = make_stream(cfg.rng_seed, 0, "histogram");
            for (MotionKind kind : kExchangeMotions)
                for (const auto& [edge, prob] : model.histogram(kind, 20, 20000, rng))
                    out << to_string(kind) << ',' << format_double(edge) << ',' << format_double(prob) << '\n';
        }
        check_written(out, p);
    }
}

}  // namespace tapesim
