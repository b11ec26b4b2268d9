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


#include "tapesim/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tapesim/export.hpp"
#include "tapesim/kpi.hpp"
#include "tapesim/rail.hpp"
#include "tapesim/random.hpp"

namespace tapesim {

namespace {

constexpr std::pair<SweepOutput, std::string_view> kOutputNames[] = {
    {SweepOutput::LastByteMean, "last_byte_mean"},
    {SweepOutput::LastByteStddev, "last_byte_stddev"},
    {SweepOutput::FirstByteMean, "first_byte_mean"},
    {SweepOutput::MeanDrQueue, "mean_dr_queue"},
    {SweepOutput::FinalDrQueue, "final_dr_queue"},
    {SweepOutput::ObjectsTouched, "objects_touched"},
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

std::string_view to_string(SweepOutput o) {
    for (const auto& [v, name] : kOutputNames)
        if (v == o) return name;
    return "?";
}

SweepOutput parse_sweep_output(std::string_view text) {
    for (const auto& [v, name] : kOutputNames)
        if (name == text) return v;
    throw ConfigValidationError("output", "unknown sweep output '" + std::string(text) + "'");
}

double RunMetrics::select(SweepOutput o) const {
    switch (o) {
        case SweepOutput::LastByteMean: return last_byte_mean;
        case SweepOutput::LastByteStddev: return last_byte_stddev;
        case SweepOutput::FirstByteMean: return first_byte_mean;
        case SweepOutput::MeanDrQueue: return mean_dr_queue;
        case SweepOutput::FinalDrQueue: return final_dr_queue;
        case SweepOutput::ObjectsTouched: return objects_touched;
    }
    return std::nan("");
}

std::uint64_t sweep_seed(std::uint64_t base, std::size_t point, int repetition) {
    return mix64(derive_seed(base, point, "sweep") ^ mix64(static_cast<std::uint64_t>(repetition)));
}

RunMetrics measure(const SimConfig& cfg) {
    const RailResult r = run_rail(cfg);
    RunMetrics m;
    m.completed = r.last_byte.count;
    if (r.last_byte.has_data()) {
        m.last_byte_mean = r.last_byte.mean;
        m.last_byte_stddev = r.last_byte.stddev;
    } else {
        m.last_byte_mean = m.last_byte_stddev = std::nan("");
    }
    m.first_byte_mean = r.first_byte.has_data() ? r.first_byte.mean : std::nan("");
    for (const auto& lib : r.libraries) {
        const KpiReport k = compute_kpis(lib);
        m.mean_dr_queue += k.mean_dr_queue / static_cast<double>(r.libraries.size());
        m.final_dr_queue += static_cast<double>(k.final_dr_queue);
        m.objects_touched += static_cast<double>(k.objects_touched);
    }
    return m;
}

std::vector<SweepRow> run_sweep(const SimConfig& base, const SweepSpec& spec) {
    try {
        canonical_key(spec.parameter);
    } catch (const ConfigParseError&) {
        throw ConfigValidationError("parameter", "unknown sweep parameter '" + spec.parameter + "'");
    }
    if (spec.values.empty()) throw ConfigValidationError("values", "sweep needs at least one value");
    if (spec.runs < 1) throw ConfigValidationError("runs", "sweep needs at least one run per value");

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        SweepRow row;
        row.value = spec.values[i];
        for (int rep = 0; rep < spec.runs; ++rep) {
            try {
                SimConfig cfg = with_override(base, spec.parameter, spec.values[i]);
                cfg.rng_seed = sweep_seed(base.rng_seed, i, rep);
                row.samples.push_back(measure(cfg).select(spec.output));
            } catch (const std::exception& e) {
                row.errors.push_back(e.what());
            }
        }
        if (!row.samples.empty()) {
            double sum = 0.0;
            for (double v : row.samples) sum += v;
            row.mean = sum / static_cast<double>(row.samples.size());
            double ss = 0.0;
            for (double v : row.samples) ss += (v - row.mean) * (v - row.mean);
            row.stddev = row.samples.size() > 1 ? std::sqrt(ss / static_cast<double>(row.samples.size() - 1)) : 0.0;
        } else {
            row.mean = row.stddev = std::nan("");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "parameter,value,runs,mean,stddev,error\n";
    for (const auto& r : rows) {
        out << spec.parameter << ',' << csv_field(r.value) << ',' << r.samples.size() << ',';
        if (!r.samples.empty()) out << format_double(r.mean) << ',' << format_double(r.stddev);
        else out << ',';
        out << ',' << (r.errors.empty() ? "" : csv_field(r.errors.front())) << '\n';
    }
}

}  // namespace tapesim
