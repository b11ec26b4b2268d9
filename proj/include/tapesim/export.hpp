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
 * @file export.hpp
 * @brief Event traces (simQ.csv) and KPI reports.
 *
 * Trace files start with the header
 *
 *     QID,MID,Q_in,D_in,Q_out,D_out,Q_len,Data_out
 *
 * followed by one row per queue entry in order of Q_in. Checkpoints are step
 * indices; checkpoints not reached by the end of the run are left empty.
 * Lines end in LF with no trailing delimiter.
 */

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tapesim/kpi.hpp"
#include "tapesim/trace.hpp"

namespace tapesim {

inline constexpr const char* kTraceHeader = "QID,MID,Q_in,D_in,Q_out,D_out,Q_len,Data_out";

/// "simQ.csv" for a single library, "simQ<i>.csv" for library i of an array.
std::string trace_file_name(std::optional<int> library = {});

std::string format_trace_row(const TraceRecord& row);
TraceRecord parse_trace_row(const std::string& line);

void write_trace(const std::vector<TraceRecord>& records, std::ostream& out);
void write_trace(const std::vector<TraceRecord>& records, const std::string& path);

std::vector<TraceRecord> read_trace(std::istream& in);
std::vector<TraceRecord> read_trace(const std::string& path);

/// Marker written in place of statistics of an empty sample.
inline constexpr const char* kNoData = "no_data";

/// Plain-text `key = value` summary of a report.
std::string format_report(const KpiReport& kpi, const SimConfig& cfg);

/// Writes <prefix>report.txt plus plot data next to it:
///   <prefix>hourly.csv             hour, exchanges, read errors, queue means, latency
///   <prefix>latency.csv            completion step, hour, last-byte seconds
///   <prefix>queue_lengths.csv      length, DR and D time fractions
///   <prefix>motion_histogram.csv   motion kind, bin upper edge (s), probability
void write_report(const KpiReport& kpi, const SimConfig& cfg, const std::string& dir,
                  const std::string& prefix = "");

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace tapesim
