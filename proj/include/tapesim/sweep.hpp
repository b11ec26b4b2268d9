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
 * @file sweep.hpp
 * @brief One-parameter sweeps with repetitions.
 *
 * Point i, repetition j runs with seed sweep_seed(base, i, j) where base is
 * the rng_seed of the input configuration.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tapesim/config.hpp"

namespace tapesim {

enum class SweepOutput {
    LastByteMean,
    LastByteStddev,
    FirstByteMean,
    MeanDrQueue,
    FinalDrQueue,
    ObjectsTouched,
};

std::string_view to_string(SweepOutput o);
SweepOutput parse_sweep_output(std::string_view text);

struct SweepSpec {
    std::string parameter;
    std::vector<std::string> values;
    int runs = 1;
    SweepOutput output = SweepOutput::LastByteMean;
};

struct SweepRow {
    std::string value;
    std::vector<double> samples;  // one per successful run
    double mean = 0.0;
    double stddev = 0.0;          // sample standard deviation, 0 for one sample
    std::vector<std::string> errors;
};

/// Every scalar a sweep can select, from a single run (RAIL or not).
struct RunMetrics {
    double last_byte_mean = 0.0;
    double last_byte_stddev = 0.0;
    double first_byte_mean = 0.0;
    std::int64_t completed = 0;
    double mean_dr_queue = 0.0;    // averaged over libraries
    double final_dr_queue = 0.0;   // summed over libraries
    double objects_touched = 0.0;  // summed over libraries

    double select(SweepOutput o) const;
};

std::uint64_t sweep_seed(std::uint64_t base, std::size_t point, int repetition);

/// Runs cfg (through the array model when num_libraries > 1).
RunMetrics measure(const SimConfig& cfg);

/// Throws ConfigValidationError for an unknown parameter, an empty value
/// list or runs < 1. Failures of single runs land in SweepRow::errors.
std::vector<SweepRow> run_sweep(const SimConfig& base, const SweepSpec& spec);

/// CSV with header "parameter,value,runs,mean,stddev,error".
void write_sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace tapesim
