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
 * @file config.hpp
 * @brief Run parameters of a tape library simulation.
 *
 * A configuration document is a flat list of `key = value` lines. Blank
 * lines and everything after `#` are ignored. Keys are the field names of
 * SimConfig; see README.md for the full table with units and defaults.
 */

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tapesim {

/// Simulation time in discrete steps.
using Step = std::int64_t;

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kSecondsPerYear = 365.0 * kSecondsPerDay;
inline constexpr double kMegabytesPerGigabyte = 1000.0;

enum class Protocol { Redundant, Failure };

/// Geometry draws motion times from the rack layout; Zero makes every robot
/// motion instantaneous (used to turn the library into a plain drive queue).
enum class MotionModel { Geometry, Zero };

enum class DriveLayout { TopRight, Center, Explicit };

struct GridCoord {
    int row = 0;
    int col = 0;
    auto operator<=>(const GridCoord&) const = default;
};

/// Raised when a document cannot be read: bad syntax, unknown key, missing
/// mandatory key, or a value of the wrong type.
class ConfigParseError : public std::runtime_error {
public:
    ConfigParseError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Raised when a syntactically valid configuration breaks an invariant.
class ConfigValidationError : public std::runtime_error {
public:
    ConfigValidationError(std::string field, const std::string& what)
        : std::runtime_error(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct SimConfig {
    // Geometry.
    std::int64_t num_cartridges = 0;
    int vertical_dim = 0;
    DriveLayout drive_layout = DriveLayout::TopRight;
    std::vector<GridCoord> drive_positions;  // only for DriveLayout::Explicit

    // Media and hardware.
    double cartridge_capacity = 0.0;  // MB
    double fill_ratio = 1.0;
    int num_robots = 0;
    int num_drives = 0;
    double robot_xph = 0.0;
    double drive_rate = 0.0;  // MB/s
    double mean_load_time = 18.0;
    double mean_position_time = 50.0;
    MotionModel motion_model = MotionModel::Geometry;
    bool balanced_robots = true;
    bool deferred_dismount = true;
    bool dr_priority = true;       // DR queue beats D queue for a free robot
    bool robot_rate_cap = true;    // no robot completes more than xph exchanges per clock hour

    // Workload.
    double object_size_shape = 1.0;
    double object_size_scale = 5000.0;  // MB
    bool object_size_fixed = false;     // every object is exactly object_size_scale
    double aotr = 1.0;
    std::optional<double> objects_touched_per_day;
    int num_users = 1;
    std::vector<double> user_weights;  // empty means homogeneous users
    double read_fraction = 1.0;
    double collocation_threshold = 0.0;  // MB, 0 disables

    // Redundancy.
    int code_n = 1;
    int code_k = 1;
    std::optional<int> dispatch_count;  // defaults to code_n
    Protocol protocol = Protocol::Redundant;
    bool systematic = true;
    double decode_seconds = 0.0;
    std::int64_t failure_threshold_steps = 100;
    double drive_fail_prob = 0.0;
    int max_retries = 10;

    // Run control.
    int num_libraries = 1;
    double step_seconds = 1.0;
    double sim_duration = 72.0;  // hours
    std::uint64_t rng_seed = 1;

    int effective_dispatch() const { return dispatch_count.value_or(code_n); }

    /// Objects per dispatch that the protocol requests up front.
    int initial_fragments() const {
        return protocol == Protocol::Redundant ? effective_dispatch() : code_k;
    }

    /// Mean object size in MB (Weibull mean, or the fixed size).
    double mean_object_size() const;

    Step horizon_steps() const;
    Step steps_per_hour() const;
    Step to_steps(double seconds) const;
    double to_seconds(Step steps) const { return static_cast<double>(steps) * step_seconds; }

    /// NoC x C_t for one library, in MB.
    double library_capacity_mb() const {
        return static_cast<double>(num_cartridges) * cartridge_capacity;
    }

    bool operator==(const SimConfig&) const = default;
};

using ConfigOverrides = std::map<std::string, std::string, std::less<>>;

/// Parses and validates a configuration document. Entries in `overrides`
/// replace same-named keys from `text` before validation.
SimConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});

/// Reads `path` and parses it.
SimConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// Renders every field; parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& cfg);

/// Throws ConfigValidationError naming the first offending field.
void validate(const SimConfig& cfg);

/// All recognised keys, in serialization order.
const std::vector<std::string>& config_keys();

/// Canonical name of a key or one of its short spellings (threshold, seed,
/// libraries). Throws ConfigParseError for unknown keys.
std::string canonical_key(std::string_view key);

/// Returns a copy with `key` set from its textual value, revalidated.
SimConfig with_override(const SimConfig& cfg, const std::string& key, const std::string& value);

/// The object request rate from stored volume and touch rate:
///   NoC * C_t * fill * AOTR * k / (n * mu_o * T)
/// expressed in requests per unit of whatever time unit `period` uses.
double touch_rate(std::int64_t num_cartridges, double cartridge_capacity, double fill_ratio,
                  double aotr, int code_k, int code_n, double mean_object_size, double period);

/// Object request rate in requests per simulation step. `period_steps` is the
/// AOTR period measured in steps (defaults to one year). A manual
/// objects_touched_per_day wins over the touch-rate formula.
double derive_arrival_rate(const SimConfig& cfg, std::optional<double> period_steps = {});

std::string_view to_string(Protocol p);
std::string_view to_string(MotionModel m);

}  // namespace tapesim
