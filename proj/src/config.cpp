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

#include "tapesim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace tapesim {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

[[noreturn]] void bad_value(const std::string& key, std::string_view value, const char* expected) {
    throw ConfigParseError(key, "config key '" + key + "': cannot parse '" + std::string(value) +
                                    "' as " + expected);
}

double parse_double(const std::string& key, std::string_view v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
        bad_value(key, v, "a real number");
    return out;
}

template <typename Int>
Int parse_int(const std::string& key, std::string_view v) {
    Int out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
    return out;
}

bool parse_bool(const std::string& key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, v, "a boolean");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct KeySpec {
    std::string name;
    bool mandatory;
    std::function<void(SimConfig&, const std::string&, std::string_view)> set;
    std::function<std::string(const SimConfig&)> get;
};

template <typename T>
KeySpec real_key(std::string name, bool mandatory, T SimConfig::*field) {
    return {std::move(name), mandatory,
            [field](SimConfig& c, const std::string& k, std::string_view v) {
                c.*field = parse_double(k, v);
            },
            [field](const SimConfig& c) { return format_double(c.*field); }};
}

template <typename T>
KeySpec int_key(std::string name, bool mandatory, T SimConfig::*field) {
    return {std::move(name), mandatory,
            [field](SimConfig& c, const std::string& k, std::string_view v) {
                c.*field = parse_int<T>(k, v);
            },
            [field](const SimConfig& c) { return std::to_string(c.*field); }};
}

KeySpec bool_key(std::string name, bool SimConfig::*field) {
    return {std::move(name), false,
            [field](SimConfig& c, const std::string& k, std::string_view v) {
                c.*field = parse_bool(k, v);
            },
            [field](const SimConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = [] {
        std::vector<KeySpec> t;
        t.push_back(int_key("num_cartridges", true, &SimConfig::num_cartridges));
        t.push_back(int_key("vertical_dim", true, &SimConfig::vertical_dim));
        t.push_back(
            {"drive_positions", false,
             [](SimConfig& c, const std::string& k, std::string_view v) {
                 c.drive_positions.clear();
                 if (v == "top_right") {
                     c.drive_layout = DriveLayout::TopRight;
                 } else if (v == "center") {
                     c.drive_layout = DriveLayout::Center;
                 } else {
                     c.drive_layout = DriveLayout::Explicit;
                     for (auto item : split(v, ';')) {
                         if (item.empty()) continue;
                         const auto parts = split(item, ':');
                         if (parts.size() != 2) bad_value(k, item, "row:col");
                         c.drive_positions.push_back(
                             {parse_int<int>(k, parts[0]), parse_int<int>(k, parts[1])});
                     }
                 }
             },
             [](const SimConfig& c) -> std::string {
                 switch (c.drive_layout) {
                     case DriveLayout::TopRight: return "top_right";
                     case DriveLayout::Center: return "center";
                     case DriveLayout::Explicit: break;
                 }
                 std::string out;
                 for (const auto& p : c.drive_positions) {
                     if (!out.empty()) out += ';';
                     out += std::to_string(p.row) + ':' + std::to_string(p.col);
                 }
                 return out;
             }});
        t.push_back(real_key("cartridge_capacity", true, &SimConfig::cartridge_capacity));
        t.push_back(real_key("fill_ratio", false, &SimConfig::fill_ratio));
        t.push_back(int_key("num_robots", true, &SimConfig::num_robots));
        t.push_back(int_key("num_drives", true, &SimConfig::num_drives));
        t.push_back(real_key("robot_xph", true, &SimConfig::robot_xph));
        t.push_back(real_key("drive_rate", true, &SimConfig::drive_rate));
        t.push_back(real_key("mean_load_time", false, &SimConfig::mean_load_time));
        t.push_back(real_key("mean_position_time", false, &SimConfig::mean_position_time));
        t.push_back({"motion_model", false,
                     [](SimConfig& c, const std::string& k, std::string_view v) {
                         if (v == "geometry") c.motion_model = MotionModel::Geometry;
                         else if (v == "zero") c.motion_model = MotionModel::Zero;
                         else bad_value(k, v, "geometry|zero");
                     },
                     [](const SimConfig& c) { return std::string(to_string(c.motion_model)); }});
        t.push_back(bool_key("balanced_robots", &SimConfig::balanced_robots));
        t.push_back(bool_key("deferred_dismount", &SimConfig::deferred_dismount));
        t.push_back(bool_key("dr_priority", &SimConfig::dr_priority));
        t.push_back(bool_key("robot_rate_cap", &SimConfig::robot_rate_cap));
        t.push_back(real_key("object_size_shape", false, &SimConfig::object_size_shape));
        t.push_back(real_key("object_size_scale", false, &SimConfig::object_size_scale));
        t.push_back(bool_key("object_size_fixed", &SimConfig::object_size_fixed));
        t.push_back(real_key("aotr", false, &SimConfig::aotr));
        t.push_back({"objects_touched_per_day", false,
                     [](SimConfig& c, const std::string& k, std::string_view v) {
                         if (v == "none" || v.empty()) c.objects_touched_per_day.reset();
                         else c.objects_touched_per_day = parse_double(k, v);
                     },
                     [](const SimConfig& c) {
                         return c.objects_touched_per_day ? format_double(*c.objects_touched_per_day)
                                                          : std::string("none");
                     }});
        t.push_back(int_key("num_users", false, &SimConfig::num_users));
        t.push_back({"user_weights", false,
                     [](SimConfig& c, const std::string& k, std::string_view v) {
                         c.user_weights.clear();
                         if (v.empty() || v == "uniform") return;
                         for (auto item : split(v, ','))
                             c.user_weights.push_back(parse_double(k, item));
                     },
                     [](const SimConfig& c) {
                         if (c.user_weights.empty()) return std::string("uniform");
                         std::string out;
                         for (double w : c.user_weights) {
                             if (!out.empty()) out += ',';
                             out += format_double(w);
                         }
                         return out;
                     }});
        t.push_back(real_key("read_fraction", false, &SimConfig::read_fraction));
        t.push_back(real_key("collocation_threshold", false, &SimConfig::collocation_threshold));
        t.push_back(int_key("code_n", false, &SimConfig::code_n));
        t.push_back(int_key("code_k", false, &SimConfig::code_k));
        t.push_back({"dispatch_count", false,
                     [](SimConfig& c, const std::string& k, std::string_view v) {
                         if (v == "auto" || v.empty()) c.dispatch_count.reset();
                         else c.dispatch_count = parse_int<int>(k, v);
                     },
                     [](const SimConfig& c) {
                         return c.dispatch_count ? std::to_string(*c.dispatch_count)
                                                 : std::string("auto");
                     }});
        t.push_back({"protocol", false,
                     [](SimConfig& c, const std::string& k, std::string_view v) {
                         if (v == "redundant") c.protocol = Protocol::Redundant;
                         else if (v == "failure") c.protocol = Protocol::Failure;
                         else bad_value(k, v, "redundant|failure");
                     },
                     [](const SimConfig& c) { return std::string(to_string(c.protocol)); }});
        t.push_back(bool_key("systematic", &SimConfig::systematic));
        t.push_back(real_key("decode_seconds", false, &SimConfig::decode_seconds));
        t.push_back(int_key("failure_threshold_steps", false, &SimConfig::failure_threshold_steps));
        t.push_back(real_key("drive_fail_prob", false, &SimConfig::drive_fail_prob));
        t.push_back(int_key("max_retries", false, &SimConfig::max_retries));
        t.push_back(int_key("num_libraries", false, &SimConfig::num_libraries));
        t.push_back(real_key("step_seconds", false, &SimConfig::step_seconds));
        t.push_back(real_key("sim_duration", false, &SimConfig::sim_duration));
        t.push_back(int_key("rng_seed", false, &SimConfig::rng_seed));
        return t;
    }();
    return table;
}

const KeySpec* find_key(std::string_view name) {
    for (const auto& k : key_table())
        if (k.name == name) return &k;
    return nullptr;
}

std::string resolve_alias(std::string_view key) {
    // Short spellings accepted in documents and on the command line.
    static const std::map<std::string, std::string, std::less<>> aliases = {
        {"threshold", "failure_threshold_steps"},
        {"seed", "rng_seed"},
        {"libraries", "num_libraries"},
    };
    if (auto it = aliases.find(key); it != aliases.end()) return it->second;
    return std::string(key);
}

void check(bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigValidationError(field, std::string(field) + ": " + what);
}

}  // namespace

double SimConfig::mean_object_size() const {
    if (object_size_fixed) return object_size_scale;
    return object_size_scale * std::tgamma(1.0 + 1.0 / object_size_shape);
}

Step SimConfig::horizon_steps() const {
    return static_cast<Step>(std::llround(sim_duration * kSecondsPerHour / step_seconds));
}

Step SimConfig::steps_per_hour() const {
    return std::max<Step>(1, static_cast<Step>(std::llround(kSecondsPerHour / step_seconds)));
}

Step SimConfig::to_steps(double seconds) const {
    if (seconds <= 0.0) return 0;
    const double raw = seconds / step_seconds;
    // Durations that are whole multiples of the step must not round up.
    return static_cast<Step>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& k : key_table()) out.push_back(k.name);
        return out;
    }();
    return keys;
}

SimConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
    std::map<std::string, std::string, std::less<>> values;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigParseError("", "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = resolve_alias(trim(line.substr(0, eq)));
        if (!find_key(key))
            throw ConfigParseError(key, "line " + std::to_string(line_no) + ": unknown config key '" +
                                            key + "'");
        if (values.count(key))
            throw ConfigParseError(key, "line " + std::to_string(line_no) + ": duplicate key '" +
                                            key + "'");
        values[key] = std::string(trim(line.substr(eq + 1)));
    }
    for (const auto& [raw_key, value] : overrides) {
        const std::string key = resolve_alias(raw_key);
        if (!find_key(key)) throw ConfigParseError(key, "unknown config key '" + key + "'");
        values[key] = value;
    }

    SimConfig cfg;
    for (const auto& spec : key_table()) {
        auto it = values.find(spec.name);
        if (it == values.end()) {
            if (spec.mandatory)
                throw ConfigParseError(spec.name, "missing mandatory config key '" + spec.name + "'");
            continue;
        }
        spec.set(cfg, spec.name, it->second);
    }
    validate(cfg);
    return cfg;
}

SimConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

std::string serialize_config(const SimConfig& cfg) {
    std::string out;
    for (const auto& spec : key_table()) out += spec.name + " = " + spec.get(cfg) + "\n";
    return out;
}

std::string canonical_key(std::string_view key) {
    std::string name = resolve_alias(key);
    if (!find_key(name)) throw ConfigParseError(std::string(key), "unknown config key '" + std::string(key) + "'");
    return name;
}

SimConfig with_override(const SimConfig& cfg, const std::string& key, const std::string& value) {
    return parse_config(serialize_config(cfg), {{key, value}});
}

void validate(const SimConfig& c) {
    check(c.num_cartridges > 0, "num_cartridges", "must be positive");
    check(c.vertical_dim > 0, "vertical_dim", "must be positive");
    check(c.num_cartridges % c.vertical_dim == 0, "vertical_dim",
          "num_cartridges (" + std::to_string(c.num_cartridges) + ") is not divisible by " +
              std::to_string(c.vertical_dim));
    check(c.cartridge_capacity > 0, "cartridge_capacity", "must be positive");
    check(c.fill_ratio > 0 && c.fill_ratio <= 1, "fill_ratio", "must lie in (0, 1]");
    check(c.num_robots > 0, "num_robots", "must be positive");
    check(c.num_drives > 0, "num_drives", "must be positive");
    check(c.robot_xph > 0, "robot_xph", "must be positive");
    check(c.drive_rate > 0, "drive_rate", "must be positive");
    check(c.mean_load_time >= 0, "mean_load_time", "must be nonnegative");
    check(c.mean_position_time >= 0, "mean_position_time", "must be nonnegative");
    check(c.object_size_shape > 0, "object_size_shape", "must be positive");
    check(c.object_size_scale > 0, "object_size_scale", "must be positive");
    check(c.aotr > 0, "aotr", "must be positive");
    check(!c.objects_touched_per_day || *c.objects_touched_per_day > 0, "objects_touched_per_day",
          "must be positive");
    check(c.num_users > 0, "num_users", "must be positive");
    if (!c.user_weights.empty()) {
        check(c.user_weights.size() == static_cast<std::size_t>(c.num_users), "user_weights",
              "needs one weight per user");
        check(std::all_of(c.user_weights.begin(), c.user_weights.end(),
                          [](double w) { return w > 0; }),
              "user_weights", "weights must be positive");
    }
    check(c.read_fraction >= 0 && c.read_fraction <= 1, "read_fraction", "must lie in [0, 1]");
    check(c.collocation_threshold >= 0, "collocation_threshold", "must be nonnegative");
    check(c.code_k >= 1, "code_k", "must be at least 1");
    check(c.code_n >= c.code_k, "code_n",
          "requires n >= k (n=" + std::to_string(c.code_n) + ", k=" + std::to_string(c.code_k) + ")");
    check(c.effective_dispatch() >= c.code_k && c.effective_dispatch() <= c.code_n,
          "dispatch_count", "requires k <= dispatch_count <= n");
    check(c.decode_seconds >= 0, "decode_seconds", "must be nonnegative");
    check(c.failure_threshold_steps > 0, "failure_threshold_steps", "must be positive");
    check(c.drive_fail_prob >= 0 && c.drive_fail_prob < 1, "drive_fail_prob", "must lie in [0, 1)");
    check(c.max_retries > 0, "max_retries", "must be positive");
    check(c.num_libraries >= 1, "num_libraries", "must be at least 1");
    check(c.step_seconds > 0, "step_seconds", "must be positive");
    check(c.sim_duration > 0, "sim_duration", "must be positive");
    check(c.horizon_steps() > 0, "sim_duration", "shorter than one step");
    if (c.motion_model == MotionModel::Geometry)
        check(kSecondsPerHour / (4.0 * c.robot_xph) >= c.step_seconds, "step_seconds",
              "one robot motion (3600/(4*xph) s) must span at least one step");

    const int rows = c.vertical_dim;
    const auto cols = c.num_cartridges / c.vertical_dim;
    check(c.num_drives <= c.num_cartridges, "num_drives", "more drives than grid cells");
    if (c.drive_layout == DriveLayout::Explicit) {
        check(c.drive_positions.size() == static_cast<std::size_t>(c.num_drives), "drive_positions",
              "needs exactly num_drives coordinates");
        std::set<GridCoord> seen;
        for (const auto& p : c.drive_positions) {
            check(p.row >= 0 && p.row < rows && p.col >= 0 && p.col < cols, "drive_positions",
                  "coordinate " + std::to_string(p.row) + ":" + std::to_string(p.col) +
                      " outside the grid");
            check(seen.insert(p).second, "drive_positions",
                  "duplicate coordinate " + std::to_string(p.row) + ":" + std::to_string(p.col));
        }
    }

    // One fragment must fit on the filled part of a cartridge, and within a
    // single library the n fragments of a codeword need n distinct cartridges.
    check(c.mean_object_size() / c.code_k <= c.cartridge_capacity * c.fill_ratio,
          "cartridge_capacity", "a fragment does not fit in the filled part of one cartridge");
    if (c.num_libraries == 1)
        check(c.code_n <= c.num_cartridges, "code_n", "needs n distinct cartridges");
    else
        check(c.effective_dispatch() <= c.num_libraries && c.code_n <= c.num_libraries,
              "num_libraries", "fragments go to distinct libraries, so n must not exceed N");
}

double touch_rate(std::int64_t num_cartridges, double cartridge_capacity, double fill_ratio,
                  double aotr, int code_k, int code_n, double mean_object_size, double period) {
    return static_cast<double>(num_cartridges) * cartridge_capacity * fill_ratio * aotr *
           static_cast<double>(code_k) /
           (static_cast<double>(code_n) * mean_object_size * period);
}

double derive_arrival_rate(const SimConfig& cfg, std::optional<double> period_steps) {
    if (cfg.objects_touched_per_day)
        return *cfg.objects_touched_per_day * cfg.step_seconds / kSecondsPerDay;
    const double period = period_steps.value_or(kSecondsPerYear / cfg.step_seconds);
    return touch_rate(cfg.num_cartridges, cfg.cartridge_capacity, cfg.fill_ratio, cfg.aotr,
                      cfg.code_k, cfg.code_n, cfg.mean_object_size(), period);
}

std::string_view to_string(Protocol p) {
    return p == Protocol::Redundant ? "redundant" : "failure";
}

std::string_view to_string(MotionModel m) {
    return m == MotionModel::Geometry ? "geometry" : "zero";
}

}  // namespace tapesim
