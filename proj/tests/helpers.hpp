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


// Small configs shared by the test files.

#pragma once

#include <string>

#include "tapesim/config.hpp"

namespace testing {

inline const std::string kEnterprise = R"(
num_cartridges = 6720
vertical_dim = 40
cartridge_capacity = 12000000
num_robots = 2
robot_xph = 150
num_drives = 80
drive_rate = 300
mean_load_time = 18
mean_position_time = 50
object_size_fixed = true
object_size_scale = 5000
objects_touched_per_day = 600
num_users = 40
code_n = 6
code_k = 1
protocol = redundant
failure_threshold_steps = 100
drive_fail_prob = 0.01
max_retries = 10
sim_duration = 72
rng_seed = 1
)";

// 10 x (21 x 32) libraries, one robot at 100 xph and 8 drives each.
inline const std::string kRail = R"(
num_cartridges = 672
vertical_dim = 21
cartridge_capacity = 12000000
num_robots = 1
robot_xph = 100
num_drives = 8
drive_rate = 300
object_size_fixed = true
object_size_scale = 5000
objects_touched_per_day = 600
num_users = 40
code_n = 6
code_k = 1
drive_fail_prob = 0.01
num_libraries = 10
sim_duration = 72
)";

// 1 x 2 grid whose every motion is one cell long, so every motion lasts
// 900 / xph seconds. No load or positioning time.
inline const std::string kTiny = R"(
num_cartridges = 2
vertical_dim = 1
cartridge_capacity = 1000000
num_robots = 1
robot_xph = 90
num_drives = 1
drive_rate = 10
mean_load_time = 0
mean_position_time = 0
object_size_fixed = true
object_size_scale = 100
objects_touched_per_day = 1
sim_duration = 1
)";

inline tapesim::SimConfig enterprise(const tapesim::ConfigOverrides& ov = {}) {
    return tapesim::parse_config(kEnterprise, ov);
}
inline tapesim::SimConfig rail(const tapesim::ConfigOverrides& ov = {}) {
    return tapesim::parse_config(kRail, ov);
}
inline tapesim::SimConfig tiny(const tapesim::ConfigOverrides& ov = {}) {
    return tapesim::parse_config(kTiny, ov);
}

}  // namespace testing
