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

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "tapesim/config.hpp"

namespace tapesim {

inline constexpr Step kNoStep = -1;

/// Identifies one fragment (or copy) of one data block; printed "block.fragment".
struct MessageId {
    std::int64_t block = 0;
    int fragment = 1;

    std::string str() const { return std::to_string(block) + "." + std::to_string(fragment); }

    /// Inverse of str(). Throws std::invalid_argument on malformed input.
    static MessageId parse(std::string_view text);

    auto operator<=>(const MessageId&) const = default;
};

enum class QueueId { DR, R };

inline std::string_view to_string(QueueId q) { return q == QueueId::DR ? "DR" : "R"; }

/// One row of the event trace.
///
/// Column mapping onto request checkpoints:
///   Q_in     Q-in        entry placed on the queue
///   Q_out    Q-out       entry leaves the queue (robot and drive reserved)
///   D_in     DR-in       cartridge inserted into the drive
///   D_out    DR-out      drive released back to the pool
///   Data_out Data-access requested data read (empty when the read failed)
/// For R rows (drive waiting for a robot to shelve its cartridge) D_in equals
/// Q_out, D_out is the instant the cartridge is home, and Data_out is empty.
struct TraceRecord {
    QueueId queue = QueueId::DR;
    MessageId mid;
    Step q_in = kNoStep;
    Step d_in = kNoStep;
    Step q_out = kNoStep;
    Step d_out = kNoStep;
    std::int64_t q_len = 0;
    Step data_out = kNoStep;

    bool operator==(const TraceRecord&) const = default;
};

}  // namespace tapesim
