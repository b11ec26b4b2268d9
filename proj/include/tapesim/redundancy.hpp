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

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tapesim/config.hpp"
#include "tapesim/geometry.hpp"
#include "tapesim/random.hpp"

namespace tapesim {

/// Raised when fewer than k fragments of an object can ever be read.
class UnrecoverableObject : public std::runtime_error {
public:
    explicit UnrecoverableObject(std::int64_t block)
        : std::runtime_error("unable to retrieve the data object " + std::to_string(block)), block_(block) {}
    std::int64_t block() const noexcept { return block_; }

private:
    std::int64_t block_;
};

/// Fragment bookkeeping for one (n, k) coded object. Fragment indices run
/// 1..n; with a systematic code 1..k hold the raw data.
struct Codeword {
    std::int64_t block = 0;
    int n = 1;
    int k = 1;
    bool systematic = true;
    std::vector<CartridgeId> homes;  // home of fragment i at homes[i-1]
    Step timestamp = 0;              // Data-in

    std::vector<int> dispatched;  // in dispatch order
    std::vector<int> completed;   // in completion order
    std::vector<int> failed;      // timed out or read error
    int replacements = 0;         // t, cumulative
    bool unrecoverable = false;

    bool complete() const { return static_cast<int>(completed.size()) >= k; }
    bool was_dispatched(int fragment) const {
        return std::find(dispatched.begin(), dispatched.end(), fragment) != dispatched.end();
    }
    /// Fragments out for service that have neither completed nor failed.
    int outstanding() const {
        return static_cast<int>(dispatched.size() - completed.size() - failed.size());
    }
};

Codeword make_codeword(std::int64_t block, const SimConfig& cfg, std::vector<CartridgeId> homes,
                       Step timestamp);

/// Fragments 1..s, in index order.
std::vector<int> dispatch_redundant(Codeword& cw, int s);

/// A uniformly random k-subset of 1..n, ascending.
std::vector<int> dispatch_failure(Codeword& cw, Rng& rng);

/// Records a successful read. Returns true when this read completes the
/// object (the k-th success).
bool record_completion(Codeword& cw, int fragment);

/// Records a timeout or read error. Under the Failure protocol this draws a
/// replacement index from those never dispatched; cumulative replacements
/// beyond n - k make the object unrecoverable. Under the Redundant protocol
/// no replacement is issued and the object is unrecoverable once fewer than
/// k dispatched fragments can still succeed. Returns the replacement index.
std::optional<int> record_failure(Codeword& cw, int fragment, Protocol protocol, Rng& rng);

/// Seconds of decoding added to the object latency: non-systematic codes
/// always decode, systematic codes only when a parity fragment was used.
double decode_latency_penalty(const Codeword& cw, double decode_seconds);

/// The k-th smallest element (k is 1-based).
template <typename T>
T kth_smallest(std::vector<T> values, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > values.size())
        throw std::out_of_range("kth_smallest: k outside 1..size");
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
    return values[static_cast<std::size_t>(k - 1)];
}

}  // namespace tapesim
