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

#include "tapesim/redundancy.hpp"

namespace tapesim {

Codeword make_codeword(std::int64_t block, const SimConfig& cfg, std::vector<CartridgeId> homes,
                       Step timestamp) {
    Codeword cw;
    cw.block = block;
    cw.n = cfg.code_n;
    cw.k = cfg.code_k;
    cw.systematic = cfg.systematic;
    cw.homes = std::move(homes);
    cw.timestamp = timestamp;
    return cw;
}

std::vector<int> dispatch_redundant(Codeword& cw, int s) {
    if (s < cw.k || s > cw.n) throw std::invalid_argument("dispatch count outside [k, n]");
    std::vector<int> out;
    for (int i = 1; i <= s; ++i) out.push_back(i);
    cw.dispatched.insert(cw.dispatched.end(), out.begin(), out.end());
    return out;
}

std::vector<int> dispatch_failure(Codeword& cw, Rng& rng) {
    // Partial Fisher-Yates over 1..n.
    std::vector<int> pool(static_cast<std::size_t>(cw.n));
    for (int i = 0; i < cw.n; ++i) pool[static_cast<std::size_t>(i)] = i + 1;
    for (int i = 0; i < cw.k; ++i) {
        const auto j = static_cast<std::size_t>(i) +
                       uniform_index(rng, static_cast<std::uint64_t>(cw.n - i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    std::vector<int> out(pool.begin(), pool.begin() + cw.k);
    std::sort(out.begin(), out.end());
    cw.dispatched.insert(cw.dispatched.end(), out.begin(), out.end());
    return out;
}

bool record_completion(Codeword& cw, int fragment) {
    const bool before = cw.complete();
    cw.completed.push_back(fragment);
    return !before && cw.complete();
}

std::optional<int> record_failure(Codeword& cw, int fragment, Protocol protocol, Rng& rng) {
    cw.failed.push_back(fragment);
    if (cw.complete() || cw.unrecoverable) return std::nullopt;

    if (protocol == Protocol::Redundant) {
        const auto can_succeed = static_cast<int>(cw.dispatched.size() - cw.failed.size());
        if (can_succeed < cw.k) cw.unrecoverable = true;
        return std::nullopt;
    }

    ++cw.replacements;
    if (cw.replacements > cw.n - cw.k) {
        cw.unrecoverable = true;
        return std::nullopt;
    }
    std::vector<int> unused;
    for (int i = 1; i <= cw.n; ++i)
        if (!cw.was_dispatched(i)) unused.push_back(i);
    if (unused.empty()) {
        cw.unrecoverable = true;
        return std::nullopt;
    }
    const int pick = unused[uniform_index(rng, unused.size())];
    cw.dispatched.push_back(pick);
    return pick;
}

double decode_latency_penalty(const Codeword& cw, double decode_seconds) {
    if (!cw.systematic) return decode_seconds;
    const int used = std::min<int>(cw.k, static_cast<int>(cw.completed.size()));
    for (int i = 0; i < used; ++i)
        if (cw.completed[static_cast<std::size_t>(i)] > cw.k) return decode_seconds;
    return 0.0;
}

}  // namespace tapesim
