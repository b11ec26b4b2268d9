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

#include "tapesim/geometry.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace tapesim {

LibraryGrid::LibraryGrid(int rows, int cols, std::vector<GridCoord> drive_cells)
    : rows_(rows), cols_(cols), drive_cells_(std::move(drive_cells)) {
    if (rows_ <= 0 || cols_ <= 0) throw std::invalid_argument("grid dimensions must be positive");
    std::set<GridCoord> seen;
    for (const auto& d : drive_cells_) {
        if (!in_bounds(d))
            throw ConfigValidationError("drive_positions", "drive_positions: drive outside the grid");
        if (!seen.insert(d).second)
            throw ConfigValidationError("drive_positions",
                                        "drive_positions: two drives share cell " +
                                            std::to_string(d.row) + ":" + std::to_string(d.col));
    }
}

GridCoord LibraryGrid::cell_of(CartridgeId id) const {
    if (id < 0 || id >= num_cartridges()) throw std::out_of_range("cartridge id out of range");
    return {static_cast<int>(id / cols_), static_cast<int>(id % cols_)};
}

double LibraryGrid::diagonal() const {
    return std::hypot(static_cast<double>(rows_ - 1), static_cast<double>(cols_ - 1));
}

std::vector<GridCoord> layout_drives(DriveLayout layout, int rows, int cols, int num_drives) {
    std::vector<GridCoord> out;
    out.reserve(static_cast<std::size_t>(num_drives));
    if (layout == DriveLayout::TopRight) {
        for (int i = 0; i < num_drives; ++i) out.push_back({i / cols, cols - 1 - i % cols});
        return out;
    }
    if (layout == DriveLayout::Center) {
        // Block of w columns and enough rows, centred on the middle cell.
        int w = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_drives))));
        w = std::max(w, (num_drives + rows - 1) / rows);  // short grids need a wider block
        if (w > cols) w = cols;
        const int h = (num_drives + w - 1) / w;
        const int top = std::max(0, (rows - h) / 2);
        const int left = std::max(0, (cols - w) / 2);
        for (int i = 0; i < num_drives; ++i) out.push_back({top + i / w, left + i % w});
        return out;
    }
    throw std::invalid_argument("explicit drive layout has no generator");
}

LibraryGrid build_grid(const SimConfig& cfg) {
    const int rows = cfg.vertical_dim;
    const int cols = static_cast<int>(cfg.num_cartridges / cfg.vertical_dim);
    auto drives = cfg.drive_layout == DriveLayout::Explicit
                      ? cfg.drive_positions
                      : layout_drives(cfg.drive_layout, rows, cols, cfg.num_drives);
    return LibraryGrid(rows, cols, std::move(drives));
}

double distance(const LibraryGrid& grid, GridCoord a, GridCoord b) {
    if (!grid.in_bounds(a) || !grid.in_bounds(b))
        throw std::out_of_range("grid coordinate out of bounds");
    return std::hypot(static_cast<double>(a.row - b.row), static_cast<double>(a.col - b.col));
}

double mean_pair_distance(int rows, int cols) {
    const double cells = static_cast<double>(rows) * cols;
    if (cells < 2) return 0.0;
    double sum = 0.0;
    for (int dr = 0; dr < rows; ++dr) {
        for (int dc = 0; dc < cols; ++dc) {
            if (dr == 0 && dc == 0) continue;
            // Ordered pairs at this absolute offset, halved for unordered.
            const double ordered = static_cast<double>(rows - dr) * (cols - dc) * (dr ? 2 : 1) *
                                   (dc ? 2 : 1);
            sum += ordered / 2.0 * std::hypot(static_cast<double>(dr), static_cast<double>(dc));
        }
    }
    return sum / (cells * (cells - 1) / 2.0);
}

std::string_view to_string(MotionKind kind) {
    switch (kind) {
        case MotionKind::R2D: return "r2d";
        case MotionKind::D2C: return "d2c";
        case MotionKind::C2C: return "c2c";
        case MotionKind::C2D: return "c2d";
    }
    return "?";
}

MotionTimeModel::MotionTimeModel(const LibraryGrid& grid, double robot_xph) : grid_(grid) {
    if (grid_.drive_cells().empty()) throw std::invalid_argument("motion model needs a drive");
    const auto n = grid_.num_cartridges();
    double sum = 0.0;
    for (const auto& d : grid_.drive_cells())
        for (CartridgeId c = 0; c < n; ++c)
            sum += motion_distance(distance(grid_, grid_.cell_of(c), d));
    cart_drive_mean_ = sum / (static_cast<double>(n) * static_cast<double>(grid_.drive_cells().size()));
    cart_cart_mean_ = n < 2 ? 1.0 : motion_distance(mean_pair_distance(grid_.rows(), grid_.cols()));
    target_mean_ = kSecondsPerHour / (4.0 * robot_xph);
    const double mean_distance_all = (3.0 * cart_drive_mean_ + cart_cart_mean_) / 4.0;
    time_scale_ = target_mean_ / mean_distance_all;
}

MotionTimeModel MotionTimeModel::zero(const LibraryGrid& grid) {
    MotionTimeModel m(grid, 1.0);
    m.time_scale_ = 0.0;
    m.target_mean_ = 0.0;
    return m;
}

double MotionTimeModel::mean_distance(MotionKind kind) const {
    return kind == MotionKind::C2C ? cart_cart_mean_ : cart_drive_mean_;
}

double MotionTimeModel::time_between(GridCoord a, GridCoord b) const {
    return time_scale_ * motion_distance(distance(grid_, a, b));
}

double MotionTimeModel::sample(MotionKind kind, Rng& rng, std::optional<int> drive,
                               std::optional<CartridgeId> cartridge) const {
    const auto n = grid_.num_cartridges();
    auto uniform_cartridge = [&] {
        return static_cast<CartridgeId>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    };
    if (kind == MotionKind::C2C) {
        const CartridgeId target = cartridge ? *cartridge : uniform_cartridge();
        if (n < 2) return time_between(grid_.cell_of(target), grid_.cell_of(target));
        auto source = static_cast<CartridgeId>(uniform_index(rng, static_cast<std::uint64_t>(n - 1)));
        if (source >= target) ++source;
        return time_between(grid_.cell_of(source), grid_.cell_of(target));
    }
    const CartridgeId cart = cartridge ? *cartridge : uniform_cartridge();
    const int d = drive ? *drive
                        : static_cast<int>(uniform_index(
                              rng, static_cast<std::uint64_t>(grid_.drive_cells().size())));
    return time_between(grid_.cell_of(cart), grid_.drive_cell(d));
}

std::vector<std::pair<double, double>> MotionTimeModel::histogram(MotionKind kind, int bins,
                                                                  int samples, Rng& rng) const {
    std::vector<std::pair<double, double>> out;
    if (bins <= 0 || samples <= 0) return out;
    const double top = time_scale_ * std::max(1.0, grid_.diagonal());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (int i = 0; i < samples; ++i) {
        const double t = sample(kind, rng);
        auto b = top > 0 ? static_cast<int>(t / top * bins) : 0;
        if (b >= bins) b = bins - 1;
        ++counts[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < bins; ++b)
        out.emplace_back(top * (b + 1) / bins,
                         static_cast<double>(counts[static_cast<std::size_t>(b)]) / samples);
    return out;
}

}  // namespace tapesim
