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
 * @file geometry.hpp
 * @brief Planar rack layout and robot motion times.
 *
 * Cartridges fill every cell of a rows x cols grid with unit spacing. Drives
 * sit at grid coordinates on the drive wall in front of the rack, so they do
 * not take cartridge slots. A robot travels in a straight line at constant
 * speed; the speed (time_scale, seconds per unit distance) is calibrated so
 * the mean single motion lasts 3600 / (4 * xph) seconds.
 *
 * Only planar layouts are modelled. A cuboid layout would replace
 * LibraryGrid::cell_of and the pair-offset sums in mean_pair_distance.
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tapesim/config.hpp"
#include "tapesim/random.hpp"

namespace tapesim {

using CartridgeId = std::int64_t;

class LibraryGrid {
public:
    LibraryGrid(int rows, int cols, std::vector<GridCoord> drive_cells);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::int64_t num_cartridges() const { return static_cast<std::int64_t>(rows_) * cols_; }
    std::span<const GridCoord> drive_cells() const { return drive_cells_; }
    GridCoord drive_cell(int drive) const { return drive_cells_.at(static_cast<std::size_t>(drive)); }

    /// Home cell of a cartridge. Cartridges are numbered row-major.
    GridCoord cell_of(CartridgeId id) const;
    bool in_bounds(GridCoord c) const {
        return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_;
    }

    double diagonal() const;

private:
    int rows_;
    int cols_;
    std::vector<GridCoord> drive_cells_;
};

/// Grid of size vertical_dim x (NoC / vertical_dim) with drives placed by the
/// configured layout.
LibraryGrid build_grid(const SimConfig& cfg);

/// Drive coordinates for a named layout. TopRight fills the top row from the
/// right edge leftwards, wrapping downwards; Center fills a near-square block
/// around the grid centre.
std::vector<GridCoord> layout_drives(DriveLayout layout, int rows, int cols, int num_drives);

/// Euclidean distance in cell units. Throws std::out_of_range if either
/// coordinate lies outside `grid`.
double distance(const LibraryGrid& grid, GridCoord a, GridCoord b);

/// Mean Euclidean distance over all unordered pairs of distinct cells of a
/// rows x cols grid, summed by offset rather than by pair.
double mean_pair_distance(int rows, int cols);

enum class MotionKind { R2D, D2C, C2C, C2D };

inline constexpr std::array<MotionKind, 4> kExchangeMotions = {MotionKind::R2D, MotionKind::D2C,
                                                               MotionKind::C2C, MotionKind::C2D};

std::string_view to_string(MotionKind kind);

/// Travel distance of one motion. A robot always has to reach into a slot or
/// drive, so no motion is shorter than one cell.
inline double motion_distance(double euclidean) { return euclidean < 1.0 ? 1.0 : euclidean; }

class MotionTimeModel {
public:
    /// Calibrates against `grid` so the mean motion time, averaged over the
    /// four exchange motions with uniform endpoints, is 3600 / (4 * robot_xph).
    MotionTimeModel(const LibraryGrid& grid, double robot_xph);

    /// Model whose every motion takes zero time.
    static MotionTimeModel zero(const LibraryGrid& grid);

    const LibraryGrid& grid() const { return grid_; }
    double time_scale() const { return time_scale_; }
    double target_mean() const { return target_mean_; }

    /// Expected motion distance of one kind under uniform endpoints.
    double mean_distance(MotionKind kind) const;

    /// Exact expected motion time of one kind.
    double mean_time(MotionKind kind) const { return time_scale_ * mean_distance(kind); }

    /// Draws one motion time. Cartridge endpoints are uniform over the grid
    /// (C2C uses two distinct cells); the drive endpoint is uniform over the
    /// configured drives unless `drive` pins it, and `cartridge` pins the
    /// cartridge end of R2D, D2C and C2D or the target of C2C.
    double sample(MotionKind kind, Rng& rng, std::optional<int> drive = {},
                  std::optional<CartridgeId> cartridge = {}) const;

    /// Time for an explicit trip.
    double time_between(GridCoord a, GridCoord b) const;

    /// Empirical histogram of one motion kind: `bins` equal-width distance
    /// bins from 0 to the grid diagonal, estimated from `samples` draws.
    /// Returns (bin upper edge in seconds, probability).
    std::vector<std::pair<double, double>> histogram(MotionKind kind, int bins, int samples,
                                                     Rng& rng) const;

private:
    LibraryGrid grid_;
    double cart_drive_mean_ = 0.0;
    double cart_cart_mean_ = 0.0;
    double time_scale_ = 0.0;
    double target_mean_ = 0.0;
};

}  // namespace tapesim
