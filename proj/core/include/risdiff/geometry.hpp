// SPDX-License-Identifier: Apache-2.0
//
// risdiff: generative placement of reconfigurable intelligent surfaces
// Copyright (C) 2026 The risdiff authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace risdiff {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Point3&, const Point3&) = default;
};

inline Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, Point3 a) { return {s * a.x, s * a.y, s * a.z}; }

/// Axis-aligned obstacle. Faces belong to the box (closed set).
struct Box3 {
    Point3 min;
    Point3 max;

    bool valid() const noexcept;
    bool contains(const Point3& p) const noexcept;

    friend bool operator==(const Box3&, const Box3&) = default;
};

/// Deployment region D; every candidate site lies inside it.
struct Region {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    double z_min = 0.0, z_max = 1.0;

    bool valid() const noexcept;
    bool contains(const Point3& p, double tol = 1e-9) const noexcept;
    Point3 center() const noexcept;

    friend bool operator==(const Region&, const Region&) = default;
};

struct GridSpec {
    std::size_t n_x = 1;
    std::size_t n_y = 1;
    std::size_t n_z = 1;

    std::size_t size() const noexcept { return n_x * n_y * n_z; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Candidate sites. Row-major: index = ix * n_y * n_z + iy * n_z + iz
/// (x outermost, z innermost). Every serialized index uses this order.
struct Grid {
    Region region;
    GridSpec spec;
    std::vector<Point3> points;

    std::size_t size() const noexcept { return points.size(); }
    std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const noexcept {
        return ix * spec.n_y * spec.n_z + iy * spec.n_z + iz;
    }
    /// Per-axis spacing; zero along an axis with a single sample.
    Point3 spacing() const noexcept;
    /// Length of one cell diagonal; the default minimum RIS spacing.
    double cell_diagonal() const noexcept;
};

/// Evenly spaced samples including both bounds; a single sample sits at the
/// midpoint. Throws ConfigError on an invalid region or a zero count.
Grid build_grid(const Region& region, const GridSpec& spec);

double distance(const Point3& p, const Point3& q) noexcept;

/// True iff the open segment (p, q) overlaps the closed box over a positive
/// length. Touching the box only at an endpoint does not block, so a user or
/// RIS may sit on an obstacle face.
bool segment_blocked(const Point3& p, const Point3& q, const Box3& box) noexcept;

/// LoS indicator (delta): true when no obstacle blocks the segment.
/// Symmetric in its endpoints.
bool los_indicator(const Point3& p, const Point3& q, std::span<const Box3> obstacles) noexcept;

}  // namespace risdiff
