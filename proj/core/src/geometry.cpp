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

#include "risdiff/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "risdiff/error.hpp"

namespace risdiff {

namespace {

// Overlaps shorter than this (meters) count as grazing contact.
constexpr double kGrazeLength = 1e-9;

std::vector<double> axis_samples(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = 0.5 * (lo + hi);
        return out;
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        out[i] = lo + span * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    out[n - 1] = hi;
    return out;
}

}  // namespace

bool Box3::valid() const noexcept {
    return std::isfinite(min.x) && std::isfinite(min.y) && std::isfinite(min.z) &&
           std::isfinite(max.x) && std::isfinite(max.y) && std::isfinite(max.z) &&
           min.x <= max.x && min.y <= max.y && min.z <= max.z;
}

bool Box3::contains(const Point3& p) const noexcept {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
}

bool Region::valid() const noexcept {
    const auto ok = [](double lo, double hi) {
        return std::isfinite(lo) && std::isfinite(hi) && lo < hi;
    };
    return ok(x_min, x_max) && ok(y_min, y_max) && ok(z_min, z_max);
}

bool Region::contains(const Point3& p, double tol) const noexcept {
    return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol && p.y <= y_max + tol &&
           p.z >= z_min - tol && p.z <= z_max + tol;
}

Point3 Region::center() const noexcept {
    return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max), 0.5 * (z_min + z_max)};
}

Point3 Grid::spacing() const noexcept {
    const auto step = [](double lo, double hi, std::size_t n) {
        return n > 1 ? (hi - lo) / static_cast<double>(n - 1) : 0.0;
    };
    return {step(region.x_min, region.x_max, spec.n_x), step(region.y_min, region.y_max, spec.n_y),
            step(region.z_min, region.z_max, spec.n_z)};
}

double Grid::cell_diagonal() const noexcept {
    const Point3 s = spacing();
    return std::sqrt(s.x * s.x + s.y * s.y + s.z * s.z);
}

Grid build_grid(const Region& region, const GridSpec& spec) {
    if (!region.valid()) {
        throw ConfigError("grid region must have finite bounds with min < max on every axis");
    }
    if (spec.n_x == 0 || spec.n_y == 0 || spec.n_z == 0) {
        throw ConfigError("grid counts must be positive");
    }
    const auto xs = axis_samples(region.x_min, region.x_max, spec.n_x);
    const auto ys = axis_samples(region.y_min, region.y_max, spec.n_y);
    const auto zs = axis_samples(region.z_min, region.z_max, spec.n_z);

    Grid grid{region, spec, {}};
    grid.points.reserve(spec.size());
    for (double x : xs) {
        for (double y : ys) {
            for (double z : zs) {
                grid.points.push_back({x, y, z});
            }
        }
    }
    return grid;
}

double distance(const Point3& p, const Point3& q) noexcept {
    const Point3 d = q - p;
    return std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
}

bool segment_blocked(const Point3& a, const Point3& b, const Box3& box) noexcept {
    // Fixed endpoint order keeps the test exactly symmetric.
    const bool swap_ends = std::tie(b.x, b.y, b.z) < std::tie(a.x, a.y, a.z);
    const Point3& p = swap_ends ? b : a;
    const Point3& q = swap_ends ? a : b;
    const double o[3] = {p.x, p.y, p.z};
    const double d[3] = {q.x - p.x, q.y - p.y, q.z - p.z};
    const double lo[3] = {box.min.x, box.min.y, box.min.z};
    const double hi[3] = {box.max.x, box.max.y, box.max.z};

    // Slab clipping of the parameter interval, restricted to the segment.
    double t_enter = 0.0;
    double t_exit = 1.0;
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < lo[a] || o[a] > hi[a]) {
                return false;
            }
            continue;
        }
        const double inv = 1.0 / d[a];
        double t0 = (lo[a] - o[a]) * inv;
        double t1 = (hi[a] - o[a]) * inv;
        if (t0 > t1) {
            std::swap(t0, t1);
        }
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (t_exit < t_enter) {
            return false;
        }
    }
    const double length = distance(p, q);
    return (t_exit - t_enter) * length > kGrazeLength;
}

bool los_indicator(const Point3& p, const Point3& q, std::span<const Box3> obstacles) noexcept {
    return std::none_of(obstacles.begin(), obstacles.end(),
                        [&](const Box3& box) { return segment_blocked(p, q, box); });
}

}  // namespace risdiff
