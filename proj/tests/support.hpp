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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>

#include "risdiff/geometry.hpp"

namespace risdiff::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "risdiff-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

enum class SampledLos { clear, blocked, degenerate };

// Point-sampling reference for line of sight, written without the slab
// method. The segment is bisected until each piece either misses the box
// grown by `margin` (clear) or has a sample point inside the box shrunk by
// `margin` (blocked). Pieces shorter than `resolution` that do neither are
// tangent to a face within the margin and make the case degenerate.
inline SampledLos sampled_segment_los(const Point3& p, const Point3& q, const Box3& box,
                                      double margin = 1e-6, double resolution = 1e-8) {
    const Box3 grown{{box.min.x - margin, box.min.y - margin, box.min.z - margin},
                     {box.max.x + margin, box.max.y + margin, box.max.z + margin}};
    const Box3 shrunk{{box.min.x + margin, box.min.y + margin, box.min.z + margin},
                      {box.max.x - margin, box.max.y - margin, box.max.z - margin}};
    const double length = distance(p, q);
    auto at = [&](double s) { return p + s * (q - p); };
    auto strictly_inside = [&](const Point3& x) {
        return shrunk.valid() && x.x > shrunk.min.x && x.x < shrunk.max.x && x.y > shrunk.min.y &&
               x.y < shrunk.max.y && x.z > shrunk.min.z && x.z < shrunk.max.z;
    };
    auto misses = [&](double s0, double s1) {
        const Point3 a = at(s0), b = at(s1);
        return std::max(a.x, b.x) < grown.min.x || std::min(a.x, b.x) > grown.max.x ||
               std::max(a.y, b.y) < grown.min.y || std::min(a.y, b.y) > grown.max.y ||
               std::max(a.z, b.z) < grown.min.z || std::min(a.z, b.z) > grown.max.z;
    };
    bool degenerate = false;
    auto walk = [&](auto&& self, double s0, double s1) -> bool {
        if (misses(s0, s1)) return false;
        const double mid = 0.5 * (s0 + s1);
        if (strictly_inside(at(mid))) return true;
        if ((s1 - s0) * length < resolution) {
            degenerate = true;
            return false;
        }
        return self(self, s0, mid) || self(self, mid, s1);
    };
    if (walk(walk, 0.0, 1.0)) return SampledLos::blocked;
    return degenerate ? SampledLos::degenerate : SampledLos::clear;
}

inline SampledLos sampled_los(const Point3& p, const Point3& q, std::span<const Box3> boxes) {
    bool degenerate = false;
    for (const Box3& box : boxes) {
        const SampledLos r = sampled_segment_los(p, q, box);
        if (r == SampledLos::blocked) return r;
        degenerate = degenerate || r == SampledLos::degenerate;
    }
    return degenerate ? SampledLos::degenerate : SampledLos::clear;
}

}  // namespace risdiff::testing
