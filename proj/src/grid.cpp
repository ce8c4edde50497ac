/*
* Copyright (C) 2026 rdepi contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#include "rdepi/grid.hpp"

#include <cmath>

namespace rdepi
{

namespace
{

std::vector<Diagnostic> check_axis(const char* axis, double extent, Index nodes)
{
    std::vector<Diagnostic> out;
    if (!(std::isfinite(extent) && extent > 0)) {
        out.push_back({std::string("grid.extent_") + axis, "must be finite and > 0"});
    }
    if (nodes < 3) {
        out.push_back({std::string("grid.nodes_") + axis, "must be >= 3"});
    }
    return out;
}

Eigen::ArrayXd trapezoid(Index n, double h)
{
    Eigen::ArrayXd w = Eigen::ArrayXd::Constant(n, h);
    w(0) = w(n - 1) = 0.5 * h;
    return w;
}

} // namespace

Grid Grid::line(double extent, Index nodes, std::vector<RegionBox> regions)
{
    auto errors = check_axis("x", extent, nodes);
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    Grid g;
    g.dim_ = 1;
    g.nx_ = nodes;
    g.ny_ = 1;
    g.lx_ = extent;
    g.ly_ = 0.0;
    g.hx_ = extent / static_cast<double>(nodes - 1);
    g.hy_ = 1.0;
    g.boxes_ = std::move(regions);
    g.finish();
    return g;
}

Grid Grid::rect(double extent_x, Index nodes_x, double extent_y, Index nodes_y, std::vector<RegionBox> regions)
{
    auto errors = check_axis("x", extent_x, nodes_x);
    auto ey = check_axis("y", extent_y, nodes_y);
    errors.insert(errors.end(), ey.begin(), ey.end());
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    Grid g;
    g.dim_ = 2;
    g.nx_ = nodes_x;
    g.ny_ = nodes_y;
    g.lx_ = extent_x;
    g.ly_ = extent_y;
    g.hx_ = extent_x / static_cast<double>(nodes_x - 1);
    g.hy_ = extent_y / static_cast<double>(nodes_y - 1);
    g.boxes_ = std::move(regions);
    g.finish();
    return g;
}

bool Grid::in_box(Index node, const RegionBox& box) const
{
    const double tol_x = 1e-12 * lx_;
    const double px = x(ix(node));
    if (px < box.x0 - tol_x || px > box.x1 + tol_x) {
        return false;
    }
    if (dim_ == 2) {
        const double tol_y = 1e-12 * ly_;
        const double py = y(iy(node));
        if (py < box.y0 - tol_y || py > box.y1 + tol_y) {
            return false;
        }
    }
    return true;
}

int Grid::region_index(const std::string& name) const
{
    for (std::size_t k = 0; k < region_names_.size(); ++k) {
        if (region_names_[k] == name) {
            return static_cast<int>(k);
        }
    }
    return -1;
}

void Grid::finish()
{
    std::vector<Diagnostic> errors;
    for (std::size_t b = 0; b < boxes_.size(); ++b) {
        const auto& box = boxes_[b];
        const std::string path = "grid.regions[" + std::to_string(b) + "]";
        if (box.name.empty() || box.name == "outside") {
            errors.push_back({path + ".name", "must be non-empty and not 'outside'"});
        }
        for (std::size_t other = 0; other < b; ++other) {
            if (boxes_[other].name == box.name) {
                errors.push_back({path + ".name", "duplicate region name '" + box.name + "'"});
            }
        }
        if (!(box.x1 >= box.x0) || (dim_ == 2 && !(box.y1 >= box.y0))) {
            errors.push_back({path, "box bounds must satisfy lower <= upper"});
        }
    }
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }

    const Index n = size();
    labels_.assign(static_cast<std::size_t>(n), -1);
    region_names_.clear();
    if (boxes_.empty()) {
        region_names_.push_back("domain");
        std::fill(labels_.begin(), labels_.end(), 0);
    }
    else {
        for (const auto& box : boxes_) {
            region_names_.push_back(box.name);
        }
        bool uncovered = false;
        for (Index node = 0; node < n; ++node) {
            for (std::size_t b = 0; b < boxes_.size(); ++b) {
                if (in_box(node, boxes_[b])) {
                    labels_[static_cast<std::size_t>(node)] = static_cast<int>(b);
                    break;
                }
            }
            uncovered = uncovered || labels_[static_cast<std::size_t>(node)] < 0;
        }
        if (uncovered) {
            const int outside = static_cast<int>(region_names_.size());
            region_names_.push_back("outside");
            for (auto& label : labels_) {
                if (label < 0) {
                    label = outside;
                }
            }
        }
    }

    const Eigen::ArrayXd wx = trapezoid(nx_, hx_);
    if (dim_ == 1) {
        weights_ = wx;
    }
    else {
        const Eigen::ArrayXd wy = trapezoid(ny_, hy_);
        weights_.resize(n);
        for (Index iy = 0; iy < ny_; ++iy) {
            weights_.segment(iy * nx_, nx_) = wx * wy(iy);
        }
    }
}

} // namespace rdepi
