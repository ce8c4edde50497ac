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
#ifndef RDEPI_GRID_HPP
#define RDEPI_GRID_HPP

#include "rdepi/core.hpp"

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

namespace rdepi
{

/// Axis-aligned labeled box. In 1D the y bounds are ignored.
struct RegionBox
{
    std::string name;
    double x0{0};
    double x1{0};
    double y0{0};
    double y1{0};

    friend bool operator==(const RegionBox&, const RegionBox&) = default;
};

/**
 * Structured 1D interval [0, Lx] or 2D rectangle [0, Lx] x [0, Ly] with
 * uniform spacing per axis. Nodes are numbered row-major: node = iy * nx + ix.
 *
 * Every node carries a region label. Labels follow the order of the boxes
 * (first containing box wins); nodes covered by no box get a trailing
 * "outside" label. Without boxes all nodes belong to a single region "domain".
 */
class Grid
{
public:
    static Grid line(double extent, Index nodes, std::vector<RegionBox> regions = {});
    static Grid rect(double extent_x, Index nodes_x, double extent_y, Index nodes_y,
                     std::vector<RegionBox> regions = {});

    int dim() const
    {
        return dim_;
    }
    Index nodes_x() const
    {
        return nx_;
    }
    Index nodes_y() const
    {
        return ny_;
    }
    Index size() const
    {
        return nx_ * ny_;
    }
    double extent_x() const
    {
        return lx_;
    }
    double extent_y() const
    {
        return ly_;
    }
    double spacing_x() const
    {
        return hx_;
    }
    double spacing_y() const
    {
        return hy_;
    }
    double min_spacing() const
    {
        return dim_ == 1 ? hx_ : std::min(hx_, hy_);
    }
    /// Sum over active axes of 1/h^2.
    double inverse_spacing_sq_sum() const
    {
        return dim_ == 1 ? 1.0 / (hx_ * hx_) : 1.0 / (hx_ * hx_) + 1.0 / (hy_ * hy_);
    }

    double x(Index ix) const
    {
        return static_cast<double>(ix) * hx_;
    }
    double y(Index iy) const
    {
        return static_cast<double>(iy) * hy_;
    }
    Index node(Index ix, Index iy = 0) const
    {
        return iy * nx_ + ix;
    }
    Index ix(Index node) const
    {
        return node % nx_;
    }
    Index iy(Index node) const
    {
        return node / nx_;
    }

    int region(Index node) const
    {
        return labels_[static_cast<std::size_t>(node)];
    }
    const std::vector<int>& labels() const
    {
        return labels_;
    }
    const std::vector<std::string>& region_names() const
    {
        return region_names_;
    }
    /// -1 if unknown.
    int region_index(const std::string& name) const;
    const std::vector<RegionBox>& region_boxes() const
    {
        return boxes_;
    }
    bool in_box(Index node, const RegionBox& box) const;

    /// Trapezoid quadrature weights (tensor product in 2D).
    const Eigen::ArrayXd& weights() const
    {
        return weights_;
    }

    friend bool operator==(const Grid& a, const Grid& b)
    {
        return a.dim_ == b.dim_ && a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.lx_ == b.lx_ && a.ly_ == b.ly_ &&
               a.boxes_ == b.boxes_;
    }

private:
    Grid() = default;
    void finish();

    int dim_{1};
    Index nx_{0};
    Index ny_{1};
    double lx_{0};
    double ly_{0};
    double hx_{0};
    double hy_{1};
    std::vector<RegionBox> boxes_;
    std::vector<int> labels_;
    std::vector<std::string> region_names_;
    Eigen::ArrayXd weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

} // namespace rdepi

#endif // RDEPI_GRID_HPP
