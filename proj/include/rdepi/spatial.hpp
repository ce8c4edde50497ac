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
#ifndef RDEPI_SPATIAL_HPP
#define RDEPI_SPATIAL_HPP

#include "rdepi/compartment_model.hpp"
#include "rdepi/grid.hpp"

#include <memory>

namespace rdepi
{

/// Compartment densities over a grid, one row per node.
template <typename Scalar = double>
class CompartmentField
{
public:
    using Storage = FieldStorage<Scalar>;

    explicit CompartmentField(GridPtr grid)
        : grid_(std::move(grid))
        , values_(Storage::Zero(grid_->size(), kSlots))
    {
    }

    CompartmentField(GridPtr grid, Storage values)
        : grid_(std::move(grid))
        , values_(std::move(values))
    {
        if (values_.rows() != grid_->size()) {
            throw ValidationError("field", "node count " + std::to_string(values_.rows()) +
                                               " does not match grid size " + std::to_string(grid_->size()));
        }
    }

    const Grid& grid() const
    {
        return *grid_;
    }
    const GridPtr& grid_ptr() const
    {
        return grid_;
    }
    Index nodes() const
    {
        return values_.rows();
    }

    const Storage& values() const
    {
        return values_;
    }
    Storage& values()
    {
        return values_;
    }

    auto compartment(int slot) const
    {
        return values_.col(slot);
    }
    auto compartment(int slot)
    {
        return values_.col(slot);
    }

    NodeState<Scalar> node(Index i) const
    {
        return values_.row(i).transpose().matrix();
    }

    /// N per node (seven live compartments).
    NodeArray<Scalar> live_total() const
    {
        return values_.template leftCols<kLiveSlots>().rowwise().sum();
    }

    friend bool operator==(const CompartmentField& a, const CompartmentField& b)
    {
        return *a.grid_ == *b.grid_ && a.values_.rows() == b.values_.rows() && (a.values_ == b.values_).all();
    }

private:
    GridPtr grid_;
    Storage values_;
};

/// How the diffusion term N * nu * grad^2 u is discretized.
enum class DiffusionForm
{
    /// N_i * nu * (u_{i+1} - 2 u_i + u_{i-1}) / h^2, the nodal stencil.
    kNodal,
    /// nu * (N_{i+1/2} (u_{i+1} - u_i) - N_{i-1/2} (u_i - u_{i-1})) / h^2 with
    /// arithmetic face averages; conserves the trapezoid integral of u.
    kFlux,
};

namespace detail
{

/// Mirror-ghost neighbors: u_{-1} := u_1 and u_{n} := u_{n-2}.
inline Index left_of(Index i)
{
    return i == 0 ? 1 : i - 1;
}
inline Index right_of(Index i, Index n)
{
    return i == n - 1 ? n - 2 : i + 1;
}

inline void require_size(Index size, const Grid& grid)
{
    if (size != grid.size()) {
        throw ValidationError("values", "length " + std::to_string(size) + " does not match grid size " +
                                            std::to_string(grid.size()));
    }
}

} // namespace detail

/**
 * Discrete Laplacian with homogeneous Neumann (mirror ghost) boundaries:
 * the second central difference per axis divided by that axis' squared
 * spacing, summed over axes.
 */
template <typename Derived>
NodeArray<typename Derived::Scalar> laplacian(const Eigen::DenseBase<Derived>& values, const Grid& grid)
{
    using Scalar = typename Derived::Scalar;
    detail::require_size(values.size(), grid);
    const auto& u = values.derived();
    const Index nx = grid.nodes_x();
    const Index ny = grid.nodes_y();
    const Scalar inv_hx2 = Scalar(1) / Scalar(grid.spacing_x() * grid.spacing_x());
    const Scalar inv_hy2 = Scalar(1) / Scalar(grid.spacing_y() * grid.spacing_y());

    NodeArray<Scalar> out(grid.size());
#pragma omp parallel for schedule(static)
    for (Index k = 0; k < grid.size(); ++k) {
        const Index ix = k % nx;
        const Index iy = k / nx;
        const Index row = iy * nx;
        Scalar acc = (u(row + detail::right_of(ix, nx)) - Scalar(2) * u(k) + u(row + detail::left_of(ix))) * inv_hx2;
        if (grid.dim() == 2) {
            acc += (u(detail::right_of(iy, ny) * nx + ix) - Scalar(2) * u(k) + u(detail::left_of(iy) * nx + ix)) *
                   inv_hy2;
        }
        out(k) = acc;
    }
    return out;
}

/**
 * Conservative flux-form diffusion nu * div(N grad u) with face values
 * N_{i+1/2} = (N_i + N_{i+1}) / 2 and mirror ghosts for both u and N.
 * The trapezoid-weighted sum of the result is zero for every u and N.
 */
template <typename DerivedU, typename DerivedN>
NodeArray<typename DerivedU::Scalar> flux_diffusion(const Eigen::DenseBase<DerivedU>& values,
                                                    const Eigen::DenseBase<DerivedN>& total,
                                                    typename DerivedU::Scalar nu, const Grid& grid)
{
    using Scalar = typename DerivedU::Scalar;
    detail::require_size(values.size(), grid);
    detail::require_size(total.size(), grid);
    const auto& u = values.derived();
    const auto& n_tot = total.derived();
    const Index nx = grid.nodes_x();
    const Index ny = grid.nodes_y();
    const Scalar cx = nu / Scalar(grid.spacing_x() * grid.spacing_x());
    const Scalar cy = nu / Scalar(grid.spacing_y() * grid.spacing_y());
    const Scalar half(0.5);

    NodeArray<Scalar> out(grid.size());
#pragma omp parallel for schedule(static)
    for (Index k = 0; k < grid.size(); ++k) {
        const Index ix = k % nx;
        const Index iy = k / nx;
        const Index row = iy * nx;
        const Index r = row + detail::right_of(ix, nx);
        const Index l = row + detail::left_of(ix);
        Scalar acc = cx * (half * (n_tot(k) + n_tot(r)) * (u(r) - u(k)) - half * (n_tot(l) + n_tot(k)) * (u(k) - u(l)));
        if (grid.dim() == 2) {
            const Index t = detail::right_of(iy, ny) * nx + ix;
            const Index b = detail::left_of(iy) * nx + ix;
            acc +=
                cy * (half * (n_tot(k) + n_tot(t)) * (u(t) - u(k)) - half * (n_tot(b) + n_tot(k)) * (u(k) - u(b)));
        }
        out(k) = acc;
    }
    return out;
}

/// How N enters the diffusion coefficient.
template <typename Scalar>
struct PopulationMode
{
    /// When set, N is held at this constant (verification only). Otherwise N is
    /// recomputed from the field the operator is evaluated at.
    std::optional<Scalar> frozen;

    friend bool operator==(const PopulationMode&, const PopulationMode&) = default;
};

template <typename Scalar>
NodeArray<Scalar> population_for(const CompartmentField<Scalar>& field, const PopulationMode<Scalar>& mode)
{
    if (mode.frozen) {
        return NodeArray<Scalar>::Constant(field.nodes(), *mode.frozen);
    }
    return field.live_total();
}

/**
 * Nodal diffusion term N_i * nu * laplacian(u)_i of one compartment, with N
 * taken from the same field (or the frozen constant).
 */
template <typename Scalar>
NodeArray<Scalar> diffusion_term(const CompartmentField<Scalar>& field, int slot, Scalar nu,
                                 const PopulationMode<Scalar>& mode = {})
{
    if (slot < 0 || slot >= kSlots) {
        throw ValidationError("slot", "invalid compartment selector");
    }
    if (!(nu >= Scalar(0))) {
        throw ValidationError("nu", "diffusivity must be >= 0");
    }
    if (nu == Scalar(0)) {
        return NodeArray<Scalar>::Zero(field.nodes());
    }
    return nu * population_for(field, mode) * laplacian(field.compartment(slot), field.grid());
}

/// Trapezoid-consistent integral: sum_i w_i u_i in node order.
template <typename Derived>
typename Derived::Scalar discrete_integral(const Eigen::DenseBase<Derived>& values, const Grid& grid)
{
    using Scalar = typename Derived::Scalar;
    detail::require_size(values.size(), grid);
    const auto& w = grid.weights();
    Scalar acc(0);
    for (Index k = 0; k < grid.size(); ++k) {
        acc += Scalar(w(k)) * values.derived()(k);
    }
    return acc;
}

/// Integral restricted to the nodes of one region (same weights as the full grid).
template <typename Derived>
typename Derived::Scalar region_integral(const Eigen::DenseBase<Derived>& values, const Grid& grid, int region)
{
    using Scalar = typename Derived::Scalar;
    detail::require_size(values.size(), grid);
    const auto& w = grid.weights();
    Scalar acc(0);
    for (Index k = 0; k < grid.size(); ++k) {
        if (grid.region(k) == region) {
            acc += Scalar(w(k)) * values.derived()(k);
        }
    }
    return acc;
}

} // namespace rdepi

#endif // RDEPI_SPATIAL_HPP
