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
#include "rdepi/integrators.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace rdepi
{

StepBound max_stable_dt(const RhsConfig<double>& cfg, const CompartmentField<double>& field, double alpha,
                        double horizon_cap, Integrator integrator)
{
    if (!(std::isfinite(horizon_cap) && horizon_cap > 0)) {
        throw ValidationError("horizon_cap", "must be finite and > 0");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    StepBound out;
    out.alpha = alpha;
    out.alpha_term = alpha > std::numeric_limits<double>::min() ? 1.0 / alpha : inf;
    out.cap = horizon_cap;

    const double nu_max = cfg.model == ModelKind::kCovid7 ? cfg.params.max_diffusivity() : 0.0;
    const double n_max = cfg.population.frozen ? *cfg.population.frozen : field.live_total().maxCoeff();
    const double extent = real_axis_extent(integrator);
    const double spectral = 4.0 * n_max * nu_max * field.grid().inverse_spacing_sq_sum();
    out.cfl_term = (spectral > 0 && std::isfinite(extent)) ? extent / spectral : inf;

    out.bound = std::min({out.alpha_term, out.cfl_term, out.cap});
    return out;
}

namespace
{

int color_of(const Grid& grid, Index node)
{
    const int cx = static_cast<int>(grid.ix(node) % 3);
    return grid.dim() == 1 ? cx : cx + 3 * static_cast<int>(grid.iy(node) % 3);
}

/// Stencil neighborhood of a node, itself included.
std::array<Index, 5> neighborhood(const Grid& grid, Index node)
{
    const Index nx = grid.nodes_x();
    const Index ix = grid.ix(node);
    const Index iy = grid.iy(node);
    std::array<Index, 5> out{node, iy * nx + detail::left_of(ix), iy * nx + detail::right_of(ix, nx), node, node};
    if (grid.dim() == 2) {
        out[3] = detail::left_of(iy) * nx + ix;
        out[4] = detail::right_of(iy, grid.nodes_y()) * nx + ix;
    }
    return out;
}

/// Uniform in [-1, 1) from the top 53 bits; identical across standard libraries.
double unit_symmetric(std::mt19937_64& gen)
{
    return 2.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53 - 1.0;
}

struct PowerResult
{
    double lambda{0};
    int iterations{0};
    bool converged{false};
};

PowerResult largest_eigenvalue(const Eigen::SparseMatrix<double>& sym, const AlphaOptions& options)
{
    const Index n = sym.rows();
    double radius = 0.0;
    for (Index r = 0; r < sym.outerSize(); ++r) {
        double row_sum = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(sym, r); it; ++it) {
            row_sum += std::abs(it.value());
        }
        radius = std::max(radius, row_sum);
    }
    if (radius == 0.0) {
        return {0.0, 0, true};
    }

    std::mt19937_64 gen(options.seed);
    Eigen::VectorXd x(n);
    for (Index k = 0; k < n; ++k) {
        x(k) = unit_symmetric(gen);
    }
    x.normalize();

    // sym + radius*I is positive semidefinite, so its dominant eigenvalue is
    // lambda_max(sym) + radius.
    double lambda = 0.0;
    PowerResult out;
    for (int it = 1; it <= options.max_iterations; ++it) {
        Eigen::VectorXd y = sym * x + radius * x;
        const double rq = x.dot(y);
        const double norm = y.norm();
        if (norm == 0.0) {
            return {-radius, it, true};
        }
        x = y / norm;
        out.iterations = it;
        if (it > 1 && std::abs(rq - lambda) <= options.tolerance * radius) {
            lambda = rq;
            out.converged = true;
            break;
        }
        lambda = rq;
    }
    out.lambda = lambda - radius;
    return out;
}

} // namespace

Eigen::SparseMatrix<double> weighted_symmetric_jacobian(const RhsConfig<double>& cfg,
                                                        const CompartmentField<double>& state)
{
    const Grid& grid = state.grid();
    const Index nodes = grid.size();
    const Index n = nodes * kSlots;
    const int colors = grid.dim() == 1 ? 3 : 9;
    const auto& y = state.values();
    const double eps = 1e-2 * std::max(1.0, y.abs().maxCoeff());

    std::vector<Eigen::Triplet<double>> triplets;
    for (int color = 0; color < colors; ++color) {
        for (int slot = 0; slot < kSlots; ++slot) {
            FieldStorage<double> dir = FieldStorage<double>::Zero(nodes, kSlots);
            bool any = false;
            for (Index node = 0; node < nodes; ++node) {
                if (color_of(grid, node) == color) {
                    dir(node, slot) = 1.0;
                    any = true;
                }
            }
            if (!any) {
                continue;
            }
            const FieldStorage<double> plus = y + eps * dir;
            const FieldStorage<double> minus = y - eps * dir;
            const FieldStorage<double> jv =
                (full_rhs(0.0, plus, grid, cfg) - full_rhs(0.0, minus, grid, cfg)) / (2.0 * eps);
            for (Index node = 0; node < nodes; ++node) {
                Index column_node = -1;
                for (Index candidate : neighborhood(grid, node)) {
                    if (color_of(grid, candidate) == color) {
                        column_node = candidate;
                        break;
                    }
                }
                if (column_node < 0) {
                    continue;
                }
                const double scale = std::sqrt(grid.weights()(node) / grid.weights()(column_node));
                for (int q = 0; q < kSlots; ++q) {
                    const double v = jv(node, q);
                    if (v != 0.0) {
                        triplets.emplace_back(q * nodes + node, slot * nodes + column_node, scale * v);
                    }
                }
            }
        }
    }
    Eigen::SparseMatrix<double> b(n, n);
    b.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseMatrix<double> bt = b.transpose();
    Eigen::SparseMatrix<double> sym = 0.5 * (b + bt);
    sym.makeCompressed();
    return sym;
}

AlphaEstimate estimate_alpha(const RhsConfig<double>& cfg, std::span<const CompartmentField<double>> samples,
                             const AlphaOptions& options)
{
    if (samples.empty()) {
        throw ValidationError("samples", "at least one sample state is required");
    }
    AlphaEstimate out;
    out.alpha = -std::numeric_limits<double>::infinity();
    for (const auto& sample : samples) {
        if (sample.nodes() == 0) {
            throw ValidationError("samples", "degenerate sample state");
        }
        const auto sym = weighted_symmetric_jacobian(cfg, sample);
        const PowerResult r = largest_eigenvalue(sym, options);
        out.per_sample.push_back(r.lambda);
        out.alpha = std::max(out.alpha, r.lambda);
        out.max_iterations_used = std::max(out.max_iterations_used, r.iterations);
        out.converged = out.converged && r.converged;
    }
    return out;
}

} // namespace rdepi
