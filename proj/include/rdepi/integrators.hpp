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
#ifndef RDEPI_INTEGRATORS_HPP
#define RDEPI_INTEGRATORS_HPP

#include "rdepi/spatial.hpp"

#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>

namespace rdepi
{

template <typename Scalar = double>
struct ButcherTableau
{
    Eigen::Matrix<Scalar, 4, 4> a;
    Eigen::Matrix<Scalar, 4, 1> b;
    Eigen::Matrix<Scalar, 4, 1> c;

    /// Classical fourth-order Runge-Kutta.
    static ButcherTableau classical_rk4()
    {
        ButcherTableau t;
        const Scalar half = Scalar(1) / Scalar(2);
        t.a.setZero();
        t.a(1, 0) = half;
        t.a(2, 1) = half;
        t.a(3, 2) = Scalar(1);
        t.b << Scalar(1) / Scalar(6), Scalar(1) / Scalar(3), Scalar(1) / Scalar(3), Scalar(1) / Scalar(6);
        t.c << Scalar(0), half, half, Scalar(1);
        return t;
    }

    /// Weights sum to one and each abscissa equals its row sum.
    bool consistent(Scalar tol = Scalar(1e-14)) const
    {
        using std::abs;
        if (abs(b.sum() - Scalar(1)) > tol) {
            return false;
        }
        for (int j = 0; j < 4; ++j) {
            if (abs(a.row(j).sum() - c(j)) > tol) {
                return false;
            }
        }
        return true;
    }
};

/**
 * One step of an explicit 4-stage Runge-Kutta method for y' = f(t, y).
 *
 * State may be any type with value semantics supporting `State + Scalar * State`
 * (plain scalars, Eigen vectors and arrays). `f(t, y)` may optionally take the
 * zero-based stage index as a third argument.
 */
template <typename Scalar, typename State, typename Rhs>
State explicit_rk_step(const ButcherTableau<Scalar>& tableau, Rhs&& f, Scalar t, const State& y, Scalar dt)
{
    std::array<State, 4> k;
    for (int j = 0; j < 4; ++j) {
        State stage = y;
        for (int l = 0; l < j; ++l) {
            if (tableau.a(j, l) != Scalar(0)) {
                stage = stage + (dt * tableau.a(j, l)) * k[static_cast<std::size_t>(l)];
            }
        }
        if constexpr (std::is_invocable_v<Rhs&, Scalar, const State&, int>) {
            k[static_cast<std::size_t>(j)] = f(t + tableau.c(j) * dt, stage, j);
        }
        else {
            k[static_cast<std::size_t>(j)] = f(t + tableau.c(j) * dt, stage);
        }
    }
    State next = y;
    for (int j = 0; j < 4; ++j) {
        if (tableau.b(j) != Scalar(0)) {
            next = next + (dt * tableau.b(j)) * k[static_cast<std::size_t>(j)];
        }
    }
    return next;
}

enum class ModelKind
{
    kCovid7,
    kSir,
};

enum class Integrator
{
    kRk4,
    kEuler,
    kImex,
};

/// Length of the stability interval on the negative real axis.
inline double real_axis_extent(Integrator integrator)
{
    switch (integrator) {
    case Integrator::kRk4:
        return 2.785;
    case Integrator::kEuler:
        return 2.0;
    case Integrator::kImex:
        return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

/// Everything the right-hand side needs besides the state.
template <typename Scalar = double>
struct RhsConfig
{
    ModelKind model{ModelKind::kCovid7};
    ModelParams<Scalar> params{};
    SirParams<Scalar> sir{};
    DiffusionForm form{DiffusionForm::kFlux};
    PopulationMode<Scalar> population{};

    bool has_diffusion() const
    {
        return model == ModelKind::kCovid7 && params.max_diffusivity() > Scalar(0);
    }
};

inline constexpr std::array<int, 4> kDiffusingSlots = {kS, kE, kA, kI};

template <typename Scalar>
NodeArray<Scalar> live_total(const FieldStorage<Scalar>& values)
{
    return values.template leftCols<kLiveSlots>().rowwise().sum();
}

/// Pointwise reaction terms for every node.
template <typename Scalar>
FieldStorage<Scalar> reaction_terms(const FieldStorage<Scalar>& u, const RhsConfig<Scalar>& cfg)
{
    const Index n = u.rows();
    FieldStorage<Scalar> du(n, kSlots);
    if (cfg.model == ModelKind::kSir) {
        du.setZero();
#pragma omp parallel for schedule(static)
        for (Index k = 0; k < n; ++k) {
            const SirState<Scalar> y(u(k, kS), u(k, kI), u(k, kR));
            SirState<Scalar> dy;
            detail::sir_kernel(y, cfg.sir, dy);
            du(k, kS) = dy[0];
            du(k, kI) = dy[1];
            du(k, kR) = dy[2];
        }
        return du;
    }
#pragma omp parallel for schedule(static)
    for (Index k = 0; k < n; ++k) {
        const NodeState<Scalar> y = u.row(k).transpose().matrix();
        NodeState<Scalar> dy;
        detail::reaction_kernel(y, cfg.params, dy);
        du.row(k) = dy.transpose().array();
    }
    return du;
}

/// Adds the diffusion terms of S, E, A, I to `du`.
template <typename Scalar>
void add_diffusion(const FieldStorage<Scalar>& u, const Grid& grid, const RhsConfig<Scalar>& cfg,
                   FieldStorage<Scalar>& du)
{
    if (!cfg.has_diffusion()) {
        return;
    }
    const NodeArray<Scalar> n_tot = cfg.population.frozen
                                        ? NodeArray<Scalar>::Constant(u.rows(), *cfg.population.frozen)
                                        : live_total(u);
    for (int slot : kDiffusingSlots) {
        const Scalar nu = cfg.params.diffusivity(slot);
        if (nu == Scalar(0)) {
            continue;
        }
        if (cfg.form == DiffusionForm::kNodal) {
            du.col(slot) += nu * n_tot * laplacian(u.col(slot), grid);
        }
        else {
            du.col(slot) += flux_diffusion(u.col(slot), n_tot, nu, grid);
        }
    }
}

/**
 * Semi-discrete right-hand side: reaction terms plus N * nu * (discrete
 * Laplacian) for S, E, A, I. Autonomous; t is accepted for the y' = f(t, y)
 * interface. Throws NonFiniteError on non-finite input.
 */
template <typename Scalar>
FieldStorage<Scalar> full_rhs(Scalar /*t*/, const FieldStorage<Scalar>& u, const Grid& grid,
                              const RhsConfig<Scalar>& cfg)
{
    detail::require_size(u.rows(), grid);
    require_finite(u);
    FieldStorage<Scalar> du = reaction_terms(u, cfg);
    add_diffusion(u, grid, cfg, du);
    return du;
}

template <typename Scalar>
FieldStorage<Scalar> full_rhs(Scalar t, const CompartmentField<Scalar>& field, const RhsConfig<Scalar>& cfg)
{
    return full_rhs(t, field.values(), field.grid(), cfg);
}

template <typename Scalar>
CompartmentField<Scalar> rk4_step(Scalar t, const CompartmentField<Scalar>& field, Scalar dt,
                                  const RhsConfig<Scalar>& cfg,
                                  const ButcherTableau<Scalar>& tableau = ButcherTableau<Scalar>::classical_rk4())
{
    const Grid& grid = field.grid();
    auto f = [&](Scalar tt, const FieldStorage<Scalar>& stage, int j) {
        try {
            return full_rhs(tt, stage, grid, cfg);
        }
        catch (const NonFiniteError& e) {
            throw NonFiniteError(e.node(), e.slot(), -1, j);
        }
    };
    FieldStorage<Scalar> next = explicit_rk_step(tableau, f, t, field.values(), dt);
    require_finite(next);
    return CompartmentField<Scalar>(field.grid_ptr(), std::move(next));
}

template <typename Scalar>
CompartmentField<Scalar> euler_step(Scalar t, const CompartmentField<Scalar>& field, Scalar dt,
                                    const RhsConfig<Scalar>& cfg)
{
    FieldStorage<Scalar> next = field.values() + dt * full_rhs(t, field, cfg);
    require_finite(next);
    return CompartmentField<Scalar>(field.grid_ptr(), std::move(next));
}

/**
 * Thomas algorithm for a tridiagonal system. `lower(0)` and `upper(n-1)` are
 * ignored. Throws if a pivot vanishes (no pivoting is done, so the matrix
 * should be diagonally dominant).
 */
template <typename Scalar>
NodeArray<Scalar> solve_tridiagonal(const NodeArray<Scalar>& lower, const NodeArray<Scalar>& diag,
                                    const NodeArray<Scalar>& upper, const NodeArray<Scalar>& rhs)
{
    const Index n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n || n == 0) {
        throw ValidationError("tridiagonal", "inconsistent system size");
    }
    NodeArray<Scalar> c_prime(n);
    NodeArray<Scalar> d_prime(n);
    Scalar pivot = diag(0);
    if (pivot == Scalar(0)) {
        throw ValidationError("tridiagonal", "zero pivot at row 0");
    }
    c_prime(0) = upper(0) / pivot;
    d_prime(0) = rhs(0) / pivot;
    for (Index i = 1; i < n; ++i) {
        pivot = diag(i) - lower(i) * c_prime(i - 1);
        if (pivot == Scalar(0)) {
            throw ValidationError("tridiagonal", "zero pivot at row " + std::to_string(i));
        }
        c_prime(i) = i + 1 < n ? upper(i) / pivot : Scalar(0);
        d_prime(i) = (rhs(i) - lower(i) * d_prime(i - 1)) / pivot;
    }
    NodeArray<Scalar> x(n);
    x(n - 1) = d_prime(n - 1);
    for (Index i = n - 2; i >= 0; --i) {
        x(i) = d_prime(i) - c_prime(i) * x(i + 1);
    }
    return x;
}

/// Tridiagonal coefficients of the 1D diffusion operator for one compartment.
template <typename Scalar>
struct Tridiagonal
{
    NodeArray<Scalar> lower;
    NodeArray<Scalar> diag;
    NodeArray<Scalar> upper;
};

template <typename Scalar>
Tridiagonal<Scalar> diffusion_operator_1d(const NodeArray<Scalar>& n_tot, Scalar nu, const Grid& grid,
                                          DiffusionForm form)
{
    const Index n = grid.nodes_x();
    const Scalar inv_h2 = Scalar(1) / Scalar(grid.spacing_x() * grid.spacing_x());
    Tridiagonal<Scalar> op{NodeArray<Scalar>::Zero(n), NodeArray<Scalar>::Zero(n), NodeArray<Scalar>::Zero(n)};
    if (form == DiffusionForm::kNodal) {
        for (Index i = 0; i < n; ++i) {
            const Scalar coef = nu * n_tot(i) * inv_h2;
            op.lower(i) = i == 0 ? Scalar(0) : (i == n - 1 ? Scalar(2) * coef : coef);
            op.upper(i) = i == n - 1 ? Scalar(0) : (i == 0 ? Scalar(2) * coef : coef);
            op.diag(i) = Scalar(-2) * coef;
        }
        return op;
    }
    for (Index i = 0; i < n; ++i) {
        const Index l = detail::left_of(i);
        const Index r = detail::right_of(i, n);
        const Scalar a_left = nu * Scalar(0.5) * (n_tot(l) + n_tot(i)) * inv_h2;
        const Scalar a_right = nu * Scalar(0.5) * (n_tot(i) + n_tot(r)) * inv_h2;
        // Mirror ghosts fold the outer face onto the inner neighbor.
        if (i == 0) {
            op.upper(i) = a_left + a_right;
        }
        else if (i == n - 1) {
            op.lower(i) = a_left + a_right;
        }
        else {
            op.lower(i) = a_left;
            op.upper(i) = a_right;
        }
        op.diag(i) = -(a_left + a_right);
    }
    return op;
}

/**
 * First-order IMEX Euler: reaction explicit, diffusion implicit with N frozen
 * at the start of the step,
 *   (I - dt * N^n nu D_h) u^{n+1} = u^n + dt * reaction(u^n),
 * one tridiagonal solve per diffusing compartment. 1D grids only.
 */
template <typename Scalar>
CompartmentField<Scalar> imex_euler_step(Scalar /*t*/, const CompartmentField<Scalar>& field, Scalar dt,
                                         const RhsConfig<Scalar>& cfg)
{
    const Grid& grid = field.grid();
    if (grid.dim() != 1) {
        throw UnsupportedOperation("IMEX Euler is implemented for 1D grids only");
    }
    require_finite(field.values());
    FieldStorage<Scalar> next = field.values() + dt * reaction_terms(field.values(), cfg);
    if (cfg.has_diffusion()) {
        const NodeArray<Scalar> n_tot = population_for(field, cfg.population);
        for (int slot : kDiffusingSlots) {
            const Scalar nu = cfg.params.diffusivity(slot);
            if (nu == Scalar(0)) {
                continue;
            }
            const auto op = diffusion_operator_1d(n_tot, nu, grid, cfg.form);
            const NodeArray<Scalar> diag = Scalar(1) - dt * op.diag;
            const NodeArray<Scalar> lower = -dt * op.lower;
            const NodeArray<Scalar> upper = -dt * op.upper;
            const NodeArray<Scalar> rhs = next.col(slot);
            next.col(slot) = solve_tridiagonal(lower, diag, upper, rhs);
        }
    }
    require_finite(next);
    return CompartmentField<Scalar>(field.grid_ptr(), std::move(next));
}

template <typename Scalar>
CompartmentField<Scalar> step(Integrator integrator, Scalar t, const CompartmentField<Scalar>& field, Scalar dt,
                              const RhsConfig<Scalar>& cfg)
{
    switch (integrator) {
    case Integrator::kRk4:
        return rk4_step(t, field, dt, cfg);
    case Integrator::kEuler:
        return euler_step(t, field, dt, cfg);
    case Integrator::kImex:
        return imex_euler_step(t, field, dt, cfg);
    }
    throw UnsupportedOperation("unknown integrator");
}

/// Step-size bound and its two contributing terms.
struct StepBound
{
    double alpha{0};      ///< one-sided Lipschitz estimate used
    double alpha_term{0}; ///< 1/alpha, or +inf when alpha <= 0
    double cfl_term{0};   ///< explicit-diffusion limit, or +inf
    double cap{0};        ///< horizon cap
    double bound{0};      ///< min of the three
};

/**
 * dt* = min(1/alpha, extent / (max_i N_i * nu_max * sum_k 4/h_k^2), cap).
 * 4/h^2 per axis is the spectral radius of the mirror-ghost Laplacian and
 * `extent` is the method's real-axis stability length (2.785 for RK4).
 */
StepBound max_stable_dt(const RhsConfig<double>& cfg, const CompartmentField<double>& field, double alpha,
                        double horizon_cap, Integrator integrator = Integrator::kRk4);

/// Result of a one-sided Lipschitz estimate.
struct AlphaEstimate
{
    double alpha{0};
    std::vector<double> per_sample;
    int max_iterations_used{0};
    bool converged{true};
};

struct AlphaOptions
{
    int max_iterations{5000};
    double tolerance{1e-11};
    std::uint64_t seed{20210721};
};

/**
 * Estimate of the one-sided Lipschitz constant of full_rhs: the largest
 * eigenvalue of the symmetrized Jacobian in the trapezoid-weighted inner
 * product, maximized over the sample states.
 *
 * The Jacobian is assembled from central-difference directional probes
 * (exact up to rounding, since the RHS is quadratic) compressed by a
 * distance-1 coloring of the grid; the eigenvalue comes from shifted power
 * iteration. This is an estimate, not a bound.
 */
AlphaEstimate estimate_alpha(const RhsConfig<double>& cfg, std::span<const CompartmentField<double>> samples,
                             const AlphaOptions& options = {});

/// Weighted, symmetrized Jacobian at one state (exposed for testing).
Eigen::SparseMatrix<double> weighted_symmetric_jacobian(const RhsConfig<double>& cfg,
                                                        const CompartmentField<double>& state);

} // namespace rdepi

#endif // RDEPI_INTEGRATORS_HPP
