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
#ifndef RDEPI_VERIFICATION_HPP
#define RDEPI_VERIFICATION_HPP

#include "rdepi/simulation.hpp"

#include <nlohmann/json.hpp>

namespace rdepi
{

struct NormPair
{
    double l2{0};
    double linf{0};

    friend bool operator==(const NormPair&, const NormPair&) = default;
};

/// Difference norms per compartment and the maximum over compartments.
struct ErrorNorms
{
    std::array<NormPair, kSlots> per_compartment{};
    NormPair max;

    friend bool operator==(const ErrorNorms&, const ErrorNorms&) = default;
};

/// Discrete L2 (trapezoid-weighted) and max-norm of a - b. Both fields must share a grid.
ErrorNorms error_norm(const CompartmentField<double>& a, const CompartmentField<double>& b);

enum class StudyAxis
{
    kTemporal,
    kSpatial,
};

struct OrderLevel
{
    double step{0}; ///< dt or h
    ErrorNorms errors;
    bool discarded{false};

    friend bool operator==(const OrderLevel&, const OrderLevel&) = default;
};

struct OrderReport
{
    StudyAxis axis{StudyAxis::kTemporal};
    std::string integrator;
    std::string reference; ///< "analytic" or "richardson"
    std::string reference_detail;
    std::vector<OrderLevel> levels;
    /// Pairwise log2(e_k / e_{k+1}) of the aggregated L2 error between kept neighbours.
    std::vector<double> orders_l2;
    std::vector<double> orders_linf;
    std::vector<std::string> notices;

    friend bool operator==(const OrderReport&, const OrderReport&) = default;

    bool all_orders_within(double lo, double hi) const;
};

/// Closed-form solution at time t, if the scenario has one.
using AnalyticSolution = std::function<CompartmentField<double>(const GridPtr&, double)>;

/// Linear decay (SIR with beta = 0) has a closed form; everything else has none.
std::optional<AnalyticSolution> analytic_solution(const Scenario& scenario);

/**
 * Observed temporal order on a scenario without diffusion. Each dt in `dts`
 * (at least three, each half the previous) runs over the full horizon; the
 * final states are compared with the analytic solution if one exists, else
 * with an RK4 run at dt_min/16.
 */
OrderReport temporal_order_study(const Scenario& scenario, const std::vector<double>& dts);

/**
 * Same refinement as temporal_order_study but diffusion is allowed, the
 * reference is always RK4 at dt_min/16 and the grid stays fixed. Measures how
 * fast one integrator approaches the RK4 solution of the semi-discrete system.
 */
OrderReport cross_integrator_study(const Scenario& scenario, const std::vector<double>& dts);

/// Smooth 1D scenario with diffusion and a normalized population, for cross_integrator_study.
Scenario smooth_diffusion_scenario();

struct SpatialStudy
{
    int dim{1};
    double extent{1.0};
    double nu{0.05};
    double mean{1.0};      ///< U0
    double amplitude{0.5}; ///< A
    double horizon{1.0};
    double dt{0.002};
    std::vector<Index> nodes{9, 17, 33, 65};
    Integrator integrator{Integrator::kRk4};
};

/**
 * Default temporal study: the full compartment model without diffusion on a
 * normalized population (S = 1, E = 0.01) with a large outbreak, so that the
 * discretization error stays well above the roundoff floor at dt = 0.025.
 */
Scenario temporal_study_scenario();

/// Node counts 9, 17, 33, ... and a dt safely under the finest level's diffusion limit.
SpatialStudy default_spatial_study(int levels = 4);

/// 0.2, 0.1, 0.05, ... days.
std::vector<double> default_temporal_steps(int levels = 4);

/// Scenario for one level: S = U0 + A cos(pi x / L), frozen N = 1, all rates 0.
Scenario spatial_study_scenario(const SpatialStudy& study, Index nodes);

/// Observed spatial order against U0 + A exp(-nu (pi/L)^2 t) cos(pi x / L).
OrderReport spatial_order_study(const SpatialStudy& study);

struct LedgerReport
{
    std::vector<double> times;
    std::vector<double> live_totals;
    std::vector<double> cumulative_deaths;
    std::vector<double> augmented_totals;
    double max_relative_drift{0};      ///< augmented total
    double max_live_relative_drift{0}; ///< live total
    bool live_non_increasing{true};

    friend bool operator==(const LedgerReport&, const LedgerReport&) = default;
};

LedgerReport mass_ledger(const TimeSeries& series);

struct StabilityReport
{
    std::vector<double> norms;
    double dt{0};
    double alpha{0};
    double margin_alpha{0}; ///< dt * alpha
    double cfl_bound{0};
    double margin_cfl{0}; ///< dt / cfl bound
    double tolerance{0};
    bool monotone{true};
    std::optional<std::int64_t> first_violation; ///< step whose norm exceeded its predecessor
    bool aborted{false};
    std::optional<std::int64_t> abort_step;

    friend bool operator==(const StabilityReport&, const StabilityReport&) = default;

    /// Both guards satisfied, so a non-increasing norm is expected.
    bool within_guards() const;
};

/// Checks ||y_{n+1}|| <= ||y_n|| + 1e-12 ||y_0|| over the recorded per-step norms.
StabilityReport stability_monitor(const TimeSeries& series, double alpha, double dt);

/**
 * Decay plus diffusion with every transfer rate off and N frozen at 1, so the
 * live part of the system is linear and dissipative. dt is set to
 * `dt_factor` times the explicit diffusion limit.
 */
Scenario contractive_scenario(double dt_factor = 0.5, std::int64_t steps = 1000);

nlohmann::json to_json(const ErrorNorms& norms);
nlohmann::json to_json(const OrderReport& report);
nlohmann::json to_json(const LedgerReport& report);
nlohmann::json to_json(const StabilityReport& report);
ErrorNorms error_norms_from_json(const nlohmann::json& j);
OrderReport order_report_from_json(const nlohmann::json& j);
LedgerReport ledger_report_from_json(const nlohmann::json& j);
StabilityReport stability_report_from_json(const nlohmann::json& j);

} // namespace rdepi

#endif // RDEPI_VERIFICATION_HPP
