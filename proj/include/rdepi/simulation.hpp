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
#ifndef RDEPI_SIMULATION_HPP
#define RDEPI_SIMULATION_HPP

#include "rdepi/scenario.hpp"

#include <functional>

namespace rdepi
{

struct Snapshot
{
    double time{0};
    std::int64_t step{0};
    CompartmentField<double> field;
};

/// Per-step bookkeeping; entry 0 describes the initial state.
struct StepDiagnostics
{
    std::int64_t step{0};
    double time{0};
    double l2_norm{0};         ///< discrete L2 norm of the seven live compartments
    double live_total{0};      ///< integral of N
    double augmented_total{0}; ///< integral of N plus both death ledgers
    double min_live{0};        ///< smallest live compartment value
};

/// Guard evaluation before the run.
struct GuardReport
{
    StepBound bound;
    bool alpha_known{false};
    bool alpha_ok{true};
    bool cfl_ok{true};
    double margin_alpha{0}; ///< dt * alpha
    double margin_cfl{0};   ///< dt / cfl bound
    std::vector<std::string> warnings;
};

struct AbortInfo
{
    std::int64_t step{0};  ///< step that failed (1-based; state after step-1 is last good)
    double last_good_time{0};
    Index node{0};
    int slot{0};
    std::string message;
};

struct TimeSeries
{
    GridPtr grid;
    double dt{0};
    std::vector<Snapshot> snapshots;
    std::vector<StepDiagnostics> diagnostics;
    std::optional<AbortInfo> abort;
    GuardReport guards;
    std::int64_t negativity_warnings{0};
    double clamped_mass{0};
    /// States at the steps requested in SimulateOptions::capture_steps.
    std::vector<CompartmentField<double>> captured;
};

struct SimulateOptions
{
    /// One-sided Lipschitz estimate for the 1/alpha guard; the guard is skipped if absent.
    std::optional<double> alpha;
    std::vector<std::int64_t> capture_steps;
    bool record_diagnostics{true};
    /// Receives guard and negativity warnings; defaults to standard error.
    std::function<void(const std::string&)> warn;
};

/// Thrown under strict guards when dt exceeds a bound.
class GuardViolation : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

/// Discrete L2 norm of the live compartments: sqrt(sum_c integral(u_c^2)).
double live_l2_norm(const CompartmentField<double>& field);

GuardReport evaluate_guards(const Scenario& scenario, const CompartmentField<double>& initial,
                            std::optional<double> alpha);

/**
 * Fixed-step integration over [0, T] with the scenario's integrator.
 *
 * Records a snapshot every `snapshot_interval` and per-step diagnostics. A
 * non-finite state stops the run; the result then carries AbortInfo and all
 * data up to the last good step instead of throwing.
 */
TimeSeries simulate(const Scenario& scenario, const SimulateOptions& options = {});

/// Initial state plus states at 25/50/75% of a pilot run, for alpha estimation.
std::vector<CompartmentField<double>> alpha_samples(const Scenario& scenario);

} // namespace rdepi

#endif // RDEPI_SIMULATION_HPP
