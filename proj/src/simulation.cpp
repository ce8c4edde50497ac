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
#include "rdepi/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace rdepi
{

namespace
{

std::string format_number(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

StepDiagnostics describe(std::int64_t step, double time, const CompartmentField<double>& field)
{
    StepDiagnostics d;
    d.step = step;
    d.time = time;
    d.l2_norm = live_l2_norm(field);
    const Grid& grid = field.grid();
    const NodeArray<double> live = field.live_total();
    d.live_total = discrete_integral(live, grid);
    const NodeArray<double> augmented = live + field.compartment(kCumDeathI) + field.compartment(kCumDeathD);
    d.augmented_total = discrete_integral(augmented, grid);
    d.min_live = field.values().leftCols<kLiveSlots>().minCoeff();
    return d;
}

} // namespace

double live_l2_norm(const CompartmentField<double>& field)
{
    const Grid& grid = field.grid();
    double sum = 0.0;
    for (int slot = 0; slot < kLiveSlots; ++slot) {
        sum += discrete_integral(field.compartment(slot).square(), grid);
    }
    return std::sqrt(sum);
}

GuardReport evaluate_guards(const Scenario& scenario, const CompartmentField<double>& initial,
                            std::optional<double> alpha)
{
    GuardReport g;
    const double dt = scenario.dt;
    const double cap = std::max(scenario.horizon, dt);
    g.alpha_known = alpha.has_value();
    g.bound = max_stable_dt(scenario.rhs_config(), initial, alpha.value_or(0.0), cap, scenario.integrator);
    g.margin_alpha = alpha ? dt * *alpha : 0.0;
    g.margin_cfl = std::isfinite(g.bound.cfl_term) ? dt / g.bound.cfl_term : 0.0;
    if (scenario.flags.guard_alpha && alpha && dt > g.bound.alpha_term) {
        g.alpha_ok = false;
        g.warnings.push_back("dt = " + format_number(dt) + " exceeds 1/alpha = " + format_number(g.bound.alpha_term));
    }
    if (scenario.flags.guard_cfl && dt > g.bound.cfl_term) {
        g.cfl_ok = false;
        g.warnings.push_back("dt = " + format_number(dt) + " exceeds the explicit diffusion limit " +
                             format_number(g.bound.cfl_term));
    }
    return g;
}

TimeSeries simulate(const Scenario& scenario, const SimulateOptions& options)
{
    if (auto errors = scenario.validate(); !errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    std::function<void(const std::string&)> warn = options.warn;
    if (!warn) {
        warn = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    }

    TimeSeries ts;
    ts.grid = scenario.grid.build();
    ts.dt = scenario.dt;
    CompartmentField<double> field = scenario.initial.materialize(ts.grid);

    ts.guards = evaluate_guards(scenario, field, options.alpha);
    if (!ts.guards.warnings.empty()) {
        if (scenario.flags.strict_guards) {
            std::vector<Diagnostic> diags;
            for (const auto& w : ts.guards.warnings) {
                diags.push_back({"dt", w});
            }
            throw GuardViolation(std::move(diags));
        }
        for (const auto& w : ts.guards.warnings) {
            warn(w);
        }
    }

    const RhsConfig<double> cfg = scenario.rhs_config();
    const std::int64_t steps = scenario.step_count();
    const std::int64_t stride = scenario.snapshot_stride();
    const double dt = scenario.dt;
    const double initial_max = field.values().leftCols<kLiveSlots>().maxCoeff();
    const double negative_floor = -scenario.flags.negativity_tolerance * std::max(initial_max, 0.0);

    auto capture = [&](std::int64_t n) {
        if (std::find(options.capture_steps.begin(), options.capture_steps.end(), n) != options.capture_steps.end()) {
            ts.captured.push_back(field);
        }
    };

    ts.snapshots.push_back({0.0, 0, field});
    if (options.record_diagnostics) {
        ts.diagnostics.push_back(describe(0, 0.0, field));
    }
    capture(0);

    for (std::int64_t n = 1; n <= steps; ++n) {
        const double t = static_cast<double>(n - 1) * dt;
        try {
            field = step(scenario.integrator, t, field, dt, cfg);
        }
        catch (const NonFiniteError& e) {
            const NonFiniteError located = e.at_step(n);
            ts.abort = AbortInfo{n, t, e.node(), e.slot(), located.what()};
            break;
        }
        const double time = static_cast<double>(n) * dt;

        auto live = field.values().leftCols<kLiveSlots>();
        if (live.minCoeff() < negative_floor) {
            ++ts.negativity_warnings;
            if (ts.negativity_warnings == 1) {
                warn("negative compartment value " + format_number(live.minCoeff()) + " at step " +
                     std::to_string(n) + " (further negativity warnings suppressed)");
            }
        }
        if (scenario.flags.clamp_negative) {
            const NodeArray<double> removed = (-live.min(0.0)).rowwise().sum();
            ts.clamped_mass += discrete_integral(removed, *ts.grid);
            live = live.max(0.0);
        }

        if (options.record_diagnostics) {
            ts.diagnostics.push_back(describe(n, time, field));
        }
        if (n % stride == 0 || n == steps) {
            ts.snapshots.push_back({time, n, field});
        }
        capture(n);
    }
    return ts;
}

std::vector<CompartmentField<double>> alpha_samples(const Scenario& scenario)
{
    Scenario pilot = scenario;
    pilot.flags.strict_guards = false;
    pilot.flags.clamp_negative = false;
    const std::int64_t steps = pilot.step_count();
    SimulateOptions options;
    options.record_diagnostics = false;
    options.warn = [](const std::string&) {};
    options.capture_steps = {0};
    if (steps > 0) {
        for (int quarter = 1; quarter <= 3; ++quarter) {
            const std::int64_t k = (steps * quarter) / 4;
            if (k > 0 && std::find(options.capture_steps.begin(), options.capture_steps.end(), k) ==
                             options.capture_steps.end()) {
                options.capture_steps.push_back(k);
            }
        }
    }
    pilot.snapshot_interval = pilot.horizon > 0 ? pilot.horizon : pilot.dt;
    TimeSeries ts = simulate(pilot, options);
    return std::move(ts.captured);
}

} // namespace rdepi
