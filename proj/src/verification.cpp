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
#include "rdepi/verification.hpp"

#include "rdepi/scenario_io.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace rdepi
{

namespace
{

constexpr double kRoundoffFactor = 100.0;
constexpr int kRichardsonRefinement = 16;

CompartmentField<double> final_state(const Scenario& base, double dt, Integrator integrator)
{
    Scenario s = base;
    s.dt = dt;
    s.integrator = integrator;
    s.snapshot_interval = s.horizon;
    s.flags.strict_guards = false;
    SimulateOptions options;
    options.record_diagnostics = false;
    options.warn = [](const std::string&) {};
    TimeSeries ts = simulate(s, options);
    if (ts.abort) {
        throw NonFiniteError(ts.abort->node, ts.abort->slot, ts.abort->step);
    }
    return ts.snapshots.back().field;
}

void check_halving(const std::vector<double>& steps, const std::string& path)
{
    if (steps.size() < 3) {
        throw ValidationError(path, "at least three levels are required");
    }
    for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
        const double ratio = steps[k] / steps[k + 1];
        if (!(std::abs(ratio - 2.0) <= 1e-9)) {
            throw ValidationError(path, "levels must decrease by a factor of 2");
        }
    }
}

void fill_orders(OrderReport& report)
{
    for (std::size_t k = 0; k + 1 < report.levels.size(); ++k) {
        const auto& a = report.levels[k];
        const auto& b = report.levels[k + 1];
        if (a.discarded || b.discarded) {
            continue;
        }
        report.orders_l2.push_back(std::log2(a.errors.max.l2 / b.errors.max.l2));
        report.orders_linf.push_back(std::log2(a.errors.max.linf / b.errors.max.linf));
    }
}

void mark_roundoff(OrderReport& report, double scale)
{
    const double floor = kRoundoffFactor * std::numeric_limits<double>::epsilon() * scale;
    for (auto& level : report.levels) {
        if (level.errors.max.l2 < floor) {
            level.discarded = true;
            report.notices.push_back("level " + format_exact(level.step) + " discarded: error " +
                                     format_exact(level.errors.max.l2) + " is below the roundoff floor");
        }
    }
}

nlohmann::json number(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_from(const nlohmann::json& j)
{
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

std::string to_string(StudyAxis axis)
{
    return axis == StudyAxis::kSpatial ? "spatial" : "temporal";
}

} // namespace

ErrorNorms error_norm(const CompartmentField<double>& a, const CompartmentField<double>& b)
{
    if (!(a.grid() == b.grid())) {
        throw ValidationError("fields", "error_norm requires fields on the same grid");
    }
    ErrorNorms out;
    const FieldStorage<double> diff = a.values() - b.values();
    for (int slot = 0; slot < kSlots; ++slot) {
        auto& n = out.per_compartment[static_cast<std::size_t>(slot)];
        n.l2 = std::sqrt(discrete_integral(diff.col(slot).square(), a.grid()));
        n.linf = diff.col(slot).abs().maxCoeff();
        out.max.l2 = std::max(out.max.l2, n.l2);
        out.max.linf = std::max(out.max.linf, n.linf);
    }
    return out;
}

bool OrderReport::all_orders_within(double lo, double hi) const
{
    if (orders_l2.empty()) {
        return false;
    }
    for (double p : orders_l2) {
        if (!(p >= lo && p <= hi)) {
            return false;
        }
    }
    return true;
}

std::optional<AnalyticSolution> analytic_solution(const Scenario& scenario)
{
    if (scenario.model != ModelKind::kSir || scenario.sir_params.beta != 0.0) {
        return std::nullopt;
    }
    const double gamma = scenario.sir_params.gamma;
    const InitialSpec initial = scenario.initial;
    return AnalyticSolution([gamma, initial](const GridPtr& grid, double t) {
        CompartmentField<double> field = initial.materialize(grid);
        const double decay = std::exp(-gamma * t);
        const NodeArray<double> i0 = field.compartment(kI);
        field.compartment(kI) = i0 * decay;
        field.compartment(kR) += i0 * (1.0 - decay);
        return field;
    });
}

namespace
{

OrderReport refinement(const Scenario& scenario, const std::vector<double>& dts, bool allow_analytic)
{
    check_halving(dts, "dts");
    if (!(scenario.horizon > 0)) {
        throw ValidationError("horizon", "a refinement study requires a positive horizon");
    }
    const GridPtr grid = scenario.grid.build();
    const CompartmentField<double> initial = scenario.initial.materialize(grid);
    if ((initial.values() == 0.0).all()) {
        throw ValidationError("initial", "zero initial data gives a degenerate study");
    }

    OrderReport report;
    report.axis = StudyAxis::kTemporal;
    report.integrator = to_string(scenario.integrator);

    CompartmentField<double> reference(grid);
    auto exact = allow_analytic ? analytic_solution(scenario) : std::nullopt;
    if (exact) {
        report.reference = "analytic";
        report.reference_detail = "closed-form linear decay";
        reference = (*exact)(grid, scenario.horizon);
    }
    else {
        const double dt_ref = dts.back() / kRichardsonRefinement;
        report.reference = "richardson";
        report.reference_detail = "rk4 at dt = " + format_exact(dt_ref);
        reference = final_state(scenario, dt_ref, Integrator::kRk4);
    }

    for (double dt : dts) {
        const auto result = final_state(scenario, dt, scenario.integrator);
        report.levels.push_back({dt, error_norm(result, reference), false});
    }
    mark_roundoff(report, std::max(1.0, reference.values().abs().maxCoeff()));
    fill_orders(report);
    return report;
}

} // namespace

OrderReport temporal_order_study(const Scenario& scenario, const std::vector<double>& dts)
{
    if (auto errors = scenario.validate(); !errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    if (scenario.model == ModelKind::kCovid7 && scenario.params.max_diffusivity() != 0.0) {
        throw ValidationError("params", "temporal order study requires all diffusivities to be 0");
    }
    return refinement(scenario, dts, true);
}

OrderReport cross_integrator_study(const Scenario& scenario, const std::vector<double>& dts)
{
    if (auto errors = scenario.validate(); !errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    return refinement(scenario, dts, false);
}

Scenario smooth_diffusion_scenario()
{
    Scenario s = temporal_study_scenario();
    s.name = "smooth-diffusion";
    s.description = "normalized outbreak with smooth initial profiles and diffusion on a 1D grid";
    s.grid.nodes_x = 33;
    s.params.nu_s = 0.01;
    s.params.nu_e = 0.01;
    s.params.nu_a = 0.01;
    s.params.nu_i = 0.01;
    s.horizon = 20.0;
    s.initial = InitialSpec{};
    const GridPtr grid = s.grid.build();
    std::vector<std::array<double, kSlots>> rows(static_cast<std::size_t>(grid->size()));
    for (Index k = 0; k < grid->size(); ++k) {
        const double c = std::cos(std::numbers::pi * grid->x(k));
        auto& row = rows[static_cast<std::size_t>(k)];
        row.fill(0.0);
        row[kS] = 1.0 + 0.2 * c;
        row[kE] = 0.01 * (1.0 + c);
    }
    s.initial.per_node = std::move(rows);
    return s;
}

Scenario temporal_study_scenario()
{
    Scenario s;
    s.name = "temporal-order";
    s.description = "compartment model without diffusion, normalized population";
    s.params.theta = 1.0;
    s.params.b = 0.5;
    s.params.c = 0.02;
    s.params.delta = 0.01;
    s.params.epsilon = 0.25;
    s.params.frac_sympt = 0.6;
    s.params.g = 0.2;
    s.params.beta_rec = 0.1;
    s.params.j_rec = 0.05;
    s.params.l_death = 0.002;
    s.params.h1 = 0.3;
    s.params.m_death = 0.002;
    s.params.mu = 0.12;
    s.initial.background = {{kS, 1.0}, {kE, 0.01}};
    s.horizon = 60.0;
    s.dt = 0.05;
    s.snapshot_interval = 1.0;
    return s;
}

SpatialStudy default_spatial_study(int levels)
{
    if (levels < 3) {
        throw ValidationError("levels", "at least three levels are required");
    }
    SpatialStudy study;
    study.nodes.clear();
    for (int k = 0; k < levels; ++k) {
        study.nodes.push_back((Index{8} << k) + 1);
    }
    const double h = study.extent / static_cast<double>(study.nodes.back() - 1);
    const double limit = real_axis_extent(study.integrator) * h * h / (4.0 * study.nu);
    const double target = std::min(study.dt, 0.5 * limit);
    study.dt = study.horizon / std::ceil(study.horizon / target);
    return study;
}

std::vector<double> default_temporal_steps(int levels)
{
    if (levels < 3) {
        throw ValidationError("levels", "at least three levels are required");
    }
    std::vector<double> out;
    double dt = 0.2;
    for (int k = 0; k < levels; ++k) {
        out.push_back(dt);
        dt /= 2.0;
    }
    return out;
}

Scenario spatial_study_scenario(const SpatialStudy& study, Index nodes)
{
    Scenario s;
    s.name = "spatial-order";
    s.grid.dim = study.dim;
    s.grid.extent_x = study.extent;
    s.grid.nodes_x = nodes;
    s.grid.extent_y = study.extent;
    s.grid.nodes_y = 5;
    s.params = ModelParams<double>{};
    s.params.nu_s = study.nu;
    s.flags.frozen_n = 1.0;
    s.horizon = study.horizon;
    s.dt = study.dt;
    s.snapshot_interval = study.horizon;
    s.integrator = study.integrator;

    const GridPtr grid = s.grid.build();
    std::vector<std::array<double, kSlots>> rows(static_cast<std::size_t>(grid->size()));
    for (Index k = 0; k < grid->size(); ++k) {
        rows[static_cast<std::size_t>(k)].fill(0.0);
        rows[static_cast<std::size_t>(k)][kS] =
            study.mean + study.amplitude * std::cos(std::numbers::pi * grid->x(grid->ix(k)) / study.extent);
    }
    s.initial.per_node = std::move(rows);
    return s;
}

OrderReport spatial_order_study(const SpatialStudy& study)
{
    if (study.amplitude == 0.0) {
        throw ValidationError("amplitude", "a zero cosine amplitude gives zero error at every level");
    }
    if (!(study.nu > 0)) {
        throw ValidationError("nu", "must be > 0");
    }
    std::vector<double> spacings;
    for (Index n : study.nodes) {
        if (n < 3) {
            throw ValidationError("nodes", "every level needs at least 3 nodes");
        }
        spacings.push_back(study.extent / static_cast<double>(n - 1));
    }
    check_halving(spacings, "nodes");

    OrderReport report;
    report.axis = StudyAxis::kSpatial;
    report.integrator = to_string(study.integrator);
    report.reference = "analytic";
    report.reference_detail = "decaying Neumann cosine mode";

    const double k = std::numbers::pi / study.extent;
    const double decay = std::exp(-study.nu * k * k * study.horizon);
    for (std::size_t level = 0; level < study.nodes.size(); ++level) {
        const Scenario s = spatial_study_scenario(study, study.nodes[level]);
        const auto result = final_state(s, s.dt, s.integrator);
        CompartmentField<double> exact(result.grid_ptr());
        const Grid& grid = result.grid();
        for (Index node = 0; node < grid.size(); ++node) {
            exact.values()(node, kS) = study.mean + study.amplitude * decay * std::cos(k * grid.x(grid.ix(node)));
        }
        report.levels.push_back({spacings[level], error_norm(result, exact), false});
    }
    mark_roundoff(report, std::abs(study.mean) + std::abs(study.amplitude));
    fill_orders(report);
    return report;
}

LedgerReport mass_ledger(const TimeSeries& series)
{
    if (series.snapshots.empty()) {
        throw ValidationError("timeseries", "no snapshots to audit");
    }
    LedgerReport r;
    for (const auto& snap : series.snapshots) {
        const Grid& grid = snap.field.grid();
        const double live = discrete_integral(snap.field.live_total(), grid);
        const double deaths = discrete_integral(snap.field.compartment(kCumDeathI), grid) +
                              discrete_integral(snap.field.compartment(kCumDeathD), grid);
        r.times.push_back(snap.time);
        r.live_totals.push_back(live);
        r.cumulative_deaths.push_back(deaths);
        r.augmented_totals.push_back(live + deaths);
    }
    const double aug0 = r.augmented_totals.front();
    const double live0 = r.live_totals.front();
    const double aug_scale = aug0 != 0.0 ? std::abs(aug0) : 1.0;
    const double live_scale = live0 != 0.0 ? std::abs(live0) : 1.0;
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        r.max_relative_drift = std::max(r.max_relative_drift, std::abs(r.augmented_totals[k] - aug0) / aug_scale);
        r.max_live_relative_drift = std::max(r.max_live_relative_drift, std::abs(r.live_totals[k] - live0) / live_scale);
        if (k > 0 && r.live_totals[k] > r.live_totals[k - 1] + 1e-12 * live_scale) {
            r.live_non_increasing = false;
        }
    }
    return r;
}

bool StabilityReport::within_guards() const
{
    return margin_alpha <= 1.0 && margin_cfl <= 1.0;
}

StabilityReport stability_monitor(const TimeSeries& series, double alpha, double dt)
{
    StabilityReport r;
    r.dt = dt;
    r.alpha = alpha;
    r.margin_alpha = alpha > 0 ? dt * alpha : 0.0;
    r.cfl_bound = series.guards.bound.cfl_term;
    r.margin_cfl = std::isfinite(r.cfl_bound) ? dt / r.cfl_bound : 0.0;
    if (!series.diagnostics.empty()) {
        for (const auto& d : series.diagnostics) {
            r.norms.push_back(d.l2_norm);
        }
    }
    else {
        for (const auto& snap : series.snapshots) {
            r.norms.push_back(live_l2_norm(snap.field));
        }
    }
    if (series.abort) {
        r.aborted = true;
        r.abort_step = series.abort->step;
        r.monotone = false;
    }
    if (r.norms.empty()) {
        return r;
    }
    r.tolerance = 1e-12 * r.norms.front();
    for (std::size_t k = 1; k < r.norms.size(); ++k) {
        if (r.norms[k] > r.norms[k - 1] + r.tolerance) {
            r.monotone = false;
            r.first_violation = static_cast<std::int64_t>(k);
            break;
        }
    }
    if (r.aborted && !r.first_violation) {
        r.first_violation = r.abort_step;
    }
    return r;
}

Scenario contractive_scenario(double dt_factor, std::int64_t steps)
{
    if (!(std::isfinite(dt_factor) && dt_factor > 0)) {
        throw ValidationError("dt_factor", "must be finite and > 0");
    }
    if (steps < 1) {
        throw ValidationError("steps", "must be >= 1");
    }
    Scenario s;
    s.name = "contractive";
    s.description = "decay and diffusion only, frozen N";
    s.grid.dim = 1;
    s.grid.extent_x = 1.0;
    s.grid.nodes_x = 33;
    s.params = ModelParams<double>{};
    s.params.l_death = 0.05;
    s.params.m_death = 0.05;
    s.params.nu_s = 0.01;
    s.params.nu_e = 0.01;
    s.params.nu_a = 0.01;
    s.params.nu_i = 0.01;
    s.flags.frozen_n = 1.0;

    const GridPtr grid = s.grid.build();
    std::vector<std::array<double, kSlots>> rows(static_cast<std::size_t>(grid->size()));
    for (Index k = 0; k < grid->size(); ++k) {
        const double x = grid->x(k);
        auto& row = rows[static_cast<std::size_t>(k)];
        row.fill(0.0);
        row[kS] = 1.0 + 0.5 * std::cos(std::numbers::pi * x);
        row[kE] = 0.5 + 0.25 * std::cos(2.0 * std::numbers::pi * x);
        row[kA] = 0.2 * x;
        row[kI] = x < 0.5 ? 1.0 : 0.0;
        row[kD] = 0.3;
    }
    s.initial.per_node = std::move(rows);

    const CompartmentField<double> initial = s.initial.materialize(grid);
    const StepBound bound = max_stable_dt(s.rhs_config(), initial, 0.0, 1.0, Integrator::kRk4);
    s.dt = dt_factor * bound.cfl_term;
    s.horizon = static_cast<double>(steps) * s.dt;
    s.snapshot_interval = s.dt;
    return s;
}

nlohmann::json to_json(const ErrorNorms& norms)
{
    nlohmann::json per = nlohmann::json::object();
    for (int slot = 0; slot < kSlots; ++slot) {
        const auto& n = norms.per_compartment[static_cast<std::size_t>(slot)];
        per[std::string(slot_name(slot))] = {{"l2", n.l2}, {"linf", n.linf}};
    }
    return {{"max", {{"l2", norms.max.l2}, {"linf", norms.max.linf}}}, {"per_compartment", per}};
}

ErrorNorms error_norms_from_json(const nlohmann::json& j)
{
    ErrorNorms out;
    out.max = {j.at("max").at("l2").get<double>(), j.at("max").at("linf").get<double>()};
    for (int slot = 0; slot < kSlots; ++slot) {
        const auto& n = j.at("per_compartment").at(std::string(slot_name(slot)));
        out.per_compartment[static_cast<std::size_t>(slot)] = {n.at("l2").get<double>(), n.at("linf").get<double>()};
    }
    return out;
}

nlohmann::json to_json(const OrderReport& report)
{
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& level : report.levels) {
        levels.push_back({{"step", level.step}, {"discarded", level.discarded}, {"errors", to_json(level.errors)}});
    }
    return {{"axis", to_string(report.axis)},
            {"integrator", report.integrator},
            {"reference", report.reference},
            {"reference_detail", report.reference_detail},
            {"levels", levels},
            {"orders_l2", report.orders_l2},
            {"orders_linf", report.orders_linf},
            {"notices", report.notices}};
}

OrderReport order_report_from_json(const nlohmann::json& j)
{
    OrderReport r;
    const auto axis = j.at("axis").get<std::string>();
    if (axis != "temporal" && axis != "spatial") {
        throw ValidationError("axis", "must be temporal or spatial");
    }
    r.axis = axis == "spatial" ? StudyAxis::kSpatial : StudyAxis::kTemporal;
    r.integrator = j.at("integrator").get<std::string>();
    r.reference = j.at("reference").get<std::string>();
    r.reference_detail = j.at("reference_detail").get<std::string>();
    for (const auto& level : j.at("levels")) {
        r.levels.push_back({level.at("step").get<double>(), error_norms_from_json(level.at("errors")),
                            level.at("discarded").get<bool>()});
    }
    r.orders_l2 = j.at("orders_l2").get<std::vector<double>>();
    r.orders_linf = j.at("orders_linf").get<std::vector<double>>();
    r.notices = j.at("notices").get<std::vector<std::string>>();
    return r;
}

nlohmann::json to_json(const LedgerReport& report)
{
    return {{"times", report.times},
            {"live_totals", report.live_totals},
            {"cumulative_deaths", report.cumulative_deaths},
            {"augmented_totals", report.augmented_totals},
            {"max_relative_drift", report.max_relative_drift},
            {"max_live_relative_drift", report.max_live_relative_drift},
            {"live_non_increasing", report.live_non_increasing}};
}

LedgerReport ledger_report_from_json(const nlohmann::json& j)
{
    LedgerReport r;
    r.times = j.at("times").get<std::vector<double>>();
    r.live_totals = j.at("live_totals").get<std::vector<double>>();
    r.cumulative_deaths = j.at("cumulative_deaths").get<std::vector<double>>();
    r.augmented_totals = j.at("augmented_totals").get<std::vector<double>>();
    r.max_relative_drift = j.at("max_relative_drift").get<double>();
    r.max_live_relative_drift = j.at("max_live_relative_drift").get<double>();
    r.live_non_increasing = j.at("live_non_increasing").get<bool>();
    return r;
}

nlohmann::json to_json(const StabilityReport& report)
{
    nlohmann::json norms = nlohmann::json::array();
    for (double v : report.norms) {
        norms.push_back(number(v));
    }
    return {{"norms", norms},
            {"dt", report.dt},
            {"alpha", report.alpha},
            {"margin_alpha", report.margin_alpha},
            {"cfl_bound", number(report.cfl_bound)},
            {"margin_cfl", report.margin_cfl},
            {"tolerance", report.tolerance},
            {"monotone", report.monotone},
            {"first_violation", report.first_violation ? nlohmann::json(*report.first_violation) : nlohmann::json(nullptr)},
            {"aborted", report.aborted},
            {"abort_step", report.abort_step ? nlohmann::json(*report.abort_step) : nlohmann::json(nullptr)}};
}

StabilityReport stability_report_from_json(const nlohmann::json& j)
{
    StabilityReport r;
    for (const auto& v : j.at("norms")) {
        r.norms.push_back(number_from(v));
    }
    r.dt = j.at("dt").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.margin_alpha = j.at("margin_alpha").get<double>();
    r.cfl_bound = number_from(j.at("cfl_bound"));
    r.margin_cfl = j.at("margin_cfl").get<double>();
    r.tolerance = j.at("tolerance").get<double>();
    r.monotone = j.at("monotone").get<bool>();
    if (!j.at("first_violation").is_null()) {
        r.first_violation = j.at("first_violation").get<std::int64_t>();
    }
    r.aborted = j.at("aborted").get<bool>();
    if (!j.at("abort_step").is_null()) {
        r.abort_step = j.at("abort_step").get<std::int64_t>();
    }
    return r;
}

} // namespace rdepi
