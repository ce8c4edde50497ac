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
#include "rdepi/scenario.hpp"

#include <cmath>

namespace rdepi
{

GridPtr GridSpec::build() const
{
    if (dim == 1) {
        return std::make_shared<const Grid>(Grid::line(extent_x, nodes_x, regions));
    }
    if (dim == 2) {
        return std::make_shared<const Grid>(Grid::rect(extent_x, nodes_x, extent_y, nodes_y, regions));
    }
    throw ValidationError("grid.dim", "must be 1 or 2");
}

CompartmentField<double> InitialSpec::materialize(const GridPtr& grid) const
{
    CompartmentField<double> field(grid);
    auto& v = field.values();
    if (per_node) {
        if (static_cast<Index>(per_node->size()) != grid->size()) {
            throw ValidationError("initial.per_node", "expected " + std::to_string(grid->size()) + " rows, got " +
                                                          std::to_string(per_node->size()));
        }
        for (Index k = 0; k < grid->size(); ++k) {
            for (int s = 0; s < kSlots; ++s) {
                v(k, s) = (*per_node)[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
            }
        }
        return field;
    }
    auto apply = [&](Index node, const SlotValues& values) {
        for (const auto& [slot, value] : values) {
            v(node, slot) = value;
        }
    };
    for (Index k = 0; k < grid->size(); ++k) {
        apply(k, background);
    }
    for (const auto& [name, values] : regions) {
        const int label = grid->region_index(name);
        if (label < 0) {
            throw ValidationError("initial.regions." + name, "unknown region");
        }
        for (Index k = 0; k < grid->size(); ++k) {
            if (grid->region(k) == label) {
                apply(k, values);
            }
        }
    }
    for (const auto& patch : patches) {
        const RegionBox box{"patch", patch.x0, patch.x1, patch.y0, patch.y1};
        for (Index k = 0; k < grid->size(); ++k) {
            if (grid->in_box(k, box)) {
                apply(k, patch.values);
            }
        }
    }
    return field;
}

std::int64_t whole_ratio(double a, double b)
{
    if (!(std::isfinite(a) && std::isfinite(b) && b > 0 && a >= 0)) {
        return -1;
    }
    const double r = a / b;
    const double rounded = std::round(r);
    if (std::abs(r - rounded) > 1e-9 * std::max(1.0, rounded)) {
        return -1;
    }
    return static_cast<std::int64_t>(rounded);
}

std::vector<Diagnostic> Scenario::validate() const
{
    std::vector<Diagnostic> out;
    auto add = [&](std::string path, std::string message) { out.push_back({std::move(path), std::move(message)}); };

    if (schema_version != kSchemaVersion) {
        add("schema_version", "unsupported version " + std::to_string(schema_version) + " (expected " +
                                  std::to_string(kSchemaVersion) + ")");
    }
    if (!(std::isfinite(dt) && dt > 0)) {
        add("dt", "must be finite and > 0");
    }
    if (!(std::isfinite(horizon) && horizon >= 0)) {
        add("horizon", "must be finite and >= 0");
    }
    if (!(std::isfinite(snapshot_interval) && snapshot_interval > 0)) {
        add("snapshot_interval", "must be finite and > 0");
    }
    if (std::isfinite(dt) && dt > 0) {
        if (std::isfinite(snapshot_interval) && snapshot_interval > 0 && whole_ratio(snapshot_interval, dt) < 1) {
            add("snapshot_interval", "must be a positive whole multiple of dt");
        }
        if (std::isfinite(horizon) && horizon >= 0 && whole_ratio(horizon, dt) < 0) {
            add("horizon", "must be a whole multiple of dt");
        }
    }

    const auto p = params.validate("params");
    out.insert(out.end(), p.begin(), p.end());
    const auto s = sir_params.validate("sir_params");
    out.insert(out.end(), s.begin(), s.end());

    if (flags.frozen_n && !(std::isfinite(*flags.frozen_n) && *flags.frozen_n >= 0)) {
        add("flags.frozen_n", "must be finite and >= 0");
    }
    if (!(std::isfinite(flags.negativity_tolerance) && flags.negativity_tolerance >= 0)) {
        add("flags.negativity_tolerance", "must be finite and >= 0");
    }
    if (integrator == Integrator::kImex && grid.dim == 2) {
        add("integrator", "imex is only available on 1D grids");
    }

    GridPtr g;
    try {
        g = grid.build();
    }
    catch (const ValidationError& e) {
        out.insert(out.end(), e.diagnostics().begin(), e.diagnostics().end());
    }

    for (const auto& [slot, value] : initial.background) {
        if (!(std::isfinite(value) && value >= 0)) {
            add("initial.background." + std::string(slot_name(slot)), "must be finite and >= 0");
        }
    }
    for (const auto& [name, values] : initial.regions) {
        if (g && g->region_index(name) < 0) {
            add("initial.regions." + name, "unknown region");
        }
        for (const auto& [slot, value] : values) {
            if (!(std::isfinite(value) && value >= 0)) {
                add("initial.regions." + name + "." + std::string(slot_name(slot)), "must be finite and >= 0");
            }
        }
    }
    for (std::size_t k = 0; k < initial.patches.size(); ++k) {
        const auto& patch = initial.patches[k];
        const std::string path = "initial.patches[" + std::to_string(k) + "]";
        if (!(patch.x1 >= patch.x0) || (grid.dim == 2 && !(patch.y1 >= patch.y0))) {
            add(path, "box bounds must satisfy lower <= upper");
        }
        for (const auto& [slot, value] : patch.values) {
            if (!(std::isfinite(value) && value >= 0)) {
                add(path + "." + std::string(slot_name(slot)), "must be finite and >= 0");
            }
        }
    }
    if (initial.per_node) {
        if (g && static_cast<Index>(initial.per_node->size()) != g->size()) {
            add("initial.per_node", "expected " + std::to_string(g->size()) + " rows, got " +
                                        std::to_string(initial.per_node->size()));
        }
        for (std::size_t k = 0; k < initial.per_node->size(); ++k) {
            for (int slot = 0; slot < kSlots; ++slot) {
                const double value = (*initial.per_node)[k][static_cast<std::size_t>(slot)];
                if (!(std::isfinite(value) && value >= 0)) {
                    add("initial.per_node[" + std::to_string(k) + "]." + std::string(slot_name(slot)),
                        "must be finite and >= 0");
                }
            }
        }
    }
    return out;
}

RhsConfig<double> Scenario::rhs_config() const
{
    RhsConfig<double> cfg;
    cfg.model = model;
    cfg.params = params;
    cfg.sir = sir_params;
    cfg.form = flags.diffusion_form;
    cfg.population.frozen = flags.frozen_n;
    return cfg;
}

StepControl Scenario::step_control() const
{
    StepControl c;
    c.dt = dt;
    c.guard_alpha = flags.guard_alpha;
    c.guard_cfl = flags.guard_cfl;
    c.strict = flags.strict_guards;
    c.clamp_negative = flags.clamp_negative;
    c.negativity_tolerance = flags.negativity_tolerance;
    return c;
}

std::int64_t Scenario::step_count() const
{
    return whole_ratio(horizon, dt);
}

std::int64_t Scenario::snapshot_stride() const
{
    return whole_ratio(snapshot_interval, dt);
}

std::string to_string(ModelKind kind)
{
    return kind == ModelKind::kSir ? "sir" : "covid7";
}

std::string to_string(Integrator integrator)
{
    switch (integrator) {
    case Integrator::kRk4:
        return "rk4";
    case Integrator::kEuler:
        return "euler";
    case Integrator::kImex:
        return "imex";
    }
    return "rk4";
}

std::string to_string(DiffusionForm form)
{
    return form == DiffusionForm::kNodal ? "nodal" : "flux";
}

std::optional<ModelKind> model_kind_from_string(const std::string& s)
{
    if (s == "covid7") {
        return ModelKind::kCovid7;
    }
    if (s == "sir") {
        return ModelKind::kSir;
    }
    return std::nullopt;
}

std::optional<Integrator> integrator_from_string(const std::string& s)
{
    if (s == "rk4") {
        return Integrator::kRk4;
    }
    if (s == "euler") {
        return Integrator::kEuler;
    }
    if (s == "imex") {
        return Integrator::kImex;
    }
    return std::nullopt;
}

std::optional<DiffusionForm> diffusion_form_from_string(const std::string& s)
{
    if (s == "flux") {
        return DiffusionForm::kFlux;
    }
    if (s == "nodal") {
        return DiffusionForm::kNodal;
    }
    return std::nullopt;
}

} // namespace rdepi
