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
#ifndef RDEPI_SCENARIO_HPP
#define RDEPI_SCENARIO_HPP

#include "rdepi/integrators.hpp"

#include <map>
#include <string>
#include <vector>

namespace rdepi
{

inline constexpr int kSchemaVersion = 1;

struct GridSpec
{
    int dim{1};
    double extent_x{1.0};
    Index nodes_x{3};
    double extent_y{1.0};
    Index nodes_y{3};
    std::vector<RegionBox> regions;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

    GridPtr build() const;
};

/// Values assigned to a subset of slots; unlisted slots are left untouched.
using SlotValues = std::map<int, double>;

struct InitialPatch
{
    double x0{0};
    double x1{0};
    double y0{0};
    double y1{0};
    SlotValues values;

    friend bool operator==(const InitialPatch&, const InitialPatch&) = default;
};

/**
 * Initial field recipe, applied in order: background on every node, then
 * per-region values, then rectangular patches. An explicit per-node table
 * replaces all of it.
 */
struct InitialSpec
{
    SlotValues background;
    std::vector<std::pair<std::string, SlotValues>> regions;
    std::vector<InitialPatch> patches;
    std::optional<std::vector<std::array<double, kSlots>>> per_node;

    friend bool operator==(const InitialSpec&, const InitialSpec&) = default;

    CompartmentField<double> materialize(const GridPtr& grid) const;
};

struct ScenarioFlags
{
    /// Verification only: hold N at this constant in the diffusion coefficient.
    std::optional<double> frozen_n;
    bool clamp_negative{false};
    bool strict_guards{false};
    bool guard_alpha{true};
    bool guard_cfl{true};
    DiffusionForm diffusion_form{DiffusionForm::kFlux};
    /// Warn when a live compartment drops below -tolerance * (initial max).
    double negativity_tolerance{1e-9};

    friend bool operator==(const ScenarioFlags&, const ScenarioFlags&) = default;
};

/// Step size and guard policy of a run.
struct StepControl
{
    double dt{0.1};
    bool guard_alpha{true};
    bool guard_cfl{true};
    bool strict{false};
    bool clamp_negative{false};
    double negativity_tolerance{1e-9};
};

struct Scenario
{
    int schema_version{kSchemaVersion};
    std::string name;
    std::string description;
    ModelKind model{ModelKind::kCovid7};
    GridSpec grid;
    ModelParams<double> params;
    SirParams<double> sir_params;
    InitialSpec initial;
    double horizon{1.0};
    double dt{0.1};
    Integrator integrator{Integrator::kRk4};
    double snapshot_interval{1.0};
    ScenarioFlags flags;
    std::map<std::string, std::string> metadata;

    friend bool operator==(const Scenario&, const Scenario&) = default;

    /// Every invariant violation, with field paths.
    std::vector<Diagnostic> validate() const;

    RhsConfig<double> rhs_config() const;
    StepControl step_control() const;

    /// Number of fixed steps covering the horizon.
    std::int64_t step_count() const;
    /// Steps between snapshots.
    std::int64_t snapshot_stride() const;
};

/// Ratio a/b when it is a whole number to relative tolerance 1e-9, else -1.
std::int64_t whole_ratio(double a, double b);

std::string to_string(ModelKind kind);
std::string to_string(Integrator integrator);
std::string to_string(DiffusionForm form);
std::optional<ModelKind> model_kind_from_string(const std::string& s);
std::optional<Integrator> integrator_from_string(const std::string& s);
std::optional<DiffusionForm> diffusion_form_from_string(const std::string& s);

} // namespace rdepi

#endif // RDEPI_SCENARIO_HPP
