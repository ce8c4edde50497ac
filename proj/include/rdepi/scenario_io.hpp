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
#ifndef RDEPI_SCENARIO_IO_HPP
#define RDEPI_SCENARIO_IO_HPP

#include "rdepi/simulation.hpp"

#include <nlohmann/json.hpp>

#include <string_view>

namespace rdepi
{

/**
 * Parse a scenario document. The schema is closed: unknown keys, type errors
 * and invariant violations are all collected and thrown together as one
 * ValidationError. Absent keys take the Scenario defaults.
 */
Scenario load_scenario(std::string_view document);
Scenario scenario_from_json(const nlohmann::json& j);

/// Every field is written, so save/load is the identity.
std::string save_scenario(const Scenario& scenario);
nlohmann::json scenario_to_json(const Scenario& scenario);

struct PresetInfo
{
    std::string name;
    std::string description;
};

std::vector<PresetInfo> preset_list();

/// Throws ValidationError listing the valid names when `name` is unknown.
Scenario preset(const std::string& name);

/// "preset:NAME" or a path to a scenario file.
Scenario resolve_scenario(const std::string& spec);

std::string read_text_file(const std::string& path);

struct ObservedRecord
{
    std::int64_t day{0};
    std::string region;
    double confirmed_hospitalized{0};
    std::optional<double> recovered;
    std::optional<double> deaths;

    friend bool operator==(const ObservedRecord&, const ObservedRecord&) = default;
};

struct ObservedSeries
{
    std::vector<ObservedRecord> records;

    /// Region names in order of first appearance.
    std::vector<std::string> regions() const;
};

/// CSV with header day,region,confirmed_hospitalized[,recovered,deaths].
ObservedSeries load_observed(std::string_view document);

struct RegionFit
{
    std::string observed_region;
    std::string simulated_region;
    std::size_t samples{0};
    double rmse{0};
    double nrmse{0}; ///< rmse / (max - min of observed); rmse / mean if the range is 0
    double simulated_peak_day{0};
    double observed_peak_day{0};
    double peak_day_difference{0}; ///< simulated - observed
};

struct FitMetrics
{
    std::vector<RegionFit> regions;
    double rmse{0}; ///< pooled over all samples
};

/// Observed region name -> simulated region name; unmapped names map to themselves.
using RegionMap = std::map<std::string, std::string>;

/// Parses "obs=sim,obs2=sim2".
RegionMap parse_region_map(const std::string& text);

/**
 * Compares the regional integral of D at each observed day with the observed
 * confirmed-hospitalized counts. Every observed day must coincide with a
 * snapshot time.
 */
FitMetrics fit_metrics(const TimeSeries& series, const ObservedSeries& observed, const RegionMap& map = {});

nlohmann::json to_json(const FitMetrics& metrics);

/// Regional integral of one compartment at every snapshot.
std::vector<double> region_series(const TimeSeries& series, const std::string& region, int slot);

struct TimeseriesCsv
{
    std::string nodes;   ///< time,node_x[,node_y],region,S,...,cum_death_d
    std::string regions; ///< time,region,S,...,cum_death_d (regional integrals)
};

/// Every number is printed with 17 significant digits.
TimeseriesCsv write_timeseries(const TimeSeries& series);

/// Inverse of the node-level CSV on the same grid.
std::vector<Snapshot> read_timeseries(std::string_view nodes_csv, const GridPtr& grid);

/// %.17g
std::string format_exact(double v);

} // namespace rdepi

#endif // RDEPI_SCENARIO_IO_HPP
