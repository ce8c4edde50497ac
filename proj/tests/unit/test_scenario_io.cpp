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
#include "rdepi/scenario_io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace rdepi;

namespace
{

bool has_path(const ValidationError& e, const std::string& path)
{
    return std::any_of(e.diagnostics().begin(), e.diagnostics().end(), [&](const Diagnostic& d) {
        return d.path == path;
    });
}

template <typename F>
ValidationError expect_validation_error(F&& f)
{
    try {
        f();
    }
    catch (const ValidationError& e) {
        return e;
    }
    ADD_FAILURE() << "expected ValidationError";
    return ValidationError("", "");
}

SimulateOptions quiet()
{
    SimulateOptions o;
    o.warn = [](const std::string&) {};
    return o;
}

// Single-region 1D run where D only decays.
TimeSeries decaying_d_series(double d_value, double horizon = 3.0)
{
    Scenario s;
    s.grid.regions          = {{"city", 0.0, 1.0, 0, 0}};
    s.initial.background    = {{kD, d_value}};
    s.params.mu             = 0.3;
    s.horizon               = horizon;
    s.dt                    = 0.5;
    s.snapshot_interval     = 1.0;
    return simulate(s, quiet());
}

} // namespace

TEST(TestLoadScenario, minimal_document_takes_defaults)
{
    auto s = load_scenario(R"({"schema_version": 1})");
    Scenario defaults;
    EXPECT_EQ(s, defaults);
}

TEST(TestLoadScenario, schema_version_required)
{
    auto e = expect_validation_error([] { load_scenario("{}"); });
    EXPECT_TRUE(has_path(e, "schema_version"));
}

TEST(TestLoadScenario, negative_dt_names_dt)
{
    auto e = expect_validation_error([] { load_scenario(R"({"schema_version": 1, "dt": -1})"); });
    EXPECT_TRUE(has_path(e, "dt"));
}

TEST(TestLoadScenario, closed_schema_collects_every_problem)
{
    auto e = expect_validation_error([] {
        load_scenario(R"({"schema_version": 1, "colour": 3, "params": {"theta": "x", "nu_q": 0.1},
                          "integrator": "leapfrog"})");
    });
    EXPECT_TRUE(has_path(e, "colour"));
    EXPECT_TRUE(has_path(e, "params.theta"));
    EXPECT_TRUE(has_path(e, "params.nu_q"));
    EXPECT_TRUE(has_path(e, "integrator"));
}

TEST(TestLoadScenario, malformed_json_rejected)
{
    EXPECT_THROW(load_scenario("{\"schema_version\": "), ValidationError);
}

TEST(TestLoadScenario, invariant_violations)
{
    auto e = expect_validation_error([] {
        load_scenario(R"({"schema_version": 1, "params": {"mu": 1.5}, "horizon": 1.0, "dt": 0.3,
                          "initial": {"background": {"S": -1}}})");
    });
    EXPECT_TRUE(has_path(e, "params.mu"));
    EXPECT_FALSE(e.diagnostics().empty());
    EXPECT_GE(e.diagnostics().size(), 2u);
}

TEST(TestSaveScenario, round_trip_is_identity)
{
    for (const auto& info : preset_list()) {
        auto s = preset(info.name);
        EXPECT_EQ(load_scenario(save_scenario(s)), s) << info.name;
    }
    Scenario custom;
    custom.grid.dim            = 2;
    custom.grid.nodes_y        = 4;
    custom.flags.frozen_n      = 1.0;
    custom.flags.diffusion_form = DiffusionForm::kNodal;
    custom.integrator          = Integrator::kEuler;
    custom.initial.per_node    = std::vector<std::array<double, kSlots>>(12, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    custom.params.theta        = 0.1 + 1e-17;
    custom.metadata["k"]       = "v";
    EXPECT_EQ(load_scenario(save_scenario(custom)), custom);
}

TEST(TestPresets, listed_and_valid)
{
    auto list = preset_list();
    std::vector<std::string> names;
    for (const auto& p : list) {
        names.push_back(p.name);
        EXPECT_FALSE(p.description.empty());
        EXPECT_TRUE(preset(p.name).validate().empty()) << p.name;
    }
    for (auto expected : {"nanjing-ode", "corridor-1d", "jiangsu-2d", "sir-demo"}) {
        EXPECT_NE(std::find(names.begin(), names.end(), expected), names.end()) << expected;
    }
    auto e = expect_validation_error([] { preset("atlantis"); });
    EXPECT_NE(std::string(e.what()).find("nanjing-ode"), std::string::npos);
}

TEST(TestPresets, nanjing_has_no_diffusion)
{
    auto s = preset("nanjing-ode");
    EXPECT_EQ(s.params.max_diffusivity(), 0.0);
    EXPECT_EQ(resolve_scenario("preset:nanjing-ode"), s);
}

TEST(TestPresets, sir_demo_conserves_total)
{
    auto ts = simulate(preset("sir-demo"), quiet());
    const auto& first = ts.snapshots.front().field;
    const double n0   = first.values()(0, kS) + first.values()(0, kI) + first.values()(0, kR);
    for (const auto& snap : ts.snapshots) {
        const double n = snap.field.values()(0, kS) + snap.field.values()(0, kI) + snap.field.values()(0, kR);
        EXPECT_NEAR(n, n0, 1e-10 * n0);
    }
}

TEST(TestPresets, corridor_seeds_only_nanjing)
{
    auto s      = preset("corridor-1d");
    auto grid   = s.grid.build();
    auto field  = s.initial.materialize(grid);
    const int nj = grid->region_index("nanjing");
    for (Index k = 0; k < grid->size(); ++k) {
        for (int slot : {kE, kA, kI}) {
            if (grid->region(k) != nj) {
                EXPECT_EQ(field.values()(k, slot), 0.0);
            }
        }
    }
    EXPECT_GT(region_integral(field.compartment(kE), *grid, nj), 0.0);
}

TEST(TestResolveScenario, missing_file)
{
    EXPECT_THROW(resolve_scenario("/nonexistent/scenario.json"), ValidationError);
}

TEST(TestLoadObserved, empty_and_valid)
{
    EXPECT_TRUE(load_observed("").records.empty());
    EXPECT_TRUE(load_observed("day,region,confirmed_hospitalized\n").records.empty());
    auto obs = load_observed("day,region,confirmed_hospitalized,recovered,deaths\n"
                             "1,nanjing,5,0,0\n"
                             "2,nanjing,8,,1\n"
                             "1,yangzhou,2,1,\n");
    ASSERT_EQ(obs.records.size(), 3u);
    EXPECT_EQ(obs.records[1], (ObservedRecord{2, "nanjing", 8, std::nullopt, 1.0}));
    EXPECT_EQ(obs.regions(), (std::vector<std::string>{"nanjing", "yangzhou"}));
}

TEST(TestLoadObserved, errors_name_rows)
{
    auto e = expect_validation_error([] {
        load_observed("day,region,confirmed_hospitalized\n3,a,1\n2,a,4\n4,a,x\n");
    });
    EXPECT_TRUE(has_path(e, "row 3"));
    EXPECT_TRUE(has_path(e, "row 4"));
    EXPECT_THROW(load_observed("when,where,what\n1,a,1\n"), ValidationError);
    EXPECT_THROW(load_observed("day,region,confirmed_hospitalized\n1,a\n"), ValidationError);
    EXPECT_THROW(load_observed("day,region,confirmed_hospitalized\n1,a,-2\n"), ValidationError);
}

TEST(TestFitMetrics, exact_match_and_offset)
{
    auto ts = decaying_d_series(4.0);
    std::string csv = "day,region,confirmed_hospitalized\n";
    for (int day = 0; day <= 3; ++day) {
        csv += std::to_string(day) + ",city," + format_exact(region_series(ts, "city", kD)[day]) + "\n";
    }
    auto exact = fit_metrics(ts, load_observed(csv));
    ASSERT_EQ(exact.regions.size(), 1u);
    EXPECT_EQ(exact.regions[0].rmse, 0.0);
    EXPECT_EQ(exact.regions[0].peak_day_difference, 0.0);
    EXPECT_EQ(exact.regions[0].samples, 4u);

    std::string shifted = "day,region,confirmed_hospitalized\n";
    for (int day = 0; day <= 3; ++day) {
        shifted += std::to_string(day) + ",town," +
                   format_exact(region_series(ts, "city", kD)[day] + 0.25) + "\n";
    }
    auto offset = fit_metrics(ts, load_observed(shifted), parse_region_map("town=city"));
    EXPECT_NEAR(offset.regions[0].rmse, 0.25, 1e-12);
    EXPECT_EQ(offset.regions[0].simulated_region, "city");
    EXPECT_NEAR(offset.rmse, 0.25, 1e-12);
}

TEST(TestFitMetrics, shifted_peak)
{
    auto ts = decaying_d_series(4.0, 6.0);
    auto sim = region_series(ts, "city", kD);
    ASSERT_EQ(sim.size(), 7u);
    std::string csv = "day,region,confirmed_hospitalized\n";
    for (int day = 0; day <= 6; ++day) {
        const double v = day < 2 ? sim[0] * 0.5 : sim[static_cast<std::size_t>(day - 2)];
        csv += std::to_string(day) + ",city," + format_exact(v) + "\n";
    }
    auto m = fit_metrics(ts, load_observed(csv));
    EXPECT_EQ(m.regions[0].observed_peak_day, 2.0);
    EXPECT_EQ(m.regions[0].simulated_peak_day, 0.0);
    EXPECT_EQ(m.regions[0].peak_day_difference, -2.0);
}

TEST(TestFitMetrics, unknown_region_or_day)
{
    auto ts = decaying_d_series(1.0);
    EXPECT_THROW(fit_metrics(ts, load_observed("day,region,confirmed_hospitalized\n1,mars,1\n")), ValidationError);
    EXPECT_THROW(fit_metrics(ts, load_observed("day,region,confirmed_hospitalized\n9,city,1\n")), ValidationError);
    EXPECT_THROW(parse_region_map("a=b,c"), ValidationError);
}

TEST(TestTimeseriesCsv, zero_horizon_single_time)
{
    auto s    = preset("corridor-1d");
    s.horizon = 0;
    auto csv  = write_timeseries(simulate(s, quiet()));
    auto lines = std::count(csv.nodes.begin(), csv.nodes.end(), '\n');
    EXPECT_EQ(lines, 1 + 61);
    EXPECT_EQ(csv.nodes.substr(0, csv.nodes.find('\n')),
              "time,node_x,region,S,Q,E,A,I,D,R,cum_death_i,cum_death_d");
    EXPECT_EQ(std::count(csv.regions.begin(), csv.regions.end(), '\n'), 1 + 3);
}

TEST(TestTimeseriesCsv, read_back_is_exact)
{
    auto s    = preset("jiangsu-2d");
    s.horizon = 2;
    auto ts   = simulate(s, quiet());
    auto csv  = write_timeseries(ts);
    EXPECT_EQ(csv.nodes.substr(0, csv.nodes.find('\n')),
              "time,node_x,node_y,region,S,Q,E,A,I,D,R,cum_death_i,cum_death_d");
    auto back = read_timeseries(csv.nodes, ts.grid);
    ASSERT_EQ(back.size(), ts.snapshots.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        EXPECT_EQ(back[k].time, ts.snapshots[k].time);
        EXPECT_EQ(back[k].field, ts.snapshots[k].field);
    }
}

TEST(TestTimeseriesCsv, aggregate_equals_region_integral)
{
    auto s    = preset("corridor-1d");
    s.horizon = 3;
    auto ts   = simulate(s, quiet());
    auto csv  = write_timeseries(ts);
    std::istringstream in(csv.regions);
    std::string line;
    std::getline(in, line);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        ASSERT_EQ(cells.size(), 2u + kSlots);
        const double time = std::stod(cells[0]);
        const auto snap = std::find_if(ts.snapshots.begin(), ts.snapshots.end(), [&](const Snapshot& sn) {
            return sn.time == time;
        });
        ASSERT_NE(snap, ts.snapshots.end());
        const int region = ts.grid->region_index(cells[1]);
        for (int slot = 0; slot < kSlots; ++slot) {
            const double expected = region_integral(snap->field.compartment(slot), *ts.grid, region);
            EXPECT_EQ(std::stod(cells[2 + static_cast<std::size_t>(slot)]), expected);
        }
        ++rows;
    }
    EXPECT_EQ(rows, 3 * ts.snapshots.size());
}

TEST(TestFormatExact, round_trips_doubles)
{
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
        EXPECT_EQ(std::stod(format_exact(v)), v);
    }
}
