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
#include "rdepi/cli.hpp"

#include "rdepi/scenario_io.hpp"
#include "rdepi/verification.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rdepi
{

namespace
{

using nlohmann::json;

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError(path.string(), "cannot write file");
    }
    out << text;
    if (!out) {
        throw ValidationError(path.string(), "write failed");
    }
}

void emit_json(const json& j, const std::string& path, std::ostream& out)
{
    const std::string text = j.dump(2) + "\n";
    if (path.empty()) {
        out << text;
    }
    else {
        write_file(path, text);
    }
}

std::string fixed(const char* format, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

AlphaEstimate scenario_alpha(const Scenario& scenario)
{
    const auto samples = alpha_samples(scenario);
    return estimate_alpha(scenario.rhs_config(), samples);
}

json guards_json(const GuardReport& g, double dt)
{
    return {{"dt", dt},
            {"alpha_known", g.alpha_known},
            {"alpha_term", std::isfinite(g.bound.alpha_term) ? json(g.bound.alpha_term) : json(nullptr)},
            {"cfl_term", std::isfinite(g.bound.cfl_term) ? json(g.bound.cfl_term) : json(nullptr)},
            {"cap", g.bound.cap},
            {"bound", g.bound.bound},
            {"margin_alpha", g.margin_alpha},
            {"margin_cfl", g.margin_cfl},
            {"alpha_ok", g.alpha_ok},
            {"cfl_ok", g.cfl_ok},
            {"warnings", g.warnings}};
}

json abort_json(const std::optional<AbortInfo>& abort)
{
    if (!abort) {
        return nullptr;
    }
    return {{"step", abort->step},
            {"last_good_time", abort->last_good_time},
            {"node", abort->node},
            {"compartment", std::string(slot_name(abort->slot))},
            {"message", abort->message}};
}

std::string gnuplot_script(const TimeSeries& ts)
{
    std::string s = "# gnuplot script: hospitalized (D) per region from regions.csv\n"
                    "set datafile separator ','\n"
                    "set key autotitle columnhead\n"
                    "set xlabel 'day'\n"
                    "set ylabel 'D (persons)'\n"
                    "plot ";
    const auto& names = ts.grid->region_names();
    for (std::size_t r = 0; r < names.size(); ++r) {
        s += (r == 0 ? "" : ", \\\n     ");
        s += "'regions.csv' using 1:($2 eq '" + names[r] + "' ? $8 : 1/0) with lines title '" + names[r] + "'";
    }
    s += "\n";
    return s;
}

void print_order_table(const OrderReport& report, std::ostream& os)
{
    os << (report.axis == StudyAxis::kSpatial ? "h" : "dt") << "            L2 error        Linf error      order(L2)\n";
    std::size_t order_index = 0;
    for (std::size_t k = 0; k < report.levels.size(); ++k) {
        const auto& level = report.levels[k];
        os << fixed("%-13.6g", level.step) << " " << fixed("%-15.6e", level.errors.max.l2) << " "
           << fixed("%-15.6e", level.errors.max.linf) << " ";
        if (level.discarded) {
            os << "discarded";
        }
        else if (k > 0 && !report.levels[k - 1].discarded && order_index < report.orders_l2.size()) {
            os << fixed("%.4f", report.orders_l2[order_index++]);
        }
        else {
            os << "-";
        }
        os << "\n";
    }
    for (const auto& notice : report.notices) {
        os << "note: " << notice << "\n";
    }
}

struct SimulateArgs
{
    std::string scenario;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::string integrator;
    std::string out_dir = "rdepi-out";
    bool strict = false;
    bool gnuplot = false;
    bool skip_alpha = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err)
{
    Scenario s = resolve_scenario(a.scenario);
    if (a.dt) {
        s.dt = *a.dt;
    }
    if (a.horizon) {
        s.horizon = *a.horizon;
    }
    if (!a.integrator.empty()) {
        s.integrator = *integrator_from_string(a.integrator);
    }
    if (a.strict) {
        s.flags.strict_guards = true;
    }
    if (auto errors = s.validate(); !errors.empty()) {
        throw ValidationError(std::move(errors));
    }

    std::optional<AlphaEstimate> alpha;
    if (!a.skip_alpha && s.flags.guard_alpha) {
        alpha = scenario_alpha(s);
    }
    SimulateOptions options;
    if (alpha) {
        options.alpha = alpha->alpha;
    }
    options.warn = [&err](const std::string& msg) { err << "warning: " << msg << "\n"; };
    const TimeSeries ts = simulate(s, options);

    const std::filesystem::path dir(a.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ValidationError(a.out_dir, "cannot create output directory: " + ec.message());
    }
    const TimeseriesCsv csv = write_timeseries(ts);
    write_file(dir / "timeseries.csv", csv.nodes);
    write_file(dir / "regions.csv", csv.regions);
    std::vector<std::string> outputs = {"timeseries.csv", "regions.csv", "manifest.json"};
    if (a.gnuplot) {
        write_file(dir / "plot.gp", gnuplot_script(ts));
        outputs.push_back("plot.gp");
    }

    const LedgerReport ledger = mass_ledger(ts);
    json alpha_json = nullptr;
    if (alpha) {
        alpha_json = {{"value", alpha->alpha},
                      {"per_sample", alpha->per_sample},
                      {"iterations", alpha->max_iterations_used},
                      {"converged", alpha->converged},
                      {"note", "estimate from finite-difference Jacobian probes, not a bound"}};
    }
    const json manifest = {
        {"tool", "rdepi"},
        {"scenario", scenario_to_json(s)},
        {"steps", s.step_count()},
        {"snapshots", ts.snapshots.size()},
        {"alpha", alpha_json},
        {"guards", guards_json(ts.guards, s.dt)},
        {"ledger",
         {{"initial_augmented_total", ledger.augmented_totals.front()},
          {"final_augmented_total", ledger.augmented_totals.back()},
          {"final_live_total", ledger.live_totals.back()},
          {"final_cumulative_deaths", ledger.cumulative_deaths.back()},
          {"max_relative_drift", ledger.max_relative_drift}}},
        {"negativity_warnings", ts.negativity_warnings},
        {"clamped_mass", ts.clamped_mass},
        {"abort", abort_json(ts.abort)},
        {"outputs", outputs}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    if (ts.abort) {
        err << "error: integration aborted at step " << ts.abort->step << ": " << ts.abort->message
            << "; output holds the state up to t = " << format_exact(ts.abort->last_good_time) << "\n";
        return kExitNumerical;
    }
    out << "wrote " << ts.snapshots.size() << " snapshots (" << s.step_count() << " steps) to "
        << dir.string() << "\n";
    return kExitOk;
}

struct OrderArgs
{
    std::string axis;
    int levels = 4;
    std::string out_file;
    std::string scenario;
    std::string integrator = "rk4";
    int dim = 1;
    bool against_rk4 = false;
};

int cmd_order_check(const OrderArgs& a, std::ostream& out, std::ostream& err)
{
    OrderReport report;
    if (a.axis == "temporal") {
        if (a.against_rk4) {
            Scenario s = a.scenario.empty() ? smooth_diffusion_scenario() : resolve_scenario(a.scenario);
            s.integrator = *integrator_from_string(a.integrator);
            report = cross_integrator_study(s, default_temporal_steps(a.levels));
        }
        else {
            Scenario s = a.scenario.empty() ? temporal_study_scenario() : resolve_scenario(a.scenario);
            s.integrator = *integrator_from_string(a.integrator);
            report = temporal_order_study(s, default_temporal_steps(a.levels));
        }
    }
    else {
        SpatialStudy study = default_spatial_study(a.levels);
        study.dim = a.dim;
        study.integrator = *integrator_from_string(a.integrator);
        if (study.integrator == Integrator::kImex && study.dim == 2) {
            throw ValidationError("integrator", "imex is only available on 1D grids");
        }
        report = spatial_order_study(study);
    }
    if (a.out_file.empty()) {
        print_order_table(report, err);
        emit_json(to_json(report), "", out);
    }
    else {
        emit_json(to_json(report), a.out_file, out);
        print_order_table(report, out);
    }
    return kExitOk;
}

struct StabilityArgs
{
    std::string scenario;
    double dt_factor = 0.5;
    std::int64_t steps = 1000;
    std::string out_file;
};

int cmd_stability_check(const StabilityArgs& a, std::ostream& out, std::ostream& err)
{
    Scenario s;
    if (a.scenario.empty()) {
        s = contractive_scenario(a.dt_factor, a.steps);
    }
    else {
        if (!(std::isfinite(a.dt_factor) && a.dt_factor > 0)) {
            throw ValidationError("dt-factor", "must be finite and > 0");
        }
        s = resolve_scenario(a.scenario);
        const GridPtr grid = s.grid.build();
        const StepBound b = max_stable_dt(s.rhs_config(), s.initial.materialize(grid), 0.0, 1.0, s.integrator);
        if (!std::isfinite(b.cfl_term)) {
            throw ValidationError("dt-factor", "scenario has no explicit diffusion limit to scale");
        }
        s.dt = a.dt_factor * b.cfl_term;
        s.horizon = static_cast<double>(a.steps) * s.dt;
        s.snapshot_interval = s.horizon;
    }
    s.flags.strict_guards = false;

    SimulateOptions options;
    options.warn = [&err](const std::string& msg) { err << "warning: " << msg << "\n"; };
    const AlphaEstimate alpha = scenario_alpha(s);
    options.alpha = alpha.alpha;
    const TimeSeries ts = simulate(s, options);
    const StabilityReport report = stability_monitor(ts, alpha.alpha, s.dt);
    emit_json(to_json(report), a.out_file, out);

    if (report.aborted) {
        err << "error: integration aborted at step " << ts.abort->step << ": " << ts.abort->message << "\n";
    }
    if (report.first_violation) {
        err << "norm increased at step " << *report.first_violation << "\n";
    }
    if (report.aborted || (report.within_guards() && !report.monotone)) {
        return kExitNumerical;
    }
    return kExitOk;
}

struct CompareArgs
{
    std::string scenario;
    std::string observed;
    std::string region_map;
    std::string out_file;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err)
{
    const Scenario s = resolve_scenario(a.scenario);
    const ObservedSeries obs = load_observed(read_text_file(a.observed));
    const RegionMap map = parse_region_map(a.region_map);
    SimulateOptions options;
    options.warn = [&err](const std::string& msg) { err << "warning: " << msg << "\n"; };
    const TimeSeries ts = simulate(s, options);
    if (ts.abort) {
        err << "error: integration aborted at step " << ts.abort->step << ": " << ts.abort->message << "\n";
        return kExitNumerical;
    }
    emit_json(to_json(fit_metrics(ts, obs, map)), a.out_file, out);
    return kExitOk;
}

} // namespace

bool apply_thread_override()
{
    const char* value = std::getenv(kThreadsEnv);
    if (value == nullptr || *value == '\0') {
        return true;
    }
    char* end = nullptr;
    const long n = std::strtol(value, &end, 10);
    if (*end != '\0' || n < 1) {
        return false;
    }
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(n));
#endif
    return true;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Reaction-diffusion solver for a seven-compartment epidemic model", "rdepi"};
    app.require_subcommand(1);
    app.footer(std::string("Exit codes: 0 ok, 1 usage error, 2 validation error, 3 numerical abort.\n") +
               "Environment: " + kThreadsEnv + " sets the worker thread count.");

    const auto integrator_names = CLI::IsMember({"rk4", "euler", "imex"});

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a scenario and write time-series CSVs and a run manifest");
    simulate_cmd->add_option("--scenario", sim.scenario, "Scenario JSON file or preset:NAME")->required();
    simulate_cmd->add_option("--dt", sim.dt, "Override the time step (days)");
    simulate_cmd->add_option("--T", sim.horizon, "Override the horizon (days)");
    simulate_cmd->add_option("--integrator", sim.integrator, "Override the integrator")->check(integrator_names);
    simulate_cmd->add_option("--out", sim.out_dir, "Output directory")->capture_default_str();
    simulate_cmd->add_flag("--strict-guards", sim.strict, "Fail instead of warning when dt exceeds a stability bound");
    simulate_cmd->add_flag("--gnuplot", sim.gnuplot, "Also write plot.gp for the regional D curves");
    simulate_cmd->add_flag("--no-alpha", sim.skip_alpha, "Skip the one-sided Lipschitz estimate and its guard");

    OrderArgs order;
    auto* order_cmd = app.add_subcommand("order-check", "Observed order of accuracy under step refinement");
    order_cmd->add_option("--axis", order.axis, "Refinement axis")
        ->required()
        ->check(CLI::IsMember({"temporal", "spatial"}));
    order_cmd->add_option("--levels", order.levels, "Number of refinement levels (>= 3)")
        ->capture_default_str()
        ->check(CLI::Range(3, 8));
    order_cmd->add_option("--out", order.out_file, "Write the report JSON here (default: standard output)");
    order_cmd->add_option("--scenario", order.scenario,
                          "Temporal study scenario without diffusion (default: built-in normalized outbreak)");
    order_cmd->add_option("--integrator", order.integrator, "Integrator under study")
        ->capture_default_str()
        ->check(integrator_names);
    order_cmd->add_flag("--against-rk4", order.against_rk4,
                        "Temporal axis: refine on a smooth diffusive 1D scenario against a fine RK4 run");
    order_cmd->add_option("--dim", order.dim, "Spatial study grid dimension")
        ->capture_default_str()
        ->check(CLI::IsMember({1, 2}));

    StabilityArgs stab;
    auto* stability_cmd =
        app.add_subcommand("stability-check", "Monitor the discrete L2 norm at dt = factor x explicit diffusion limit");
    stability_cmd->add_option("--scenario", stab.scenario,
                              "Scenario JSON file or preset:NAME (default: built-in contractive configuration)");
    stability_cmd->add_option("--dt-factor", stab.dt_factor, "dt as a multiple of the explicit diffusion limit")
        ->capture_default_str();
    stability_cmd->add_option("--steps", stab.steps, "Number of steps")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    stability_cmd->add_option("--out", stab.out_file, "Write the report JSON here (default: standard output)");

    CompareArgs cmp;
    auto* compare_cmd = app.add_subcommand("compare", "Fit metrics of simulated D against observed hospitalized counts");
    compare_cmd->add_option("--scenario", cmp.scenario, "Scenario JSON file or preset:NAME")->required();
    compare_cmd->add_option("--observed", cmp.observed, "CSV: day,region,confirmed_hospitalized[,recovered,deaths]")
        ->required();
    compare_cmd->add_option("--region", cmp.region_map, "Region map obs=sim[,obs=sim...]");
    compare_cmd->add_option("--out", cmp.out_file, "Write the metrics JSON here (default: standard output)");

    auto* presets_cmd = app.add_subcommand("presets", "List the built-in scenarios");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (!apply_thread_override()) {
        err << "error: " << kThreadsEnv << " must be a positive integer\n";
        return kExitUsage;
    }

    try {
        if (simulate_cmd->parsed()) {
            return cmd_simulate(sim, out, err);
        }
        if (order_cmd->parsed()) {
            return cmd_order_check(order, out, err);
        }
        if (stability_cmd->parsed()) {
            return cmd_stability_check(stab, out, err);
        }
        if (compare_cmd->parsed()) {
            return cmd_compare(cmp, out, err);
        }
        if (presets_cmd->parsed()) {
            for (const auto& p : preset_list()) {
                out << p.name << "  " << p.description << "\n";
            }
            return kExitOk;
        }
    }
    catch (const ValidationError& e) {
        for (const auto& d : e.diagnostics()) {
            err << "error: " << (d.path.empty() ? "" : d.path + ": ") << d.message << "\n";
        }
        return kExitValidation;
    }
    catch (const NonFiniteError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    catch (const UnsupportedOperation& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    err << "error: no subcommand\n";
    return kExitUsage;
}

} // namespace rdepi
