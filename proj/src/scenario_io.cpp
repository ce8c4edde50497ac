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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace rdepi
{

namespace detail
{
/// Generated at build time from presets/*.json: (name, document) pairs.
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_presets();
} // namespace detail

namespace
{

using nlohmann::json;

/// Collects every problem of a document instead of stopping at the first.
class Reader
{
public:
    std::vector<Diagnostic> diagnostics;

    void error(const std::string& path, const std::string& message)
    {
        diagnostics.push_back({path, message});
    }

    bool require_object(const json& j, const std::string& path)
    {
        if (!j.is_object()) {
            error(path, "expected an object");
            return false;
        }
        return true;
    }

    void reject_unknown(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed)
    {
        for (const auto& [key, value] : j.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                error(join(path, key), "unknown key");
            }
        }
    }

    void number(const json& obj, const char* key, const std::string& path, double& out)
    {
        if (!obj.contains(key)) {
            return;
        }
        number_value(obj.at(key), join(path, key), out);
    }

    bool number_value(const json& v, const std::string& path, double& out)
    {
        if (!v.is_number()) {
            error(path, "expected a number");
            return false;
        }
        out = v.get<double>();
        return true;
    }

    void integer(const json& obj, const char* key, const std::string& path, std::int64_t& out)
    {
        if (!obj.contains(key)) {
            return;
        }
        const json& v = obj.at(key);
        if (!v.is_number_integer()) {
            error(join(path, key), "expected an integer");
            return;
        }
        out = v.get<std::int64_t>();
    }

    void string(const json& obj, const char* key, const std::string& path, std::string& out)
    {
        if (!obj.contains(key)) {
            return;
        }
        const json& v = obj.at(key);
        if (!v.is_string()) {
            error(join(path, key), "expected a string");
            return;
        }
        out = v.get<std::string>();
    }

    void boolean(const json& obj, const char* key, const std::string& path, bool& out)
    {
        if (!obj.contains(key)) {
            return;
        }
        const json& v = obj.at(key);
        if (!v.is_boolean()) {
            error(join(path, key), "expected true or false");
            return;
        }
        out = v.get<bool>();
    }

    SlotValues slot_values(const json& j, const std::string& path)
    {
        SlotValues out;
        if (!require_object(j, path)) {
            return out;
        }
        for (const auto& [key, value] : j.items()) {
            const auto slot = slot_from_name(key);
            if (!slot) {
                error(join(path, key), "unknown compartment");
                continue;
            }
            double v = 0;
            if (number_value(value, join(path, key), v)) {
                out[*slot] = v;
            }
        }
        return out;
    }

    static std::string join(const std::string& path, std::string_view key)
    {
        return path.empty() ? std::string(key) : path + "." + std::string(key);
    }
};

GridSpec read_grid(Reader& r, const json& j)
{
    GridSpec g;
    const std::string path = "grid";
    if (!r.require_object(j, path)) {
        return g;
    }
    r.reject_unknown(j, path, {"dim", "extent_x", "nodes_x", "extent_y", "nodes_y", "regions"});
    std::int64_t dim = g.dim;
    std::int64_t nx = g.nodes_x;
    std::int64_t ny = g.nodes_y;
    r.integer(j, "dim", path, dim);
    r.integer(j, "nodes_x", path, nx);
    r.integer(j, "nodes_y", path, ny);
    r.number(j, "extent_x", path, g.extent_x);
    r.number(j, "extent_y", path, g.extent_y);
    g.dim = static_cast<int>(dim);
    g.nodes_x = nx;
    g.nodes_y = ny;
    if (dim != 1 && dim != 2) {
        r.error("grid.dim", "must be 1 or 2");
    }
    if (j.contains("regions")) {
        const json& regions = j.at("regions");
        if (!regions.is_array()) {
            r.error("grid.regions", "expected an array");
        }
        else {
            for (std::size_t k = 0; k < regions.size(); ++k) {
                const std::string rp = "grid.regions[" + std::to_string(k) + "]";
                const json& box = regions[k];
                if (!r.require_object(box, rp)) {
                    continue;
                }
                r.reject_unknown(box, rp, {"name", "x0", "x1", "y0", "y1"});
                RegionBox b;
                r.string(box, "name", rp, b.name);
                r.number(box, "x0", rp, b.x0);
                r.number(box, "x1", rp, b.x1);
                r.number(box, "y0", rp, b.y0);
                r.number(box, "y1", rp, b.y1);
                g.regions.push_back(std::move(b));
            }
        }
    }
    return g;
}

void read_params(Reader& r, const json& j, ModelParams<double>& p)
{
    if (!r.require_object(j, "params")) {
        return;
    }
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto& [name, member] : ModelParams<double>::fields()) {
            if (key == name) {
                known = true;
                r.number_value(value, "params." + key, p.*member);
            }
        }
        if (!known) {
            r.error("params." + key, "unknown key");
        }
    }
}

InitialSpec read_initial(Reader& r, const json& j)
{
    InitialSpec init;
    if (!r.require_object(j, "initial")) {
        return init;
    }
    r.reject_unknown(j, "initial", {"background", "regions", "patches", "per_node"});
    if (j.contains("background")) {
        init.background = r.slot_values(j.at("background"), "initial.background");
    }
    if (j.contains("regions")) {
        const json& regions = j.at("regions");
        if (!regions.is_array()) {
            r.error("initial.regions", "expected an array of {region, values}");
        }
        else {
            for (std::size_t k = 0; k < regions.size(); ++k) {
                const std::string rp = "initial.regions[" + std::to_string(k) + "]";
                const json& entry = regions[k];
                if (!r.require_object(entry, rp)) {
                    continue;
                }
                r.reject_unknown(entry, rp, {"region", "values"});
                std::string name;
                r.string(entry, "region", rp, name);
                if (name.empty()) {
                    r.error(rp + ".region", "required");
                }
                init.regions.emplace_back(name, entry.contains("values")
                                                    ? r.slot_values(entry.at("values"), rp + ".values")
                                                    : SlotValues{});
            }
        }
    }
    if (j.contains("patches")) {
        const json& patches = j.at("patches");
        if (!patches.is_array()) {
            r.error("initial.patches", "expected an array");
        }
        else {
            for (std::size_t k = 0; k < patches.size(); ++k) {
                const std::string pp = "initial.patches[" + std::to_string(k) + "]";
                const json& entry = patches[k];
                if (!r.require_object(entry, pp)) {
                    continue;
                }
                r.reject_unknown(entry, pp, {"x0", "x1", "y0", "y1", "values"});
                InitialPatch patch;
                r.number(entry, "x0", pp, patch.x0);
                r.number(entry, "x1", pp, patch.x1);
                r.number(entry, "y0", pp, patch.y0);
                r.number(entry, "y1", pp, patch.y1);
                if (entry.contains("values")) {
                    patch.values = r.slot_values(entry.at("values"), pp + ".values");
                }
                init.patches.push_back(std::move(patch));
            }
        }
    }
    if (j.contains("per_node")) {
        const json& rows = j.at("per_node");
        if (!rows.is_array()) {
            r.error("initial.per_node", "expected an array of 9-element rows");
        }
        else {
            std::vector<std::array<double, kSlots>> table;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const std::string rp = "initial.per_node[" + std::to_string(k) + "]";
                std::array<double, kSlots> row{};
                if (!rows[k].is_array() || rows[k].size() != kSlots) {
                    r.error(rp, "expected 9 numbers in slot order S,Q,E,A,I,D,R,cum_death_i,cum_death_d");
                }
                else {
                    for (int s = 0; s < kSlots; ++s) {
                        r.number_value(rows[k][static_cast<std::size_t>(s)], rp + "." + std::string(slot_name(s)),
                                       row[static_cast<std::size_t>(s)]);
                    }
                }
                table.push_back(row);
            }
            init.per_node = std::move(table);
        }
    }
    return init;
}

ScenarioFlags read_flags(Reader& r, const json& j)
{
    ScenarioFlags f;
    if (!r.require_object(j, "flags")) {
        return f;
    }
    r.reject_unknown(j, "flags",
                     {"frozen_n", "clamp_negative", "strict_guards", "guard_alpha", "guard_cfl", "diffusion_form",
                      "negativity_tolerance"});
    if (j.contains("frozen_n") && !j.at("frozen_n").is_null()) {
        double v = 0;
        if (r.number_value(j.at("frozen_n"), "flags.frozen_n", v)) {
            f.frozen_n = v;
        }
    }
    r.boolean(j, "clamp_negative", "flags", f.clamp_negative);
    r.boolean(j, "strict_guards", "flags", f.strict_guards);
    r.boolean(j, "guard_alpha", "flags", f.guard_alpha);
    r.boolean(j, "guard_cfl", "flags", f.guard_cfl);
    r.number(j, "negativity_tolerance", "flags", f.negativity_tolerance);
    std::string form = to_string(f.diffusion_form);
    r.string(j, "diffusion_form", "flags", form);
    if (auto parsed = diffusion_form_from_string(form)) {
        f.diffusion_form = *parsed;
    }
    else {
        r.error("flags.diffusion_form", "must be \"flux\" or \"nodal\"");
    }
    return f;
}

json slot_values_json(const SlotValues& values)
{
    json out = json::object();
    for (const auto& [slot, v] : values) {
        out[std::string(slot_name(slot))] = v;
    }
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string trim(std::string s)
{
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::optional<double> parse_double(const std::string& text)
{
    const std::string t = trim(text);
    if (t.empty()) {
        return std::nullopt;
    }
    std::size_t used = 0;
    try {
        const double v = std::stod(t, &used);
        if (used != t.size()) {
            return std::nullopt;
        }
        return v;
    }
    catch (const std::exception&) {
        return std::nullopt;
    }
}

std::vector<std::string> lines_of(std::string_view text)
{
    std::vector<std::string> out;
    std::string line;
    std::istringstream in{std::string(text)};
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        out.push_back(line);
    }
    return out;
}

} // namespace

Scenario scenario_from_json(const json& j)
{
    Reader r;
    Scenario s;
    if (!j.is_object()) {
        throw ValidationError("", "scenario document must be a JSON object");
    }
    r.reject_unknown(j, "",
                     {"schema_version", "name", "description", "model", "grid", "params", "sir_params", "initial",
                      "horizon", "dt", "integrator", "snapshot_interval", "flags", "metadata"});
    if (!j.contains("schema_version")) {
        r.error("schema_version", "required");
    }
    std::int64_t version = s.schema_version;
    r.integer(j, "schema_version", "", version);
    s.schema_version = static_cast<int>(version);
    r.string(j, "name", "", s.name);
    r.string(j, "description", "", s.description);

    std::string model = to_string(s.model);
    r.string(j, "model", "", model);
    if (auto m = model_kind_from_string(model)) {
        s.model = *m;
    }
    else {
        r.error("model", "must be \"covid7\" or \"sir\"");
    }
    std::string integrator = to_string(s.integrator);
    r.string(j, "integrator", "", integrator);
    if (auto i = integrator_from_string(integrator)) {
        s.integrator = *i;
    }
    else {
        r.error("integrator", "must be \"rk4\", \"euler\" or \"imex\"");
    }

    if (j.contains("grid")) {
        s.grid = read_grid(r, j.at("grid"));
    }
    if (j.contains("params")) {
        read_params(r, j.at("params"), s.params);
    }
    if (j.contains("sir_params")) {
        const json& sp = j.at("sir_params");
        if (r.require_object(sp, "sir_params")) {
            r.reject_unknown(sp, "sir_params", {"beta", "gamma"});
            r.number(sp, "beta", "sir_params", s.sir_params.beta);
            r.number(sp, "gamma", "sir_params", s.sir_params.gamma);
        }
    }
    if (j.contains("initial")) {
        s.initial = read_initial(r, j.at("initial"));
    }
    r.number(j, "horizon", "", s.horizon);
    r.number(j, "dt", "", s.dt);
    r.number(j, "snapshot_interval", "", s.snapshot_interval);
    if (j.contains("flags")) {
        s.flags = read_flags(r, j.at("flags"));
    }
    if (j.contains("metadata")) {
        const json& meta = j.at("metadata");
        if (r.require_object(meta, "metadata")) {
            for (const auto& [key, value] : meta.items()) {
                if (!value.is_string()) {
                    r.error("metadata." + key, "expected a string");
                    continue;
                }
                s.metadata[key] = value.get<std::string>();
            }
        }
    }

    // Structural problems first, then invariants; a malformed grid already has its diagnostics.
    if (r.diagnostics.empty()) {
        r.diagnostics = s.validate();
    }
    else {
        for (auto& d : s.validate()) {
            if (std::none_of(r.diagnostics.begin(), r.diagnostics.end(),
                             [&](const Diagnostic& e) { return e.path == d.path; })) {
                r.diagnostics.push_back(std::move(d));
            }
        }
    }
    if (!r.diagnostics.empty()) {
        throw ValidationError(std::move(r.diagnostics));
    }
    return s;
}

Scenario load_scenario(std::string_view document)
{
    json j;
    try {
        j = json::parse(document);
    }
    catch (const json::parse_error& e) {
        throw ValidationError("", std::string("malformed JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

json scenario_to_json(const Scenario& s)
{
    json grid = {{"dim", s.grid.dim},
                 {"extent_x", s.grid.extent_x},
                 {"nodes_x", s.grid.nodes_x},
                 {"extent_y", s.grid.extent_y},
                 {"nodes_y", s.grid.nodes_y},
                 {"regions", json::array()}};
    for (const auto& box : s.grid.regions) {
        grid["regions"].push_back({{"name", box.name}, {"x0", box.x0}, {"x1", box.x1}, {"y0", box.y0}, {"y1", box.y1}});
    }
    json params = json::object();
    for (const auto& [name, member] : ModelParams<double>::fields()) {
        params[std::string(name)] = s.params.*member;
    }
    json initial = {{"background", slot_values_json(s.initial.background)},
                    {"regions", json::array()},
                    {"patches", json::array()}};
    for (const auto& [name, values] : s.initial.regions) {
        initial["regions"].push_back({{"region", name}, {"values", slot_values_json(values)}});
    }
    for (const auto& p : s.initial.patches) {
        initial["patches"].push_back(
            {{"x0", p.x0}, {"x1", p.x1}, {"y0", p.y0}, {"y1", p.y1}, {"values", slot_values_json(p.values)}});
    }
    if (s.initial.per_node) {
        initial["per_node"] = *s.initial.per_node;
    }
    json flags = {{"frozen_n", s.flags.frozen_n ? json(*s.flags.frozen_n) : json(nullptr)},
                  {"clamp_negative", s.flags.clamp_negative},
                  {"strict_guards", s.flags.strict_guards},
                  {"guard_alpha", s.flags.guard_alpha},
                  {"guard_cfl", s.flags.guard_cfl},
                  {"diffusion_form", to_string(s.flags.diffusion_form)},
                  {"negativity_tolerance", s.flags.negativity_tolerance}};
    return {{"schema_version", s.schema_version},
            {"name", s.name},
            {"description", s.description},
            {"model", to_string(s.model)},
            {"grid", grid},
            {"params", params},
            {"sir_params", {{"beta", s.sir_params.beta}, {"gamma", s.sir_params.gamma}}},
            {"initial", initial},
            {"horizon", s.horizon},
            {"dt", s.dt},
            {"integrator", to_string(s.integrator)},
            {"snapshot_interval", s.snapshot_interval},
            {"flags", flags},
            {"metadata", s.metadata}};
}

std::string save_scenario(const Scenario& scenario)
{
    return scenario_to_json(scenario).dump(2) + "\n";
}

std::vector<PresetInfo> preset_list()
{
    std::vector<PresetInfo> out;
    for (const auto& [name, text] : detail::embedded_presets()) {
        const json j = json::parse(text);
        out.push_back({std::string(name), j.value("description", std::string())});
    }
    return out;
}

Scenario preset(const std::string& name)
{
    for (const auto& [preset_name, text] : detail::embedded_presets()) {
        if (preset_name == name) {
            return load_scenario(text);
        }
    }
    std::string valid;
    for (const auto& [preset_name, text] : detail::embedded_presets()) {
        valid += (valid.empty() ? "" : ", ") + std::string(preset_name);
    }
    throw ValidationError("preset", "unknown preset \"" + name + "\"; valid names: " + valid);
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError(path, "cannot open file");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Scenario resolve_scenario(const std::string& spec)
{
    constexpr std::string_view prefix = "preset:";
    if (spec.starts_with(prefix)) {
        return preset(spec.substr(prefix.size()));
    }
    return load_scenario(read_text_file(spec));
}

std::vector<std::string> ObservedSeries::regions() const
{
    std::vector<std::string> out;
    for (const auto& r : records) {
        if (std::find(out.begin(), out.end(), r.region) == out.end()) {
            out.push_back(r.region);
        }
    }
    return out;
}

ObservedSeries load_observed(std::string_view document)
{
    ObservedSeries series;
    const auto lines = lines_of(document);
    std::size_t first = 0;
    while (first < lines.size() && trim(lines[first]).empty()) {
        ++first;
    }
    if (first == lines.size()) {
        return series;
    }
    const auto header = split_csv_line(lines[first]);
    std::vector<std::string> names;
    for (const auto& h : header) {
        names.push_back(trim(h));
    }
    const std::vector<std::string> required = {"day", "region", "confirmed_hospitalized"};
    const bool base_ok = names.size() >= 3 && std::equal(required.begin(), required.end(), names.begin());
    const bool tail_ok = names.size() == 3 || (names.size() == 5 && names[3] == "recovered" && names[4] == "deaths");
    if (!base_ok || !tail_ok) {
        throw ValidationError("row 1", "header must be day,region,confirmed_hospitalized[,recovered,deaths]");
    }
    const std::size_t columns = names.size();

    std::vector<Diagnostic> errors;
    std::map<std::string, std::int64_t> last_day;
    for (std::size_t k = first + 1; k < lines.size(); ++k) {
        if (trim(lines[k]).empty()) {
            continue;
        }
        const std::string row = "row " + std::to_string(k + 1);
        const auto cells = split_csv_line(lines[k]);
        if (cells.size() != columns) {
            errors.push_back({row, "expected " + std::to_string(columns) + " columns, got " +
                                       std::to_string(cells.size())});
            continue;
        }
        ObservedRecord rec;
        const auto day = parse_double(cells[0]);
        if (!day || *day != std::floor(*day) || *day < 0) {
            errors.push_back({row, "day must be a non-negative integer"});
            continue;
        }
        rec.day = static_cast<std::int64_t>(*day);
        rec.region = trim(cells[1]);
        if (rec.region.empty()) {
            errors.push_back({row, "region is empty"});
            continue;
        }
        auto count = [&](const std::string& cell, const char* what) -> std::optional<double> {
            const auto v = parse_double(cell);
            if (!v || !std::isfinite(*v)) {
                errors.push_back({row, std::string(what) + " is not a number"});
                return std::nullopt;
            }
            if (*v < 0) {
                errors.push_back({row, std::string(what) + " is negative"});
                return std::nullopt;
            }
            return v;
        };
        const auto confirmed = count(cells[2], "confirmed_hospitalized");
        if (!confirmed) {
            continue;
        }
        rec.confirmed_hospitalized = *confirmed;
        if (columns == 5) {
            if (!trim(cells[3]).empty()) {
                rec.recovered = count(cells[3], "recovered");
                if (!rec.recovered) {
                    continue;
                }
            }
            if (!trim(cells[4]).empty()) {
                rec.deaths = count(cells[4], "deaths");
                if (!rec.deaths) {
                    continue;
                }
            }
        }
        auto it = last_day.find(rec.region);
        if (it != last_day.end() && rec.day <= it->second) {
            errors.push_back({row, "days must be strictly increasing per region (" + rec.region + ")"});
            continue;
        }
        last_day[rec.region] = rec.day;
        series.records.push_back(std::move(rec));
    }
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    return series;
}

RegionMap parse_region_map(const std::string& text)
{
    RegionMap out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
            throw ValidationError("region", "expected obs=sim pairs, got \"" + item + "\"");
        }
        out[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    return out;
}

std::vector<double> region_series(const TimeSeries& series, const std::string& region, int slot)
{
    const int label = series.grid->region_index(region);
    if (label < 0) {
        throw ValidationError("region", "unknown region \"" + region + "\"");
    }
    std::vector<double> out;
    for (const auto& snap : series.snapshots) {
        out.push_back(region_integral(snap.field.compartment(slot), *series.grid, label));
    }
    return out;
}

FitMetrics fit_metrics(const TimeSeries& series, const ObservedSeries& observed, const RegionMap& map)
{
    FitMetrics out;
    double pooled = 0.0;
    std::size_t pooled_n = 0;
    for (const auto& obs_region : observed.regions()) {
        const auto mapped = map.find(obs_region);
        const std::string sim_region = mapped == map.end() ? obs_region : mapped->second;
        const auto sim = region_series(series, sim_region, kD);

        RegionFit fit;
        fit.observed_region = obs_region;
        fit.simulated_region = sim_region;
        double sq = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        double mean = 0.0;
        double obs_peak = -1.0;
        for (const auto& rec : observed.records) {
            if (rec.region != obs_region) {
                continue;
            }
            const double day = static_cast<double>(rec.day);
            auto snap = std::find_if(series.snapshots.begin(), series.snapshots.end(),
                                     [&](const Snapshot& s) { return std::abs(s.time - day) <= 1e-9 * (1 + day); });
            if (snap == series.snapshots.end()) {
                throw ValidationError("observed", "day " + std::to_string(rec.day) + " of region " + obs_region +
                                                      " has no simulated snapshot");
            }
            const double simulated = sim[static_cast<std::size_t>(snap - series.snapshots.begin())];
            const double diff = simulated - rec.confirmed_hospitalized;
            sq += diff * diff;
            lo = std::min(lo, rec.confirmed_hospitalized);
            hi = std::max(hi, rec.confirmed_hospitalized);
            mean += rec.confirmed_hospitalized;
            if (rec.confirmed_hospitalized > obs_peak) {
                obs_peak = rec.confirmed_hospitalized;
                fit.observed_peak_day = day;
            }
            ++fit.samples;
        }
        pooled += sq;
        pooled_n += fit.samples;
        fit.rmse = std::sqrt(sq / static_cast<double>(fit.samples));
        mean /= static_cast<double>(fit.samples);
        const double scale = hi > lo ? hi - lo : mean;
        fit.nrmse = scale > 0 ? fit.rmse / scale : 0.0;
        const auto peak = std::max_element(sim.begin(), sim.end());
        fit.simulated_peak_day = series.snapshots[static_cast<std::size_t>(peak - sim.begin())].time;
        fit.peak_day_difference = fit.simulated_peak_day - fit.observed_peak_day;
        out.regions.push_back(std::move(fit));
    }
    out.rmse = pooled_n > 0 ? std::sqrt(pooled / static_cast<double>(pooled_n)) : 0.0;
    return out;
}

json to_json(const FitMetrics& metrics)
{
    json regions = json::array();
    for (const auto& r : metrics.regions) {
        regions.push_back({{"observed_region", r.observed_region},
                           {"simulated_region", r.simulated_region},
                           {"samples", r.samples},
                           {"rmse", r.rmse},
                           {"nrmse", r.nrmse},
                           {"simulated_peak_day", r.simulated_peak_day},
                           {"observed_peak_day", r.observed_peak_day},
                           {"peak_day_difference", r.peak_day_difference}});
    }
    return {{"compartment", "D"}, {"rmse", metrics.rmse}, {"regions", regions}};
}

std::string format_exact(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

TimeseriesCsv write_timeseries(const TimeSeries& series)
{
    const Grid& grid = *series.grid;
    const bool two_d = grid.dim() == 2;
    std::string slots;
    for (int s = 0; s < kSlots; ++s) {
        slots += ",";
        slots += slot_name(s);
    }

    std::string nodes = std::string("time,node_x") + (two_d ? ",node_y" : "") + ",region" + slots + "\n";
    std::string regions = "time,region" + slots + "\n";
    for (const auto& snap : series.snapshots) {
        const std::string t = format_exact(snap.time);
        const auto& v = snap.field.values();
        for (Index k = 0; k < grid.size(); ++k) {
            nodes += t;
            nodes += "," + format_exact(grid.x(grid.ix(k)));
            if (two_d) {
                nodes += "," + format_exact(grid.y(grid.iy(k)));
            }
            nodes += "," + grid.region_names()[static_cast<std::size_t>(grid.region(k))];
            for (int s = 0; s < kSlots; ++s) {
                nodes += "," + format_exact(v(k, s));
            }
            nodes += "\n";
        }
        for (std::size_t r = 0; r < grid.region_names().size(); ++r) {
            regions += t + "," + grid.region_names()[r];
            for (int s = 0; s < kSlots; ++s) {
                regions += "," + format_exact(region_integral(v.col(s), grid, static_cast<int>(r)));
            }
            regions += "\n";
        }
    }
    return {std::move(nodes), std::move(regions)};
}

std::vector<Snapshot> read_timeseries(std::string_view nodes_csv, const GridPtr& grid)
{
    const auto lines = lines_of(nodes_csv);
    if (lines.empty()) {
        throw ValidationError("row 1", "missing header");
    }
    const std::size_t coords = grid->dim() == 2 ? 2 : 1;
    const std::size_t columns = 1 + coords + 1 + kSlots;
    std::vector<Snapshot> out;
    Index node = 0;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].empty()) {
            continue;
        }
        const std::string row = "row " + std::to_string(k + 1);
        const auto cells = split_csv_line(lines[k]);
        if (cells.size() != columns) {
            throw ValidationError(row, "expected " + std::to_string(columns) + " columns");
        }
        const auto t = parse_double(cells[0]);
        if (!t) {
            throw ValidationError(row, "time is not a number");
        }
        if (node == 0) {
            out.push_back({*t, 0, CompartmentField<double>(grid)});
        }
        for (int s = 0; s < kSlots; ++s) {
            const auto v = parse_double(cells[1 + coords + 1 + static_cast<std::size_t>(s)]);
            if (!v) {
                throw ValidationError(row, std::string(slot_name(s)) + " is not a number");
            }
            out.back().field.values()(node, s) = *v;
        }
        node = (node + 1) % grid->size();
    }
    if (node != 0) {
        throw ValidationError("timeseries", "last snapshot is incomplete");
    }
    return out;
}

} // namespace rdepi
