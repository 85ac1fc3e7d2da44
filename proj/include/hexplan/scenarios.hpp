#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "hexplan/errors.hpp"
#include "hexplan/map_io.hpp"
#include "hexplan/pipeline.hpp"
#include "hexplan/svg.hpp"

#ifndef HEXPLAN_DATA_DIR
#define HEXPLAN_DATA_DIR "data"
#endif

namespace hexplan {

inline const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names{"e1_open_angles", "e2_narrow_escape", "e2_blocked_detour",
                                                "e3_cost_comparison"};
    return names;
}

/// HEXPLAN_DATA_DIR from the environment, else the build-time default.
inline std::filesystem::path data_dir()
{
    if (const char* env = std::getenv("HEXPLAN_DATA_DIR"); env && *env) return env;
    return HEXPLAN_DATA_DIR;
}

inline MapGrid load_shipped_map(const std::string& name) { return load_map_file((data_dir() / "maps" / (name + ".json")).string()); }

struct ScenarioRun
{
    std::string label;
    MapGrid map;
    RunOutcome outcome;
};

struct ScenarioCheck
{
    std::string property;
    bool passed = false;
    std::string detail;
};

struct ScenarioReport
{
    std::string name;
    std::vector<ScenarioRun> runs;
    std::vector<ScenarioCheck> checks;

    bool passed() const
    {
        return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }

    nlohmann::json to_json() const
    {
        nlohmann::json runs_doc = nlohmann::json::array();
        for (const auto& r : runs) {
            nlohmann::json entry{{"label", r.label}, {"status", r.outcome.document.value("status", "")}};
            if (r.outcome.metrics) entry["metrics"] = metrics_to_json(*r.outcome.metrics);
            runs_doc.push_back(entry);
        }
        nlohmann::json checks_doc = nlohmann::json::array();
        for (const auto& c : checks) checks_doc.push_back({{"property", c.property}, {"passed", c.passed}, {"detail", c.detail}});
        return {{"scenario", name}, {"passed", passed()}, {"runs", runs_doc}, {"checks", checks_doc}};
    }
};

struct ScenarioOptions
{
    Weights weights{};              ///< w_n = 1, w_kappa = 5
    bool trace = true;              ///< record search traces for the renders
    Orientation orientation = Orientation::pointy;
};

/// Grid spec of the generated and shipped scenario maps.
inline constexpr GridSpec kScenarioSpec{1.0, 3.0};

/// Open map for the angle sweep: start at the origin, target at about 20
/// cells along `degrees`.
inline MapGrid e1_map(double degrees)
{
    const GridSpec spec = kScenarioSpec;
    const double a = degrees * std::numbers::pi / 180.0;
    const double dist = 20.0 * spec.spacing();
    const HexCell target = nearest_cell({dist * std::cos(a), dist * std::sin(a)}, spec);
    return MapGrid(spec, {-24, 24, -24, 24}, {}, {0, 0}, target);
}

namespace detail {

inline std::string fmt(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline RunOutcome scenario_run(const MapGrid& map, const ScenarioOptions& opt, const std::string& table,
                               bool pruning = true)
{
    RunOptions ro;
    ro.table = builtin_table(table);
    ro.weights = opt.weights;
    ro.planner.dead_cell_pruning = pruning;
    ro.planner.record_trace = opt.trace;
    return run_plan(map, ro);
}

inline bool ok(const ScenarioRun& r) { return r.outcome.exit_code == 0 && r.outcome.metrics.has_value(); }

inline void check_curvature(ScenarioReport& rep)
{
    for (const auto& r : rep.runs) {
        if (!ok(r)) continue;
        const double v = r.outcome.metrics->max_kappa_r_min;
        rep.checks.push_back({r.label + ": max |kappa| r_min <= 1", v <= 1.0 + 1e-9, fmt(v)});
    }
}

inline void check_success(ScenarioReport& rep)
{
    for (const auto& r : rep.runs)
        rep.checks.push_back({r.label + ": planning and smoothing succeed", ok(r),
                              r.outcome.document.value("status", std::string("?"))});
}

inline void e1(ScenarioReport& rep, const ScenarioOptions& opt)
{
    for (int i = 0; i < 24; ++i) {
        const double deg = 15.0 * i;
        MapGrid map = e1_map(deg);
        RunOutcome out = scenario_run(map, opt, "curvature_penalty");
        char label[32];
        std::snprintf(label, sizeof label, "angle_%03d", static_cast<int>(deg));
        rep.runs.push_back({label, std::move(map), std::move(out)});
    }
    check_success(rep);
    check_curvature(rep);
    for (const auto& r : rep.runs) {
        if (!ok(r)) continue;
        const double euclid = norm(to_cartesian(r.map.target(), r.map.spec()) - to_cartesian(r.map.start(), r.map.spec()));
        const double len = r.outcome.metrics->arc_length;
        rep.checks.push_back({r.label + ": arc length <= 1.05 x straight-line distance", len <= 1.05 * euclid,
                              fmt(len) + " / " + fmt(euclid) + " = " + fmt(len / euclid)});
    }
}

inline void e2_narrow(ScenarioReport& rep, const ScenarioOptions& opt)
{
    MapGrid map = load_shipped_map(rep.name);
    RunOutcome out = scenario_run(map, opt, "curvature_penalty");
    rep.runs.push_back({"escape", std::move(map), std::move(out)});
    check_success(rep);
    const ScenarioRun& r = rep.runs.back();
    if (!ok(r)) return;
    const auto& cells = r.outcome.plan->cells;
    const std::set<HexCell> distinct(cells.begin(), cells.end());
    rep.checks.push_back({"grid path revisits a cell", distinct.size() < cells.size(),
                          std::to_string(cells.size()) + " cells, " + std::to_string(distinct.size()) + " distinct"});
    check_curvature(rep);
    const GridSpec& spec = r.map.spec();
    const double margin = containment_margin(r.outcome.smoothed->path, cells, spec);
    rep.checks.push_back({"smoothed path stays inside the grid path cells", margin >= -1e-6 * spec.cell_inner_radius,
                          "min margin " + fmt(margin)});
}

inline void e2_detour(ScenarioReport& rep, const ScenarioOptions& opt)
{
    MapGrid map = load_shipped_map(rep.name);
    RunOutcome with = scenario_run(map, opt, "curvature_penalty", true);
    RunOutcome without = scenario_run(map, opt, "curvature_penalty", false);
    rep.runs.push_back({"pruning_on", map, std::move(with)});
    rep.runs.push_back({"pruning_off", std::move(map), std::move(without)});
    check_success(rep);
    check_curvature(rep);
    if (!ok(rep.runs[0]) || !ok(rep.runs[1])) return;
    const auto on = rep.runs[0].outcome.plan->stats.expansions;
    const auto off = rep.runs[1].outcome.plan->stats.expansions;
    rep.checks.push_back({"expansions without dead-cell pruning exceed those with it", off > on,
                          std::to_string(off) + " vs " + std::to_string(on)});
}

inline void e3(ScenarioReport& rep, const ScenarioOptions& opt)
{
    MapGrid map = load_shipped_map(rep.name);
    for (const char* table : {"ribbon", "adapted_ribbon", "curvature_penalty"}) {
        RunOutcome out = scenario_run(map, opt, table);
        rep.runs.push_back({table, map, std::move(out)});
    }
    check_success(rep);
    check_curvature(rep);
    if (!std::all_of(rep.runs.begin(), rep.runs.end(), ok)) return;
    const auto& rb = *rep.runs[0].outcome.metrics;
    const auto& ad = *rep.runs[1].outcome.metrics;
    const auto& cp = *rep.runs[2].outcome.metrics;
    rep.checks.push_back({"median |kappa|: curvature_penalty <= adapted_ribbon <= ribbon",
                          cp.median_kappa_norm <= ad.median_kappa_norm + 1e-9 && ad.median_kappa_norm <= rb.median_kappa_norm + 1e-9,
                          fmt(cp.median_kappa_norm) + " <= " + fmt(ad.median_kappa_norm) + " <= " + fmt(rb.median_kappa_norm)});
    rep.checks.push_back({"grid cells: curvature_penalty >= ribbon", cp.grid_cells >= rb.grid_cells,
                          std::to_string(cp.grid_cells) + " vs " + std::to_string(rb.grid_cells)});
}

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
}

} // namespace detail

/// Runs one scenario and evaluates its expected properties. With an output
/// directory, writes per-run result documents, traces and SVG renders plus
/// report.json under <out>/<name>/.
inline ScenarioReport run_scenario(const std::string& name, const std::optional<std::filesystem::path>& out_dir = {},
                                   const ScenarioOptions& opt = {})
{
    ScenarioReport rep;
    rep.name = name;
    if (name == "e1_open_angles") detail::e1(rep, opt);
    else if (name == "e2_narrow_escape") detail::e2_narrow(rep, opt);
    else if (name == "e2_blocked_detour") detail::e2_detour(rep, opt);
    else if (name == "e3_cost_comparison") detail::e3(rep, opt);
    else throw UnknownScenario("unknown scenario '" + name + "'");

    if (out_dir) {
        const auto dir = *out_dir / name;
        std::filesystem::create_directories(dir);
        for (auto& r : rep.runs) {
            nlohmann::json doc = r.outcome.document;
            const SearchTrace* trace = nullptr;
            if (r.outcome.plan && r.outcome.plan->trace) {
                trace = &*r.outcome.plan->trace;
                detail::write_text(dir / (r.label + ".trace.json"), trace_to_json(*trace).dump(1) + "\n");
                doc["trace"] = r.label + ".trace.json";
            }
            detail::write_text(dir / (r.label + ".json"), doc.dump(2) + "\n");
            const ArcPath* path = r.outcome.smoothed ? &r.outcome.smoothed->path : nullptr;
            detail::write_text(dir / (r.label + ".svg"), render_svg(r.map, trace, path, {opt.orientation}));
        }
        detail::write_text(dir / "report.json", rep.to_json().dump(2) + "\n");
    }
    return rep;
}

} // namespace hexplan
