#pragma once

#include <chrono>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hexplan/constrained_astar.hpp"
#include "hexplan/cost_model.hpp"
#include "hexplan/errors.hpp"
#include "hexplan/map_io.hpp"
#include "hexplan/primitive_catalog.hpp"
#include "hexplan/ribbon_smoother.hpp"

namespace hexplan {

struct RunOptions
{
    CostTable table = builtin_table("curvature_penalty");
    Weights weights{};
    PlannerConfig planner{};
    SmoothingConfig smoothing = [] {
        SmoothingConfig c;
        c.end = EndMode::cell_center;
        return c;
    }();
    const Catalog* catalog = nullptr; ///< null selects the built-in catalog
};

struct MetricsReport
{
    std::size_t grid_cells = 0;
    double arc_length = 0.0;
    double max_kappa_r_min = 0.0;    ///< max |kappa| * r_min, at most 1 on success
    double median_kappa_norm = 0.0;  ///< median |kappa| / kappa_max
    int direction_changes = 0;
    std::size_t iterations = 0;
    std::size_t expansions = 0;
    std::size_t peak_open = 0;
    double wall_time_s = 0.0;
};

struct RunOutcome
{
    int exit_code = 0; ///< 0 ok, 2 no path, 3 smoothing infeasible
    nlohmann::json document;
    std::optional<PlanResult> plan;
    std::optional<SmoothedPath> smoothed;
    std::optional<MetricsReport> metrics;
};

inline const char* to_string(Termination t) { return t == Termination::optimal ? "optimal" : "paper"; }
inline const char* to_string(KappaAccumulation a)
{
    return a == KappaAccumulation::accumulated ? "accumulated" : "literal";
}

inline nlohmann::json cell_json(HexCell c) { return nlohmann::json::array({c.q, c.r}); }

inline nlohmann::json trace_to_json(const SearchTrace& trace)
{
    nlohmann::json events = nlohmann::json::array();
    for (const TraceEvent& e : trace.events) {
        nlohmann::json opened = nlohmann::json::array();
        for (const TraceOpen& o : e.opened)
            opened.push_back({{"cell", cell_json(o.cell)}, {"parent", cell_json(o.parent)}, {"window", o.window}, {"c", o.c}});
        nlohmann::json dead = nlohmann::json::array();
        for (const HexCell d : e.dead) dead.push_back(cell_json(d));
        events.push_back({{"iteration", e.iteration},
                          {"closed", cell_json(e.closed)},
                          {"parent", e.closed_parent ? cell_json(*e.closed_parent) : nlohmann::json()},
                          {"window", e.closed_window},
                          {"opened", opened},
                          {"dead", dead}});
    }
    return {{"events", events}};
}

inline SearchTrace trace_from_json(const nlohmann::json& doc)
{
    SearchTrace t;
    try {
        for (const auto& e : doc.at("events")) {
            TraceEvent ev;
            ev.iteration = e.at("iteration").get<std::size_t>();
            ev.closed = detail::cell_value(e.at("closed"), "closed");
            if (!e.at("parent").is_null()) ev.closed_parent = detail::cell_value(e.at("parent"), "parent");
            ev.closed_window = e.at("window").get<std::string>();
            for (const auto& o : e.at("opened"))
                ev.opened.push_back({detail::cell_value(o.at("cell"), "cell"), detail::cell_value(o.at("parent"), "parent"),
                                     o.at("window").get<std::string>(), o.at("c").get<double>()});
            for (const auto& d : e.at("dead")) ev.dead.push_back(detail::cell_value(d, "dead"));
            t.events.push_back(std::move(ev));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed trace: ") + e.what());
    }
    return t;
}

inline int count_direction_changes(const std::vector<HexCell>& cells)
{
    int n = 0;
    for (std::size_t i = 0; i + 2 < cells.size(); ++i)
        if (direction_between(cells[i], cells[i + 1]) != direction_between(cells[i + 1], cells[i + 2])) ++n;
    return n;
}

/// Smallest inside distance of the path samples to the union of the given
/// cells; negative when the path leaves them.
inline double containment_margin(const ArcPath& path, std::span<const HexCell> cells, const GridSpec& spec)
{
    double worst = std::numeric_limits<double>::infinity();
    auto margin = [&](Vec2 p) {
        double best = -std::numeric_limits<double>::infinity();
        for (const HexCell c : cells) best = std::max(best, hex_inside_margin(c, p, spec));
        return best;
    };
    for (const auto& s : sample_path(path, spec.cell_inner_radius / 10.0)) worst = std::min(worst, margin(s.point));
    if (!path.empty()) worst = std::min(worst, margin(path.end_pose().position));
    return worst;
}

/// Computes the metrics from a result document.
inline MetricsReport emit_metrics(const nlohmann::json& doc)
{
    MetricsReport m;
    try {
        const double r_c = doc.at("grid").at("cell_inner_radius").get<double>();
        const double r_min = doc.at("grid").at("min_turn_radius").get<double>();
        std::vector<HexCell> cells;
        for (const auto& c : doc.at("grid_path")) cells.push_back(detail::cell_value(c, "grid_path"));
        const ArcPath path = arc_path_from_json(doc.at("smoothing").at("segments"));
        m.grid_cells = cells.size();
        m.direction_changes = count_direction_changes(cells);
        m.arc_length = path.length();
        m.max_kappa_r_min = path.max_abs_curvature() * r_min;
        m.median_kappa_norm = path.empty() ? 0.0 : median_curvature_cost(path, 1.0 / r_min, r_c / 10.0);
        const auto& st = doc.at("statistics");
        m.iterations = st.at("iterations").get<std::size_t>();
        m.expansions = st.at("expansions").get<std::size_t>();
        m.peak_open = st.at("peak_open").get<std::size_t>();
        if (doc.contains("metrics")) m.wall_time_s = doc["metrics"].value("wall_time_s", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed result document: ") + e.what());
    }
    return m;
}

inline nlohmann::json metrics_to_json(const MetricsReport& m)
{
    return {{"grid_cells", m.grid_cells},
            {"arc_length", m.arc_length},
            {"max_kappa_r_min", m.max_kappa_r_min},
            {"median_kappa_norm", m.median_kappa_norm},
            {"direction_changes", m.direction_changes},
            {"iterations", m.iterations},
            {"expansions", m.expansions},
            {"peak_open", m.peak_open},
            {"wall_time_s", m.wall_time_s}};
}

/// The document with its wall-time field removed, for determinism checks.
inline nlohmann::json without_wall_time(nlohmann::json doc)
{
    if (doc.contains("metrics") && doc["metrics"].is_object()) doc["metrics"].erase("wall_time_s");
    return doc;
}

/// Plan, then smooth the whole grid path from the start cell center.
inline RunOutcome run_plan(const MapGrid& map, const RunOptions& options)
{
    const auto t0 = std::chrono::steady_clock::now();
    const Catalog& catalog = options.catalog ? *options.catalog : builtin_catalog();
    RunOutcome out;
    nlohmann::json& doc = out.document;
    doc["grid"] = {{"cell_inner_radius", map.spec().cell_inner_radius}, {"min_turn_radius", map.spec().min_turn_radius}};
    doc["start"] = cell_json(map.start());
    doc["target"] = cell_json(map.target());
    doc["settings"] = {{"cost_table", options.table.variant()},
                       {"costs", options.table.values()},
                       {"w_n", options.weights.w_n},
                       {"w_kappa", options.weights.w_kappa},
                       {"mode", to_string(options.planner.termination)},
                       {"kappa_accumulation", to_string(options.planner.accumulation)},
                       {"dead_cell_pruning", options.planner.dead_cell_pruning}};

    try {
        out.plan = plan(map, catalog, options.table, options.weights, options.planner);
    } catch (const NoPath& e) {
        doc["status"] = "no_path";
        doc["error"] = e.what();
        out.exit_code = 2;
        return out;
    }
    const PlanResult& res = *out.plan;
    nlohmann::json path = nlohmann::json::array();
    for (const HexCell c : res.cells) path.push_back(cell_json(c));
    doc["grid_path"] = path;
    nlohmann::json prims = nlohmann::json::array();
    for (std::size_t i = 0; i < res.primitive_ids.size(); ++i)
        prims.push_back({{"window_start", i}, {"id", res.primitive_ids[i]}, {"mirrored", static_cast<bool>(res.mirrored[i])}});
    doc["primitives"] = prims;
    doc["cost"] = {{"n_cells", res.objective.n_cells},
                   {"c_kappa_term", res.objective.c_kappa_term},
                   {"c_c", res.objective.c_c},
                   {"c_g", res.objective.c_g},
                   {"c", res.objective.c}};
    doc["statistics"] = {{"iterations", res.stats.iterations},   {"expansions", res.stats.expansions},
                         {"generated", res.stats.generated},     {"peak_open", res.stats.peak_open},
                         {"dead_cells", res.stats.dead_cells},   {"skipped", res.stats.skipped}};
    doc["warnings"] = res.warnings;

    const Direction first = res.cells.size() > 1 ? direction_between(res.cells[0], res.cells[1])
                                                 : options.planner.initial_heading.value_or(Direction(0));
    const Pose start{to_cartesian(map.start(), map.spec()), first.heading()};
    try {
        out.smoothed = smooth_grid_path(res.cells, map.spec(), start, options.smoothing);
    } catch (const Infeasible& e) {
        doc["status"] = "infeasible";
        doc["error"] = e.what();
        out.exit_code = 3;
        return out;
    }
    nlohmann::json splits = nlohmann::json::array();
    for (const std::size_t s : out.smoothed->splits) splits.push_back(s);
    doc["smoothing"] = {{"start_heading", start.heading},
                        {"end", options.smoothing.end == EndMode::cell_center ? "cell_center" : "exit_edge"},
                        {"splits", splits},
                        {"segments", arc_path_to_json(out.smoothed->path)}};
    doc["status"] = "ok";
    out.metrics = emit_metrics(doc);
    out.metrics->wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    doc["metrics"] = metrics_to_json(*out.metrics);
    return out;
}

} // namespace hexplan
