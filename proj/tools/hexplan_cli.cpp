#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hexplan/cost_model.hpp"
#include "hexplan/errors.hpp"
#include "hexplan/map_io.hpp"
#include "hexplan/pipeline.hpp"
#include "hexplan/primitive_catalog.hpp"
#include "hexplan/ribbon_smoother.hpp"
#include "hexplan/scenarios.hpp"
#include "hexplan/svg.hpp"

namespace fs = std::filesystem;
using namespace hexplan;

namespace {

enum Exit
{
    kOk = 0,
    kInvalidInput = 1,
    kNoPath = 2,
    kInfeasible = 3,
    kPropertyFailed = 4,
};

struct SharedFlags
{
    std::string cost_table = "curvature_penalty";
    double w_n = 1.0;
    double w_kappa = 5.0;
    std::string mode = "optimal";
    std::string accumulation = "accumulated";
    bool trace = false;
    std::string svg;
    std::string out;
    std::string orientation = "pointy";
    bool labels = false;
};

void add_shared(CLI::App* cmd, SharedFlags& f)
{
    cmd->add_option("--cost-table", f.cost_table, "ribbon | adapted_ribbon | curvature_penalty | file:PATH")
        ->capture_default_str();
    cmd->add_option("--w-n", f.w_n, "weight on the number of cells")->capture_default_str();
    cmd->add_option("--w-kappa", f.w_kappa, "weight on the curvature cost")->capture_default_str();
    cmd->add_option("--mode", f.mode, "termination rule")
        ->check(CLI::IsMember({"optimal", "paper"}))
        ->capture_default_str();
    cmd->add_option("--kappa-accumulation", f.accumulation, "curvature term of the cost-to-come")
        ->check(CLI::IsMember({"accumulated", "literal"}))
        ->capture_default_str();
    cmd->add_flag("--trace", f.trace, "record the search trace");
    cmd->add_option("--svg", f.svg, "write an SVG render to this path");
    cmd->add_option("--out", f.out, "write the JSON output to this path instead of stdout");
    cmd->add_option("--orientation", f.orientation, "hexagon orientation of the render")
        ->check(CLI::IsMember({"pointy", "flat"}))
        ->capture_default_str();
    cmd->add_flag("--labels", f.labels, "label cells with q:r in the render");
}

SvgOptions svg_options(const SharedFlags& f)
{
    return {f.orientation == "flat" ? Orientation::flat : Orientation::pointy, f.labels};
}

void write_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void emit(const SharedFlags& f, const nlohmann::json& doc)
{
    if (f.out.empty())
        std::cout << doc.dump(2) << '\n';
    else
        write_file(f.out, doc.dump(2) + "\n");
}

nlohmann::json read_json(const std::string& path, const char* what)
{
    std::ifstream in(path);
    if (!in) throw ParseError(std::string("cannot open ") + what + " " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string(what) + " " + path + " is not valid JSON: " + e.what());
    }
}

RunOptions run_options(const SharedFlags& f, bool pruning)
{
    RunOptions o;
    o.table = resolve_cost_table(f.cost_table);
    o.weights = {f.w_n, f.w_kappa};
    o.weights.validate();
    o.planner.termination = f.mode == "paper" ? Termination::paper : Termination::optimal;
    o.planner.accumulation = f.accumulation == "literal" ? KappaAccumulation::literal : KappaAccumulation::accumulated;
    o.planner.dead_cell_pruning = pruning;
    o.planner.record_trace = f.trace;
    return o;
}

int cmd_plan(const std::string& map_path, const SharedFlags& f, bool no_pruning)
{
    const MapGrid map = load_map_file(map_path);
    RunOutcome out = run_plan(map, run_options(f, !no_pruning));
    const SearchTrace* trace = out.plan && out.plan->trace ? &*out.plan->trace : nullptr;
    if (trace) {
        if (f.out.empty()) {
            out.document["trace"] = trace_to_json(*trace);
        } else {
            const fs::path trace_path = fs::path(f.out).replace_extension(".trace.json");
            write_file(trace_path, trace_to_json(*trace).dump(1) + "\n");
            out.document["trace"] = trace_path.filename().string();
        }
    }
    emit(f, out.document);
    if (!f.svg.empty())
        write_file(f.svg, render_svg(map, trace, out.smoothed ? &out.smoothed->path : nullptr, svg_options(f)));
    if (out.exit_code != 0) std::cerr << "hexplan: " << out.document.value("error", std::string()) << '\n';
    return out.exit_code;
}

/// Accepts a result document (grid + grid_path) or {cell_inner_radius,
/// min_turn_radius, cells, optional start {x, y, heading}}.
int cmd_smooth(const std::string& input, const std::string& end, const SharedFlags& f)
{
    const nlohmann::json doc = read_json(input, "path file");
    GridSpec spec;
    std::vector<HexCell> cells;
    std::optional<Pose> start;
    try {
        const bool result_doc = doc.contains("grid_path");
        const auto& grid = result_doc ? doc.at("grid") : doc;
        spec = {detail::number_field(grid, "cell_inner_radius"), detail::number_field(grid, "min_turn_radius")};
        spec.validate();
        const auto& list = result_doc ? doc.at("grid_path") : detail::require(doc, "cells", "");
        for (const auto& c : list) cells.push_back(detail::cell_value(c, "cells"));
        if (doc.contains("start") && doc["start"].is_object())
            start = Pose{{doc["start"].at("x").get<double>(), doc["start"].at("y").get<double>()},
                         doc["start"].at("heading").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed path file: ") + e.what());
    }
    if (cells.empty()) throw ParseError("path has no cells");
    if (!start) {
        const Direction first = cells.size() > 1 ? direction_between(cells[0], cells[1]) : Direction(0);
        start = Pose{to_cartesian(cells.front(), spec), first.heading()};
    }
    SmoothingConfig cfg;
    cfg.end = end == "exit_edge" ? EndMode::exit_edge : EndMode::cell_center;
    try {
        const SmoothedPath sp = smooth_grid_path(cells, spec, *start, cfg);
        nlohmann::json splits = nlohmann::json::array();
        for (const auto s : sp.splits) splits.push_back(s);
        emit(f, {{"status", "ok"},
                 {"segments", arc_path_to_json(sp.path)},
                 {"splits", splits},
                 {"arc_length", sp.path.length()},
                 {"max_kappa_r_min", sp.path.max_abs_curvature() * spec.min_turn_radius},
                 {"median_kappa_norm", median_curvature_cost(sp.path, spec.kappa_max(), spec.cell_inner_radius / 10.0)}});
    } catch (const Infeasible& e) {
        emit(f, {{"status", "infeasible"}, {"error", e.what()}});
        std::cerr << "hexplan: " << e.what() << '\n';
        return kInfeasible;
    }
    return kOk;
}

int cmd_costs(const SharedFlags& f, bool all, bool precompute, bool adapt, double ratio)
{
    nlohmann::json doc;
    auto finish = [&](CostTable t) { return cost_table_to_json(adapt ? adapt_table(t) : t); };
    if (precompute) {
        doc = finish(precompute_primitive_costs(builtin_catalog(), {1.0, ratio}));
    } else if (all) {
        doc = nlohmann::json::array();
        for (const auto& v : builtin_variants()) doc.push_back(finish(builtin_table(v)));
    } else {
        doc = finish(resolve_cost_table(f.cost_table));
    }
    emit(f, doc);
    return kOk;
}

int cmd_scenario(const std::string& name, const std::string& out_dir, const SharedFlags& f)
{
    std::vector<std::string> names;
    if (name == "all")
        names = scenario_names();
    else
        names = {name};
    for (const auto& n : names)
        if (std::find(scenario_names().begin(), scenario_names().end(), n) == scenario_names().end())
            throw UnknownScenario("unknown scenario '" + n + "'");

    ScenarioOptions opt;
    opt.orientation = f.orientation == "flat" ? Orientation::flat : Orientation::pointy;
    const std::optional<fs::path> dir = out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir);
    // Scenarios are independent; each writes only under its own directory.
    std::vector<std::future<ScenarioReport>> jobs;
    for (const auto& n : names) jobs.push_back(std::async(std::launch::async, [n, dir, opt] { return run_scenario(n, dir, opt); }));

    int code = kOk;
    nlohmann::json summary = nlohmann::json::array();
    for (auto& job : jobs) {
        const ScenarioReport rep = job.get();
        for (const auto& c : rep.checks)
            std::cerr << (c.passed ? "ok   " : "FAIL ") << rep.name << ": " << c.property << " (" << c.detail << ")\n";
        for (const auto& r : rep.runs) code = std::max(code, r.outcome.exit_code);
        if (code == kOk && !rep.passed()) code = kPropertyFailed;
        summary.push_back(rep.to_json());
    }
    if (dir) write_file(*dir / "summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << '\n';
    return code;
}

int cmd_render(const std::string& map_path, const std::string& result_path, const std::string& trace_path,
               const SharedFlags& f)
{
    const MapGrid map = load_map_file(map_path);
    std::optional<ArcPath> path;
    std::optional<SearchTrace> trace;
    if (!result_path.empty()) {
        const nlohmann::json doc = read_json(result_path, "result document");
        if (doc.contains("smoothing")) path = arc_path_from_json(doc["smoothing"].at("segments"));
        if (trace_path.empty() && doc.contains("trace")) {
            if (doc["trace"].is_object())
                trace = trace_from_json(doc["trace"]);
            else
                trace = trace_from_json(
                    read_json((fs::path(result_path).parent_path() / doc["trace"].get<std::string>()).string(), "trace"));
        }
    }
    if (!trace_path.empty()) trace = trace_from_json(read_json(trace_path, "trace"));
    const std::string svg = render_svg(map, trace ? &*trace : nullptr, path ? &*path : nullptr, svg_options(f));
    const std::string target = !f.svg.empty() ? f.svg : f.out;
    if (target.empty())
        std::cout << svg;
    else
        write_file(target, svg);
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Curvature-constrained path planning on hexagonal grids"};
    app.require_subcommand(1);
    SharedFlags flags;

    auto* plan_cmd = app.add_subcommand("plan", "plan and smooth a path on a map file");
    std::string map_path;
    bool no_pruning = false;
    plan_cmd->add_option("map", map_path, "map file")->required();
    plan_cmd->add_flag("--no-dead-cell-pruning", no_pruning, "disable dead-cell pruning");
    add_shared(plan_cmd, flags);

    auto* smooth_cmd = app.add_subcommand("smooth", "smooth a grid path (result document or cell list)");
    std::string path_file;
    std::string end_mode = "cell_center";
    smooth_cmd->add_option("path", path_file, "JSON file with the grid path")->required();
    smooth_cmd->add_option("--end", end_mode, "where the smoothed path ends")
        ->check(CLI::IsMember({"cell_center", "exit_edge"}))
        ->capture_default_str();
    add_shared(smooth_cmd, flags);

    auto* costs_cmd = app.add_subcommand("costs", "print a curvature cost table");
    bool all = false;
    bool precompute = false;
    bool adapt = false;
    double ratio = kC3RatioUpper;
    costs_cmd->add_flag("--all", all, "print every built-in table");
    costs_cmd->add_flag("--precompute", precompute, "compute the ribbon column with the built-in smoother");
    costs_cmd->add_flag("--adapt", adapt, "apply the direction-independence adaptation");
    costs_cmd->add_option("--ratio", ratio, "r_min / r_c for --precompute")->capture_default_str();
    add_shared(costs_cmd, flags);

    auto* scenario_cmd = app.add_subcommand("scenario", "run an evaluation scenario");
    std::string scenario_name;
    std::string scenario_dir;
    scenario_cmd->add_option("name", scenario_name, "e1_open_angles | e2_narrow_escape | e2_blocked_detour | "
                                                    "e3_cost_comparison | all")
        ->required();
    scenario_cmd->add_option("--out-dir", scenario_dir, "directory for result documents, renders and reports");
    add_shared(scenario_cmd, flags);

    auto* render_cmd = app.add_subcommand("render", "render a map, optionally with a result and a trace");
    std::string render_map;
    std::string result_path;
    std::string trace_path;
    render_cmd->add_option("map", render_map, "map file")->required();
    render_cmd->add_option("--result", result_path, "result document whose smoothed path is overlaid");
    render_cmd->add_option("--trace-file", trace_path, "search trace to draw");
    add_shared(render_cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalidInput;
    }

    try {
        if (*plan_cmd) return cmd_plan(map_path, flags, no_pruning);
        if (*smooth_cmd) return cmd_smooth(path_file, end_mode, flags);
        if (*costs_cmd) return cmd_costs(flags, all, precompute, adapt, ratio);
        if (*scenario_cmd) return cmd_scenario(scenario_name, scenario_dir, flags);
        if (*render_cmd) return cmd_render(render_map, result_path, trace_path, flags);
    } catch (const NoPath& e) {
        std::cerr << "hexplan: " << e.what() << '\n';
        return kNoPath;
    } catch (const Infeasible& e) {
        std::cerr << "hexplan: " << e.what() << '\n';
        return kInfeasible;
    } catch (const Error& e) {
        std::cerr << "hexplan: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "hexplan: " << e.what() << '\n';
        return kInvalidInput;
    }
    return kInvalidInput;
}
