#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "hexplan/map_io.hpp"
#include "hexplan/pipeline.hpp"
#include "hexplan/scenarios.hpp"
#include "hexplan/svg.hpp"
#include "test_support.hpp"

using namespace hexplan;
namespace pt = boost::property_tree;

namespace {

constexpr GridSpec kSpec{1.0, 3.0};

const char* kMinimalMap = R"({
  "cell_inner_radius": 1.0, "min_turn_radius": 3.0,
  "bounds": {"q_min": 0, "q_max": 4, "r_min": 0, "r_max": 2},
  "start": [0, 1], "target": [4, 1], "occupied": [[2, 0], [2, 2]]
})";

nlohmann::json minimal_doc() { return nlohmann::json::parse(kMinimalMap); }

MapGrid corridor_map(int length)
{
    std::set<HexCell> occ;
    for (int q = -1; q <= length; ++q) {
        occ.insert({q, -1});
        occ.insert({q, 1});
    }
    occ.insert({-1, 0});
    occ.insert({length, 0});
    return MapGrid(kSpec, {-1, length, -1, 1}, occ, {0, 0}, {length - 1, 0});
}

struct SvgSummary
{
    std::vector<std::string> cell_fills;
    std::vector<std::string> classes;
    int smoothed_paths = 0;
};

void walk(const pt::ptree& node, const std::string& tag, SvgSummary& out)
{
    if (const auto attrs = node.get_child_optional("<xmlattr>")) {
        const std::string cls = attrs->get("class", "");
        if (!cls.empty()) out.classes.push_back(cls);
        if (tag == "polygon" && cls == "cell") out.cell_fills.push_back(attrs->get("fill", ""));
        if (tag == "path" && attrs->get("id", "") == "smoothed") ++out.smoothed_paths;
    }
    for (const auto& [child_tag, child] : node)
        if (child_tag != "<xmlattr>") walk(child, child_tag, out);
}

/// Parses the SVG as XML (throws if malformed) and collects cell fills.
SvgSummary inspect_svg(const std::string& svg)
{
    std::istringstream in(svg);
    pt::ptree tree;
    pt::read_xml(in, tree);
    SvgSummary s;
    walk(tree, "", s);
    return s;
}

bool only_palette_fills(const SvgSummary& s)
{
    const auto& palette = cell_fill_palette();
    return std::all_of(s.cell_fills.begin(), s.cell_fills.end(), [&](const std::string& f) {
        return std::find(palette.begin(), palette.end(), f) != palette.end();
    });
}

} // namespace

TEST(MapIo, LoadsMinimalDocument)
{
    const MapGrid map = load_map_text(kMinimalMap);
    EXPECT_EQ(map.start(), (HexCell{0, 1}));
    EXPECT_EQ(map.target(), (HexCell{4, 1}));
    EXPECT_EQ(map.spec().min_turn_radius, 3.0);
    EXPECT_FALSE(map.is_free({2, 0}));
    EXPECT_TRUE(map.is_free({2, 1}));
    EXPECT_FALSE(map.is_free({5, 1}));
}

TEST(MapIo, OccupiedStartIsInvalid)
{
    auto doc = minimal_doc();
    doc["occupied"].push_back({0, 1});
    EXPECT_THROW(load_map(doc), InvalidMap);
    doc = minimal_doc();
    doc["target"] = {9, 9};
    EXPECT_THROW(load_map(doc), InvalidMap);
}

TEST(MapIo, MissingFieldIsNamed)
{
    auto doc = minimal_doc();
    doc.erase("min_turn_radius");
    try {
        load_map(doc);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("min_turn_radius"), std::string::npos) << e.what();
    }
    doc = minimal_doc();
    doc["bounds"].erase("r_max");
    try {
        load_map(doc);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("bounds.r_max"), std::string::npos) << e.what();
    }
    doc = minimal_doc();
    doc["start"] = {1, "x"};
    EXPECT_THROW(load_map(doc), ParseError);
    EXPECT_THROW(load_map_text("{not json"), ParseError);
    EXPECT_THROW(load_map_file("/nonexistent/map.json"), ParseError);
}

TEST(MapIo, RoundTripsRandomMaps)
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const MapGrid map = fixtures::random_map(rng, 4 + i % 9, 0.3, {0.5 + 0.1 * i, 1.5 + 0.1 * i});
        const MapGrid back = load_map_text(map_to_json(map).dump());
        EXPECT_EQ(back.spec().cell_inner_radius, map.spec().cell_inner_radius);
        EXPECT_EQ(back.spec().min_turn_radius, map.spec().min_turn_radius);
        EXPECT_EQ(back.bounds().q_min, map.bounds().q_min);
        EXPECT_EQ(back.bounds().q_max, map.bounds().q_max);
        EXPECT_EQ(back.bounds().r_min, map.bounds().r_min);
        EXPECT_EQ(back.bounds().r_max, map.bounds().r_max);
        EXPECT_EQ(back.start(), map.start());
        EXPECT_EQ(back.target(), map.target());
        EXPECT_EQ(back.occupied(), map.occupied());
        EXPECT_EQ(map_to_json(back), map_to_json(map));
    }
}

TEST(RunPlan, StraightCorridorIsOneLine)
{
    const RunOutcome out = run_plan(corridor_map(7), {});
    ASSERT_EQ(out.exit_code, 0);
    EXPECT_EQ(out.document["status"], "ok");
    EXPECT_EQ(out.document["grid_path"].size(), 7u);
    ASSERT_EQ(out.smoothed->path.segments.size(), 1u);
    EXPECT_EQ(out.smoothed->path.segments[0].kind, SegmentKind::line);
    EXPECT_DOUBLE_EQ(out.smoothed->path.length(), 12.0);
    EXPECT_EQ(out.metrics->max_kappa_r_min, 0.0);
    EXPECT_EQ(out.metrics->direction_changes, 0);
    EXPECT_EQ(out.metrics->grid_cells, 7u);
    EXPECT_EQ(out.document["primitives"].size(), 3u);
    EXPECT_EQ(out.document["primitives"][0]["id"], 1);
    EXPECT_EQ(out.document["cost"]["c"], 7.0);
}

TEST(RunPlan, NarrowPocketRevisitsCells)
{
    const MapGrid map = load_shipped_map("e2_narrow_escape");
    const RunOutcome out = run_plan(map, {});
    ASSERT_EQ(out.exit_code, 0) << out.document.dump();
    const auto& cells = out.plan->cells;
    EXPECT_LT(std::set<HexCell>(cells.begin(), cells.end()).size(), cells.size());
    EXPECT_FALSE(out.smoothed->splits.empty());
    EXPECT_LE(out.metrics->max_kappa_r_min, 1.0 + 1e-12);
    EXPECT_GE(containment_margin(out.smoothed->path, cells, map.spec()), -1e-6);
    EXPECT_EQ(out.smoothed->path.start_pose().position, to_cartesian(map.start(), map.spec()));
    EXPECT_LT(norm(out.smoothed->path.end_pose().position - to_cartesian(map.target(), map.spec())), 1e-9);
}

TEST(RunPlan, EnclosedTargetGivesNoPathDocument)
{
    std::set<HexCell> occ;
    for (const HexCell n : neighbors({5, 5})) occ.insert(n);
    const RunOutcome out = run_plan(MapGrid(kSpec, {0, 9, 0, 9}, occ, {0, 0}, {5, 5}), {});
    EXPECT_EQ(out.exit_code, 2);
    EXPECT_EQ(out.document["status"], "no_path");
    EXPECT_TRUE(out.document.contains("error"));
    EXPECT_FALSE(out.document.contains("grid_path"));
}

TEST(RunPlan, DocumentsAreDeterministic)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 6; ++i) {
        const MapGrid map = fixtures::random_map(rng, 12, 0.15, kSpec);
        RunOptions opt;
        opt.table = builtin_table(builtin_variants()[static_cast<std::size_t>(i % 3)]);
        const RunOutcome a = run_plan(map, opt);
        const RunOutcome b = run_plan(map, opt);
        EXPECT_EQ(a.exit_code, b.exit_code);
        EXPECT_EQ(without_wall_time(a.document).dump(), without_wall_time(b.document).dump());
        if (a.exit_code == 0) {
            EXPECT_FALSE(without_wall_time(a.document)["metrics"].contains("wall_time_s"));
        }
    }
}

TEST(Metrics, StraightPath)
{
    const RunOutcome out = run_plan(corridor_map(7), {});
    const MetricsReport m = emit_metrics(out.document);
    EXPECT_EQ(m.direction_changes, 0);
    EXPECT_EQ(m.max_kappa_r_min, 0.0);
    EXPECT_EQ(m.median_kappa_norm, 0.0);
    EXPECT_EQ(m.iterations, out.plan->stats.iterations);
}

TEST(Metrics, ZigZagWithStraightChord)
{
    // Moves alternate between directions 0 and 1; the smoothed path is the
    // 30 degree chord through the cells.
    std::vector<HexCell> cells{{0, 0}};
    for (int i = 0; i < 8; ++i) cells.push_back(neighbor(cells.back(), Direction(i % 2)));
    nlohmann::json doc;
    doc["grid"] = {{"cell_inner_radius", 1.0}, {"min_turn_radius", 3.0}};
    for (const HexCell c : cells) doc["grid_path"].push_back(cell_json(c));
    const Vec2 a = to_cartesian(cells.front(), kSpec);
    const Vec2 b = to_cartesian(cells.back(), kSpec);
    ArcPath chord;
    chord.segments.push_back({SegmentKind::line, a, std::atan2(b.y - a.y, b.x - a.x), 0.0, norm(b - a)});
    doc["smoothing"]["segments"] = arc_path_to_json(chord);
    doc["statistics"] = {{"iterations", 3}, {"expansions", 2}, {"peak_open", 5}};
    const MetricsReport m = emit_metrics(doc);
    EXPECT_EQ(m.direction_changes, 7);
    EXPECT_EQ(m.grid_cells, 9u);
    EXPECT_EQ(m.median_kappa_norm, 0.0);
    EXPECT_NEAR(m.arc_length, 8.0 * std::sqrt(3.0), 1e-12);
    EXPECT_EQ(m.expansions, 2u);
    EXPECT_THROW(emit_metrics(nlohmann::json::object()), ParseError);
}

TEST(Metrics, CurvatureBoundOnArcHeavyPaths)
{
    for (const char* name : {"e2_narrow_escape", "e3_cost_comparison"}) {
        for (const auto& variant : builtin_variants()) {
            RunOptions opt;
            opt.table = builtin_table(variant);
            const RunOutcome out = run_plan(load_shipped_map(name), opt);
            ASSERT_EQ(out.exit_code, 0) << name << ' ' << variant;
            EXPECT_GT(out.metrics->max_kappa_r_min, 0.0);
            EXPECT_LE(out.metrics->max_kappa_r_min, 1.0 + 1e-12) << name << ' ' << variant;
        }
    }
}

TEST(Svg, EmptyMapUsesFreeStartAndTargetFills)
{
    const MapGrid map(kSpec, {0, 5, 0, 4}, {}, {0, 0}, {5, 4});
    const SvgSummary s = inspect_svg(render_svg(map));
    ASSERT_EQ(s.cell_fills.size(), 30u);
    EXPECT_EQ(std::count(s.cell_fills.begin(), s.cell_fills.end(), colors::start), 1);
    EXPECT_EQ(std::count(s.cell_fills.begin(), s.cell_fills.end(), colors::target), 1);
    EXPECT_EQ(std::count(s.cell_fills.begin(), s.cell_fills.end(), colors::free), 28);
    EXPECT_EQ(s.smoothed_paths, 0);
}

TEST(Svg, DeadEndGetsYellowArrow)
{
    const MapGrid map(kSpec, {0, 5, 0, 4}, {{2, 1}}, {0, 0}, {5, 4});
    SearchTrace trace;
    TraceEvent first;
    first.iteration = 1;
    first.closed = {0, 0};
    first.opened = {{{1, 0}, {0, 0}, "0", 1.0}, {{0, 1}, {0, 0}, "5", 1.0}};
    TraceEvent second;
    second.iteration = 2;
    second.closed = {1, 0};
    second.closed_parent = HexCell{0, 0};
    second.closed_window = "0";
    second.dead = {{1, 0}};
    trace.events = {first, second};
    const std::string svg = render_svg(map, &trace);
    const SvgSummary s = inspect_svg(svg);
    EXPECT_EQ(std::count(s.classes.begin(), s.classes.end(), "arrow dead"), 1);
    EXPECT_NE(svg.find(colors::dead_arrow), std::string::npos);
    EXPECT_EQ(std::count(s.cell_fills.begin(), s.cell_fills.end(), colors::closed), 1);
    EXPECT_EQ(std::count(s.cell_fills.begin(), s.cell_fills.end(), colors::open), 1);
    EXPECT_EQ(std::count(s.cell_fills.begin(), s.cell_fills.end(), colors::occupied), 1);
}

TEST(Svg, PlannerTraceOnNotchedWallShowsDeadEndsAndSharedArrows)
{
    const MapGrid map = load_shipped_map("e2_blocked_detour");
    RunOptions opt;
    opt.planner.record_trace = true;
    const RunOutcome out = run_plan(map, opt);
    ASSERT_EQ(out.exit_code, 0);
    for (const Orientation o : {Orientation::pointy, Orientation::flat}) {
        const SvgSummary s = inspect_svg(render_svg(map, &*out.plan->trace, &out.smoothed->path, {o, true}));
        EXPECT_GE(std::count(s.classes.begin(), s.classes.end(), "arrow dead"), 1);
        EXPECT_GE(std::count(s.classes.begin(), s.classes.end(), "arrow shared"), 1);
        EXPECT_EQ(s.smoothed_paths, 1);
        EXPECT_TRUE(only_palette_fills(s));
    }
}

TEST(Svg, ResultOverlayIsOneStrokedPath)
{
    const MapGrid map = corridor_map(6);
    const RunOutcome out = run_plan(map, {});
    const std::string svg = render_svg(map, nullptr, &out.smoothed->path);
    EXPECT_EQ(inspect_svg(svg).smoothed_paths, 1);
    const std::string key = "id=\"smoothed\" d=\"";
    const auto from = svg.find(key);
    ASSERT_NE(from, std::string::npos);
    const std::string d = svg.substr(from + key.size(), svg.find('"', from + key.size()) - from - key.size());
    EXPECT_EQ(std::count(d.begin(), d.end(), 'M'), 1);
    EXPECT_EQ(d.front(), 'M');
    const detail::SvgCanvas canvas(map, {});
    EXPECT_EQ(d.substr(1, d.find(' ') - 1), canvas.xy(to_cartesian(map.start(), map.spec())));
    EXPECT_EQ(d.substr(d.rfind('L') + 1), canvas.xy(to_cartesian(map.target(), map.spec())));
}

TEST(Svg, RandomMapsAreWellFormedWithPaletteFills)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 12; ++i) {
        const MapGrid map = fixtures::random_map(rng, 10, 0.2, kSpec);
        RunOptions opt;
        opt.planner.record_trace = true;
        const RunOutcome out = run_plan(map, opt);
        const SearchTrace* trace = out.plan ? &*out.plan->trace : nullptr;
        const ArcPath* path = out.smoothed ? &out.smoothed->path : nullptr;
        const SvgSummary s = inspect_svg(render_svg(map, trace, path, {i % 2 ? Orientation::flat : Orientation::pointy, i % 3 == 0}));
        EXPECT_EQ(s.cell_fills.size(), map.cell_count());
        EXPECT_TRUE(only_palette_fills(s));
    }
}

TEST(Trace, JsonRoundTrip)
{
    RunOptions opt;
    opt.planner.record_trace = true;
    const RunOutcome out = run_plan(load_shipped_map("e2_blocked_detour"), opt);
    const nlohmann::json doc = trace_to_json(*out.plan->trace);
    EXPECT_EQ(trace_to_json(trace_from_json(doc)), doc);
    EXPECT_THROW(trace_from_json(nlohmann::json::object()), ParseError);
}

TEST(Scenario, UnknownNameIsRejected)
{
    EXPECT_THROW(run_scenario("e4_nothing"), UnknownScenario);
}

TEST(Scenario, CostComparisonUsesOneMapAndThreeTables)
{
    const ScenarioReport rep = run_scenario("e3_cost_comparison", std::nullopt, {.trace = false});
    ASSERT_EQ(rep.runs.size(), 3u);
    std::set<std::string> tables;
    for (const auto& r : rep.runs) {
        EXPECT_EQ(map_to_json(r.map), map_to_json(rep.runs[0].map));
        tables.insert(r.outcome.document["settings"]["cost_table"].get<std::string>());
    }
    EXPECT_EQ(tables, (std::set<std::string>{"ribbon", "adapted_ribbon", "curvature_penalty"}));
    EXPECT_TRUE(rep.passed()) << rep.to_json().dump(2);
}
