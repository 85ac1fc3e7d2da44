#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "hexplan/cost_model.hpp"
#include "hexplan/errors.hpp"
#include "hexplan/hexgrid.hpp"
#include "hexplan/primitive_catalog.hpp"

namespace hexplan {

// ---------------------------------------------------------------------------
// Arc paths
// ---------------------------------------------------------------------------

enum class SegmentKind
{
    line,
    arc,
};

struct PathSegment
{
    SegmentKind kind = SegmentKind::line;
    Vec2 start;
    double heading = 0.0;   ///< radians
    double curvature = 0.0; ///< signed, positive turns left; 0 for lines
    double length = 0.0;

    Vec2 point_at(double s) const
    {
        if (kind == SegmentKind::line || curvature == 0.0) return start + unit_vector(heading) * s;
        const double half = 0.5 * curvature * s;
        return start + unit_vector(heading + half) * (2.0 * std::sin(half) / curvature);
    }
    double heading_at(double s) const { return heading + curvature * s; }
    Vec2 end() const { return point_at(length); }
    double end_heading() const { return heading_at(length); }
};

struct Pose
{
    Vec2 position;
    double heading = 0.0;
};

struct ArcPath
{
    std::vector<PathSegment> segments;

    bool empty() const { return segments.empty(); }
    double length() const
    {
        double total = 0.0;
        for (const auto& s : segments) total += s.length;
        return total;
    }
    double max_abs_curvature() const
    {
        double m = 0.0;
        for (const auto& s : segments) m = std::max(m, std::abs(s.curvature));
        return m;
    }
    Pose start_pose() const { return {segments.front().start, segments.front().heading}; }
    Pose end_pose() const { return {segments.back().end(), segments.back().end_heading()}; }
};

inline nlohmann::json arc_path_to_json(const ArcPath& path)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : path.segments) {
        out.push_back({{"kind", s.kind == SegmentKind::line ? "line" : "arc"},
                       {"x", s.start.x},
                       {"y", s.start.y},
                       {"heading", s.heading},
                       {"curvature", s.curvature},
                       {"length", s.length}});
    }
    return out;
}

inline ArcPath arc_path_from_json(const nlohmann::json& doc)
{
    ArcPath path;
    try {
        for (const auto& rec : doc) {
            PathSegment s;
            const std::string kind = rec.at("kind").get<std::string>();
            if (kind != "line" && kind != "arc") throw ParseError("segment kind must be line or arc");
            s.kind = kind == "line" ? SegmentKind::line : SegmentKind::arc;
            s.start = {rec.at("x").get<double>(), rec.at("y").get<double>()};
            s.heading = rec.at("heading").get<double>();
            s.curvature = rec.at("curvature").get<double>();
            s.length = rec.at("length").get<double>();
            path.segments.push_back(s);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed arc path: ") + e.what());
    }
    return path;
}

struct PathSample
{
    double s = 0.0;
    Vec2 point;
    double heading = 0.0;
    double curvature = 0.0;
};

/// Samples at arc length 0, ds, 2 ds, ... plus the end point when it is not on
/// the grid. A sample on a segment boundary takes the following segment.
inline std::vector<PathSample> sample_path(const ArcPath& path, double ds)
{
    if (!(ds > 0.0)) throw Error("sample step must be positive");
    std::vector<PathSample> out;
    if (path.empty()) return out;
    const double total = path.length();
    std::size_t seg = 0;
    double seg_start = 0.0;
    auto emit = [&](double s) {
        while (seg + 1 < path.segments.size() && s >= seg_start + path.segments[seg].length) {
            seg_start += path.segments[seg].length;
            ++seg;
        }
        const PathSegment& g = path.segments[seg];
        const double local = std::clamp(s - seg_start, 0.0, g.length);
        out.push_back({s, g.point_at(local), g.heading_at(local), g.curvature});
    };
    const auto steps = static_cast<std::size_t>(std::floor(total / ds));
    for (std::size_t i = 0; i <= steps; ++i) emit(static_cast<double>(i) * ds);
    if (total - static_cast<double>(steps) * ds > 1e-12 * std::max(1.0, total)) emit(total);
    return out;
}

/// Median of a sample of values, averaging the two middle entries for even counts.
inline double sample_median(std::vector<double> values)
{
    if (values.empty()) return 0.0;
    const std::size_t n = values.size();
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n / 2), values.end());
    const double upper = values[n / 2];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n / 2));
    return 0.5 * (lower + upper);
}

/// Median |kappa| over uniform samples, divided by kappa_max.
inline double median_curvature_cost(const ArcPath& path, double kappa_max, double sample_step)
{
    if (path.empty()) throw Error("median_curvature_cost needs a non-empty path");
    std::vector<double> k;
    for (const auto& s : sample_path(path, sample_step)) k.push_back(std::abs(s.curvature));
    return sample_median(std::move(k)) / kappa_max;
}

// ---------------------------------------------------------------------------
// Corridor
// ---------------------------------------------------------------------------

struct Corridor
{
    std::vector<HexCell> cells;
    GridSpec spec;
    Direction entry_facing; ///< side of the first cell the path enters through
    Direction exit_facing;  ///< side of the last cell the path leaves through
    Segment2 entry_edge;
    Segment2 exit_edge;
    std::vector<Vec2> left_boundary;
    std::vector<Vec2> right_boundary;

    /// Shared edge between cells[i] and cells[i + 1].
    Segment2 gate(std::size_t i) const { return hex_edge(cells[i], direction_between(cells[i], cells[i + 1]), spec); }

    /// Largest hex_inside_margin over the cells: >= 0 inside the union.
    double margin(Vec2 p) const
    {
        double best = -std::numeric_limits<double>::infinity();
        for (const HexCell c : cells) best = std::max(best, hex_inside_margin(c, p, spec));
        return best;
    }
};

/// Builds the ribbon of a non-revisiting cell sequence. exit_facing and
/// entry_facing default to the last move and the reverse of the first move
/// (direction 0 for a single cell).
inline Corridor build_corridor(std::span<const HexCell> cells, const GridSpec& spec,
                               std::optional<Direction> exit_facing = std::nullopt,
                               std::optional<Direction> entry_facing = std::nullopt)
{
    if (cells.empty()) throw NotAPath("corridor needs at least one cell");
    spec.validate();
    std::set<HexCell> seen;
    for (const HexCell c : cells) {
        if (!seen.insert(c).second) throw SelfOverlap("cell " + to_label(c) + " appears twice");
    }
    const std::vector<Direction> moves = move_directions(cells);

    Corridor out;
    out.cells.assign(cells.begin(), cells.end());
    out.spec = spec;
    const Direction first = moves.empty() ? exit_facing.value_or(Direction(0)) : moves.front();
    out.exit_facing = exit_facing.value_or(moves.empty() ? first : moves.back());
    out.entry_facing = entry_facing.value_or(first.opposite());

    auto append = [](std::vector<Vec2>& chain, Vec2 p) {
        if (chain.empty() || norm(chain.back() - p) > 1e-9) chain.push_back(p);
    };
    for (std::size_t i = 0; i < cells.size(); ++i) {
        // in: direction of travel into the cell, out: direction of travel out of it.
        const int in = i == 0 ? out.entry_facing.opposite().index() : moves[i - 1].index();
        const int leave = i + 1 == cells.size() ? out.exit_facing.index() : moves[i].index();
        const int left_count = ((in + 2 - leave) % 6 + 6) % 6;
        for (int k = 0; k <= left_count; ++k) append(out.left_boundary, hex_corner(cells[i], in + 2 - k, spec));
        const int right_count = ((leave - 1 - (in + 3)) % 6 + 6) % 6;
        for (int k = 0; k <= right_count; ++k) append(out.right_boundary, hex_corner(cells[i], in + 3 + k, spec));
    }
    out.entry_edge = hex_edge(cells.front(), out.entry_facing, spec);
    out.exit_edge = hex_edge(cells.back(), out.exit_facing, spec);
    return out;
}

// ---------------------------------------------------------------------------
// Smoothing
// ---------------------------------------------------------------------------

enum class EndMode
{
    exit_edge,   ///< end anywhere on the exit edge, heading free
    cell_center, ///< end at the center of the last cell, heading free
};

struct SmoothingConfig
{
    double kappa_max = 0.0;         ///< 0 selects 1 / min_turn_radius
    double sample_step = 0.0;       ///< 0 selects r_c / 10
    std::size_t max_iterations = 600;
    double tolerance = 1e-7;        ///< smallest pattern step, in units of r_c
    EndMode end = EndMode::exit_edge;

    double resolved_kappa_max(const GridSpec& spec) const { return kappa_max > 0.0 ? kappa_max : spec.kappa_max(); }
    double resolved_sample_step(const GridSpec& spec) const
    {
        return sample_step > 0.0 ? sample_step : spec.cell_inner_radius / 10.0;
    }
};

/// Objective of the relaxation, compared lexicographically. Lengths are in
/// units of r_c.
struct CurvatureObjective
{
    double max_kappa = 0.0;
    double median_kappa = 0.0;
    double bending = 0.0; ///< integral of kappa^2

    auto operator<=>(const CurvatureObjective&) const = default;
};

struct SmoothingReport
{
    std::vector<CurvatureObjective> history; ///< one entry per sweep of the kept run
    std::size_t evaluations = 0;
    bool straight = false;
};

namespace detail {

inline constexpr double kCos60[6] = {1.0, 0.5, -0.5, -1.0, -0.5, 0.5};
inline constexpr double kSin60[6] = {0.0, std::numbers::sqrt3 / 2.0, std::numbers::sqrt3 / 2.0,
                                     0.0, -std::numbers::sqrt3 / 2.0, -std::numbers::sqrt3 / 2.0};

inline Vec2 rotate60(Vec2 v, int k)
{
    k = ((k % 6) + 6) % 6;
    return {kCos60[k] * v.x - kSin60[k] * v.y, kSin60[k] * v.x + kCos60[k] * v.y};
}

inline HexCell rotate_axial(HexCell c, int k)
{
    k = ((k % 6) + 6) % 6;
    for (int i = 0; i < k; ++i) c = {c.q + c.r, -c.q};
    return c;
}

inline HexCell mirror_axial(HexCell c) { return {c.q + c.r, -c.r}; }

inline double quantize(double v) { return std::round(v * 1e12) / 1e12; }

/// Maps a world problem onto a unit-radius grid with the first move along
/// direction 0 and a fixed handedness, so that scaled or mirrored inputs
/// reduce to the same computation.
struct Frame
{
    HexCell origin;
    Vec2 world_origin;
    int rotation = 0;
    bool mirrored = false;
    double scale = 1.0;

    HexCell cell_in(HexCell c) const
    {
        const HexCell d = rotate_axial(c - origin, -rotation);
        return mirrored ? mirror_axial(d) : d;
    }
    int dir_in(Direction d) const
    {
        const int k = ((d.index() - rotation) % 6 + 6) % 6;
        return mirrored ? (6 - k) % 6 : k;
    }
    Vec2 vec_in(Vec2 v) const
    {
        Vec2 r = rotate60(v, -rotation);
        if (mirrored) r.y = -r.y;
        return {r.x / scale, r.y / scale};
    }
    double heading_in(double h) const
    {
        const double a = wrap_angle(h - rotation * std::numbers::pi / 3.0);
        return mirrored ? -a : a;
    }
    Vec2 point_out(Vec2 v) const
    {
        if (mirrored) v.y = -v.y;
        return world_origin + rotate60(v, rotation) * scale;
    }
    double heading_out(double h) const
    {
        return wrap_angle((mirrored ? -h : h) + rotation * std::numbers::pi / 3.0);
    }
};

struct Problem
{
    std::vector<HexCell> cells;
    Direction entry_facing;
    Direction exit_facing;
    Vec2 start;
    double heading = 0.0;
    double kappa_max = 1.0;
    double sample_step = 0.1;
    EndMode end = EndMode::exit_edge;
    std::size_t max_iterations = 600;
    double tolerance = 1e-7;
};

inline const GridSpec kUnit{1.0, 1.0};

/// Distance along the ray until it leaves the hexagon of c.
inline double ray_exit(HexCell c, Vec2 p, Vec2 dir)
{
    const Vec2 rel = p - to_cartesian(c, kUnit);
    double t = std::numeric_limits<double>::infinity();
    for (int d = 0; d < 6; ++d) {
        const Vec2 n = unit_vector(Direction(d).heading());
        const double along = dot(dir, n);
        if (along > 1e-15) t = std::min(t, (1.0 - dot(rel, n)) / along);
    }
    return std::max(t, 0.0);
}

/// Ray-segment intersection: (t along the ray, u along the segment).
inline std::optional<std::pair<double, double>> ray_segment(Vec2 p, Vec2 dir, Segment2 s)
{
    const Vec2 e = s.b - s.a;
    const double den = cross(dir, e);
    if (std::abs(den) < 1e-15) return std::nullopt;
    const Vec2 w = s.a - p;
    return std::pair{cross(w, e) / den, cross(w, dir) / den};
}

class Solver
{
public:
    explicit Solver(Problem pb) : pb_(std::move(pb))
    {
        for (std::size_t i = 0; i + 1 < pb_.cells.size(); ++i)
            gates_.push_back(hex_edge(pb_.cells[i], direction_between(pb_.cells[i], pb_.cells[i + 1]), kUnit));
        exit_edge_ = hex_edge(pb_.cells.back(), pb_.exit_facing, kUnit);
        dir_ = unit_vector(pb_.heading);
        t_ray_ = ray_exit(pb_.cells.front(), pb_.start, dir_);
    }

    std::vector<PathSegment> solve(SmoothingReport& report)
    {
        if (auto line = straight()) {
            report.straight = true;
            report.history.push_back({});
            return *line;
        }
        const Vec2 center_end = to_cartesian(pb_.cells.back(), kUnit);
        if (pb_.end == EndMode::cell_center && gates_.empty() && norm(center_end - pb_.start) < 1e-12)
            return {PathSegment{SegmentKind::line, pb_.start, pb_.heading, 0.0, 0.0}};
        if (t_ray_ < 1e-9) throw Infeasible("start heading leaves the first cell immediately");

        std::vector<double> lo, hi, x;
        lo.push_back(1e-6);
        hi.push_back(1.0);
        x.push_back(0.5);
        for (std::size_t j = 0; j < gates_.size(); ++j) {
            lo.push_back(kGateClearance);
            hi.push_back(1.0 - kGateClearance);
            x.push_back(0.5);
        }
        if (pb_.end == EndMode::exit_edge) {
            lo.push_back(0.0);
            hi.push_back(1.0);
            x.push_back(0.5);
        }

        std::vector<std::vector<double>> starts{x};
        // Second start: bias every gate point toward the inside of the turn it serves.
        std::vector<double> inner = x;
        for (std::size_t j = 0; j < gates_.size(); ++j) {
            const int turn = j + 2 < pb_.cells.size()
                                 ? (direction_between(pb_.cells[j + 1], pb_.cells[j + 2]).index() -
                                    direction_between(pb_.cells[j], pb_.cells[j + 1]).index() + 6) % 6
                                 : 0;
            if (turn == 1) inner[j + 1] = 0.65;
            if (turn == 5) inner[j + 1] = 0.35;
        }
        inner[0] = 1.0;
        starts.push_back(inner);

        std::optional<std::vector<double>> best_x;
        CurvatureObjective best{};
        std::vector<CurvatureObjective> best_history;
        for (const auto& s : starts) {
            std::vector<double> xs = s;
            // Phase 1 shapes the polyline against a p-norm of the fillet
            // curvatures, which has no kinks where several fillets tie.
            pattern_search(xs, lo, hi, report, [this](const std::vector<double>& v) -> double {
                evaluate(v, nullptr);
                return soft_;
            });
            // Phase 2 is the recorded relaxation on the lexicographic objective.
            std::vector<CurvatureObjective> history;
            const CurvatureObjective j = pattern_search(
                xs, lo, hi, report, [this](const std::vector<double>& v) { return evaluate(v, nullptr); }, &history);
            if (!best_x || j < best) {
                best = j;
                best_x = xs;
                best_history = std::move(history);
            }
            if (best.max_kappa <= pb_.kappa_max) break;
        }
        report.history = std::move(best_history);
        if (!(best.max_kappa <= pb_.kappa_max * (1.0 + 1e-12)))
            throw Infeasible("no curvature-feasible path in the corridor (best max curvature " +
                             std::to_string(best.max_kappa / pb_.kappa_max) + " x kappa_max)");
        std::vector<PathSegment> segs;
        evaluate(*best_x, &segs);
        return segs;
    }

private:
    static constexpr double kGateClearance = 1e-3;
    static constexpr double kWorst = 1e300;

    std::optional<std::vector<PathSegment>> straight() const
    {
        double last_t = 0.0;
        for (const Segment2& g : gates_) {
            const auto hit = ray_segment(pb_.start, dir_, g);
            if (!hit || hit->first < last_t - 1e-12 || hit->second < -1e-9 || hit->second > 1.0 + 1e-9)
                return std::nullopt;
            last_t = hit->first;
        }
        double length = 0.0;
        if (pb_.end == EndMode::exit_edge) {
            const auto hit = ray_segment(pb_.start, dir_, exit_edge_);
            if (!hit || hit->first < last_t - 1e-12 || hit->second < -1e-9 || hit->second > 1.0 + 1e-9)
                return std::nullopt;
            length = hit->first;
        } else {
            const Vec2 e = to_cartesian(pb_.cells.back(), kUnit) - pb_.start;
            length = norm(e);
            if (length < last_t - 1e-12) return std::nullopt;
            if (length > 0.0 && (std::abs(cross(dir_, e)) > 1e-12 * length || dot(dir_, e) <= 0.0)) return std::nullopt;
            if (length == 0.0 && !gates_.empty()) return std::nullopt;
        }
        return std::vector<PathSegment>{{SegmentKind::line, pb_.start, pb_.heading, 0.0, std::max(length, 0.0)}};
    }

    template <class Score, class Value = std::invoke_result_t<Score, const std::vector<double>&>>
    Value pattern_search(std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& hi,
                        SmoothingReport& report, Score score,
                        std::vector<CurvatureObjective>* history = nullptr) const
    {
        Value current = score(x);
        ++report.evaluations;
        if constexpr (std::is_same_v<Value, CurvatureObjective>)
            if (history) history->push_back(current);
        // Per-coordinate steps grow after a successful move and shrink after a
        // failed one.
        std::vector<double> step(x.size(), 0.25);
        for (std::size_t sweep = 0; sweep < pb_.max_iterations; ++sweep) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (step[i] < pb_.tolerance) continue;
                const double base = x[i];
                double best_v = base;
                Value best = current;
                for (const double sign : {1.0, -1.0}) {
                    const double v = std::clamp(base + sign * step[i], lo[i], hi[i]);
                    if (v == base) continue;
                    x[i] = v;
                    const Value j = score(x);
                    ++report.evaluations;
                    if (j < best) {
                        best = j;
                        best_v = v;
                    }
                }
                x[i] = best_v;
                if (best < current) {
                    current = best;
                    step[i] = std::min(2.0 * step[i], 0.5);
                } else {
                    step[i] *= 0.5;
                }
            }
            if constexpr (std::is_same_v<Value, CurvatureObjective>)
                if (history) history->push_back(current);
            if (*std::max_element(step.begin(), step.end()) < pb_.tolerance) break;
        }
        return current;
    }

    /// Builds the fillet path for the variables and scores it. When segs is
    /// non-null the path itself is written there.
    CurvatureObjective evaluate(const std::vector<double>& x, std::vector<PathSegment>* segs) const
    {
        const CurvatureObjective worst{kWorst, kWorst, kWorst};
        soft_ = kWorst;
        const std::size_t k = gates_.size();
        // pts: start, heading vertex, gate points, end.
        pts_.clear();
        pts_.push_back(pb_.start);
        pts_.push_back(pb_.start + dir_ * (x[0] * t_ray_));
        for (std::size_t j = 0; j < k; ++j) pts_.push_back(gates_[j].a + (gates_[j].b - gates_[j].a) * x[j + 1]);
        if (pb_.end == EndMode::exit_edge)
            pts_.push_back(exit_edge_.a + (exit_edge_.b - exit_edge_.a) * x[k + 1]);
        else
            pts_.push_back(to_cartesian(pb_.cells.back(), kUnit));

        const std::size_t nv = k + 1; // vertices are pts_[1..nv]
        legs_.assign(nv + 1, 0.0);
        dirs_.assign(nv + 1, {});
        legs_[0] = x[0] * t_ray_;
        dirs_[0] = dir_;
        for (std::size_t v = 1; v <= nv; ++v) {
            const Vec2 d = pts_[v + 1] - pts_[v];
            legs_[v] = norm(d);
            if (legs_[v] < 1e-12) return worst;
            dirs_[v] = d * (1.0 / legs_[v]);
        }

        phi_.assign(nv + 1, 0.0);
        tanh_.assign(nv + 1, 0.0);
        cap_.assign(nv + 1, std::numeric_limits<double>::infinity());
        for (std::size_t v = 1; v <= nv; ++v) {
            const Vec2 din = dirs_[v - 1];
            const Vec2 dout = dirs_[v];
            const double phi = std::atan2(cross(din, dout), dot(din, dout));
            if (std::abs(phi) < 1e-12) continue;
            if (std::abs(phi) > std::numbers::pi - 1e-9) return worst;
            phi_[v] = phi;
            tanh_[v] = std::tan(0.5 * std::abs(phi));
            if (v >= 2) cap_[v] = containment_cap(gates_[v - 2], pts_[v], din, dout, phi);
        }

        // Progressive filling: raise all radii together, freezing the ones
        // whose leg budget or containment cap binds.
        rho_.assign(nv + 1, 0.0);
        frozen_.assign(nv + 1, 0);
        std::size_t open = 0;
        for (std::size_t v = 1; v <= nv; ++v) {
            if (tanh_[v] > 0.0)
                ++open;
            else
                frozen_[v] = 1;
        }
        while (open > 0) {
            double level = std::numeric_limits<double>::infinity();
            for (std::size_t leg = 0; leg <= nv; ++leg) level = std::min(level, leg_level(leg, nv));
            for (std::size_t v = 1; v <= nv; ++v)
                if (!frozen_[v]) level = std::min(level, cap_[v]);
            level = std::max(level, 0.0);
            for (std::size_t leg = 0; leg <= nv; ++leg) {
                if (leg_level(leg, nv) <= level) {
                    for (std::size_t v : {leg, leg + 1})
                        if (v >= 1 && v <= nv && !frozen_[v]) {
                            rho_[v] = level;
                            frozen_[v] = 1;
                            --open;
                        }
                }
            }
            for (std::size_t v = 1; v <= nv; ++v)
                if (!frozen_[v] && cap_[v] <= level) {
                    rho_[v] = level;
                    frozen_[v] = 1;
                    --open;
                }
        }

        // Walk the path.
        pieces_.clear();
        double max_kappa = 0.0;
        double bending = 0.0;
        double soft_sum = 0.0;
        Vec2 cursor = pb_.start;
        double cursor_heading = pb_.heading;
        for (std::size_t v = 1; v <= nv + 1; ++v) {
            const double t_prev = v >= 2 ? rho_[v - 1] * tanh_[v - 1] : 0.0;
            const double t_here = v <= nv ? rho_[v] * tanh_[v] : 0.0;
            const double line = legs_[v - 1] - t_prev - t_here;
            if (line > 1e-12) {
                pieces_.push_back({line, 0.0});
                if (segs) push_line(*segs, cursor, cursor_heading, line);
            }
            if (v > nv || tanh_[v] == 0.0) {
                if (v <= nv) cursor_heading = std::atan2(dirs_[v].y, dirs_[v].x);
                cursor = pts_[v];
                if (v <= nv) continue;
                break;
            }
            if (!(rho_[v] > 0.0)) return worst;
            const double kappa = 1.0 / rho_[v];
            const double len = rho_[v] * std::abs(phi_[v]);
            max_kappa = std::max(max_kappa, kappa);
            bending += kappa * std::abs(phi_[v]);
            const double r2 = (kappa / pb_.kappa_max) * (kappa / pb_.kappa_max);
            const double r4 = r2 * r2;
            const double r8 = r4 * r4;
            soft_sum += r8 * r8;
            pieces_.push_back({len, kappa});
            const Vec2 tangent_in = pts_[v] - dirs_[v - 1] * t_here;
            if (segs) {
                const double h_in = v == 1 ? pb_.heading : std::atan2(dirs_[v - 1].y, dirs_[v - 1].x);
                segs->push_back({SegmentKind::arc, tangent_in, h_in, phi_[v] > 0 ? kappa : -kappa, len});
            }
            cursor = pts_[v] + dirs_[v] * t_here;
            cursor_heading = std::atan2(dirs_[v].y, dirs_[v].x);
        }
        soft_ = std::sqrt(std::sqrt(std::sqrt(std::sqrt(soft_sum))));
        return {max_kappa, weighted_median(), bending};
    }

    static void push_line(std::vector<PathSegment>& segs, Vec2 from, double heading, double length)
    {
        if (!segs.empty() && segs.back().kind == SegmentKind::line &&
            std::abs(wrap_angle(segs.back().heading - heading)) < 1e-12) {
            segs.back().length += length;
            return;
        }
        segs.push_back({SegmentKind::line, segs.empty() ? from : segs.back().end(), heading, 0.0, length});
    }

    double leg_level(std::size_t leg, std::size_t nv) const
    {
        double budget = legs_[leg];
        double weight = 0.0;
        for (std::size_t v : {leg, leg + 1}) {
            if (v < 1 || v > nv || tanh_[v] == 0.0) continue;
            if (frozen_[v])
                budget -= rho_[v] * tanh_[v];
            else
                weight += tanh_[v];
        }
        if (weight == 0.0) return std::numeric_limits<double>::infinity();
        return std::max(budget, 0.0) / weight;
    }

    /// Largest fillet radius whose arc crosses the gate line inside the gate.
    /// The crossing offset from the vertex is proportional to the radius.
    static double containment_cap(const Segment2& gate, Vec2 vertex, Vec2 din, Vec2 dout, double phi)
    {
        const double glen = norm(gate.b - gate.a);
        const Vec2 g = (gate.b - gate.a) * (1.0 / glen);
        const Vec2 bis_raw = dout - din;
        const Vec2 bis = bis_raw * (1.0 / norm(bis_raw));
        const double kk = 1.0 / std::cos(0.5 * std::abs(phi));
        const double c = dot(g, bis);
        const double disc = std::max(0.0, kk * kk * c * c - kk * kk + 1.0);
        const double sigma = c >= 0.0 ? kk * c - std::sqrt(disc) : kk * c + std::sqrt(disc);
        const double room = (sigma >= 0.0 ? norm(gate.b - vertex) : norm(vertex - gate.a)) - 1e-9;
        if (std::abs(sigma) < 1e-15) return std::numeric_limits<double>::infinity();
        return std::max(room, 0.0) / std::abs(sigma);
    }

    /// Median |kappa| of the uniform samples, counted per piece.
    double weighted_median() const
    {
        double total = 0.0;
        for (const auto& p : pieces_) total += p.first;
        if (total <= 0.0) return 0.0;
        const double ds = pb_.sample_step;
        counted_.clear();
        double s0 = 0.0;
        std::size_t n = 0;
        for (const auto& [len, kappa] : pieces_) {
            const double s1 = s0 + len;
            const auto first = static_cast<long long>(std::ceil(s0 / ds));
            const auto last = static_cast<long long>(std::ceil(s1 / ds));
            if (last > first) {
                counted_.push_back({kappa, static_cast<std::size_t>(last - first)});
                n += static_cast<std::size_t>(last - first);
            }
            s0 = s1;
        }
        counted_.push_back({pieces_.back().second, 1});
        ++n;
        std::sort(counted_.begin(), counted_.end());
        auto at = [&](std::size_t idx) {
            for (const auto& [kappa, count] : counted_) {
                if (idx < count) return kappa;
                idx -= count;
            }
            return counted_.back().first;
        };
        return n % 2 == 1 ? at(n / 2) : 0.5 * (at(n / 2 - 1) + at(n / 2));
    }

    Problem pb_;
    std::vector<Segment2> gates_;
    Segment2 exit_edge_;
    Vec2 dir_;
    double t_ray_ = 0.0;

    mutable std::vector<Vec2> pts_, dirs_;
    mutable std::vector<double> legs_, phi_, tanh_, cap_, rho_;
    mutable std::vector<char> frozen_;
    mutable double soft_ = 0.0;
    mutable std::vector<std::pair<double, double>> pieces_;
    mutable std::vector<std::pair<double, std::size_t>> counted_;
};

inline Frame make_frame(const Corridor& corridor, const Pose& start)
{
    Frame f;
    f.origin = corridor.cells.front();
    f.world_origin = to_cartesian(f.origin, corridor.spec);
    f.scale = corridor.spec.cell_inner_radius;
    f.rotation = corridor.cells.size() > 1 ? direction_between(corridor.cells[0], corridor.cells[1]).index()
                                           : corridor.entry_facing.opposite().index();

    std::vector<int> key;
    for (std::size_t i = 0; i + 1 < corridor.cells.size(); ++i) key.push_back(f.dir_in(direction_between(corridor.cells[i], corridor.cells[i + 1])));
    key.push_back(f.dir_in(corridor.entry_facing));
    key.push_back(f.dir_in(corridor.exit_facing));
    std::vector<int> flipped;
    for (int d : key) flipped.push_back((6 - d) % 6);
    if (flipped != key) {
        f.mirrored = flipped < key;
    } else {
        const Vec2 rel = f.vec_in(start.position - f.world_origin);
        const double y = quantize(rel.y);
        const double h = quantize(f.heading_in(start.heading));
        f.mirrored = y < 0.0 || (y == 0.0 && h < 0.0);
    }
    return f;
}

} // namespace detail

/// Plans a G1 line/arc path through the corridor from a fixed start pose.
inline ArcPath smooth(const Corridor& corridor, const Pose& start, const SmoothingConfig& config,
                      SmoothingReport* report = nullptr)
{
    const GridSpec& spec = corridor.spec;
    const double kappa_max = config.resolved_kappa_max(spec);
    const double ds = config.resolved_sample_step(spec);
    if (!(kappa_max > 0.0) || !(ds > 0.0)) throw Error("kappa_max and the sample step must be positive");
    if (hex_inside_margin(corridor.cells.front(), start.position, spec) < -1e-9 * spec.cell_inner_radius)
        throw Infeasible("start pose lies outside the first cell");

    const detail::Frame frame = detail::make_frame(corridor, start);
    detail::Problem pb;
    for (const HexCell c : corridor.cells) pb.cells.push_back(frame.cell_in(c));
    pb.entry_facing = Direction(frame.dir_in(corridor.entry_facing));
    pb.exit_facing = Direction(frame.dir_in(corridor.exit_facing));
    const Vec2 rel = frame.vec_in(start.position - frame.world_origin);
    pb.start = {detail::quantize(rel.x), detail::quantize(rel.y)};
    pb.heading = detail::quantize(frame.heading_in(start.heading));
    pb.kappa_max = detail::quantize(kappa_max * spec.cell_inner_radius);
    pb.sample_step = detail::quantize(ds / spec.cell_inner_radius);
    pb.end = config.end;
    pb.max_iterations = config.max_iterations;
    pb.tolerance = config.tolerance;

    SmoothingReport local;
    SmoothingReport& rep = report ? *report : local;
    rep = {};
    detail::Solver solver(pb);
    const std::vector<PathSegment> unit = solver.solve(rep);

    ArcPath out;
    for (const PathSegment& s : unit) {
        PathSegment w = s;
        w.start = frame.point_out(s.start);
        w.heading = frame.heading_out(s.heading);
        w.curvature = (frame.mirrored ? -s.curvature : s.curvature) / frame.scale;
        w.length = s.length * frame.scale;
        out.segments.push_back(w);
    }
    out.segments.front().start = start.position;
    out.segments.front().heading = start.heading;
    return out;
}

/// Result of smoothing a grid path that may revisit cells.
struct SmoothedPath
{
    ArcPath path;
    std::vector<std::size_t> splits; ///< cell indices where a new piece starts
    std::vector<Corridor> pieces;    ///< corridor each piece was planned in
    std::vector<CurvatureObjective> history; ///< relaxation histories, concatenated
};

namespace detail {

/// Cuts the path where it first crosses the gate segment, entering from the
/// side opposite to `into`.
inline bool truncate_at_gate(ArcPath& path, const Segment2& gate, Vec2 into, double ds)
{
    const Vec2 e = gate.b - gate.a;
    auto side = [&](Vec2 p) { return dot(p - gate.a, into); };
    auto along = [&](Vec2 p) { return dot(p - gate.a, e) / dot(e, e); };
    double seg_start = 0.0;
    for (std::size_t i = 0; i < path.segments.size(); ++i) {
        const PathSegment& g = path.segments[i];
        const int steps = std::max(1, static_cast<int>(std::ceil(g.length / ds)));
        double prev = 0.0;
        for (int k = 1; k <= steps; ++k) {
            const double cur = g.length * k / steps;
            if (side(g.point_at(prev)) < 0.0 && side(g.point_at(cur)) >= 0.0) {
                double lo = prev;
                double hi = cur;
                for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (side(g.point_at(mid)) < 0.0 ? lo : hi) = mid;
                }
                const double u = along(g.point_at(hi));
                if (u >= -1e-9 && u <= 1.0 + 1e-9) {
                    path.segments.resize(i + 1);
                    path.segments.back().length = hi;
                    if (hi <= 0.0 && path.segments.size() > 1) path.segments.pop_back();
                    return true;
                }
            }
            prev = cur;
        }
        seg_start += g.length;
    }
    return false;
}

} // namespace detail

/// Smooths a grid path that may revisit cells. Each window is the longest
/// run of distinct cells from the current piece start; when the run ends at
/// a revisit, only the part up to leaving the first visit of that cell is
/// kept and the next piece starts there with the kept end pose.
inline SmoothedPath smooth_grid_path(std::span<const HexCell> cells, const GridSpec& spec, const Pose& start,
                                     const SmoothingConfig& config)
{
    SmoothedPath out;
    std::size_t begin = 0;
    Pose pose = start;
    const double ds = config.resolved_sample_step(spec) / 10.0;
    while (true) {
        std::set<HexCell> seen;
        std::size_t end = begin;
        while (end < cells.size() && seen.insert(cells[end]).second) ++end;
        const bool last = end == cells.size();
        const std::span<const HexCell> piece = cells.subspan(begin, end - begin);
        std::optional<Direction> entry;
        if (begin > 0) entry = direction_between(cells[begin - 1], cells[begin]).opposite();
        std::optional<Direction> exit;
        if (!last)
            exit = direction_between(cells[end - 1], cells[end]);
        else if (piece.size() == 1 && begin > 0)
            exit = direction_between(cells[begin - 1], cells[begin]);
        Corridor corridor = build_corridor(piece, spec, exit, entry);
        SmoothingConfig cfg = config;
        if (!last) cfg.end = EndMode::exit_edge;
        SmoothingReport rep;
        ArcPath part = smooth(corridor, pose, cfg, &rep);
        out.history.insert(out.history.end(), rep.history.begin(), rep.history.end());

        std::size_t next = end;
        if (!last) {
            // cells[end] repeats cells[first]; keep the path until it leaves that first visit.
            const auto first = static_cast<std::size_t>(
                std::find(cells.begin() + static_cast<std::ptrdiff_t>(begin), cells.begin() + static_cast<std::ptrdiff_t>(end), cells[end]) -
                cells.begin());
            next = first + 1;
            const Direction d = direction_between(cells[first], cells[next]);
            if (!detail::truncate_at_gate(part, hex_edge(cells[first], d, spec), unit_vector(d.heading()), ds))
                throw Infeasible("smoothed piece does not cross the gate out of cell " + to_label(cells[first]));
        }
        for (const auto& seg : part.segments)
            if (seg.length > 0.0 || out.path.segments.empty()) out.path.segments.push_back(seg);
        out.pieces.push_back(std::move(corridor));
        if (last) break;
        pose = part.end_pose();
        out.splits.push_back(next);
        begin = next;
    }
    return out;
}

/// Ribbon cost table computed with this module's smoother: each canonical
/// signature laid out from the origin along direction 0, start at the first
/// cell center heading along the first move, end free on the exit edge.
inline CostTable precompute_primitive_costs(const Catalog& catalog, const GridSpec& spec = {1.0, kC3RatioUpper},
                                            const SmoothingConfig& config = {})
{
    std::vector<double> costs;
    for (const Primitive& p : catalog.primitives()) {
        const auto cells = layout_cells(p.canonical, {0, 0}, Direction(0));
        const Corridor corridor = build_corridor(cells, spec);
        SmoothingConfig cfg = config;
        cfg.end = EndMode::exit_edge;
        const ArcPath path = smooth(corridor, {to_cartesian(cells.front(), spec), 0.0}, cfg);
        costs.push_back(median_curvature_cost(path, cfg.resolved_kappa_max(spec), cfg.resolved_sample_step(spec)));
    }
    return CostTable("precomputed", std::move(costs));
}

} // namespace hexplan
