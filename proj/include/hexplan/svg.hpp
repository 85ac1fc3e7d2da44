#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "hexplan/constrained_astar.hpp"
#include "hexplan/hexgrid.hpp"
#include "hexplan/ribbon_smoother.hpp"

namespace hexplan {

enum class Orientation
{
    pointy,
    flat,
};

namespace colors {
// Cell fills.
inline constexpr const char* free = "#d3d3d3";
inline constexpr const char* occupied = "#505050";
inline constexpr const char* start = "#ff0000";
inline constexpr const char* target = "#0000ff";
inline constexpr const char* open = "#00c000";
inline constexpr const char* closed = "#ffc0cb";
// Strokes.
inline constexpr const char* arrow = "#303030";
inline constexpr const char* shared_arrow = "#a0a0a0";
inline constexpr const char* dead_arrow = "#ffd700";
inline constexpr const char* path = "#000000";
inline constexpr const char* outline = "#ffffff";
} // namespace colors

inline const std::array<const char*, 6>& cell_fill_palette()
{
    static const std::array<const char*, 6> p{colors::free, colors::occupied, colors::start,
                                              colors::target, colors::open, colors::closed};
    return p;
}

struct SvgOptions
{
    Orientation orientation = Orientation::pointy;
    bool labels = false;
    double pixels_per_unit = 20.0; ///< scaled by 1/r_c
};

namespace detail {

class SvgCanvas
{
public:
    SvgCanvas(const MapGrid& map, const SvgOptions& opt) : opt_(opt)
    {
        scale_ = opt.pixels_per_unit / map.spec().cell_inner_radius;
        const double a = opt.orientation == Orientation::flat ? std::numbers::pi / 6.0 : 0.0;
        cos_ = std::cos(a);
        sin_ = std::sin(a);
        const Bounds& b = map.bounds();
        bool first = true;
        for (int q = b.q_min; q <= b.q_max; ++q) {
            for (int r = b.r_min; r <= b.r_max; ++r) {
                for (const Vec2 c : hex_corners({q, r}, map.spec())) {
                    const Vec2 p = raw(c);
                    if (first) {
                        lo_ = hi_ = p;
                        first = false;
                    }
                    lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
                    hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
                }
            }
        }
        margin_ = opt.pixels_per_unit;
    }

    double width() const { return hi_.x - lo_.x + 2 * margin_; }
    double height() const { return hi_.y - lo_.y + 2 * margin_; }
    double scale() const { return scale_; }

    /// World point to SVG user units (y down).
    Vec2 map(Vec2 w) const
    {
        const Vec2 p = raw(w);
        return {p.x - lo_.x + margin_, p.y - lo_.y + margin_};
    }

    static std::string num(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return buf;
    }
    std::string xy(Vec2 w) const
    {
        const Vec2 p = map(w);
        return num(p.x) + "," + num(p.y);
    }

private:
    Vec2 raw(Vec2 w) const
    {
        const Vec2 r{cos_ * w.x - sin_ * w.y, sin_ * w.x + cos_ * w.y};
        return {r.x * scale_, -r.y * scale_};
    }

    SvgOptions opt_;
    double scale_ = 1.0;
    double cos_ = 1.0;
    double sin_ = 0.0;
    double margin_ = 0.0;
    Vec2 lo_{};
    Vec2 hi_{};
};

inline void svg_arrow(std::ostringstream& out, const SvgCanvas& cv, Vec2 from, Vec2 to, const char* color, double width,
                      const char* cls)
{
    const Vec2 a = cv.map(from + 0.2 * (to - from));
    const Vec2 b = cv.map(from + 0.8 * (to - from));
    const Vec2 d = b - a;
    const double len = norm(d);
    if (len <= 0.0) return;
    const Vec2 u = (1.0 / len) * d;
    const Vec2 n{-u.y, u.x};
    const double h = std::min(0.35 * len, 6.0);
    const Vec2 l = b - h * u + 0.5 * h * n;
    const Vec2 r = b - h * u - 0.5 * h * n;
    auto p = [](Vec2 v) { return SvgCanvas::num(v.x) + "," + SvgCanvas::num(v.y); };
    out << "<path class=\"" << cls << "\" d=\"M" << p(a) << " L" << p(b) << " M" << p(l) << " L" << p(b) << " L" << p(r)
        << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << SvgCanvas::num(width) << "\"/>\n";
}

} // namespace detail

/// Renders the map, optionally with a search trace and a smoothed path.
inline std::string render_svg(const MapGrid& map, const SearchTrace* trace = nullptr, const ArcPath* path = nullptr,
                              const SvgOptions& opt = {})
{
    using detail::SvgCanvas;
    const SvgCanvas cv(map, opt);
    const GridSpec& spec = map.spec();

    std::set<HexCell> opened;
    std::set<HexCell> closed;
    std::map<std::pair<HexCell, HexCell>, int> edges;
    std::set<std::pair<HexCell, HexCell>> dead_edges;
    if (trace) {
        for (const TraceEvent& e : trace->events) {
            closed.insert(e.closed);
            for (const TraceOpen& o : e.opened) {
                opened.insert(o.cell);
                ++edges[{o.parent, o.cell}];
            }
            for (const HexCell d : e.dead) {
                if (e.closed_parent && d == e.closed) dead_edges.insert({*e.closed_parent, d});
            }
        }
    }

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << SvgCanvas::num(cv.width())
        << "\" height=\"" << SvgCanvas::num(cv.height()) << "\" viewBox=\"0 0 " << SvgCanvas::num(cv.width()) << ' '
        << SvgCanvas::num(cv.height()) << "\">\n";
    out << "<g id=\"cells\">\n";
    const Bounds& b = map.bounds();
    for (int q = b.q_min; q <= b.q_max; ++q) {
        for (int r = b.r_min; r <= b.r_max; ++r) {
            const HexCell c{q, r};
            const char* fill = colors::free;
            if (!map.is_free(c)) fill = colors::occupied;
            else if (c == map.start()) fill = colors::start;
            else if (c == map.target()) fill = colors::target;
            else if (closed.contains(c)) fill = colors::closed;
            else if (opened.contains(c)) fill = colors::open;
            out << "<polygon class=\"cell\" points=\"";
            const auto corners = hex_corners(c, spec);
            for (std::size_t k = 0; k < corners.size(); ++k) out << (k ? " " : "") << cv.xy(corners[k]);
            out << "\" fill=\"" << fill << "\" stroke=\"" << colors::outline << "\" stroke-width=\"1\"/>\n";
        }
    }
    out << "</g>\n";

    if (opt.labels) {
        const double size = 0.45 * opt.pixels_per_unit;
        out << "<g id=\"labels\" font-family=\"monospace\" font-size=\"" << SvgCanvas::num(size)
            << "\" text-anchor=\"middle\">\n";
        for (int q = b.q_min; q <= b.q_max; ++q) {
            for (int r = b.r_min; r <= b.r_max; ++r) {
                const Vec2 p = cv.map(to_cartesian({q, r}, spec));
                out << "<text x=\"" << SvgCanvas::num(p.x) << "\" y=\"" << SvgCanvas::num(p.y + 0.35 * size) << "\">"
                    << q << ':' << r << "</text>\n";
            }
        }
        out << "</g>\n";
    }

    if (trace) {
        const double w = 0.08 * opt.pixels_per_unit;
        out << "<g id=\"trace\">\n";
        for (const auto& [edge, count] : edges) {
            detail::svg_arrow(out, cv, to_cartesian(edge.first, spec), to_cartesian(edge.second, spec),
                              count > 1 ? colors::shared_arrow : colors::arrow, w, count > 1 ? "arrow shared" : "arrow");
        }
        for (const auto& edge : dead_edges) {
            detail::svg_arrow(out, cv, to_cartesian(edge.first, spec), to_cartesian(edge.second, spec), colors::dead_arrow,
                              1.5 * w, "arrow dead");
        }
        out << "</g>\n";
    }

    if (path && !path->empty()) {
        const auto samples = sample_path(*path, spec.cell_inner_radius / 20.0);
        out << "<path id=\"smoothed\" d=\"";
        for (std::size_t i = 0; i < samples.size(); ++i) out << (i ? " L" : "M") << cv.xy(samples[i].point);
        out << "\" fill=\"none\" stroke=\"" << colors::path << "\" stroke-width=\""
            << SvgCanvas::num(0.12 * opt.pixels_per_unit) << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace hexplan
