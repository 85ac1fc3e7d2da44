#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hexplan/errors.hpp"

namespace hexplan {

// ---------------------------------------------------------------------------
// Plane geometry
// ---------------------------------------------------------------------------

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr bool operator==(const Vec2&) const = default;
};

inline constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline Vec2 unit_vector(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

// ---------------------------------------------------------------------------
// Axial hex coordinates
// ---------------------------------------------------------------------------

/// A hexagon addressed by axial coordinates. q grows left to right, r grows
/// from top-left to bottom-right; the third cube coordinate is s = -q - r.
struct HexCell
{
    int q = 0;
    int r = 0;

    constexpr int s() const { return -q - r; }
    constexpr HexCell operator+(HexCell o) const { return {q + o.q, r + o.r}; }
    constexpr HexCell operator-(HexCell o) const { return {q - o.q, r - o.r}; }
    constexpr auto operator<=>(const HexCell&) const = default;
};

inline std::string to_label(HexCell c) { return std::to_string(c.q) + ":" + std::to_string(c.r); }

struct HexCellHash
{
    std::size_t operator()(HexCell c) const noexcept
    {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.q)) << 32) |
                                          static_cast<std::uint32_t>(c.r));
    }
};

/// One of the six neighbor directions, counterclockwise from east.
class Direction
{
public:
    static constexpr int count = 6;

    constexpr Direction() = default;
    constexpr explicit Direction(int index) : index_(((index % count) + count) % count) {}

    constexpr int index() const { return index_; }
    constexpr Direction opposite() const { return Direction(index_ + 3); }
    constexpr Direction rotated(int steps) const { return Direction(index_ + steps); }
    /// Heading of this direction in radians (direction 0 points due east).
    constexpr double heading() const { return index_ * std::numbers::pi / 3.0; }

    constexpr auto operator<=>(const Direction&) const = default;

private:
    int index_ = 0;
};

inline constexpr std::array<HexCell, 6> kDirectionOffsets = {
    HexCell{+1, 0}, HexCell{+1, -1}, HexCell{0, -1}, HexCell{-1, 0}, HexCell{-1, +1}, HexCell{0, +1}};

constexpr HexCell offset(Direction d) { return kDirectionOffsets[static_cast<std::size_t>(d.index())]; }

constexpr HexCell neighbor(HexCell c, Direction d) { return c + offset(d); }

/// The six neighbors of a cell in direction order; no occupancy or bounds filtering.
constexpr std::array<HexCell, 6> neighbors(HexCell c)
{
    std::array<HexCell, 6> out{};
    for (int d = 0; d < Direction::count; ++d) out[static_cast<std::size_t>(d)] = neighbor(c, Direction(d));
    return out;
}

/// Direction of the move a -> b, or nullopt when b is not a neighbor of a.
constexpr std::optional<Direction> try_direction_between(HexCell a, HexCell b)
{
    const HexCell delta = b - a;
    for (int d = 0; d < Direction::count; ++d) {
        if (kDirectionOffsets[static_cast<std::size_t>(d)] == delta) return Direction(d);
    }
    return std::nullopt;
}

inline Direction direction_between(HexCell a, HexCell b)
{
    if (auto d = try_direction_between(a, b)) return *d;
    throw NotAdjacent(to_label(b) + " is not a neighbor of " + to_label(a));
}

constexpr int hex_distance(HexCell a, HexCell b)
{
    const int dq = a.q - b.q;
    const int dr = a.r - b.r;
    const int ds = dq + dr;
    return ((dq < 0 ? -dq : dq) + (dr < 0 ? -dr : dr) + (ds < 0 ? -ds : ds)) / 2;
}

// ---------------------------------------------------------------------------
// Grid geometry
// ---------------------------------------------------------------------------

struct GridSpec
{
    double cell_inner_radius = 1.0; ///< apothem r_c; neighbor centers are 2 r_c apart
    double min_turn_radius = 1.0;   ///< r_min of the vehicle

    double spacing() const { return 2.0 * cell_inner_radius; }
    double circumradius() const { return 2.0 * cell_inner_radius / std::numbers::sqrt3; }
    double ratio() const { return min_turn_radius / cell_inner_radius; }
    double kappa_max() const { return 1.0 / min_turn_radius; }

    void validate() const
    {
        if (!(cell_inner_radius > 0.0) || !std::isfinite(cell_inner_radius))
            throw InvalidMap("cell_inner_radius must be positive");
        if (!(min_turn_radius > 0.0) || !std::isfinite(min_turn_radius))
            throw InvalidMap("min_turn_radius must be positive");
    }

    bool operator==(const GridSpec&) const = default;
};

/// Cell center in the plane, y up. Pointy-top cells, direction 0 due east.
inline Vec2 to_cartesian(HexCell c, const GridSpec& spec)
{
    const double s = spec.spacing();
    return {s * (c.q + c.r / 2.0), -s * (std::numbers::sqrt3 / 2.0) * c.r};
}

/// Inverse of to_cartesian followed by cube rounding.
inline HexCell nearest_cell(Vec2 p, const GridSpec& spec)
{
    const double s = spec.spacing();
    const double rf = -p.y / (s * std::numbers::sqrt3 / 2.0);
    const double qf = p.x / s - rf / 2.0;
    const double sf = -qf - rf;
    double q = std::round(qf);
    double r = std::round(rf);
    const double ss = std::round(sf);
    const double dq = std::abs(q - qf);
    const double dr = std::abs(r - rf);
    const double ds = std::abs(ss - sf);
    if (dq > dr && dq > ds)
        q = -r - ss;
    else if (dr > ds)
        r = -q - ss;
    return {static_cast<int>(q), static_cast<int>(r)};
}

/// Hexagon corner k (0..5) sits at angle 30 + 60 k degrees from the center.
inline Vec2 hex_corner(HexCell c, int k, const GridSpec& spec)
{
    const double a = std::numbers::pi / 6.0 + k * std::numbers::pi / 3.0;
    return to_cartesian(c, spec) + unit_vector(a) * spec.circumradius();
}

inline std::array<Vec2, 6> hex_corners(HexCell c, const GridSpec& spec)
{
    std::array<Vec2, 6> out{};
    for (int k = 0; k < 6; ++k) out[static_cast<std::size_t>(k)] = hex_corner(c, k, spec);
    return out;
}

struct Segment2
{
    Vec2 a;
    Vec2 b;
};

/// The edge of c facing direction d, ordered counterclockwise around c.
inline Segment2 hex_edge(HexCell c, Direction d, const GridSpec& spec)
{
    return {hex_corner(c, d.index() + 5, spec), hex_corner(c, d.index(), spec)};
}

/// Signed distance-like containment measure of p in the hexagon of c:
/// positive inside, zero on the boundary, negative outside (in length units).
inline double hex_inside_margin(HexCell c, Vec2 p, const GridSpec& spec)
{
    const Vec2 rel = p - to_cartesian(c, spec);
    double worst = -1e300;
    for (int d = 0; d < Direction::count; ++d) worst = std::max(worst, dot(rel, unit_vector(Direction(d).heading())));
    return spec.cell_inner_radius - worst;
}

// ---------------------------------------------------------------------------
// Occupancy map
// ---------------------------------------------------------------------------

struct Bounds
{
    int q_min = 0;
    int q_max = 0;
    int r_min = 0;
    int r_max = 0;

    constexpr bool contains(HexCell c) const { return c.q >= q_min && c.q <= q_max && c.r >= r_min && c.r <= r_max; }
    constexpr int width() const { return q_max - q_min + 1; }
    constexpr int height() const { return r_max - r_min + 1; }
    constexpr std::size_t cell_count() const { return static_cast<std::size_t>(width()) * static_cast<std::size_t>(height()); }
    constexpr bool operator==(const Bounds&) const = default;
};

/// Immutable occupancy map with start and target. Cells outside the bounds
/// count as occupied.
class MapGrid
{
public:
    MapGrid(GridSpec spec, Bounds bounds, std::set<HexCell> occupied, HexCell start, HexCell target)
        : spec_(spec), bounds_(bounds), occupied_(std::move(occupied)), start_(start), target_(target)
    {
        spec_.validate();
        if (bounds_.q_max < bounds_.q_min || bounds_.r_max < bounds_.r_min)
            throw InvalidMap("bounds are empty");
        if (!bounds_.contains(start_)) throw InvalidMap("start " + to_label(start_) + " is outside the bounds");
        if (!bounds_.contains(target_)) throw InvalidMap("target " + to_label(target_) + " is outside the bounds");
        for (const HexCell& c : occupied_) {
            if (!bounds_.contains(c)) throw InvalidMap("occupied cell " + to_label(c) + " is outside the bounds");
        }
        if (occupied_.contains(start_)) throw InvalidMap("start " + to_label(start_) + " is occupied");
        if (occupied_.contains(target_)) throw InvalidMap("target " + to_label(target_) + " is occupied");

        blocked_.assign(bounds_.cell_count(), 0);
        for (const HexCell& c : occupied_) blocked_[index_of(c)] = 1;
    }

    const GridSpec& spec() const { return spec_; }
    const Bounds& bounds() const { return bounds_; }
    const std::set<HexCell>& occupied() const { return occupied_; }
    HexCell start() const { return start_; }
    HexCell target() const { return target_; }

    bool in_bounds(HexCell c) const { return bounds_.contains(c); }
    bool is_free(HexCell c) const { return bounds_.contains(c) && blocked_[index_of(c)] == 0; }

    /// Dense index of an in-bounds cell, row-major over (r, q).
    std::size_t index_of(HexCell c) const
    {
        return static_cast<std::size_t>(c.r - bounds_.r_min) * static_cast<std::size_t>(bounds_.width()) +
               static_cast<std::size_t>(c.q - bounds_.q_min);
    }

    std::size_t cell_count() const { return bounds_.cell_count(); }

    bool operator==(const MapGrid& o) const
    {
        return spec_ == o.spec_ && bounds_ == o.bounds_ && occupied_ == o.occupied_ && start_ == o.start_ &&
               target_ == o.target_;
    }

private:
    GridSpec spec_;
    Bounds bounds_;
    std::set<HexCell> occupied_;
    HexCell start_;
    HexCell target_;
    std::vector<std::uint8_t> blocked_;
};

inline bool is_free(const MapGrid& map, HexCell c) { return map.is_free(c); }

} // namespace hexplan
