#pragma once

#include <fstream>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"

#include "hexplan/errors.hpp"
#include "hexplan/hexgrid.hpp"

namespace hexplan {

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& doc, const char* field, const std::string& where)
{
    if (!doc.is_object()) throw ParseError(where + " must be an object");
    const auto it = doc.find(field);
    if (it == doc.end()) throw ParseError("missing field '" + where + field + "'");
    return *it;
}

inline double number_field(const nlohmann::json& doc, const char* field, const std::string& where = "")
{
    const auto& v = require(doc, field, where);
    if (!v.is_number()) throw ParseError("field '" + where + field + "' must be a number");
    return v.get<double>();
}

inline int int_field(const nlohmann::json& doc, const char* field, const std::string& where = "")
{
    const auto& v = require(doc, field, where);
    if (!v.is_number_integer()) throw ParseError("field '" + where + field + "' must be an integer");
    return v.get<int>();
}

inline HexCell cell_value(const nlohmann::json& v, const std::string& name)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
        throw ParseError("field '" + name + "' must be a [q, r] pair of integers");
    return {v[0].get<int>(), v[1].get<int>()};
}

} // namespace detail

/// Reads the map format:
/// {cell_inner_radius, min_turn_radius, bounds{q_min,q_max,r_min,r_max}, start, target, occupied}.
inline MapGrid load_map(const nlohmann::json& doc)
{
    using namespace detail;
    GridSpec spec{number_field(doc, "cell_inner_radius"), number_field(doc, "min_turn_radius")};
    const auto& b = require(doc, "bounds", "");
    Bounds bounds{int_field(b, "q_min", "bounds."), int_field(b, "q_max", "bounds."), int_field(b, "r_min", "bounds."),
                  int_field(b, "r_max", "bounds.")};
    const HexCell start = cell_value(require(doc, "start", ""), "start");
    const HexCell target = cell_value(require(doc, "target", ""), "target");
    const auto& occ = require(doc, "occupied", "");
    if (!occ.is_array()) throw ParseError("field 'occupied' must be an array of [q, r] pairs");
    std::set<HexCell> occupied;
    for (std::size_t i = 0; i < occ.size(); ++i) occupied.insert(cell_value(occ[i], "occupied[" + std::to_string(i) + "]"));
    return MapGrid(spec, bounds, std::move(occupied), start, target);
}

inline MapGrid load_map_text(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("map is not valid JSON: ") + e.what());
    }
    return load_map(doc);
}

inline MapGrid load_map_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open map file " + path);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_map_text(text);
}

inline nlohmann::json map_to_json(const MapGrid& map)
{
    nlohmann::json occ = nlohmann::json::array();
    for (const HexCell c : map.occupied()) occ.push_back({c.q, c.r});
    const Bounds& b = map.bounds();
    return {{"cell_inner_radius", map.spec().cell_inner_radius},
            {"min_turn_radius", map.spec().min_turn_radius},
            {"bounds", {{"q_min", b.q_min}, {"q_max", b.q_max}, {"r_min", b.r_min}, {"r_max", b.r_max}}},
            {"start", {map.start().q, map.start().r}},
            {"target", {map.target().q, map.target().r}},
            {"occupied", occ}};
}

} // namespace hexplan
