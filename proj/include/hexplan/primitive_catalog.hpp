#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hexplan/errors.hpp"
#include "hexplan/hexgrid.hpp"

namespace hexplan {

/// Direction change between two consecutive moves.
enum class Turn : char
{
    S = 'S', ///< straight
    L = 'L', ///< +60 degrees, toward increasing direction index
    R = 'R', ///< -60 degrees
};

constexpr Turn mirror(Turn t)
{
    switch (t) {
    case Turn::L: return Turn::R;
    case Turn::R: return Turn::L;
    default: return Turn::S;
    }
}

constexpr int turn_value(Turn t) { return t == Turn::S ? 0 : (t == Turn::L ? 1 : 2); }

/// S, L or R; nullopt stands for an inadmissible change of 120 or 180 degrees.
constexpr std::optional<Turn> turn_between(Direction prev, Direction next)
{
    switch ((next.index() - prev.index() + 6) % 6) {
    case 0: return Turn::S;
    case 1: return Turn::L;
    case 5: return Turn::R;
    default: return std::nullopt;
    }
}

/// Ordered sequence of turns, e.g. "SLR". Identifies a cell formation up to rotation.
class TurnSignature
{
public:
    TurnSignature() = default;

    explicit TurnSignature(std::string_view turns) : turns_(turns)
    {
        for (char c : turns_) {
            if (c != 'S' && c != 'L' && c != 'R')
                throw InvalidCatalog("turn signature '" + turns_ + "' contains a symbol other than S, L, R");
        }
    }

    explicit TurnSignature(std::span<const Turn> turns)
    {
        turns_.reserve(turns.size());
        for (Turn t : turns) turns_.push_back(static_cast<char>(t));
    }

    std::size_t size() const { return turns_.size(); }
    bool empty() const { return turns_.empty(); }
    Turn operator[](std::size_t i) const { return static_cast<Turn>(turns_[i]); }
    const std::string& str() const { return turns_; }

    TurnSignature mirrored() const
    {
        TurnSignature out = *this;
        for (char& c : out.turns_) c = static_cast<char>(mirror(static_cast<Turn>(c)));
        return out;
    }

    bool is_straight() const { return std::all_of(turns_.begin(), turns_.end(), [](char c) { return c == 'S'; }); }

    /// True when two consecutive turns bend the same way (LL or RR).
    bool has_double_turn() const
    {
        for (std::size_t i = 1; i < turns_.size(); ++i) {
            if (turns_[i] != 'S' && turns_[i] == turns_[i - 1]) return true;
        }
        return false;
    }

    /// Number of non-straight turns.
    int direction_changes() const
    {
        return static_cast<int>(std::count_if(turns_.begin(), turns_.end(), [](char c) { return c != 'S'; }));
    }

    auto operator<=>(const TurnSignature&) const = default;

private:
    std::string turns_;
};

/// Dense code of a signature among all signatures of the same length.
inline std::size_t signature_code(const TurnSignature& sig)
{
    std::size_t code = 0;
    for (std::size_t i = sig.size(); i-- > 0;) code = code * 3 + static_cast<std::size_t>(turn_value(sig[i]));
    return code;
}

inline std::vector<Direction> move_directions(std::span<const HexCell> cells)
{
    std::vector<Direction> moves;
    if (cells.size() < 2) return moves;
    moves.reserve(cells.size() - 1);
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto d = try_direction_between(cells[i - 1], cells[i]);
        if (!d) throw NotAPath(to_label(cells[i - 1]) + " -> " + to_label(cells[i]) + " is not a neighbor step");
        moves.push_back(*d);
    }
    return moves;
}

/// Turns along a move sequence; nullopt if any change is 120 or 180 degrees.
inline std::optional<TurnSignature> turns_of_moves(std::span<const Direction> moves)
{
    std::vector<Turn> turns;
    for (std::size_t i = 1; i < moves.size(); ++i) {
        const auto t = turn_between(moves[i - 1], moves[i]);
        if (!t) return std::nullopt;
        turns.push_back(*t);
    }
    return TurnSignature(std::span<const Turn>(turns));
}

/// Turn signature of consecutive path cells under the bounded-curvature rule:
/// nullopt when a turn exceeds 60 degrees or two successive turns bend the same way.
inline std::optional<TurnSignature> window_signature(std::span<const HexCell> cells)
{
    const auto moves = move_directions(cells);
    auto sig = turns_of_moves(moves);
    if (!sig || sig->has_double_turn()) return std::nullopt;
    return sig;
}

/// Every length-k signature free of LL and RR, in lexicographic order of the S/L/R alphabet.
inline std::vector<TurnSignature> admissible_signatures(std::size_t k)
{
    std::vector<TurnSignature> out;
    std::string buf(k, 'S');
    const std::string alphabet = "SLR";
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < k; ++i) {
            buf[k - 1 - i] = alphabet[c % 3];
            c /= 3;
        }
        TurnSignature sig(buf);
        if (!sig.has_double_turn()) out.push_back(sig);
    }
    return out;
}

struct Primitive
{
    int id = 0;
    TurnSignature canonical;

    TurnSignature mirror_signature() const { return canonical.mirrored(); }
};

/// Interval of r_min / r_c a catalog is valid for.
struct RatioRegime
{
    double lower = 0.0; ///< exclusive
    double upper = 0.0; ///< inclusive

    bool contains(double ratio) const { return ratio > lower && ratio <= upper; }
};

inline constexpr double kC3RatioUpper = 3.329;
inline const double kC3RatioLower = std::sqrt(7.0);

struct Classification
{
    int id = 0;
    bool mirrored = false;

    bool operator==(const Classification&) const = default;
};

/// Immutable set of admissible cell formations, each identified by a turn
/// signature and its mirror image.
class Catalog
{
public:
    Catalog(std::string name, RatioRegime regime, std::vector<Primitive> primitives)
        : name_(std::move(name)), regime_(regime), primitives_(std::move(primitives))
    {
        validate_and_index();
    }

    const std::string& name() const { return name_; }
    const RatioRegime& regime() const { return regime_; }
    const std::vector<Primitive>& primitives() const { return primitives_; }
    std::size_t size() const { return primitives_.size(); }

    /// Turns per full window; a window spans turns + 1 moves and turns + 2 cells.
    std::size_t turns_per_window() const { return turns_; }
    std::size_t window_cells() const { return turns_ + 2; }

    const Primitive& primitive(int id) const
    {
        if (id < 1 || static_cast<std::size_t>(id) > primitives_.size())
            throw NotInCatalog("no primitive with id " + std::to_string(id));
        return primitives_[static_cast<std::size_t>(id - 1)];
    }

    /// Mirror expansion: every signature the catalog admits as a full window.
    const std::map<TurnSignature, Classification>& expanded() const { return expanded_; }

    std::optional<Classification> try_classify(const TurnSignature& sig) const
    {
        if (sig.size() != turns_) return std::nullopt;
        const int packed = full_[signature_code(sig)];
        if (packed < 0) return std::nullopt;
        return Classification{packed >> 1, (packed & 1) != 0};
    }

    Classification classify(const TurnSignature& sig) const
    {
        if (auto c = try_classify(sig)) return *c;
        throw NotInCatalog("signature '" + sig.str() + "' matches no primitive of catalog '" + name_ + "'");
    }

    /// True when sig is a full admissible window or, for short paths, the
    /// leading part of one.
    bool admits(const TurnSignature& sig) const
    {
        if (sig.size() == turns_) return full_[signature_code(sig)] >= 0;
        if (sig.size() > turns_) return false;
        return prefix_ok_[sig.size()][signature_code(sig)] != 0;
    }

private:
    void validate_and_index()
    {
        if (primitives_.empty()) throw InvalidCatalog("catalog has no primitives");
        if (!(regime_.upper > regime_.lower) || !(regime_.upper > 0.0))
            throw InvalidCatalog("ratio regime is empty");
        turns_ = primitives_.front().canonical.size();
        if (turns_ == 0 || turns_ > 8) throw InvalidCatalog("signatures must have between 1 and 8 turns");

        std::sort(primitives_.begin(), primitives_.end(), [](const Primitive& a, const Primitive& b) { return a.id < b.id; });
        for (std::size_t i = 0; i < primitives_.size(); ++i) {
            const Primitive& p = primitives_[i];
            if (i > 0 && primitives_[i - 1].id == p.id) throw InvalidCatalog("duplicate id " + std::to_string(p.id));
            if (p.id != static_cast<int>(i) + 1)
                throw InvalidCatalog("ids must be 1.." + std::to_string(primitives_.size()) + "; missing id " +
                                     std::to_string(i + 1));
            if (p.canonical.size() != turns_)
                throw InvalidCatalog("primitive " + std::to_string(p.id) + " has " + std::to_string(p.canonical.size()) +
                                     " turns, expected " + std::to_string(turns_));
        }
        if (!primitives_.front().canonical.is_straight())
            throw InvalidCatalog("primitive 1 must be the straight line, got '" + primitives_.front().canonical.str() + "'");

        // The five-cell (three-turn) window is the bounded-curvature regime:
        // its classes must partition exactly the LL/RR-free signatures.
        const bool c3_window = turns_ == 3;
        for (const Primitive& p : primitives_) {
            if (c3_window && p.canonical.has_double_turn())
                throw InvalidCatalog("primitive " + std::to_string(p.id) + " signature '" + p.canonical.str() +
                                     "' is not admissible (two successive turns in the same sense)");
            for (const auto& [sig, mirrored] :
                 {std::pair{p.canonical, false}, std::pair{p.mirror_signature(), true}}) {
                auto [it, inserted] = expanded_.emplace(sig, Classification{p.id, mirrored});
                if (!inserted && it->second.id != p.id)
                    throw InvalidCatalog("primitives " + std::to_string(it->second.id) + " and " +
                                         std::to_string(p.id) + " share the mirror class of '" + sig.str() + "'");
            }
        }
        if (c3_window) {
            const auto universe = admissible_signatures(3);
            if (expanded_.size() != universe.size())
                throw InvalidCatalog("mirror expansion has " + std::to_string(expanded_.size()) +
                                     " signatures; the admissible set has " + std::to_string(universe.size()));
        }

        std::size_t total = 1;
        for (std::size_t i = 0; i < turns_; ++i) total *= 3;
        full_.assign(total, -1);
        prefix_ok_.assign(turns_, {});
        for (std::size_t len = 0, n = 1; len < turns_; ++len, n *= 3) prefix_ok_[len].assign(n, 0);
        for (const auto& [sig, cls] : expanded_) {
            full_[signature_code(sig)] = (cls.id << 1) | (cls.mirrored ? 1 : 0);
            for (std::size_t len = 0; len < turns_; ++len)
                prefix_ok_[len][signature_code(TurnSignature(std::string_view(sig.str()).substr(0, len)))] = 1;
        }
    }

    std::string name_;
    RatioRegime regime_;
    std::vector<Primitive> primitives_;
    std::size_t turns_ = 0;
    std::map<TurnSignature, Classification> expanded_;
    std::vector<int> full_;
    std::vector<std::vector<char>> prefix_ok_;
};

// ---------------------------------------------------------------------------
// Catalog documents
// ---------------------------------------------------------------------------

/// Built-in five-cell catalog, numbered after the primitive figure:
/// 1 straight, 2/8 single late/early turn, 3/4 turn into zig-zag and back,
/// 5 centered turn, 6 zig-zag, 7 lateral shift, 9 double same-sense turn.
inline constexpr std::string_view kBuiltinCatalogDocument = R"({
  "name": "c3",
  "window_cells": 5,
  "ratio_regime": {"lower": 2.6457513110645907, "upper": 3.329},
  "primitives": [
    {"id": 1, "turns": "SSS"},
    {"id": 2, "turns": "SSL"},
    {"id": 3, "turns": "SLR"},
    {"id": 4, "turns": "LRS"},
    {"id": 5, "turns": "SLS"},
    {"id": 6, "turns": "LRL"},
    {"id": 7, "turns": "LSR"},
    {"id": 8, "turns": "LSS"},
    {"id": 9, "turns": "LSL"}
  ]
})";

inline Catalog load_catalog(const nlohmann::json& doc)
{
    try {
        if (!doc.is_object()) throw InvalidCatalog("catalog document must be an object");
        if (!doc.contains("primitives") || !doc.at("primitives").is_array())
            throw InvalidCatalog("catalog document needs a 'primitives' array");
        std::vector<Primitive> prims;
        for (const auto& entry : doc.at("primitives")) {
            if (!entry.contains("id") || !entry.contains("turns"))
                throw InvalidCatalog("every primitive needs 'id' and 'turns'");
            prims.push_back({entry.at("id").get<int>(), TurnSignature(entry.at("turns").get<std::string>())});
        }
        RatioRegime regime{kC3RatioLower, kC3RatioUpper};
        if (doc.contains("ratio_regime")) {
            regime.lower = doc.at("ratio_regime").at("lower").get<double>();
            regime.upper = doc.at("ratio_regime").at("upper").get<double>();
        }
        Catalog cat(doc.value("name", std::string("custom")), regime, std::move(prims));
        if (doc.contains("window_cells") && doc.at("window_cells").get<std::size_t>() != cat.window_cells())
            throw InvalidCatalog("window_cells does not match the signature length");
        return cat;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidCatalog(std::string("malformed catalog document: ") + e.what());
    }
}

inline Catalog load_catalog(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidCatalog(std::string("catalog is not valid JSON: ") + e.what());
    }
    return load_catalog(doc);
}

inline Catalog load_catalog_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidCatalog("cannot open catalog file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_catalog(std::string_view(buf.str()));
}

inline const Catalog& builtin_catalog()
{
    static const Catalog catalog = load_catalog(kBuiltinCatalogDocument);
    return catalog;
}

inline nlohmann::json catalog_to_json(const Catalog& cat)
{
    nlohmann::json prims = nlohmann::json::array();
    for (const Primitive& p : cat.primitives()) prims.push_back({{"id", p.id}, {"turns", p.canonical.str()}});
    return {{"name", cat.name()},
            {"window_cells", cat.window_cells()},
            {"ratio_regime", {{"lower", cat.regime().lower}, {"upper", cat.regime().upper}}},
            {"primitives", prims}};
}

/// Whether appending candidate to the trailing cells keeps every visible
/// window admissible. Only the newest window needs checking; earlier ones
/// were checked when they were formed.
inline bool admissible_extension(std::span<const HexCell> trailing, HexCell candidate,
                                 const Catalog& catalog = builtin_catalog())
{
    if (trailing.empty()) return false;
    if (!try_direction_between(trailing.back(), candidate))
        throw NotAPath(to_label(candidate) + " is not adjacent to " + to_label(trailing.back()));
    const std::size_t keep = std::min(trailing.size(), catalog.window_cells() - 1);
    std::vector<HexCell> window(trailing.end() - static_cast<std::ptrdiff_t>(keep), trailing.end());
    window.push_back(candidate);
    const auto moves = move_directions(window);
    const auto sig = turns_of_moves(moves);
    return sig && catalog.admits(*sig);
}

/// Lays out the cells of a signature from origin, first move along first_move.
inline std::vector<HexCell> layout_cells(const TurnSignature& sig, HexCell origin = {}, Direction first_move = Direction(0))
{
    std::vector<HexCell> cells{origin, neighbor(origin, first_move)};
    Direction d = first_move;
    for (std::size_t i = 0; i < sig.size(); ++i) {
        d = d.rotated(sig[i] == Turn::S ? 0 : (sig[i] == Turn::L ? 1 : -1));
        cells.push_back(neighbor(cells.back(), d));
    }
    return cells;
}

} // namespace hexplan
