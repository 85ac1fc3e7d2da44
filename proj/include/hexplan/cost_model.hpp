#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hexplan/errors.hpp"
#include "hexplan/hexgrid.hpp"

namespace hexplan {

struct Weights
{
    double w_n = 1.0;     ///< weight on the number of cells
    double w_kappa = 5.0; ///< weight on the curvature cost

    void validate() const
    {
        if (!(w_n >= 0.0) || !(w_kappa >= 0.0) || !std::isfinite(w_n) || !std::isfinite(w_kappa))
            throw Error("weights must be finite and non-negative");
    }
};

/// How the curvature term of the cost-to-come is formed.
enum class KappaAccumulation
{
    accumulated, ///< running sum of the curvature cost of every window so far
    literal,     ///< curvature cost of the trailing window only
};

/// Curvature cost per primitive id (1-based).
class CostTable
{
public:
    CostTable() = default;
    CostTable(std::string variant, std::vector<double> costs) : variant_(std::move(variant)), costs_(std::move(costs))
    {
        for (std::size_t i = 0; i < costs_.size(); ++i) {
            if (!std::isfinite(costs_[i]) || costs_[i] < 0.0)
                throw Error("cost of primitive " + std::to_string(i + 1) + " must be finite and non-negative");
        }
    }

    const std::string& variant() const { return variant_; }
    std::size_t size() const { return costs_.size(); }
    const std::vector<double>& values() const { return costs_; }

    double operator[](int id) const
    {
        if (id < 1 || static_cast<std::size_t>(id) > costs_.size())
            throw Error("cost table '" + variant_ + "' has no entry for primitive " + std::to_string(id));
        return costs_[static_cast<std::size_t>(id - 1)];
    }

    void set(int id, double value) { costs_.at(static_cast<std::size_t>(id - 1)) = value; }

    bool operator==(const CostTable&) const = default;

private:
    std::string variant_;
    std::vector<double> costs_;
};

inline const std::vector<std::string>& builtin_variants()
{
    static const std::vector<std::string> names{"ribbon", "adapted_ribbon", "curvature_penalty"};
    return names;
}

/// The three published curvature-cost columns, indexed by primitive id 1..9.
inline CostTable builtin_table(const std::string& variant)
{
    if (variant == "ribbon")
        return CostTable(variant, {0.0, 0.087, 0.119, 0.195, 0.429, 0.109, 0.429, 0.507, 0.915});
    if (variant == "adapted_ribbon")
        return CostTable(variant, {0.0, 0.087, 0.119, 0.119, 0.429, 0.0, 0.429, 0.087, 0.915});
    if (variant == "curvature_penalty")
        return CostTable(variant, {0.0, 0.1, 0.2, 0.2, 1.0, 0.0, 1.0, 0.1, 1.0});
    throw UnknownVariant("'" + variant + "' (expected ribbon, adapted_ribbon or curvature_penalty)");
}

/// Removes the direction dependence of a ribbon table: primitives that are the
/// same formation driven the other way share the lower cost, and the zig-zag
/// gets the straight-line cost.
inline CostTable adapt_table(const CostTable& ribbon)
{
    if (ribbon.size() < 9) throw Error("adapt_table needs costs for primitives 1..9");
    const bool already = ribbon.variant().rfind("adapted_", 0) == 0;
    CostTable out(already ? ribbon.variant() : "adapted_" + ribbon.variant(), ribbon.values());
    const double late_early = std::min(ribbon[2], ribbon[8]);
    const double into_out_of = std::min(ribbon[3], ribbon[4]);
    out.set(2, late_early);
    out.set(8, late_early);
    out.set(3, into_out_of);
    out.set(4, into_out_of);
    out.set(6, ribbon[1]);
    return out;
}

inline nlohmann::json cost_table_to_json(const CostTable& t)
{
    nlohmann::json costs = nlohmann::json::object();
    for (std::size_t i = 0; i < t.size(); ++i) costs[std::to_string(i + 1)] = t.values()[i];
    return {{"variant", t.variant()}, {"costs", costs}};
}

inline CostTable cost_table_from_json(const nlohmann::json& doc)
{
    try {
        const auto& costs = doc.at("costs");
        std::vector<double> values(costs.size(), -1.0);
        for (const auto& [key, value] : costs.items()) {
            const int id = std::stoi(key);
            if (id < 1 || static_cast<std::size_t>(id) > values.size())
                throw ParseError("cost table ids must be 1.." + std::to_string(values.size()));
            values[static_cast<std::size_t>(id - 1)] = value.get<double>();
        }
        return CostTable(doc.value("variant", std::string("custom")), std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed cost table: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw ParseError("cost table ids must be integers");
    }
}

inline CostTable load_cost_table_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open cost table " + path);
    try {
        return cost_table_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("cost table " + path + " is not valid JSON: " + e.what());
    }
}

/// Resolves "ribbon" | "adapted_ribbon" | "curvature_penalty" | "file:PATH".
inline CostTable resolve_cost_table(const std::string& spec)
{
    if (spec.rfind("file:", 0) == 0) return load_cost_table_file(spec.substr(5));
    return builtin_table(spec);
}

// ---------------------------------------------------------------------------
// Cost function
// ---------------------------------------------------------------------------

/// Cost-to-come: w_n * cells + w_kappa * curvature term. window_primitive is
/// empty while the path is shorter than one window.
inline double cost_to_come(int n_cells, std::optional<int> window_primitive, const CostTable& table, const Weights& w,
                           KappaAccumulation mode = KappaAccumulation::accumulated, double accumulated_kappa = 0.0)
{
    const double window = window_primitive ? table[*window_primitive] : 0.0;
    const double kappa = mode == KappaAccumulation::accumulated ? accumulated_kappa + window : window;
    return w.w_n * n_cells + w.w_kappa * kappa;
}

/// Euclidean center distance in units of the neighbor spacing.
inline double cost_to_go(HexCell cell, HexCell target, const GridSpec& spec)
{
    return norm(to_cartesian(target, spec) - to_cartesian(cell, spec)) / spec.spacing();
}

struct CostBreakdown
{
    int n_cells = 0;
    double c_kappa_term = 0.0; ///< w_kappa times the curvature sum (or trailing value)
    double c_c = 0.0;
    double c_g = 0.0;
    double c = 0.0;
};

inline CostBreakdown total_cost(int n_cells, double c_kappa_term, double c_c, double c_g)
{
    return {n_cells, c_kappa_term, c_c, c_g, c_c + c_g};
}

// ---------------------------------------------------------------------------
// Exact cost arithmetic used by the search
// ---------------------------------------------------------------------------

/// Fixed-point cost-to-come. Curvature costs are held in units of 1e-6 and
/// weights in units of 1e-4, so a path's cost is independent of the order its
/// windows were summed in and two searches over the same graph agree exactly.
class ExactCost
{
public:
    static constexpr double kappa_scale = 1e6;
    static constexpr double weight_scale = 1e4;

    static std::int64_t quantize_kappa(double kappa) { return std::llround(kappa * kappa_scale); }

    ExactCost(const Weights& w, const CostTable& table)
        : wn_(std::llround(w.w_n * weight_scale)), wk_(std::llround(w.w_kappa * weight_scale))
    {
        w.validate();
        kappa_units_.reserve(table.size());
        for (double v : table.values()) kappa_units_.push_back(quantize_kappa(v));
    }

    std::int64_t kappa_units(int id) const { return id > 0 ? kappa_units_.at(static_cast<std::size_t>(id - 1)) : 0; }

    /// Cost-to-come in units of 1e-10.
    std::int64_t value(int n_cells, std::int64_t kappa_units) const
    {
        return wn_ * static_cast<std::int64_t>(kappa_scale) * n_cells + wk_ * kappa_units;
    }

    static double to_double(std::int64_t units) { return static_cast<double>(units) / (kappa_scale * weight_scale); }

private:
    std::int64_t wn_;
    std::int64_t wk_;
    std::vector<std::int64_t> kappa_units_;
};

} // namespace hexplan
