#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "hexplan/cost_model.hpp"
#include "hexplan/errors.hpp"
#include "hexplan/hexgrid.hpp"
#include "hexplan/primitive_catalog.hpp"

namespace hexplan {

struct OracleResult
{
    std::int64_t objective_units = 0; ///< exact cost-to-come at the target (ExactCost units)
    double objective = 0.0;
    std::vector<HexCell> cells;
};

/// Exhaustive uniform-cost search with the accumulated objective. Its states
/// keep only the moves needed to form the next window (one fewer than the
/// planner's), it uses no heuristic and no pruning, and it stops when the
/// first target state is settled. Meant for small maps.
inline OracleResult oracle_plan(const MapGrid& map, const Catalog& catalog, const CostTable& table, const Weights& w)
{
    const ExactCost exact(w, table);
    const std::size_t keep = catalog.turns_per_window();

    using Key = std::pair<HexCell, std::vector<int>>;
    struct Label
    {
        std::int64_t cost;
        int n_cells;
        std::int64_t kappa;
        Key parent;
        bool has_parent;
    };
    std::map<Key, Label> labels;
    std::set<std::tuple<std::int64_t, HexCell, std::vector<int>>> frontier;
    std::set<Key> settled;

    const Key root{map.start(), {}};
    labels[root] = {exact.value(1, 0), 1, 0, root, false};
    frontier.insert({exact.value(1, 0), map.start(), {}});

    while (!frontier.empty()) {
        const auto [cost, cell, moves] = *frontier.begin();
        frontier.erase(frontier.begin());
        const Key key{cell, moves};
        if (settled.contains(key)) continue;
        settled.insert(key);
        const Label label = labels.at(key);

        if (cell == map.target()) {
            OracleResult out;
            out.objective_units = label.cost;
            out.objective = ExactCost::to_double(label.cost);
            for (Key k = key;; k = labels.at(k).parent) {
                out.cells.push_back(k.first);
                if (!labels.at(k).has_parent) break;
            }
            std::reverse(out.cells.begin(), out.cells.end());
            return out;
        }

        for (int d = 0; d < Direction::count; ++d) {
            const HexCell next = neighbor(cell, Direction(d));
            if (!map.is_free(next)) continue;
            std::vector<Direction> window;
            for (int m : moves) window.emplace_back(m);
            window.emplace_back(d);
            const auto sig = turns_of_moves(window);
            if (!sig || !catalog.admits(*sig)) continue;
            const int id = sig->size() == catalog.turns_per_window() ? catalog.classify(*sig).id : 0;

            std::vector<int> next_moves = moves;
            next_moves.push_back(d);
            if (next_moves.size() > keep) next_moves.erase(next_moves.begin());
            const Key next_key{next, next_moves};
            if (settled.contains(next_key)) continue;

            const std::int64_t kappa = label.kappa + exact.kappa_units(id);
            const std::int64_t next_cost = exact.value(label.n_cells + 1, kappa);
            auto it = labels.find(next_key);
            if (it != labels.end() && it->second.cost <= next_cost) continue;
            labels[next_key] = {next_cost, label.n_cells + 1, kappa, key, true};
            frontier.insert({next_cost, next, next_moves});
        }
    }
    throw NoPath("oracle: target " + to_label(map.target()) + " is unreachable");
}

} // namespace hexplan
