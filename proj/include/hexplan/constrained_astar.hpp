#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hexplan/cost_model.hpp"
#include "hexplan/errors.hpp"
#include "hexplan/hexgrid.hpp"
#include "hexplan/primitive_catalog.hpp"

namespace hexplan {

// ---------------------------------------------------------------------------
// Search state
// ---------------------------------------------------------------------------

/// The most recent move directions of a path, oldest first.
class MoveWindow
{
public:
    static constexpr std::size_t max_moves = 9;

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    Direction operator[](std::size_t i) const { return Direction(moves_[i]); }
    Direction back() const { return Direction(moves_[size_ - 1]); }

    /// Appends d, dropping the oldest move when capacity moves are held.
    MoveWindow pushed(Direction d, std::size_t capacity) const
    {
        MoveWindow out = *this;
        if (out.size_ == capacity) {
            std::copy(out.moves_.begin() + 1, out.moves_.begin() + static_cast<std::ptrdiff_t>(out.size_), out.moves_.begin());
            --out.size_;
        }
        out.moves_[out.size_++] = static_cast<std::int8_t>(d.index());
        return out;
    }

    std::vector<Direction> directions() const
    {
        std::vector<Direction> out;
        for (std::size_t i = 0; i < size_; ++i) out.emplace_back(moves_[i]);
        return out;
    }

    std::string str() const
    {
        std::string s;
        for (std::size_t i = 0; i < size_; ++i) s.push_back(static_cast<char>('0' + moves_[i]));
        return s;
    }

    bool operator==(const MoveWindow& o) const
    {
        return size_ == o.size_ && std::equal(moves_.begin(), moves_.begin() + static_cast<std::ptrdiff_t>(size_), o.moves_.begin());
    }

    bool operator<(const MoveWindow& o) const
    {
        return std::lexicographical_compare(moves_.begin(), moves_.begin() + static_cast<std::ptrdiff_t>(size_),
                                            o.moves_.begin(), o.moves_.begin() + static_cast<std::ptrdiff_t>(o.size_));
    }

    std::uint64_t packed() const
    {
        std::uint64_t v = size_;
        for (std::size_t i = 0; i < size_; ++i) v = v * 8 + static_cast<std::uint64_t>(moves_[i]);
        return v;
    }

private:
    std::array<std::int8_t, max_moves> moves_{};
    std::uint8_t size_ = 0;
};

/// A node of the search graph. One cell carries many states, one per
/// distinct recent move history.
struct SearchState
{
    HexCell cell;
    MoveWindow window;

    bool operator==(const SearchState&) const = default;
};

struct SearchStateHash
{
    std::size_t operator()(const SearchState& s) const noexcept
    {
        return HexCellHash{}(s.cell) * 0x9E3779B97F4A7C15ULL ^ std::hash<std::uint64_t>{}(s.window.packed());
    }
};

struct PathCandidate
{
    SearchState state;
    std::int32_t parent = -1;      ///< index of the predecessor in the candidate arena
    int n_cells = 1;               ///< n_c*: cells from start, inclusive
    std::int64_t kappa_sum = 0;    ///< running curvature cost, fixed point
    int primitive_id = 0;          ///< trailing-window primitive, 0 while the path is short
    bool mirrored = false;
    std::int64_t cost_to_come = 0; ///< fixed point, see ExactCost
    double c_g = 0.0;
    double c = 0.0;

    double c_c() const { return ExactCost::to_double(cost_to_come); }
    double accumulated_kappa() const { return static_cast<double>(kappa_sum) / ExactCost::kappa_scale; }
};

enum class Termination
{
    optimal, ///< stop when a target state is closed
    paper,   ///< stop as soon as a target candidate is generated
};

struct PlannerConfig
{
    Termination termination = Termination::optimal;
    KappaAccumulation accumulation = KappaAccumulation::accumulated;
    bool dead_cell_pruning = true;
    std::optional<Direction> initial_heading; ///< restricts the first move
    bool record_trace = false;
    std::size_t iteration_cap = 0; ///< 0 selects the state-count bound
};

struct PlanStatistics
{
    std::size_t iterations = 0; ///< candidates closed
    std::size_t expansions = 0; ///< closed candidates whose successors were generated
    std::size_t generated = 0;  ///< candidates pushed onto the open structure
    std::size_t peak_open = 0;
    std::size_t dead_cells = 0;
    std::size_t skipped = 0;    ///< popped candidates discarded as closed or dead

    bool operator==(const PlanStatistics&) const = default;
};

struct TraceOpen
{
    HexCell cell;
    HexCell parent;
    std::string window;
    double c = 0.0;
};

struct TraceEvent
{
    std::size_t iteration = 0;
    HexCell closed;
    std::optional<HexCell> closed_parent;
    std::string closed_window;
    std::vector<TraceOpen> opened;
    std::vector<HexCell> dead;
};

struct SearchTrace
{
    std::vector<TraceEvent> events;
};

struct PlanResult
{
    std::vector<HexCell> cells;
    CostBreakdown objective;
    std::vector<int> primitive_ids; ///< one per full window, in path order
    std::vector<bool> mirrored;
    PlanStatistics stats;
    std::vector<std::string> warnings;
    std::optional<SearchTrace> trace;
};

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

/// Open structure, per-state best costs, closed states and dead cells of one run.
class SearchLedger
{
public:
    explicit SearchLedger(const MapGrid& map) : map_(&map), dead_(map.cell_count(), 0) {}

    std::vector<PathCandidate>& arena() { return arena_; }
    const std::vector<PathCandidate>& arena() const { return arena_; }
    const PathCandidate& candidate(std::int32_t i) const { return arena_[static_cast<std::size_t>(i)]; }
    PlanStatistics& stats() { return stats_; }
    const PlanStatistics& stats() const { return stats_; }

    bool is_closed(const SearchState& s) const { return closed_.contains(s); }
    bool is_dead(HexCell c) const { return map_->in_bounds(c) && dead_[map_->index_of(c)] != 0; }
    std::size_t open_size() const { return open_.size(); }
    bool open_empty() const { return open_.empty(); }

    /// Adds a candidate unless its state is closed or already reached at no greater cost.
    std::optional<std::int32_t> push(const PathCandidate& cand)
    {
        if (is_closed(cand.state)) return std::nullopt;
        auto [it, inserted] = best_.try_emplace(cand.state, cand.cost_to_come);
        if (!inserted) {
            if (it->second <= cand.cost_to_come) return std::nullopt;
            it->second = cand.cost_to_come;
        }
        const auto index = static_cast<std::int32_t>(arena_.size());
        arena_.push_back(cand);
        open_.push(index);
        ++stats_.generated;
        stats_.peak_open = std::max(stats_.peak_open, open_.size());
        return index;
    }

    /// Pops the cheapest live candidate and closes its state. Ties go to fewer
    /// cells, then the smaller (q, r), then the smaller move window.
    std::optional<std::int32_t> select_and_close()
    {
        while (!open_.empty()) {
            const std::int32_t index = open_.top();
            open_.pop();
            const PathCandidate& cand = candidate(index);
            if (is_closed(cand.state) || is_dead(cand.state.cell) || best_.at(cand.state) < cand.cost_to_come) {
                ++stats_.skipped;
                continue;
            }
            closed_.insert(cand.state);
            ++stats_.iterations;
            return index;
        }
        return std::nullopt;
    }

    /// Marks cell dead when at most one of its neighbors is free: whatever the
    /// entry, no continuation can leave it.
    bool mark_dead(HexCell cell)
    {
        if (cell == map_->target() || !map_->in_bounds(cell) || is_dead(cell)) return false;
        int free_neighbors = 0;
        for (const HexCell& n : neighbors(cell)) free_neighbors += map_->is_free(n) ? 1 : 0;
        if (free_neighbors > 1) return false;
        dead_[map_->index_of(cell)] = 1;
        ++stats_.dead_cells;
        return true;
    }

private:
    struct OpenOrder
    {
        const std::vector<PathCandidate>* arena;
        // priority_queue pops the largest element, so "less" means "worse".
        bool operator()(std::int32_t a, std::int32_t b) const
        {
            const PathCandidate& x = (*arena)[static_cast<std::size_t>(a)];
            const PathCandidate& y = (*arena)[static_cast<std::size_t>(b)];
            if (x.c != y.c) return x.c > y.c;
            if (x.n_cells != y.n_cells) return x.n_cells > y.n_cells;
            if (x.state.cell != y.state.cell) return y.state.cell < x.state.cell;
            if (!(x.state.window == y.state.window)) return y.state.window < x.state.window;
            return a > b;
        }
    };

    const MapGrid* map_;
    std::vector<PathCandidate> arena_;
    std::priority_queue<std::int32_t, std::vector<std::int32_t>, OpenOrder> open_{OpenOrder{&arena_}};
    std::unordered_map<SearchState, std::int64_t, SearchStateHash> best_;
    std::unordered_set<SearchState, SearchStateHash> closed_;
    std::vector<std::uint8_t> dead_;
    PlanStatistics stats_;
};

// ---------------------------------------------------------------------------
// Planner
// ---------------------------------------------------------------------------

/// Rejects ratios beyond the catalog's regime; ratios below it only warn,
/// since the catalog is then conservative.
inline std::vector<std::string> check_ratio(const GridSpec& spec, const Catalog& catalog)
{
    std::vector<std::string> warnings;
    const double ratio = spec.ratio();
    if (ratio > catalog.regime().upper)
        throw UnsupportedRatio("r_min / r_c = " + std::to_string(ratio) + " exceeds the catalog limit " +
                               std::to_string(catalog.regime().upper));
    if (ratio <= catalog.regime().lower)
        warnings.push_back("r_min / r_c = " + std::to_string(ratio) + " is at or below " +
                           std::to_string(catalog.regime().lower) + "; the catalog is conservative for this grid");
    return warnings;
}

/// Curvature-constrained A* over (cell, move window) states.
class ConstrainedAStar
{
public:
    ConstrainedAStar(const MapGrid& map, const Catalog& catalog, const CostTable& table, const Weights& weights,
                     PlannerConfig config = {})
        : map_(map), catalog_(catalog), table_(table), weights_(weights), config_(config), exact_(weights, table),
          ledger_(map), window_moves_(catalog.turns_per_window() + 1)
    {
        if (table.size() < catalog.size())
            throw Error("cost table '" + table.variant() + "' has " + std::to_string(table.size()) +
                        " entries; the catalog has " + std::to_string(catalog.size()) + " primitives");
        if (window_moves_ > MoveWindow::max_moves) throw Error("catalog window is too long for the planner");
        warnings_ = check_ratio(map.spec(), catalog);
    }

    SearchLedger& ledger() { return ledger_; }
    const SearchLedger& ledger() const { return ledger_; }

    PathCandidate root() const
    {
        PathCandidate c;
        c.state = {map_.start(), {}};
        c.n_cells = 1;
        c.cost_to_come = exact_.value(1, 0);
        c.c_g = cost_to_go(map_.start(), map_.target(), map_.spec());
        c.c = c.c_c() + c.c_g;
        return c;
    }

    /// Successor candidates of a closed candidate: one per free neighbor whose
    /// move keeps the trailing window admissible. States already closed
    /// (including every ancestor of the candidate) are left out.
    std::vector<PathCandidate> expand(std::int32_t index) const
    {
        const PathCandidate& cand = ledger_.candidate(index);
        std::vector<PathCandidate> out;
        const bool is_root = cand.parent < 0;
        for (int di = 0; di < Direction::count; ++di) {
            const Direction d(di);
            if (is_root && config_.initial_heading && *config_.initial_heading != d) continue;
            const HexCell next = neighbor(cand.state.cell, d);
            if (!map_.is_free(next)) continue;
            if (config_.dead_cell_pruning && ledger_.is_dead(next)) continue;

            const MoveWindow window = cand.state.window.pushed(d, window_moves_);
            const auto moves = window.directions();
            const auto sig = turns_of_moves(moves);
            if (!sig || !catalog_.admits(*sig)) continue;

            PathCandidate succ;
            succ.state = {next, window};
            if (ledger_.is_closed(succ.state)) continue;
            succ.parent = index;
            succ.n_cells = cand.n_cells + 1;
            if (window.size() == window_moves_) {
                const Classification cls = catalog_.classify(*sig);
                succ.primitive_id = cls.id;
                succ.mirrored = cls.mirrored;
            }
            const std::int64_t window_kappa = exact_.kappa_units(succ.primitive_id);
            succ.kappa_sum = cand.kappa_sum + window_kappa;
            succ.cost_to_come = exact_.value(
                succ.n_cells, config_.accumulation == KappaAccumulation::accumulated ? succ.kappa_sum : window_kappa);
            succ.c_g = cost_to_go(next, map_.target(), map_.spec());
            succ.c = succ.c_c() + succ.c_g;
            out.push_back(succ);
        }
        return out;
    }

    PlanResult run()
    {
        PlanResult result;
        result.warnings = warnings_;
        if (config_.record_trace) result.trace.emplace();

        const std::size_t cap = config_.iteration_cap ? config_.iteration_cap : default_iteration_cap();
        ledger_.push(root());
        std::optional<std::int32_t> goal;
        std::vector<std::int32_t> target_candidates;

        while (!goal) {
            const auto index = ledger_.select_and_close();
            if (!index) break;
            if (ledger_.stats().iterations > cap)
                throw Error("iteration cap " + std::to_string(cap) + " exceeded; search did not terminate");

            const PathCandidate current = ledger_.candidate(*index);
            TraceEvent* event = nullptr;
            if (result.trace) {
                TraceEvent ev;
                ev.iteration = ledger_.stats().iterations;
                ev.closed = current.state.cell;
                if (current.parent >= 0) ev.closed_parent = ledger_.candidate(current.parent).state.cell;
                ev.closed_window = current.state.window.str();
                result.trace->events.push_back(std::move(ev));
                event = &result.trace->events.back();
            }

            if (current.state.cell == map_.target()) {
                if (config_.termination == Termination::optimal || current.parent < 0) {
                    goal = *index;
                    break;
                }
            }

            ++ledger_.stats().expansions;
            const auto successors = expand(*index);
            bool reached_target = false;
            for (const PathCandidate& s : successors) {
                const auto pushed = ledger_.push(s);
                if (!pushed) continue;
                if (event) event->opened.push_back({s.state.cell, current.state.cell, s.state.window.str(), s.c});
                if (s.state.cell == map_.target()) {
                    target_candidates.push_back(*pushed);
                    reached_target = true;
                }
            }
            if (successors.empty() && config_.dead_cell_pruning && ledger_.mark_dead(current.state.cell) && event)
                event->dead.push_back(current.state.cell);

            if (config_.termination == Termination::paper && reached_target) {
                goal = cheapest(target_candidates);
            }
        }
        if (!goal)
            throw NoPath("no admissible path from " + to_label(map_.start()) + " to " + to_label(map_.target()));

        fill_result(*goal, result);
        return result;
    }

private:
    std::size_t default_iteration_cap() const
    {
        std::size_t per_cell = 1;
        for (std::size_t len = 1, n = 6; len <= window_moves_; ++len, n *= 3) per_cell += n;
        return 10 * map_.cell_count() * per_cell;
    }

    std::int32_t cheapest(const std::vector<std::int32_t>& indices) const
    {
        return *std::min_element(indices.begin(), indices.end(), [&](std::int32_t a, std::int32_t b) {
            const PathCandidate& x = ledger_.candidate(a);
            const PathCandidate& y = ledger_.candidate(b);
            if (x.cost_to_come != y.cost_to_come) return x.cost_to_come < y.cost_to_come;
            if (x.n_cells != y.n_cells) return x.n_cells < y.n_cells;
            if (!(x.state.window == y.state.window)) return x.state.window < y.state.window;
            return a < b;
        });
    }

    void fill_result(std::int32_t goal, PlanResult& result) const
    {
        std::vector<const PathCandidate*> chain;
        for (std::int32_t i = goal; i >= 0; i = ledger_.candidate(i).parent) chain.push_back(&ledger_.candidate(i));
        std::reverse(chain.begin(), chain.end());
        for (const PathCandidate* c : chain) {
            result.cells.push_back(c->state.cell);
            if (c->primitive_id > 0) {
                result.primitive_ids.push_back(c->primitive_id);
                result.mirrored.push_back(c->mirrored);
            }
        }
        const PathCandidate& g = ledger_.candidate(goal);
        const double kappa_term = g.c_c() - ExactCost::to_double(exact_.value(g.n_cells, 0));
        result.objective = total_cost(g.n_cells, kappa_term, g.c_c(), g.c_g);
        result.stats = ledger_.stats();
    }

    const MapGrid& map_;
    const Catalog& catalog_;
    const CostTable& table_;
    Weights weights_;
    PlannerConfig config_;
    ExactCost exact_;
    SearchLedger ledger_;
    std::size_t window_moves_;
    std::vector<std::string> warnings_;
};

inline PlanResult plan(const MapGrid& map, const Catalog& catalog, const CostTable& table, const Weights& weights,
                       const PlannerConfig& config = {})
{
    ConstrainedAStar planner(map, catalog, table, weights, config);
    return planner.run();
}

} // namespace hexplan
