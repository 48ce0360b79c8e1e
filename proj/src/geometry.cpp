#include "aim/geometry.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

namespace aim {

namespace {

int side_index(Approach a) { return static_cast<int>(a); }
Approach side_from_index(int i) { return static_cast<Approach>(((i % 4) + 4) % 4); }

// Quarter turns that carry the W approach onto `a`.
int quarter_turns_from_west(Approach a) {
    switch (a) {
        case Approach::kWest: return 0;
        case Approach::kSouth: return 1;
        case Approach::kEast: return 2;
        case Approach::kNorth: return 3;
    }
    return 0;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    auto q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

std::string_view to_string(Approach a) {
    switch (a) {
        case Approach::kNorth: return "N";
        case Approach::kEast: return "E";
        case Approach::kSouth: return "S";
        case Approach::kWest: return "W";
    }
    return "?";
}

std::string_view to_string(Turn t) {
    switch (t) {
        case Turn::kStraight: return "straight";
        case Turn::kLeft: return "left";
        case Turn::kRight: return "right";
    }
    return "?";
}

Approach approach_from_string(std::string_view s) {
    if (s == "N") return Approach::kNorth;
    if (s == "E") return Approach::kEast;
    if (s == "S") return Approach::kSouth;
    if (s == "W") return Approach::kWest;
    throw ParameterError("unknown approach '" + std::string(s) + "'");
}

Turn turn_from_string(std::string_view s) {
    if (s == "straight") return Turn::kStraight;
    if (s == "left") return Turn::kLeft;
    if (s == "right") return Turn::kRight;
    throw ParameterError("unknown turn '" + std::string(s) + "'");
}

Approach opposite(Approach a) { return side_from_index(side_index(a) + 2); }

Approach exit_side(Approach entry, Turn turn) {
    switch (turn) {
        case Turn::kStraight: return opposite(entry);
        case Turn::kLeft: return side_from_index(side_index(entry) + 1);
        case Turn::kRight: return side_from_index(side_index(entry) + 3);
    }
    return opposite(entry);
}

Turn turn_between(Approach entry, Approach exit) {
    for (auto t : {Turn::kStraight, Turn::kLeft, Turn::kRight}) {
        if (exit_side(entry, t) == exit) return t;
    }
    throw ParameterError("U-turn from " + std::string(to_string(entry)) + " is not a valid movement");
}

IntersectionGrid::IntersectionGrid(int size, int lanes_per_approach) : size_(size), lanes_(lanes_per_approach) {
    if (size < 2) throw ParameterError("intersection grid size must be >= 2");
    if (lanes_per_approach < 1 || lanes_per_approach > size)
        throw ParameterError("lanes_per_approach must be in [1, grid size]");
}

Bundle::Bundle(std::vector<SpaceTimeSlot> slots) : slots_(std::move(slots)) {
    std::sort(slots_.begin(), slots_.end());
    slots_.erase(std::unique(slots_.begin(), slots_.end()), slots_.end());
}

Tick Bundle::min_tick() const { return slots_.empty() ? 0 : slots_.front().tick; }
Tick Bundle::max_tick() const { return slots_.empty() ? 0 : slots_.back().tick; }

bool Bundle::contains(const SpaceTimeSlot& s) const { return std::binary_search(slots_.begin(), slots_.end(), s); }

bool Bundle::overlaps(const Bundle& other) const {
    auto a = slots_.begin();
    auto b = other.slots_.begin();
    while (a != slots_.end() && b != other.slots_.end()) {
        if (*a == *b) return true;
        if (*a < *b) ++a;
        else ++b;
    }
    return false;
}

bool Bundle::shares_cell_with(const Bundle& other) const {
    std::unordered_set<std::uint64_t> cells;
    for (const auto& s : slots_)
        cells.insert((static_cast<std::uint64_t>(s.cell.row) << 32) | static_cast<std::uint32_t>(s.cell.col));
    return std::any_of(other.slots_.begin(), other.slots_.end(), [&](const SpaceTimeSlot& s) {
        return cells.contains((static_cast<std::uint64_t>(s.cell.row) << 32) | static_cast<std::uint32_t>(s.cell.col));
    });
}

Cell rotate(Cell c, int quarter_turns, int n) {
    quarter_turns = ((quarter_turns % 4) + 4) % 4;
    for (int i = 0; i < quarter_turns; ++i) c = Cell{n - 1 - c.col, c.row};
    return c;
}

std::vector<Cell> canonical_path(const IntersectionGrid& grid, Approach approach, int lane, Turn turn) {
    const int n = grid.size();
    if (lane < 0 || lane >= grid.lanes_per_approach())
        throw ParameterError("lane " + std::to_string(lane) + " outside [0, " +
                             std::to_string(grid.lanes_per_approach()) + ")");

    // Path for the W approach; other approaches are rotations of it.
    std::vector<Cell> path;
    switch (turn) {
        case Turn::kStraight:
            for (int col = 0; col < n; ++col) path.push_back({lane, col});
            break;
        case Turn::kRight: {
            const int pivot = lane;
            for (int col = 0; col <= pivot; ++col) path.push_back({lane, col});
            for (int row = lane + 1; row < n; ++row) path.push_back({row, pivot});
            break;
        }
        case Turn::kLeft: {
            const int pivot = n - 1 - lane;
            for (int col = 0; col <= pivot; ++col) path.push_back({lane, col});
            for (int row = lane - 1; row >= 0; --row) path.push_back({row, pivot});
            break;
        }
    }

    const int q = quarter_turns_from_west(approach);
    if (q != 0) {
        for (auto& c : path) c = rotate(c, q, n);
    }
    return path;
}

CellOccupancy cell_occupancy(std::int64_t k, Speed v) {
    const Tick first = floor_div(k * v.den, v.num);
    const Tick last = std::max(first, floor_div((k + 1) * v.den, v.num) - 1);
    return {first, last};
}

Tick crossing_ticks(const IntersectionGrid& grid, Speed v) {
    if (!v.valid()) throw ParameterError("speed must be positive");
    // Every canonical path has exactly n cells.
    return cell_occupancy(grid.size() - 1, v).last + 1;
}

Tick entry_release_tick(const TrajectoryParams& params, int safety_buffer) {
    return params.arrival_tick + cell_occupancy(0, params.speed).last + 1 + safety_buffer;
}

void validate(const IntersectionGrid& grid, const TrajectoryParams& params) {
    if (params.arrival_tick < 0) throw ParameterError("arrival_tick must be non-negative");
    if (!params.speed.valid()) throw ParameterError("arrival_speed must be positive");
    if (params.lane < 0 || params.lane >= grid.lanes_per_approach())
        throw ParameterError("lane " + std::to_string(params.lane) + " outside [0, " +
                             std::to_string(grid.lanes_per_approach()) + ")");
}

Bundle rasterize_bundle(const IntersectionGrid& grid, const TrajectoryParams& params, int safety_buffer) {
    validate(grid, params);
    if (safety_buffer < 0) throw ParameterError("safety buffer must be non-negative");

    const auto path = canonical_path(grid, params.approach, params.lane, params.turn);
    std::vector<SpaceTimeSlot> slots;
    slots.reserve(path.size() * 2);
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto occ = cell_occupancy(static_cast<std::int64_t>(k), params.speed);
        const Tick from = std::max<Tick>(0, params.arrival_tick + occ.first - safety_buffer);
        const Tick to = params.arrival_tick + occ.last + safety_buffer;
        for (Tick t = from; t <= to; ++t) slots.push_back({t, path[k]});
    }
    return Bundle(std::move(slots));
}

}  // namespace aim
