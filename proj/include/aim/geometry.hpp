#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "aim/types.hpp"

namespace aim {

/// Compass side of the intersection. A vehicle on approach W enters through the
/// western boundary heading east.
enum class Approach : std::uint8_t { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

enum class Turn : std::uint8_t { kStraight = 0, kLeft = 1, kRight = 2 };

std::string_view to_string(Approach a);
std::string_view to_string(Turn t);
Approach approach_from_string(std::string_view s);
Turn turn_from_string(std::string_view s);

/// Side opposite to `a`.
Approach opposite(Approach a);

/// Boundary side through which a vehicle entering on `entry` leaves after `turn`.
Approach exit_side(Approach entry, Turn turn);

/// Inverse of exit_side. Throws ParameterError for a U-turn (exit == entry).
Turn turn_between(Approach entry, Approach exit);

struct Cell {
    int row = 0;
    int col = 0;

    auto operator<=>(const Cell&) const = default;
};

struct SpaceTimeSlot {
    Tick tick = 0;
    Cell cell;

    auto operator<=>(const SpaceTimeSlot&) const = default;
};

struct SlotHash {
    std::size_t operator()(const SpaceTimeSlot& s) const noexcept {
        auto h = static_cast<std::uint64_t>(s.tick) * 0x9E3779B97F4A7C15ULL;
        h ^= (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.cell.row)) << 32) |
             static_cast<std::uint32_t>(s.cell.col);
        h *= 0xBF58476D1CE4E5B9ULL;
        return static_cast<std::size_t>(h ^ (h >> 31));
    }
};

/// Square matrix of space slots with `lanes_per_approach` entry lanes on each side.
class IntersectionGrid {
public:
    static constexpr int kDefaultSize = 8;
    static constexpr int kDefaultLanes = 2;

    IntersectionGrid() : IntersectionGrid(kDefaultSize, kDefaultLanes) {}
    IntersectionGrid(int size, int lanes_per_approach);

    [[nodiscard]] int size() const { return size_; }
    [[nodiscard]] int lanes_per_approach() const { return lanes_; }
    [[nodiscard]] bool contains(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < size_ && c.col < size_; }

private:
    int size_;
    int lanes_;
};

struct TrajectoryParams {
    Tick arrival_tick = 0;
    Speed speed{1, 1};
    Approach approach = Approach::kWest;
    int lane = 0;
    Turn turn = Turn::kStraight;

    friend bool operator==(const TrajectoryParams&, const TrajectoryParams&) = default;
};

/// Set of space-time slots, kept sorted by (tick, row, col) and duplicate free.
class Bundle {
public:
    Bundle() = default;
    explicit Bundle(std::vector<SpaceTimeSlot> slots);

    [[nodiscard]] std::span<const SpaceTimeSlot> slots() const { return slots_; }
    [[nodiscard]] std::size_t size() const { return slots_.size(); }
    [[nodiscard]] bool empty() const { return slots_.empty(); }
    [[nodiscard]] auto begin() const { return slots_.begin(); }
    [[nodiscard]] auto end() const { return slots_.end(); }

    [[nodiscard]] Tick min_tick() const;
    [[nodiscard]] Tick max_tick() const;
    [[nodiscard]] bool contains(const SpaceTimeSlot& s) const;
    [[nodiscard]] bool overlaps(const Bundle& other) const;
    [[nodiscard]] bool shares_cell_with(const Bundle& other) const;

    friend bool operator==(const Bundle&, const Bundle&) = default;

private:
    std::vector<SpaceTimeSlot> slots_;
};

/// Rotates `c` by `quarter_turns` x 90 degrees about the grid center. One quarter
/// turn maps the W approach onto the S approach.
Cell rotate(Cell c, int quarter_turns, int n);

/// Ordered cells traversed by a vehicle entering on `approach` in `lane`.
std::vector<Cell> canonical_path(const IntersectionGrid& grid, Approach approach, int lane, Turn turn);

/// Constant-speed rasterization of a crossing into its space-time bundle.
/// `safety_buffer` extends the occupancy of every cell by that many ticks on each side.
Bundle rasterize_bundle(const IntersectionGrid& grid, const TrajectoryParams& params, int safety_buffer = 0);

/// First and last tick (inclusive) of path cell `k` at speed `v`, relative to arrival.
struct CellOccupancy {
    Tick first = 0;
    Tick last = 0;
};
CellOccupancy cell_occupancy(std::int64_t k, Speed v);

/// Number of ticks from the arrival tick to the tick after the last occupied cell.
Tick crossing_ticks(const IntersectionGrid& grid, Speed v);

/// First tick at which the entry cell is released by a vehicle crossing with `params`.
Tick entry_release_tick(const TrajectoryParams& params, int safety_buffer = 0);

void validate(const IntersectionGrid& grid, const TrajectoryParams& params);

}  // namespace aim
