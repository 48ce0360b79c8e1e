#include <doctest.h>

#include <set>

#include "aim/geometry.hpp"
#include "aim/types.hpp"
#include "helpers.hpp"

using namespace aim;

namespace {

std::vector<Cell> cells(std::initializer_list<std::pair<int, int>> rc) {
    std::vector<Cell> out;
    for (auto [r, c] : rc) out.push_back({r, c});
    return out;
}

// Clockwise quarter turn as seen on the page: west boundary goes to the south boundary.
Cell quarter(Cell c, int n) { return {n - 1 - c.col, c.row}; }

}  // namespace

TEST_CASE("canonical path examples") {
    CHECK(canonical_path(IntersectionGrid(4, 2), Approach::kWest, 1, Turn::kStraight) ==
          cells({{1, 0}, {1, 1}, {1, 2}, {1, 3}}));
    CHECK(canonical_path(IntersectionGrid(2, 1), Approach::kWest, 0, Turn::kStraight) == cells({{0, 0}, {0, 1}}));
    CHECK(canonical_path(IntersectionGrid(4, 2), Approach::kWest, 1, Turn::kRight) ==
          cells({{1, 0}, {1, 1}, {2, 1}, {3, 1}}));
}

TEST_CASE("turn geometry") {
    CHECK(exit_side(Approach::kWest, Turn::kStraight) == Approach::kEast);
    CHECK(turn_between(Approach::kWest, Approach::kEast) == Turn::kStraight);
    CHECK_THROWS_AS(turn_between(Approach::kNorth, Approach::kNorth), ParameterError);
    for (auto a : {Approach::kNorth, Approach::kEast, Approach::kSouth, Approach::kWest})
        for (auto t : {Turn::kStraight, Turn::kLeft, Turn::kRight}) CHECK(turn_between(a, exit_side(a, t)) == t);
}

TEST_CASE("rasterize examples") {
    TrajectoryParams p;
    p.arrival_tick = 10;
    p.lane = 1;
    CHECK(rasterize_bundle(IntersectionGrid(4, 2), p) ==
          aimtest::slots({{10, {1, 0}}, {11, {1, 1}}, {12, {1, 2}}, {13, {1, 3}}}));

    TrajectoryParams fast;
    fast.speed = {2, 1};
    CHECK(rasterize_bundle(IntersectionGrid(2, 1), fast) == aimtest::slots({{0, {0, 0}}, {0, {0, 1}}}));

    TrajectoryParams slow;
    slow.arrival_tick = 5;
    slow.speed = {1, 2};
    CHECK(rasterize_bundle(IntersectionGrid(2, 1), slow) ==
          aimtest::slots({{5, {0, 0}}, {6, {0, 0}}, {7, {0, 1}}, {8, {0, 1}}}));
}

TEST_CASE("rasterize rejects bad parameters") {
    TrajectoryParams p;
    p.lane = 2;
    CHECK_THROWS_AS(rasterize_bundle(IntersectionGrid(8, 2), p), ParameterError);
    p.lane = 0;
    p.speed = {0, 1};
    CHECK_THROWS_AS(rasterize_bundle(IntersectionGrid(8, 2), p), ParameterError);
    CHECK_THROWS_AS(IntersectionGrid(1, 1), ParameterError);
}

TEST_CASE("safety buffer widens occupancy") {
    TrajectoryParams p;
    p.arrival_tick = 10;
    const IntersectionGrid g(4, 2);
    const auto b = rasterize_bundle(g, p, 1);
    CHECK(b.min_tick() == 9);
    CHECK(b.max_tick() == 14);
    CHECK(b.size() == 12);
    CHECK(entry_release_tick(p, 1) == 12);
}

TEST_CASE("property: canonical paths are rotations of the west path") {
    for (int n : {2, 3, 4, 6, 8})
        for (int lanes = 1; lanes <= n / 2; ++lanes) {
            const IntersectionGrid g(n, lanes);
            for (int lane = 0; lane < lanes; ++lane)
                for (auto t : {Turn::kStraight, Turn::kLeft, Turn::kRight}) {
                    auto expect = canonical_path(g, Approach::kWest, lane, t);
                    for (auto a : {Approach::kSouth, Approach::kEast, Approach::kNorth}) {
                        for (auto& c : expect) c = quarter(c, n);
                        CHECK(canonical_path(g, a, lane, t) == expect);
                    }
                }
        }
}

TEST_CASE("property: paths are continuous and stay inside the grid") {
    for (int n : {2, 4, 5, 8}) {
        const IntersectionGrid g(n, n / 2);
        for (auto a : {Approach::kNorth, Approach::kEast, Approach::kSouth, Approach::kWest})
            for (int lane = 0; lane < n / 2; ++lane)
                for (auto t : {Turn::kStraight, Turn::kLeft, Turn::kRight}) {
                    const auto path = canonical_path(g, a, lane, t);
                    REQUIRE(path.size() == static_cast<std::size_t>(n));
                    std::set<Cell> seen(path.begin(), path.end());
                    CHECK(seen.size() == path.size());
                    for (std::size_t k = 0; k < path.size(); ++k) {
                        CHECK(g.contains(path[k]));
                        if (k == 0) continue;
                        const int dr = std::abs(path[k].row - path[k - 1].row);
                        const int dc = std::abs(path[k].col - path[k - 1].col);
                        CHECK(dr + dc == 1);
                    }
                }
    }
}

TEST_CASE("property: rasterized bundles follow the occupancy formula") {
    aimtest::Gen gen(41);
    for (int i = 0; i < 2000; ++i) {
        const int n = gen.range(2, 10);
        const IntersectionGrid g(n, gen.range(1, n / 2));
        TrajectoryParams p;
        p.arrival_tick = gen.range(0, 1000);
        p.speed = {gen.range(1, 5), gen.range(1, 5)};
        p.approach = static_cast<Approach>(gen.range(0, 3));
        p.lane = gen.range(0, g.lanes_per_approach() - 1);
        p.turn = static_cast<Turn>(gen.range(0, 2));
        const auto path = canonical_path(g, p.approach, p.lane, p.turn);

        // Entry tick of cell k is the first tick whose step reaches position k; a
        // cell is held until the next one is entered (at least its entry tick).
        const double v = static_cast<double>(p.speed.num) / p.speed.den;
        auto entry = [&](std::size_t k) {
            Tick t = 0;
            while (static_cast<double>(t + 1) * v <= static_cast<double>(k) + 1e-9) ++t;
            return t;
        };
        std::set<SpaceTimeSlot> expect;
        for (std::size_t k = 0; k < path.size(); ++k) {
            const Tick first = entry(k);
            const Tick last = std::max(first, entry(k + 1) - 1);
            if (k > 0) CHECK(first >= entry(k - 1));
            for (Tick t = first; t <= last; ++t) expect.insert({p.arrival_tick + t, path[k]});
        }
        const auto b = rasterize_bundle(g, p);
        CHECK(std::set<SpaceTimeSlot>(b.begin(), b.end()) == expect);
        CHECK(b.max_tick() - p.arrival_tick + 1 == crossing_ticks(g, p.speed));
        if (p.speed.num == p.speed.den) {
            CHECK(b.size() == path.size());
            CHECK(b.min_tick() == p.arrival_tick);
            CHECK(b.max_tick() == p.arrival_tick + n - 1);
        }
    }
}

TEST_CASE("bundle overlap and shared cells") {
    const auto a = aimtest::run(0, 0, 3, 0);
    const auto b = aimtest::run(0, 2, 2, 2);
    const auto c = aimtest::run(0, 2, 2, 5);
    CHECK(a.overlaps(b));
    CHECK_FALSE(a.overlaps(c));
    CHECK(a.shares_cell_with(c));
    CHECK_FALSE(a.shares_cell_with(aimtest::run(1, 0, 3, 0)));
    CHECK(aimtest::slots({{3, {0, 0}}, {1, {0, 0}}, {3, {0, 0}}}).size() == 2);
}
