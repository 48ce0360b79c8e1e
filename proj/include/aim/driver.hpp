#pragma once

#include <optional>
#include <span>
#include <string>

#include "aim/auction.hpp"
#include "aim/network.hpp"
#include "aim/pricing.hpp"

namespace aim {

struct DriverAgent {
    VehicleId id;
    std::size_t origin = 0;
    std::size_t destination = 0;
    /// Value of time, money per tick.
    double alpha = 1.0;
    Money budget = 0;
    Money spent = 0;
    std::string priority_class = "standard";
    bool equipped = true;
    Speed speed{1, 1};
    Tick spawn_tick = 0;

    [[nodiscard]] Money remaining_budget() const { return std::max(0.0, budget - spent); }
};

enum class RoutingMode : std::uint8_t {
    /// Shortest free-flow time; prices ignored.
    kFreeFlow,
    /// alpha x free-flow time + posted entry prices, within budget.
    kGeneralizedCost,
};

/// Free-flow time of a route: link times plus the crossing time of every
/// intersection entered.
Tick route_free_flow(const RoadNetwork& net, const IntersectionGrid& grid, const Route& route, Speed speed);

/// Sum of posted entry prices of the intersections a route enters; +infinity if
/// any of them is closed.
Money route_price(const RoadNetwork& net, const PriceBoard& board, const Route& route);

/// Chooses among the k shortest loopless routes. Under kGeneralizedCost the
/// cheapest affordable route wins; when none is affordable the one with the least
/// monetary cost does. Ties go to the shorter route, then the lexicographically
/// smaller node sequence.
Route choose_route(const DriverAgent& agent, const RoadNetwork& net, const IntersectionGrid& grid,
                   const PriceBoard& board, RoutingMode mode, std::size_t k = 4);

/// Selection rule of choose_route over precomputed candidates, which must be
/// ordered by free-flow time then node sequence. Returns an index into `ranked`.
std::size_t pick_route(const DriverAgent& agent, const RoadNetwork& net, const PriceBoard& board,
                       std::span<const RankedRoute> ranked, RoutingMode mode);

struct BidPolicy {
    /// Multiplicative raise after every rejection at the same intersection.
    double escalation = 1.2;
    /// Length of one auction round; the base bid is the value of that much time.
    Tick round_ticks = 2;
};

struct BidRequest {
    LinkId link;
    TrajectoryParams params;
    Bundle bundle;
    Money reserve = 0;
    int rejections = 0;
    Tick now = 0;
};

/// Bid of `agent` for one crossing: the larger of the reserve and the value of
/// one round of delay, raised by `escalation` per rejection and capped by the
/// remaining budget. A bid capped below the reserve is still made (and will be
/// rejected). Returns nothing once the budget is spent.
std::optional<Bid> make_bid(const DriverAgent& agent, const BidRequest& request, const BidPolicy& policy = {});

}  // namespace aim
