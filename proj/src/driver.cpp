#include "aim/driver.hpp"

#include <cmath>
#include <limits>

namespace aim {

Tick route_free_flow(const RoadNetwork& net, const IntersectionGrid& grid, const Route& route, Speed speed) {
    const Tick crossing = crossing_ticks(grid, speed);
    Tick total = 0;
    for (auto id : route) {
        const auto& l = net.link(id);
        total += l.free_flow_ticks;
        if (net.node(l.to).kind == NodeKind::kIntersection) total += crossing;
    }
    return total;
}

Money route_price(const RoadNetwork& net, const PriceBoard& board, const Route& route) {
    Money total = 0;
    for (auto id : route)
        if (net.node(net.link(id).to).kind == NodeKind::kIntersection) total += board.entry_cost(id);
    return total;
}

Route choose_route(const DriverAgent& agent, const RoadNetwork& net, const IntersectionGrid& grid,
                   const PriceBoard& board, RoutingMode mode, std::size_t k) {
    const Tick crossing = crossing_ticks(grid, agent.speed);
    const LinkWeight weight = [&](const Link& l) {
        return l.free_flow_ticks + (net.node(l.to).kind == NodeKind::kIntersection ? crossing : 0);
    };
    auto ranked = k_shortest_routes(net, agent.origin, agent.destination, std::max<std::size_t>(k, 1), weight);
    return ranked[pick_route(agent, net, board, ranked, mode)].route;
}

std::size_t pick_route(const DriverAgent& agent, const RoadNetwork& net, const PriceBoard& board,
                       std::span<const RankedRoute> ranked, RoutingMode mode) {
    if (ranked.empty()) throw RoutingError("no candidate route");
    if (mode == RoutingMode::kFreeFlow) return 0;

    // `ranked` is ordered by free-flow time then node sequence, so keeping the
    // first strict minimum applies the tie rule.
    const Money budget = agent.remaining_budget();
    std::optional<std::size_t> best_affordable;
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t cheapest = 0;
    Money cheapest_price = std::numeric_limits<Money>::infinity();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const Money price = route_price(net, board, ranked[i].route);
        if (price < cheapest_price) {
            cheapest_price = price;
            cheapest = i;
        }
        if (price > budget) continue;
        const double cost = agent.alpha * static_cast<double>(ranked[i].cost) + price;
        if (cost < best_cost) {
            best_cost = cost;
            best_affordable = i;
        }
    }
    return best_affordable.value_or(cheapest);
}

std::optional<Bid> make_bid(const DriverAgent& agent, const BidRequest& request, const BidPolicy& policy) {
    const Money remaining = agent.remaining_budget();
    if (!(remaining > 0)) return std::nullopt;
    const Money base = std::max(request.reserve, agent.alpha * static_cast<double>(policy.round_ticks));
    const Money wanted = base * std::pow(policy.escalation, request.rejections);
    const Money value = std::min(remaining, wanted);
    if (!std::isfinite(value)) return std::nullopt;

    Bid bid;
    bid.bidder = agent.id;
    bid.params = request.params;
    bid.bundle = request.bundle;
    bid.value = value;
    bid.submitted_tick = request.now;
    bid.link = request.link;
    return bid;
}

}  // namespace aim
