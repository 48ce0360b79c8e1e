#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aim/geometry.hpp"
#include "aim/types.hpp"

namespace aim {

enum class NodeKind : std::uint8_t { kIntersection, kTerminal };

struct Node {
    std::string name;
    NodeKind kind = NodeKind::kTerminal;
    /// Set for intersections; ids are dense from 0 in creation order.
    std::optional<IntersectionId> intersection;
};

struct Link {
    LinkId id;
    std::size_t from = 0;
    std::size_t to = 0;
    Tick free_flow_ticks = 10;
    /// Side of the downstream intersection the link enters through.
    Approach entry_side = Approach::kWest;
    /// Side of the upstream intersection the link leaves through.
    Approach exit_side = Approach::kEast;
    int supply = 1;
};

using Route = std::vector<LinkId>;

/// Directed road graph. Terminals are sources and sinks of traffic; every
/// intersection is controlled by its own manager.
class RoadNetwork {
public:
    std::size_t add_intersection(std::string name);
    std::size_t add_terminal(std::string name);
    /// Adds a directed link. Sides are ignored on terminal ends.
    LinkId connect(std::size_t from, std::size_t to, Tick free_flow_ticks, Approach exit_side, Approach entry_side,
                   int supply = 1);

    /// Rectangular grid of rows x cols intersections named I<id> (row-major ids).
    /// Both directions link neighbours; every outer side gets a terminal named
    /// "I<id>:<side>" with an inbound and an outbound link.
    static RoadNetwork grid(int rows, int cols, Tick link_ticks = 10, Tick terminal_ticks = 10, int supply = 1);

    [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<Link>& links() const { return links_; }
    [[nodiscard]] const Node& node(std::size_t i) const { return nodes_.at(i); }
    [[nodiscard]] const Link& link(LinkId id) const;
    Link& link_mut(LinkId id);
    [[nodiscard]] std::size_t intersection_count() const { return intersections_.size(); }
    [[nodiscard]] std::size_t intersection_node(IntersectionId id) const { return intersections_.at(id.value); }
    [[nodiscard]] std::optional<std::size_t> find_node(std::string_view name) const;
    [[nodiscard]] std::optional<LinkId> find_link(std::size_t from, std::size_t to) const;
    [[nodiscard]] const std::vector<LinkId>& out_links(std::size_t node) const { return out_.at(node); }
    /// Links entering intersection `id`, ascending.
    [[nodiscard]] std::vector<LinkId> incoming(IntersectionId id) const;

    /// Node sequence visited by a route (origin first).
    [[nodiscard]] std::vector<std::size_t> node_sequence(const Route& route) const;

    /// Throws RoutingError unless every terminal with an outbound link can reach
    /// some terminal and all links are well formed.
    void validate() const;

private:
    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::vector<std::vector<LinkId>> out_;
    std::vector<std::size_t> intersections_;
};

/// Non-negative integer weight of traversing a link.
using LinkWeight = std::function<Tick(const Link&)>;

struct RankedRoute {
    Route route;
    Tick cost = 0;
};

/// Up to `k` loopless routes from `origin` to `destination` in increasing cost;
/// equal costs are ordered by lexicographic node sequence. Throws RoutingError
/// when the destination is unreachable.
std::vector<RankedRoute> k_shortest_routes(const RoadNetwork& net, std::size_t origin, std::size_t destination,
                                           std::size_t k, const LinkWeight& weight);

}  // namespace aim
