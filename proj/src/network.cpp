#include "aim/network.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace aim {

std::size_t RoadNetwork::add_intersection(std::string name) {
    if (find_node(name)) throw ParameterError("duplicate node name '" + name + "'");
    const auto id = IntersectionId{intersections_.size()};
    nodes_.push_back({std::move(name), NodeKind::kIntersection, id});
    out_.emplace_back();
    intersections_.push_back(nodes_.size() - 1);
    return nodes_.size() - 1;
}

std::size_t RoadNetwork::add_terminal(std::string name) {
    if (find_node(name)) throw ParameterError("duplicate node name '" + name + "'");
    nodes_.push_back({std::move(name), NodeKind::kTerminal, std::nullopt});
    out_.emplace_back();
    return nodes_.size() - 1;
}

LinkId RoadNetwork::connect(std::size_t from, std::size_t to, Tick free_flow_ticks, Approach exit_side,
                            Approach entry_side, int supply) {
    if (from >= nodes_.size() || to >= nodes_.size()) throw ParameterError("link endpoint out of range");
    if (from == to) throw ParameterError("self loop on node '" + nodes_[from].name + "'");
    if (free_flow_ticks < 1) throw ParameterError("link free-flow time must be >= 1 tick");
    if (supply < 1) throw ParameterError("link supply must be >= 1");
    if (find_link(from, to)) throw ParameterError("duplicate link " + nodes_[from].name + "->" + nodes_[to].name);
    const LinkId id{links_.size()};
    links_.push_back({id, from, to, free_flow_ticks, entry_side, exit_side, supply});
    out_[from].push_back(id);
    return id;
}

RoadNetwork RoadNetwork::grid(int rows, int cols, Tick link_ticks, Tick terminal_ticks, int supply) {
    if (rows < 1 || cols < 1) throw ParameterError("grid topology needs at least one row and one column");
    RoadNetwork net;
    auto at = [cols](int r, int c) { return static_cast<std::size_t>(r * cols + c); };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) net.add_intersection("I" + std::to_string(r * cols + c));

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) {
                net.connect(at(r, c), at(r, c + 1), link_ticks, Approach::kEast, Approach::kWest, supply);
                net.connect(at(r, c + 1), at(r, c), link_ticks, Approach::kWest, Approach::kEast, supply);
            }
            if (r + 1 < rows) {
                net.connect(at(r, c), at(r + 1, c), link_ticks, Approach::kSouth, Approach::kNorth, supply);
                net.connect(at(r + 1, c), at(r, c), link_ticks, Approach::kNorth, Approach::kSouth, supply);
            }
        }
    }

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            std::vector<Approach> sides;
            if (r == 0) sides.push_back(Approach::kNorth);
            if (c + 1 == cols) sides.push_back(Approach::kEast);
            if (r + 1 == rows) sides.push_back(Approach::kSouth);
            if (c == 0) sides.push_back(Approach::kWest);
            for (auto side : sides) {
                const auto t = net.add_terminal("I" + std::to_string(r * cols + c) + ":" + std::string(to_string(side)));
                net.connect(t, at(r, c), terminal_ticks, side, side, supply);
                net.connect(at(r, c), t, terminal_ticks, side, side, supply);
            }
        }
    }
    return net;
}

const Link& RoadNetwork::link(LinkId id) const {
    if (id.value >= links_.size()) throw NotFoundError("unknown link " + std::to_string(id.value));
    return links_[id.value];
}

Link& RoadNetwork::link_mut(LinkId id) {
    if (id.value >= links_.size()) throw NotFoundError("unknown link " + std::to_string(id.value));
    return links_[id.value];
}

std::optional<std::size_t> RoadNetwork::find_node(std::string_view name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].name == name) return i;
    return std::nullopt;
}

std::optional<LinkId> RoadNetwork::find_link(std::size_t from, std::size_t to) const {
    if (from >= out_.size()) return std::nullopt;
    for (auto id : out_[from])
        if (links_[id.value].to == to) return id;
    return std::nullopt;
}

std::vector<LinkId> RoadNetwork::incoming(IntersectionId id) const {
    const auto node = intersection_node(id);
    std::vector<LinkId> in;
    for (const auto& l : links_)
        if (l.to == node) in.push_back(l.id);
    return in;
}

std::vector<std::size_t> RoadNetwork::node_sequence(const Route& route) const {
    std::vector<std::size_t> seq;
    if (route.empty()) return seq;
    seq.push_back(link(route.front()).from);
    for (auto id : route) seq.push_back(link(id).to);
    return seq;
}

void RoadNetwork::validate() const {
    for (const auto& l : links_) {
        if (nodes_[l.from].kind == NodeKind::kTerminal && nodes_[l.to].kind == NodeKind::kTerminal)
            throw RoutingError("link " + nodes_[l.from].name + "->" + nodes_[l.to].name + " joins two terminals");
    }
    for (std::size_t t = 0; t < nodes_.size(); ++t) {
        if (nodes_[t].kind != NodeKind::kTerminal || out_[t].empty()) continue;
        std::vector<bool> seen(nodes_.size(), false);
        std::vector<std::size_t> stack{t};
        seen[t] = true;
        bool reaches_sink = false;
        while (!stack.empty() && !reaches_sink) {
            const auto u = stack.back();
            stack.pop_back();
            for (auto id : out_[u]) {
                const auto v = links_[id.value].to;
                if (nodes_[v].kind == NodeKind::kTerminal) {
                    reaches_sink = true;
                    break;
                }
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        if (!reaches_sink) throw RoutingError("terminal " + nodes_[t].name + " reaches no sink");
    }
    // Each intersection may receive at most one link per side.
    for (std::size_t i = 0; i < intersections_.size(); ++i) {
        std::set<Approach> seen_in;
        std::set<Approach> seen_out;
        const auto node = intersections_[i];
        for (const auto& l : links_) {
            if (l.to == node && !seen_in.insert(l.entry_side).second)
                throw RoutingError("two links enter " + nodes_[node].name + " through side " +
                                   std::string(to_string(l.entry_side)));
            if (l.from == node && !seen_out.insert(l.exit_side).second)
                throw RoutingError("two links leave " + nodes_[node].name + " through side " +
                                   std::string(to_string(l.exit_side)));
        }
    }
}

namespace {

struct Label {
    Tick cost = 0;
    std::vector<std::size_t> nodes;
    Route links;
};

bool label_less(const Label& a, const Label& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.nodes < b.nodes;
}

// Dijkstra over (cost, node sequence) labels. Terminals other than the endpoints
// are never traversed.
std::optional<Label> shortest(const RoadNetwork& net, std::size_t origin, std::size_t destination,
                              const LinkWeight& weight, const std::set<std::size_t>& banned_nodes,
                              const std::set<std::uint64_t>& banned_links) {
    const auto n = net.nodes().size();
    std::vector<std::optional<Label>> best(n);
    std::vector<bool> done(n, false);
    best[origin] = Label{0, {origin}, {}};

    for (;;) {
        std::optional<std::size_t> u;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i] || !best[i]) continue;
            if (!u || label_less(*best[i], *best[*u])) u = i;
        }
        if (!u) break;
        done[*u] = true;
        if (*u == destination) return best[*u];
        if (*u != origin && net.node(*u).kind == NodeKind::kTerminal) continue;
        for (auto id : net.out_links(*u)) {
            if (banned_links.contains(id.value)) continue;
            const auto& l = net.link(id);
            if (done[l.to] || banned_nodes.contains(l.to)) continue;
            const Tick w = weight(l);
            if (w < 0) throw ParameterError("negative link weight");
            Label cand = *best[*u];
            cand.cost += w;
            cand.nodes.push_back(l.to);
            cand.links.push_back(id);
            if (!best[l.to] || label_less(cand, *best[l.to])) best[l.to] = std::move(cand);
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<RankedRoute> k_shortest_routes(const RoadNetwork& net, std::size_t origin, std::size_t destination,
                                           std::size_t k, const LinkWeight& weight) {
    if (origin >= net.nodes().size() || destination >= net.nodes().size())
        throw RoutingError("route endpoint out of range");
    if (origin == destination) throw RoutingError("origin and destination coincide");
    std::vector<RankedRoute> out;
    if (k == 0) return out;

    auto first = shortest(net, origin, destination, weight, {}, {});
    if (!first)
        throw RoutingError("no route from " + net.node(origin).name + " to " + net.node(destination).name);

    std::vector<Label> accepted{*first};
    std::vector<Label> candidates;
    while (accepted.size() < k) {
        const Label& prev = accepted.back();
        for (std::size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
            const auto spur = prev.nodes[i];
            const std::vector<std::size_t> root_nodes(prev.nodes.begin(), prev.nodes.begin() + static_cast<long>(i) + 1);
            std::set<std::uint64_t> banned_links;
            for (const auto& a : accepted) {
                if (a.nodes.size() > i + 1 && std::equal(root_nodes.begin(), root_nodes.end(), a.nodes.begin()))
                    banned_links.insert(a.links[i].value);
            }
            std::set<std::size_t> banned_nodes(root_nodes.begin(), root_nodes.end() - 1);
            auto tail = shortest(net, spur, destination, weight, banned_nodes, banned_links);
            if (!tail) continue;

            Label full;
            full.nodes = root_nodes;
            full.nodes.insert(full.nodes.end(), tail->nodes.begin() + 1, tail->nodes.end());
            full.links.assign(prev.links.begin(), prev.links.begin() + static_cast<long>(i));
            full.links.insert(full.links.end(), tail->links.begin(), tail->links.end());
            for (auto id : full.links) full.cost += weight(net.link(id));

            const auto same = [&](const Label& l) { return l.links == full.links; };
            if (std::none_of(accepted.begin(), accepted.end(), same) &&
                std::none_of(candidates.begin(), candidates.end(), same))
                candidates.push_back(std::move(full));
        }
        if (candidates.empty()) break;
        auto it = std::min_element(candidates.begin(), candidates.end(), label_less);
        accepted.push_back(std::move(*it));
        candidates.erase(it);
    }

    for (auto& a : accepted) out.push_back({std::move(a.links), a.cost});
    return out;
}

}  // namespace aim
