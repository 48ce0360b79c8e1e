#include "aim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "aim/compliance/audit.hpp"

namespace aim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream constants keep the random draws of separate concerns independent.
constexpr std::uint64_t kDemandStream = 0x64656D616E64ULL;
constexpr std::uint64_t kAttributeStream = 0x617474726962ULL;
constexpr std::uint64_t kDisturbanceStream = 0x646973747262ULL;

struct CellHash {
    std::size_t operator()(const Cell& c) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.row)) << 32) |
                                          static_cast<std::uint32_t>(c.col));
    }
};

}  // namespace

std::string InvariantReport::describe() const {
    std::ostringstream out;
    out << "slot_conflicts=" << slot_conflicts << " fact1_violations=" << fact1_violations
        << " ledger_defects=" << ledger_defects << " budget_violations=" << budget_violations
        << " audit_mismatches=" << audit_mismatches << " conserved=" << (conserved ? "yes" : "no");
    return out.str();
}

Simulation::Simulation(Scenario scenario, SimulationOptions options)
    : scenario_(std::move(scenario)),
      options_(options),
      grid_(IntersectionGrid::kDefaultSize, IntersectionGrid::kDefaultLanes) {
    validate(scenario_);
    net_ = build_network(scenario_);
    grid_ = IntersectionGrid(scenario_.grid_size, scenario_.lanes_per_approach);
    priorities_ = scenario_.effective_priorities();
    request_horizon_ = scenario_.drivers.request_horizon_rounds * scenario_.round_ticks();

    ManagerConfig base;
    base.grid = grid_;
    base.safety_buffer = scenario_.safety_buffer;
    base.schedule = scenario_.schedule;
    base.round.solver = scenario_.exact_solver ? SolverMode::kExact : SolverMode::kGreedy;
    base.round.deadline_ticks = scenario_.schedule.solve_ticks;
    base.round.evaluations_per_tick = scenario_.evaluations_per_tick;
    base.round.oracle_limit = scenario_.oracle_limit;
    base.round.multiplier_affects_payment = scenario_.multiplier_affects_payment;
    base.fcfs_horizon = scenario_.fcfs_horizon;
    base.pricing = scenario_.effective_pricing();
    base.pricing_period = scenario_.effective_pricing_period();
    base.dynamic_pricing = scenario_.policy == Policy::kCtaCa;
    base.windows_enabled = scenario_.windows_active();
    base.windows = scenario_.windows;

    managers_.reserve(net_.intersection_count());
    for (std::size_t i = 0; i < net_.intersection_count(); ++i) {
        const IntersectionId id{i};
        std::vector<IncomingLink> in;
        for (auto l : net_.incoming(id)) in.push_back({l, net_.link(l).entry_side, net_.link(l).supply});
        managers_.emplace_back(id, base, std::move(in));
    }
    const auto lane_count = managers_.size() * 4 * static_cast<std::size_t>(grid_.lanes_per_approach());
    lanes_.resize(lane_count);
    work_.resize(managers_.size());

    demand_rng_.seed(splitmix64(scenario_.seed ^ kDemandStream));
    attribute_rng_.seed(splitmix64(scenario_.seed ^ kAttributeStream));
    disturbance_rng_.seed(splitmix64(scenario_.seed ^ kDisturbanceStream));

    if (scenario_.features.audit) {
        AuditHeader h;
        h.grid_size = scenario_.grid_size;
        h.lanes_per_approach = scenario_.lanes_per_approach;
        h.safety_buffer = scenario_.safety_buffer;
        h.multiplier_affects_payment = scenario_.multiplier_affects_payment;
        h.pricing = scenario_.effective_pricing();
        audit_lines_.push_back(h.to_line());
    }
}

void Simulation::step() {
    if (finished()) throw OrderingError("simulation already reached its duration");
    spawn();
    publish();
    route_new_vehicles();
    refresh_routes();
    collect_requests();
    priority_and_free_pass();
    decide();
    advance();
    close_period();
    flush();
    ++now_;
}

void Simulation::run_to_end() {
    while (!finished()) step();
}

const PriorityClass& Simulation::class_of(const Vehicle& v) const {
    return priorities_.lookup(v.agent.priority_class);
}

// Phase 1.
void Simulation::spawn() {
    auto create = [&](DriverAgent agent, const std::string& origin, const std::string& destination) {
        const auto index = vehicles_.size();
        agent.id = VehicleId{index + 1};
        agent.origin = *net_.find_node(origin);
        agent.destination = *net_.find_node(destination);
        agent.spawn_tick = now_;
        Vehicle v;
        v.trip.vehicle = agent.id;
        v.trip.origin = origin;
        v.trip.destination = destination;
        v.trip.spawn_tick = now_;
        v.trip.priority_class = agent.priority_class;
        v.trip.alpha = agent.alpha;
        v.trip.budget = agent.budget;
        v.trip.equipped = agent.equipped;
        v.agent = std::move(agent);
        vehicles_.push_back(std::move(v));
        fresh_.push_back(index);
    };

    for (const auto& s : scenario_.vehicles) {
        if (s.spawn_tick != now_) continue;
        DriverAgent a;
        a.alpha = s.alpha;
        a.budget = s.budget;
        a.priority_class = s.priority_class;
        a.equipped = s.equipped;
        a.speed = s.speed;
        create(std::move(a), s.origin, s.destination);
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& f : scenario_.flows) {
        if (now_ < f.start_tick || (f.end_tick && now_ >= *f.end_tick) || !(f.rate > 0)) continue;
        std::poisson_distribution<int> arrivals(f.rate);
        const int n = arrivals(demand_rng_);
        for (int i = 0; i < n; ++i) {
            DriverAgent a;
            a.alpha = scenario_.drivers.alpha_median * std::exp(scenario_.drivers.alpha_sigma * normal(attribute_rng_));
            a.budget = scenario_.drivers.budget_factor * a.alpha;
            if (!f.classes.empty()) {
                std::vector<double> weights;
                for (const auto& [name, w] : f.classes) weights.push_back(w);
                std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
                a.priority_class = std::next(f.classes.begin(), static_cast<long>(pick(attribute_rng_)))->first;
            }
            if (f.legacy_share > 0) a.equipped = unit(attribute_rng_) >= f.legacy_share;
            a.speed = f.speed;
            create(std::move(a), f.origin, f.destination);
        }
    }
}

// Phase 2.
void Simulation::publish() {
    std::map<LinkId, PriceEntry> merged;
    for (auto& m : managers_) {
        const auto b = m.publish(now_);
        merged.insert(b.entries().begin(), b.entries().end());
    }
    board_ = PriceBoard(now_, std::move(merged));
}

void Simulation::enter_link(Vehicle& v, std::size_t index, LinkId link, Tick enter_tick) {
    const auto& l = net_.link(link);
    v.ready_tick = enter_tick + l.free_flow_ticks;
    v.bid_pending = false;
    v.rejections_here = 0;
    if (net_.node(l.to).kind == NodeKind::kTerminal) {
        v.stage = Stage::kLeaving;
        return;
    }
    v.stage = Stage::kApproaching;
    v.manager = net_.node(l.to).intersection->value;
    v.approach = l.entry_side;
    place_in_lane(v, index);
    managers_[v.manager].record_arrival(v.agent.equipped);
}

void Simulation::place_in_lane(Vehicle& v, std::size_t index) {
    v.turn = turn_between(v.approach, net_.link(v.route.at(v.leg + 1)).exit_side);
    const int lanes = grid_.lanes_per_approach();
    switch (v.turn) {
        case Turn::kLeft: v.lane = 0; break;
        case Turn::kRight: v.lane = lanes - 1; break;
        case Turn::kStraight: v.lane = static_cast<int>(v.agent.id.value % static_cast<std::uint64_t>(lanes)); break;
    }
    v.lane_key = (v.manager * 4 + static_cast<std::size_t>(v.approach)) * static_cast<std::size_t>(lanes) +
                 static_cast<std::size_t>(v.lane);
    lanes_[v.lane_key].push_back(index);
}

// Phase 3, first half: newly spawned vehicles pick a route and enter its first link.
void Simulation::route_new_vehicles() {
    const auto mode = scenario_.policy == Policy::kFcfs ? RoutingMode::kFreeFlow : RoutingMode::kGeneralizedCost;
    for (auto index : fresh_) {
        auto& v = vehicles_[index];
        v.route = choose_route(v.agent, net_, grid_, board_, mode, scenario_.drivers.route_alternatives);
        v.trip.free_flow_ticks = route_free_flow(net_, grid_, v.route, v.agent.speed);
        v.routed = true;
        v.leg = 0;
        enter_link(v, index, v.route.front(), now_);
    }
    fresh_.clear();
}

// Phase 3: under reserve pricing, a vehicle about to request re-plans the rest
// of its trip from the coming intersection against the current board.
void Simulation::refresh_routes() {
    if (scenario_.policy != Policy::kCtaCa || managers_.size() < 2) return;
    std::vector<std::size_t> waiting;
    for (const auto& lane : lanes_)
        for (auto index : lane) {
            const auto& v = vehicles_[index];
            if (!v.held && !v.bid_pending && v.ready_tick - now_ <= request_horizon_) waiting.push_back(index);
        }
    std::sort(waiting.begin(), waiting.end());
    for (auto index : waiting) {
        auto& v = vehicles_[index];
        const auto& candidates = onward_routes(v);
        if (candidates.empty()) continue;
        const auto& pick = candidates[pick_route(v.agent, net_, board_, candidates, RoutingMode::kGeneralizedCost)].route;
        if (std::equal(pick.begin(), pick.end(), v.route.begin() + static_cast<std::ptrdiff_t>(v.leg) + 1, v.route.end()))
            continue;
        v.route.resize(v.leg + 1);
        v.route.insert(v.route.end(), pick.begin(), pick.end());
        v.trip.free_flow_ticks = route_free_flow(net_, grid_, v.route, v.agent.speed);
        auto& old_lane = lanes_[v.lane_key];
        old_lane.erase(std::find(old_lane.begin(), old_lane.end(), index));
        place_in_lane(v, index);
    }
}

// Loopless routes from the head of the current link that do not begin with a
// U-turn, at most route_alternatives of them.
const std::vector<RankedRoute>& Simulation::onward_routes(const Vehicle& v) {
    const auto& link = net_.link(v.route[v.leg]);
    const auto key = std::make_tuple(link.to, v.agent.destination, static_cast<int>(v.approach), v.agent.speed.num,
                                     v.agent.speed.den);
    auto it = onward_.find(key);
    if (it != onward_.end()) return it->second;
    const Tick crossing = crossing_ticks(grid_, v.agent.speed);
    const LinkWeight weight = [&](const Link& l) {
        return l.free_flow_ticks + (net_.node(l.to).kind == NodeKind::kIntersection ? crossing : 0);
    };
    const std::size_t k = std::max<std::size_t>(scenario_.drivers.route_alternatives, 1);
    std::vector<RankedRoute> kept;
    for (auto& r : k_shortest_routes(net_, link.to, v.agent.destination, k + 1, weight)) {
        if (net_.link(r.route.front()).exit_side == v.approach) continue;
        if (kept.size() < k) kept.push_back(std::move(r));
    }
    return onward_.emplace(key, std::move(kept)).first->second;
}

bool Simulation::unreserved(std::size_t index) const {
    const auto& v = vehicles_[index];
    return v.stage == Stage::kApproaching && !v.held;
}

TrajectoryParams Simulation::request_params(const Vehicle& v, Tick arrival) const {
    return TrajectoryParams{arrival, v.agent.speed, v.approach, v.lane, v.turn};
}

Tick Simulation::earliest_arrival(std::size_t index, Tick floor) const {
    return std::max(vehicles_[index].ready_tick, floor);
}

// First arrival in [earliest, earliest + horizon] whose bundle is still free in the
// manager's ledger. Results are memoized until the ledger next changes.
std::optional<Tick> Simulation::open_arrival(std::size_t index, Tick floor, const Ledger& ledger) {
    const auto& v = vehicles_[index];
    const Tick first = earliest_arrival(index, floor);
    const auto probe = request_params(v, first);
    for (const auto& [params, arrival] : open_cache_)
        if (params == probe) return arrival;
    std::optional<Tick> found;
    for (Tick a = first; a <= first + request_horizon_; ++a) {
        if (ledger.is_free(rasterize_bundle(grid_, request_params(v, a), scenario_.safety_buffer))) {
            found = a;
            break;
        }
    }
    open_cache_.emplace_back(probe, found);
    return found;
}

// Phase 3, second half: every unreserved vehicle within the request horizon of
// the stop line requests. Bidders only bid for an arrival that is still open in
// the ledger; without one they wait for the next round.
void Simulation::collect_requests() {
    const Tick buffer = scenario_.safety_buffer;
    const int lanes = grid_.lanes_per_approach();
    for (std::size_t m = 0; m < managers_.size(); ++m) {
        auto& mgr = managers_[m];
        const auto phase = mgr.update_phase(now_);
        const Tick floor = now_ + 1 + buffer;
        open_cache_.clear();
        for (std::size_t key = m * 4 * static_cast<std::size_t>(lanes); key < (m + 1) * 4 * static_cast<std::size_t>(lanes);
             ++key) {
            for (auto index : lanes_[key]) {
                auto& v = vehicles_[index];
                if (v.held || v.bid_pending || v.ready_tick - now_ > request_horizon_) continue;

                auto& record = mgr.waiting().touch(v.agent.id, now_);
                auto log = [&](const TrajectoryParams& p) {
                    if (options_.record_requests) requests_.push_back({v.agent.id, mgr.id(), now_, p});
                };
                auto queue = [&](std::vector<Request>& list, ReservationKind kind) {
                    const auto p = request_params(v, earliest_arrival(index, floor));
                    log(p);
                    list.push_back({index, p, kind});
                };

                if (!auction_policy()) {
                    queue(work_[m].first_come, ReservationKind::kFcfs);
                    continue;
                }
                const auto& cls = class_of(v);
                if (cls.exempt_from_bidding || cls.absolute_priority) {
                    queue(work_[m].exempt, ReservationKind::kPriorityExempt);
                    continue;
                }
                if (scenario_.windows_active() && (phase == WindowPhase::kLegacy || !v.agent.equipped)) {
                    if (phase == WindowPhase::kLegacy && !v.agent.equipped)
                        queue(work_[m].first_come, ReservationKind::kLegacyWindow);
                    continue;
                }

                const auto link = v.route[v.leg];
                const auto& state = mgr.price_state(link);
                if (!(v.agent.remaining_budget() > 0)) continue;
                // The posted board already says such a bid would be rejected.
                if (!state.open_at(now_) || v.agent.remaining_budget() < state.price()) {
                    mgr.note_blocked(link, v.agent.id);
                    continue;
                }
                const auto arrival = open_arrival(index, mgr.engine().decision_tick_for(now_) + 1 + buffer, mgr.ledger());
                if (!arrival) {
                    mgr.note_blocked(link, v.agent.id);
                    continue;
                }
                const auto p = request_params(v, *arrival);
                BidRequest req{link, p, rasterize_bundle(grid_, p, scenario_.safety_buffer),
                               state.price(), v.rejections_here, now_};
                auto bid = make_bid(v.agent, req, {scenario_.drivers.bid_escalation, scenario_.round_ticks()});
                if (!bid) continue;
                auto stamped = apply_priority(std::move(*bid), priorities_, v.agent.priority_class);
                log(p);
                const auto result = mgr.submit_bid(std::get<Bid>(std::move(stamped)), now_);
                if (result.accepted) {
                    v.bid_pending = true;
                } else {
                    ++v.rejections_here;
                    ++v.trip.rejections;
                    ++record.rejections;
                }
            }
        }
    }
}

void Simulation::assign(Vehicle& v, const Reservation& r, const TrajectoryParams& params, const Bid*) {
    Held h;
    h.id = r.id;
    h.params = params;
    h.start = params.arrival_tick;
    h.last = params.arrival_tick + crossing_ticks(grid_, params.speed) - 1;
    h.kind = r.kind;
    h.payment = r.payment;
    h.grant_tick = now_;
    v.held = h;
    v.bid_pending = false;
    v.agent.spent += r.payment;
    v.trip.total_paid += r.payment;
    revenue_ += r.payment;
    if (v.agent.spent > v.agent.budget * (1 + 1e-12) + 1e-9) ++invariants_.budget_violations;
}

void Simulation::release(std::size_t index, bool guarantee, std::string_view) {
    auto& v = vehicles_[index];
    v.held.reset();
    if (guarantee) managers_[v.manager].waiting().touch(v.agent.id, now_).guaranteed = true;
}

// Phase 4.
void Simulation::priority_and_free_pass() {
    const Tick buffer = scenario_.safety_buffer;
    for (std::size_t m = 0; m < managers_.size(); ++m) {
        auto& mgr = managers_[m];
        for (const auto& req : work_[m].exempt) {
            auto& v = vehicles_[req.vehicle];
            if (v.held) continue;
            if (class_of(v).absolute_priority) {
                auto result = mgr.grant_absolute(v.agent.id, req.params, now_, {});
                for (const auto& c : result.cancelled) release(vehicle_index(c.vehicle), true, "preempted");
                if (result.reservation) {
                    auto p = req.params;
                    p.arrival_tick = result.reservation->bundle.min_tick() + buffer;
                    assign(v, *result.reservation, p, nullptr);
                }
            } else if (auto r = mgr.grant_first_come(v.agent.id, req.params, ReservationKind::kPriorityExempt, now_)) {
                auto p = req.params;
                p.arrival_tick = r->bundle.min_tick() + buffer;
                assign(v, *r, p, nullptr);
            }
        }
        work_[m].exempt.clear();

        if (!scenario_.features.free_pass || !auction_policy()) continue;
        const auto decision = free_pass_check(mgr.waiting(), now_, scenario_.free_pass_threshold);
        std::vector<TrajectoryParams> failed;
        for (auto id : decision.grants) {
            const auto index = vehicle_index(id);
            if (!unreserved(index) || vehicles_[index].manager != m) continue;
            auto& v = vehicles_[index];
            const auto p = request_params(v, earliest_arrival(index, now_ + 1 + buffer));
            if (std::find(failed.begin(), failed.end(), p) != failed.end()) continue;
            if (options_.record_requests) requests_.push_back({id, mgr.id(), now_, p});
            auto r = mgr.grant_first_come(id, p, ReservationKind::kFreePass, now_);
            if (!r) {
                failed.push_back(p);
                continue;
            }
            // The pending round has not been decided yet, so the bid can still go.
            if (v.bid_pending) {
                mgr.withdraw_bid(id, now_);
                v.bid_pending = false;
            }
            const auto* rec = mgr.waiting().find(id);
            mgr.audit().append(now_, AuditKind::kFreePass, id,
                               {{"waited", now_ - rec->first_request_tick}, {"guaranteed", rec->guaranteed}});
            auto granted = p;
            granted.arrival_tick = r->bundle.min_tick() + buffer;
            assign(v, *r, granted, nullptr);
            ++free_passes_;
        }
    }
}

Simulation::ManagerResult Simulation::decide_one(std::size_t m) {
    ManagerResult out;
    auto& mgr = managers_[m];
    if (auction_policy()) out.outcome = mgr.decide(now_);
    // The ledger only gains reservations within a tick, so a request identical to
    // one that already failed fails again.
    std::vector<TrajectoryParams> failed;
    for (const auto& req : work_[m].first_come) {
        if (std::find(failed.begin(), failed.end(), req.params) != failed.end()) continue;
        auto r = mgr.grant_first_come(VehicleId{req.vehicle + 1}, req.params, req.kind, now_, request_horizon_);
        if (!r) failed.push_back(req.params);
        if (r) {
            out.granted_params.push_back(req.params);
            out.granted_params.back().arrival_tick = r->bundle.min_tick() + scenario_.safety_buffer;
            out.grants.emplace_back(req.vehicle, std::move(*r));
        }
    }
    return out;
}

// Phase 5. Managers share no mutable state, so they may run concurrently; results
// are applied in intersection-id order either way.
void Simulation::decide() {
    std::vector<ManagerResult> results(managers_.size());
    if (scenario_.parallel && managers_.size() > 1) {
        std::vector<std::thread> threads;
        threads.reserve(managers_.size());
        for (std::size_t m = 0; m < managers_.size(); ++m)
            threads.emplace_back([this, m, &results] { results[m] = decide_one(m); });
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t m = 0; m < managers_.size(); ++m) results[m] = decide_one(m);
    }

    for (std::size_t m = 0; m < managers_.size(); ++m) {
        auto& mgr = managers_[m];
        if (results[m].outcome) {
            for (const auto& c : results[m].outcome->confirmations)
                assign(vehicles_[vehicle_index(c.bid.bidder)], c.reservation, c.bid.params, &c.bid);
            for (const auto& r : results[m].outcome->rejections) {
                auto& v = vehicles_[vehicle_index(r.bid.bidder)];
                v.bid_pending = false;
                ++v.rejections_here;
                ++v.trip.rejections;
                if (auto* rec = mgr.waiting().find(v.agent.id)) ++rec->rejections;
            }
        }
        for (std::size_t g = 0; g < results[m].grants.size(); ++g) {
            const auto& [index, r] = results[m].grants[g];
            assign(vehicles_[index], r, results[m].granted_params[g], nullptr);
        }
        work_[m].first_come.clear();
    }
}

// Phase 6.
void Simulation::advance() {
    const Tick buffer = scenario_.safety_buffer;

    if (scenario_.disturbance.probability > 0) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<Tick> extra(1, scenario_.disturbance.max_extra_ticks);
        for (std::size_t i = 0; i < vehicles_.size(); ++i) {
            auto& v = vehicles_[i];
            if (v.stage != Stage::kApproaching || !v.held || v.held->kind == ReservationKind::kPriorityExempt) continue;
            if (v.held->start - buffer - 1 != now_) continue;
            if (unit(disturbance_rng_) >= scenario_.disturbance.probability) continue;
            v.ready_tick = std::max(v.ready_tick, v.held->start + extra(disturbance_rng_));
            managers_[v.manager].cancel(v.held->id, now_, "late");
            release(i, false, "late");
        }
    }

    // Crossings that begin now.
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
        auto& v = vehicles_[i];
        if (v.stage != Stage::kApproaching || !v.held || v.held->start != now_) continue;
        if (v.ready_tick > now_) ++invariants_.fact1_violations;
        auto& queue = lanes_[v.lane_key];
        queue.erase(std::find(queue.begin(), queue.end(), i));
        auto& mgr = managers_[v.manager];
        v.stage = Stage::kCrossing;

        CrossingRecord c;
        c.vehicle = v.agent.id;
        c.intersection = mgr.id();
        c.priority_class = v.agent.priority_class;
        c.params = v.held->params;
        const auto* rec = mgr.waiting().find(v.agent.id);
        c.first_request_tick = rec ? rec->first_request_tick : v.held->grant_tick;
        c.grant_tick = v.held->grant_tick;
        c.start_tick = v.held->start;
        c.last_tick = v.held->last;
        c.kind = v.held->kind;
        c.payment = v.held->payment;
        crossings_.push_back(std::move(c));
        mgr.waiting().erase(v.agent.id);
    }

    // Independent occupancy scan: physical positions against the ledgers.
    if (options_.occupancy_scan) {
        std::vector<std::unordered_set<Cell, CellHash>> taken(managers_.size());
        for (const auto& v : vehicles_) {
            if (v.stage != Stage::kCrossing) continue;
            const auto path = canonical_path(grid_, v.approach, v.lane, v.turn);
            const Tick rel = now_ - v.held->start;
            for (std::size_t k = 0; k < path.size(); ++k) {
                const auto occ = cell_occupancy(static_cast<std::int64_t>(k), v.agent.speed);
                if (rel < occ.first || rel > occ.last) continue;
                if (!taken[v.manager].insert(path[k]).second) ++invariants_.slot_conflicts;
                const auto holder = managers_[v.manager].ledger().occupant({now_, path[k]});
                if (!holder || *holder != v.held->id) ++invariants_.fact1_violations;
            }
        }
    }

    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
        auto& v = vehicles_[i];
        if (v.stage == Stage::kCrossing && v.held->last == now_) {
            v.held.reset();
            ++v.leg;
            enter_link(v, i, v.route.at(v.leg), now_ + 1);
        } else if (v.stage == Stage::kLeaving && v.ready_tick == now_) {
            v.stage = Stage::kDone;
            v.trip.completion_tick = now_;
        }
    }
}

// Phase 7.
void Simulation::close_period() {
    if (!auction_policy()) return;
    for (auto& m : managers_) {
        m.end_period(now_);
        for (const auto& s : m.prices()) {
            prices_.push_back({now_, m.id(), s.link(), s.price(), s.open_at(now_ + 1)});
            max_price_ = std::max(max_price_, s.price());
        }
    }
}

// Phases 8 and 9.
void Simulation::flush() {
    for (auto& m : managers_) {
        for (const auto& r : m.audit().take_unflushed()) {
            if (r.kind == AuditKind::kConfirm || r.kind == AuditKind::kCancel) ++audit_mutations_;
            if (scenario_.features.audit) audit_lines_.push_back(to_line(r));
        }
    }
    for (auto& m : managers_) {
        m.prune(now_);
        m.audit().purge(now_, scenario_.audit_retention_ticks);
    }
    if (now_ % 100 == 99)
        for (const auto& m : managers_) invariants_.ledger_defects += m.ledger().audit_consistency();
}

RunArtifacts Simulation::finish() {
    RunArtifacts out;
    out.scenario = scenario_;

    std::size_t mutations = 0;
    for (const auto& m : managers_) {
        mutations += m.commits() + m.cancellations();
        invariants_.ledger_defects += m.ledger().audit_consistency();
    }
    invariants_.audit_mismatches = mutations > audit_mutations_ ? mutations - audit_mutations_
                                                                : audit_mutations_ - mutations;

    std::size_t done = 0;
    std::size_t moving = 0;
    for (const auto& v : vehicles_) {
        out.trips.push_back(v.trip);
        if (v.stage == Stage::kDone) ++done;
        else ++moving;
    }
    invariants_.conserved = done + moving == vehicles_.size();

    auto& s = out.summary;
    s.scenario = scenario_.name;
    s.policy = scenario_.policy;
    s.seed = scenario_.seed;
    s.duration_ticks = scenario_.duration_ticks;
    s.spawned = vehicles_.size();
    s.completed = done;
    s.en_route = moving;
    s.mean_delay = mean_delay(out.trips);
    double travel = 0;
    for (const auto& t : out.trips)
        if (t.complete()) travel += static_cast<double>(t.travel_ticks());
    s.mean_travel_time = done ? travel / static_cast<double>(done) : 0.0;

    const Tick window = scenario_.moving_average_window;
    double steady = 0;
    std::size_t samples = 0;
    for (Tick t = window - 1; t < scenario_.duration_ticks; t += window) {
        const auto avg = moving_avg_travel_time(out.trips, window, t);
        out.travel_time_series.emplace_back(t, avg);
        if (avg && t >= scenario_.duration_ticks / 2) {
            steady += *avg;
            ++samples;
        }
    }
    if (samples) s.steady_travel_time = steady / static_cast<double>(samples);
    try {
        s.spend_delay_spearman = spend_delay_correlation(out.trips);
    } catch (const InsufficientDataError&) {
    }
    s.revenue = revenue_;
    s.free_passes = free_passes_;
    for (const auto& m : managers_) {
        s.closures += m.closures();
        s.cancellations += m.cancellations();
        for (const auto& [id, rec] : m.waiting().records()) {
            if (vehicles_[vehicle_index(id)].held) continue;
            const Tick waited = now_ - rec.first_request_tick;
            s.max_wait_ticks = std::max(s.max_wait_ticks, waited);
            if (waited >= scenario_.free_pass_threshold) ++s.unserved_long_waits;
        }
    }
    s.max_price = max_price_;

    out.crossings = std::move(crossings_);
    out.requests = std::move(requests_);
    out.prices = std::move(prices_);
    out.audit_lines = std::move(audit_lines_);
    out.invariants = invariants_;
    return out;
}

RunArtifacts run(const Scenario& scenario, SimulationOptions options) {
    Simulation sim(scenario, options);
    sim.run_to_end();
    return sim.finish();
}

PairingKey pairing_key(const Scenario& scenario) {
    auto s = scenario;
    s.policy = Policy::kFcfs;
    s.parallel = false;
    s.features.audit = true;
    return {scenario.seed, config_digest(s)};
}

}  // namespace aim
