#include "aim/manager.hpp"

#include <algorithm>
#include <string>

#include "aim/digest.hpp"

namespace aim {

using nlohmann::ordered_json;

namespace {

ordered_json optional_tick(const std::optional<Tick>& t) { return t ? ordered_json(*t) : ordered_json(nullptr); }

}  // namespace

IntersectionManager::IntersectionManager(IntersectionId id, ManagerConfig config, std::vector<IncomingLink> links)
    : id_(id),
      config_(std::move(config)),
      engine_(config_.schedule),
      windows_(config_.windows),
      audit_(id) {
    if (config_.pricing_period < 1) throw ParameterError("pricing period must be >= 1 tick");
    if (config_.fcfs_horizon < 0) throw ParameterError("FCFS horizon must be non-negative");
    if (config_.safety_buffer < 0) throw ParameterError("safety buffer must be non-negative");
    std::sort(links.begin(), links.end(), [](const auto& a, const auto& b) { return a.link < b.link; });
    for (const auto& l : links) {
        if (link_index_.contains(l.link)) throw ParameterError("incoming link listed twice");
        link_index_[l.link] = prices_.size();
        prices_.emplace_back(l.link, l.supply, config_.pricing);
        period_demand_[l.link] = 0;
    }
}

const ReservePriceState& IntersectionManager::price_state(LinkId link) const {
    auto it = link_index_.find(link);
    if (it == link_index_.end())
        throw NotFoundError("link " + std::to_string(link.value) + " does not enter intersection " +
                            std::to_string(id_.value));
    return prices_[it->second];
}

PriceBoard IntersectionManager::publish(Tick now) {
    for (auto& s : prices_) s.is_open(now);
    return publish_prices(prices_, now);
}

WindowPhase IntersectionManager::update_phase(Tick now) {
    if (!config_.windows_enabled) return WindowPhase::kAuction;
    const auto next = windows_.phase(now);
    if (!phase_known_ || next != phase_) {
        const auto& s = windows_.schedule();
        audit_.append(now, AuditKind::kWindowSwitch, std::nullopt,
                      {{"phase", to_string(next)}, {"auction_window", s.auction_window},
                       {"legacy_window", s.legacy_window}});
    }
    phase_ = next;
    phase_known_ = true;
    return phase_;
}

IntakeResult IntersectionManager::submit_bid(Bid bid, Tick now) {
    auto idx = link_index_.find(bid.link);
    if (idx == link_index_.end())
        throw NotFoundError("bid names link " + std::to_string(bid.link.value) + " which does not enter intersection " +
                            std::to_string(id_.value));
    ++period_demand_[bid.link];
    period_bidders_[bid.link].insert(bid.bidder);
    audit_.append(now, AuditKind::kBid, bid.bidder,
                  {{"link", bid.link.value},
                   {"value", bid.value},
                   {"multiplier", bid.priority_multiplier},
                   {"params", params_to_json(bid.params)},
                   {"digest", to_hex(bundle_digest(bid.bundle))}});

    const auto& state = prices_[idx->second];
    IntakeResult result;
    if (!state.open_at(now)) {
        result.reason = RejectReason::kClosed;
    } else if (bid.value < state.price()) {
        result.reason = RejectReason::kBelowReserve;
    } else {
        bid.submitted_tick = now;
        engine_.submit(std::move(bid));
        result.accepted = true;
        return result;
    }
    audit_.append(now, AuditKind::kReject, bid.bidder, {{"reason", to_string(result.reason)}, {"value", bid.value}});
    return result;
}

std::optional<Bid> IntersectionManager::withdraw_bid(VehicleId vehicle, Tick now) {
    auto bid = engine_.withdraw(vehicle);
    if (bid)
        audit_.append(now, AuditKind::kReject, vehicle,
                      {{"reason", to_string(RejectReason::kWithdrawn)}, {"value", bid->value}});
    return bid;
}

bool IntersectionManager::admissible(const Bundle& bundle, const TrajectoryParams&, Tick now) const {
    for (const auto& h : holds_) {
        if (h.start <= now) continue;
        if (bundle.min_tick() < h.start && bundle.shares_cell_with(h.bundle)) return false;
    }
    return true;
}

std::optional<RoundOutcome> IntersectionManager::decide(Tick now) {
    auto round = engine_.close_due(now);
    if (!round) return std::nullopt;
    if (config_.windows_enabled && phase_ == WindowPhase::kLegacy) {
        engine_.defer(std::move(*round));
        return RoundOutcome{};
    }

    std::vector<Rejection> held;
    std::vector<Bid> eligible;
    for (auto& b : round->bid_set) {
        if (admissible(b.bundle, b.params, now)) eligible.push_back(std::move(b));
        else held.push_back({std::move(b), RejectReason::kPriorityHold});
    }
    round->bid_set = std::move(eligible);

    RoundOptions options = config_.round;
    options.deadline_ticks = config_.schedule.solve_ticks;
    auto outcome = run_round(ledger_, *round, options, now);
    for (auto& r : held) outcome.rejections.push_back(std::move(r));

    for (const auto& c : outcome.confirmations) {
        ++commits_;
        audit_confirm(c.reservation, c.bid.params, &c.bid, now);
    }
    for (const auto& r : outcome.rejections)
        audit_.append(now, AuditKind::kReject, r.bid.bidder, {{"reason", to_string(r.reason)}, {"value", r.bid.value}});
    return outcome;
}

void IntersectionManager::audit_confirm(const Reservation& r, const TrajectoryParams& params, const Bid* bid,
                                        Tick now) {
    ordered_json p;
    p["reservation"] = r.id.value;
    p["kind"] = to_string(r.kind);
    p["payment"] = r.payment;
    p["bid_value"] = bid ? ordered_json(bid->value) : ordered_json(nullptr);
    p["multiplier"] = bid ? bid->priority_multiplier : 1.0;
    p["params"] = params_to_json(params);
    p["digest"] = to_hex(bundle_digest(r.bundle));
    audit_.append(now, AuditKind::kConfirm, r.vehicle, std::move(p));
}

Reservation IntersectionManager::commit(VehicleId vehicle, Bundle bundle, Money payment, ReservationKind kind,
                                        Tick now, const TrajectoryParams& params, const Bid* bid) {
    auto r = ledger_.commit(vehicle, std::move(bundle), payment, kind, now);
    ++commits_;
    audit_confirm(r, params, bid, now);
    return r;
}

std::optional<Reservation> IntersectionManager::grant_first_come(VehicleId vehicle, const TrajectoryParams& request,
                                                                 ReservationKind kind, Tick now,
                                                                 std::optional<Tick> horizon) {
    const auto ok = [this, now](const Bundle& b, const TrajectoryParams& p) { return admissible(b, p, now); };
    const auto arrival = earliest_free_arrival(ledger_, config_.grid, request,
                                               std::min(horizon.value_or(config_.fcfs_horizon), config_.fcfs_horizon),
                                               config_.safety_buffer, ok);
    if (!arrival) return std::nullopt;
    TrajectoryParams p = request;
    p.arrival_tick = *arrival;
    return commit(vehicle, rasterize_bundle(config_.grid, p, config_.safety_buffer), 0.0, kind, now, p, nullptr);
}

PreemptionResult IntersectionManager::grant_absolute(VehicleId vehicle, const TrajectoryParams& request, Tick now,
                                                     const std::vector<VehicleId>& keep) {
    PreemptionResult out;
    const auto movable = [&](const Reservation& r) {
        return r.bundle.min_tick() > now && r.kind != ReservationKind::kPriorityExempt &&
               std::find(keep.begin(), keep.end(), r.vehicle) == keep.end();
    };
    TrajectoryParams p = request;
    for (Tick offset = 0; offset <= config_.fcfs_horizon; ++offset) {
        p.arrival_tick = request.arrival_tick + offset;
        auto bundle = rasterize_bundle(config_.grid, p, config_.safety_buffer);
        const auto clash = ledger_.conflicts(bundle);
        if (!std::all_of(clash.begin(), clash.end(), [&](ReservationId id) { return movable(*ledger_.find(id)); }))
            continue;
        std::vector<ReservationId> victims = clash;
        for (const auto& [id, r] : ledger_.reservations()) {
            if (r.bundle.min_tick() < bundle.min_tick() && movable(r) && r.bundle.shares_cell_with(bundle) &&
                std::find(victims.begin(), victims.end(), id) == victims.end())
                victims.push_back(id);
        }
        std::sort(victims.begin(), victims.end());
        for (auto id : victims) {
            out.cancelled.push_back(*ledger_.find(id));
            cancel(id, now, "preempted");
        }
        holds_.push_back({vehicle, bundle, bundle.min_tick()});
        out.reservation = commit(vehicle, std::move(bundle), 0.0, ReservationKind::kPriorityExempt, now, p, nullptr);
        return out;
    }
    return out;
}

void IntersectionManager::cancel(ReservationId id, Tick now, std::string_view reason) {
    const auto* r = ledger_.find(id);
    if (!r) throw NotFoundError("unknown reservation " + std::to_string(id.value));
    const auto vehicle = r->vehicle;
    const auto digest = to_hex(bundle_digest(r->bundle));
    ledger_.cancel(id, now);
    ++cancellations_;
    audit_.append(now, AuditKind::kCancel, vehicle,
                  {{"reservation", id.value}, {"reason", std::string(reason)}, {"digest", digest}});
}

void IntersectionManager::note_blocked(LinkId link, VehicleId vehicle) {
    if (!link_index_.contains(link))
        throw NotFoundError("link " + std::to_string(link.value) + " does not enter intersection " +
                            std::to_string(id_.value));
    period_blocked_[link].insert(vehicle);
}

void IntersectionManager::end_period(Tick now) {
    if ((now + 1) % config_.pricing_period != 0) return;
    for (auto& s : prices_) {
        auto& demand = period_demand_[s.link()];
        auto& bidders = period_bidders_[s.link()];
        auto& blocked = period_blocked_[s.link()];
        for (const auto& v : blocked)
            if (!bidders.contains(v)) ++demand;
        s.record_demand(demand);
        demand = 0;
        bidders.clear();
        blocked.clear();
        if (!config_.dynamic_pricing) continue;
        const auto u = s.update_price(now);
        audit_.append(now, AuditKind::kPriceUpdate, std::nullopt,
                      {{"link", s.link().value},
                       {"old_price", u.old_price},
                       {"supply", u.supply},
                       {"demand", u.demand},
                       {"excess", u.excess},
                       {"raw", u.raw},
                       {"new_price", u.new_price},
                       {"closed_until", optional_tick(u.closed_until)}});
        if (u.closure_triggered) {
            ++closures_;
            audit_.append(now, AuditKind::kClosure, std::nullopt,
                          {{"link", s.link().value}, {"closed_until", optional_tick(u.closed_until)}});
        }
    }
}

void IntersectionManager::prune(Tick now) {
    ledger_.prune(now);
    std::erase_if(holds_, [now](const Hold& h) { return h.start <= now; });
}

}  // namespace aim
