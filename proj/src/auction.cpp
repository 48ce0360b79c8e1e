#include "aim/auction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

namespace aim {

namespace {

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

// Comparison key for candidate winner sets with equal total value.
struct TieKey {
    std::size_t slots = 0;
    Tick min_submitted = 0;
    std::vector<std::uint64_t> bidders;
};

TieKey tie_key(std::span<const Bid> bids, const std::vector<std::size_t>& chosen) {
    TieKey k;
    k.min_submitted = std::numeric_limits<Tick>::max();
    for (auto i : chosen) {
        k.slots += bids[i].bundle.size();
        k.min_submitted = std::min(k.min_submitted, bids[i].submitted_tick);
        k.bidders.push_back(bids[i].bidder.value);
    }
    std::sort(k.bidders.begin(), k.bidders.end());
    return k;
}

// True iff (value_a, set a) is preferred over (value_b, set b).
bool preferred(std::span<const Bid> bids, double value_a, const std::vector<std::size_t>& a, double value_b,
               const std::vector<std::size_t>& b) {
    if (!nearly_equal(value_a, value_b)) return value_a > value_b;
    const auto ka = tie_key(bids, a);
    const auto kb = tie_key(bids, b);
    if (ka.slots != kb.slots) return ka.slots < kb.slots;
    if (ka.min_submitted != kb.min_submitted) return ka.min_submitted < kb.min_submitted;
    return ka.bidders < kb.bidders;
}

class ExactSearch {
public:
    ExactSearch(std::span<const Bid> bids, std::vector<std::size_t> order) : bids_(bids), order_(std::move(order)) {
        const auto m = order_.size();
        conflict_.assign(m, std::vector<bool>(m, false));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j)
                if (bids_[order_[i]].bundle.overlaps(bids_[order_[j]].bundle)) conflict_[i][j] = conflict_[j][i] = true;
        suffix_.assign(m + 1, 0.0);
        for (std::size_t i = m; i-- > 0;) suffix_[i] = suffix_[i + 1] + bids_[order_[i]].effective_value();
    }

    WinnerSet run() {
        recurse(0, 0.0);
        WinnerSet ws;
        ws.winners = best_;
        std::sort(ws.winners.begin(), ws.winners.end());
        ws.total_value = best_value_;
        ws.exact = true;
        return ws;
    }

private:
    void recurse(std::size_t pos, double value) {
        if (pos == order_.size()) {
            if (!have_best_ || preferred(bids_, value, current_, best_value_, best_)) {
                best_ = current_;
                best_value_ = value;
                have_best_ = true;
            }
            return;
        }
        // Prune only strictly dominated branches so equal-value alternatives reach the tie-break.
        if (have_best_ && value + suffix_[pos] < best_value_ && !nearly_equal(value + suffix_[pos], best_value_)) return;

        bool compatible = true;
        for (auto c : chosen_pos_) {
            if (conflict_[pos][c]) {
                compatible = false;
                break;
            }
        }
        if (compatible) {
            current_.push_back(order_[pos]);
            chosen_pos_.push_back(pos);
            recurse(pos + 1, value + bids_[order_[pos]].effective_value());
            chosen_pos_.pop_back();
            current_.pop_back();
        }
        recurse(pos + 1, value);
    }

    std::span<const Bid> bids_;
    std::vector<std::size_t> order_;
    std::vector<std::vector<bool>> conflict_;
    std::vector<double> suffix_;
    std::vector<std::size_t> current_;
    std::vector<std::size_t> chosen_pos_;
    std::vector<std::size_t> best_;
    double best_value_ = 0;
    bool have_best_ = false;
};

}  // namespace

WinnerSet solve_wdp_exact(std::span<const Bid> bids, const Ledger& ledger, std::size_t limit) {
    if (bids.size() > limit)
        throw SizeLimitError("exact solver limited to " + std::to_string(limit) + " bids, got " +
                             std::to_string(bids.size()));
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < bids.size(); ++i)
        if (ledger.is_free(bids[i].bundle)) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return bids[a].effective_value() > bids[b].effective_value(); });
    return ExactSearch(bids, std::move(order)).run();
}

WinnerSet solve_wdp_greedy(std::span<const Bid> bids, const Ledger& ledger, Tick deadline_ticks,
                           std::size_t evaluations_per_tick) {
    std::vector<std::size_t> order(bids.size());
    std::iota(order.begin(), order.end(), 0);
    auto density = [&](std::size_t i) {
        return bids[i].effective_value() / static_cast<double>(std::max<std::size_t>(1, bids[i].bundle.size()));
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = density(a);
        const double db = density(b);
        if (da != db) return da > db;
        if (bids[a].effective_value() != bids[b].effective_value())
            return bids[a].effective_value() > bids[b].effective_value();
        if (bids[a].submitted_tick != bids[b].submitted_tick) return bids[a].submitted_tick < bids[b].submitted_tick;
        if (bids[a].bidder != bids[b].bidder) return bids[a].bidder < bids[b].bidder;
        return a < b;
    });

    const std::size_t budget =
        deadline_ticks <= 0 ? 0 : static_cast<std::size_t>(deadline_ticks) * evaluations_per_tick;

    WinnerSet ws;
    std::unordered_set<SpaceTimeSlot, SlotHash> taken;
    std::size_t evaluations = 0;
    for (auto i : order) {
        if (evaluations >= budget) break;
        ++evaluations;
        const auto& bundle = bids[i].bundle;
        if (!ledger.is_free(bundle)) continue;
        if (std::any_of(bundle.begin(), bundle.end(), [&](const SpaceTimeSlot& s) { return taken.contains(s); }))
            continue;
        taken.insert(bundle.begin(), bundle.end());
        ws.winners.push_back(i);
        ws.total_value += bids[i].effective_value();
    }
    std::sort(ws.winners.begin(), ws.winners.end());
    return ws;
}

bool is_feasible(std::span<const Bid> bids, const WinnerSet& ws, const Ledger& ledger) {
    std::unordered_set<SpaceTimeSlot, SlotHash> taken;
    for (auto i : ws.winners) {
        if (i >= bids.size()) return false;
        if (!ledger.is_free(bids[i].bundle)) return false;
        for (const auto& s : bids[i].bundle)
            if (!taken.insert(s).second) return false;
    }
    return true;
}

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::kOutbid: return "outbid";
        case RejectReason::kBelowReserve: return "below_reserve";
        case RejectReason::kClosed: return "closed";
        case RejectReason::kPriorityHold: return "priority_hold";
        case RejectReason::kWithdrawn: return "withdrawn";
        case RejectReason::kBudget: return "budget";
    }
    return "?";
}

RejectReason reject_reason_from_string(std::string_view s) {
    for (auto r : {RejectReason::kOutbid, RejectReason::kBelowReserve, RejectReason::kClosed,
                   RejectReason::kPriorityHold, RejectReason::kWithdrawn, RejectReason::kBudget}) {
        if (to_string(r) == s) return r;
    }
    throw ParameterError("unknown reject reason '" + std::string(s) + "'");
}

AuctionEngine::AuctionEngine(AuctionSchedule schedule) : schedule_(schedule) {
    if (schedule_.collect_ticks < 1 || schedule_.solve_ticks < 1)
        throw ParameterError("auction collect and solve durations must be >= 1 tick");
}

bool AuctionEngine::collecting(Tick t) const { return t % schedule_.period() < schedule_.collect_ticks; }

Tick AuctionEngine::decision_tick_for(Tick submit_tick) const {
    const Tick p = schedule_.period();
    const Tick round = submit_tick / p + (collecting(submit_tick) ? 0 : 1);
    return round * p + p - 1;
}

AuctionRound& AuctionEngine::round_at(std::uint64_t id) {
    auto [it, inserted] = rounds_.try_emplace(id);
    if (inserted) {
        const Tick p = schedule_.period();
        it->second.round_id = id;
        it->second.collect_from = static_cast<Tick>(id) * p;
        it->second.collect_to = static_cast<Tick>(id) * p + schedule_.collect_ticks - 1;
    }
    return it->second;
}

void AuctionEngine::submit(Bid bid) {
    const auto id = static_cast<std::uint64_t>(bid.submitted_tick / schedule_.period());
    auto& round = round_at(id);
    if (collecting(bid.submitted_tick)) round.bid_set.push_back(std::move(bid));
    else round.late_bids.push_back(std::move(bid));
}

std::optional<AuctionRound> AuctionEngine::close_due(Tick now) {
    const Tick p = schedule_.period();
    if (now % p != p - 1) return std::nullopt;
    const auto id = static_cast<std::uint64_t>(now / p);
    auto it = rounds_.find(id);
    if (it == rounds_.end()) return AuctionRound{id, static_cast<Tick>(id) * p,
                                                 static_cast<Tick>(id) * p + schedule_.collect_ticks - 1, {}, {}};
    AuctionRound round = std::move(it->second);
    rounds_.erase(it);
    if (!round.late_bids.empty()) {
        auto& next = round_at(id + 1);
        next.bid_set.insert(next.bid_set.begin(), round.late_bids.begin(), round.late_bids.end());
    }
    return round;
}

void AuctionEngine::defer(AuctionRound round) {
    auto& next = round_at(round.round_id + 1);
    next.bid_set.insert(next.bid_set.begin(), std::make_move_iterator(round.bid_set.begin()),
                        std::make_move_iterator(round.bid_set.end()));
}

std::optional<Bid> AuctionEngine::withdraw(VehicleId bidder) {
    for (auto& [id, round] : rounds_) {
        for (auto* list : {&round.bid_set, &round.late_bids}) {
            auto it = std::find_if(list->begin(), list->end(), [&](const Bid& b) { return b.bidder == bidder; });
            if (it != list->end()) {
                Bid out = std::move(*it);
                list->erase(it);
                return out;
            }
        }
    }
    return std::nullopt;
}

bool AuctionEngine::has_pending(VehicleId bidder) const {
    for (const auto& [id, round] : rounds_) {
        for (const auto* list : {&round.bid_set, &round.late_bids})
            if (std::any_of(list->begin(), list->end(), [&](const Bid& b) { return b.bidder == bidder; })) return true;
    }
    return false;
}

std::size_t AuctionEngine::pending_count() const {
    std::size_t n = 0;
    for (const auto& [id, round] : rounds_) n += round.bid_set.size() + round.late_bids.size();
    return n;
}

Money auction_payment(const Bid& bid, bool multiplier_affects_payment) {
    if (!multiplier_affects_payment) return bid.value;
    return std::max(0.0, bid.value / bid.priority_multiplier);
}

RoundOutcome run_round(Ledger& ledger, const AuctionRound& round, const RoundOptions& options, Tick now) {
    RoundOutcome out;
    const auto& bids = round.bid_set;
    if (bids.empty()) return out;

    out.winners = options.solver == SolverMode::kExact
                      ? solve_wdp_exact(bids, ledger, options.oracle_limit)
                      : solve_wdp_greedy(bids, ledger, options.deadline_ticks, options.evaluations_per_tick);

    std::vector<bool> won(bids.size(), false);
    for (auto i : out.winners.winners) won[i] = true;
    for (std::size_t i = 0; i < bids.size(); ++i) {
        if (won[i]) {
            auto r = ledger.commit(bids[i].bidder, bids[i].bundle,
                                   auction_payment(bids[i], options.multiplier_affects_payment),
                                   ReservationKind::kAuction, now);
            out.confirmations.push_back({bids[i], std::move(r)});
        } else {
            out.rejections.push_back({bids[i], RejectReason::kOutbid});
        }
    }
    return out;
}

std::optional<Tick> earliest_free_arrival(const Ledger& ledger, const IntersectionGrid& grid,
                                          const TrajectoryParams& request, Tick horizon_ticks, int safety_buffer,
                                          const Admissible& admissible) {
    TrajectoryParams p = request;
    for (Tick offset = 0; offset <= horizon_ticks; ++offset) {
        p.arrival_tick = request.arrival_tick + offset;
        const auto bundle = rasterize_bundle(grid, p, safety_buffer);
        if (ledger.is_free(bundle) && (!admissible || admissible(bundle, p))) return p.arrival_tick;
    }
    return std::nullopt;
}

FcfsResult fcfs_grant(Ledger& ledger, const IntersectionGrid& grid, const TrajectoryParams& request,
                      VehicleId vehicle, Tick now, const FcfsOptions& options, const Admissible& admissible) {
    auto bundle = rasterize_bundle(grid, request, options.safety_buffer);
    if (ledger.is_free(bundle) && (!admissible || admissible(bundle, request)))
        return ledger.commit(vehicle, std::move(bundle), 0.0, options.kind, now);
    TrajectoryParams later = request;
    later.arrival_tick = request.arrival_tick + 1;
    if (options.horizon_ticks < 1) return Deferral{};
    return Deferral{
        earliest_free_arrival(ledger, grid, later, options.horizon_ticks - 1, options.safety_buffer, admissible)};
}

}  // namespace aim
