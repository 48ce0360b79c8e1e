#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "aim/geometry.hpp"
#include "aim/ledger.hpp"
#include "aim/types.hpp"

namespace aim {

struct Bid {
    VehicleId bidder;
    TrajectoryParams params;
    Bundle bundle;
    Money value = 0;
    double priority_multiplier = 1.0;
    Tick submitted_tick = 0;
    LinkId link;

    /// Quantity the winner determination maximizes.
    [[nodiscard]] double effective_value() const { return value * priority_multiplier; }
};

struct WinnerSet {
    std::vector<std::size_t> winners;  // indices into the solved bid list, ascending
    double total_value = 0;
    bool exact = false;
};

/// Exact winner determination by branch and bound. Bids whose bundle collides with
/// the ledger never win. Ties on total value are broken by fewer total slots, then
/// the earlier minimum submitted tick, then the lexicographically smaller sorted
/// list of bidder ids. Throws SizeLimitError above `limit` bids.
WinnerSet solve_wdp_exact(std::span<const Bid> bids, const Ledger& ledger, std::size_t limit = 20);

/// Anytime greedy set packing by value density. Each bid examined costs one
/// evaluation; the budget is deadline_ticks x evaluations_per_tick. The partial
/// answer is feasible whenever the budget runs out.
inline constexpr std::size_t kDefaultEvaluationsPerTick = 1'000'000;
WinnerSet solve_wdp_greedy(std::span<const Bid> bids, const Ledger& ledger, Tick deadline_ticks,
                           std::size_t evaluations_per_tick = kDefaultEvaluationsPerTick);

/// True iff the chosen bids are pairwise disjoint and disjoint from the ledger.
bool is_feasible(std::span<const Bid> bids, const WinnerSet& ws, const Ledger& ledger);

enum class RejectReason : std::uint8_t { kOutbid, kBelowReserve, kClosed, kPriorityHold, kWithdrawn, kBudget };
std::string_view to_string(RejectReason r);
RejectReason reject_reason_from_string(std::string_view s);

struct AuctionRound {
    std::uint64_t round_id = 0;
    Tick collect_from = 0;
    Tick collect_to = 0;
    std::vector<Bid> bid_set;
    std::vector<Bid> late_bids;  // arrived while solving; carried into the next round
};

/// Round timing: collect for `collect_ticks`, then solve for `solve_ticks`, then
/// the next round begins. Rounds are aligned to tick 0.
struct AuctionSchedule {
    Tick collect_ticks = 1;
    Tick solve_ticks = 1;

    [[nodiscard]] Tick period() const { return collect_ticks + solve_ticks; }
};

/// Bid intake and round bookkeeping for one intersection manager.
class AuctionEngine {
public:
    explicit AuctionEngine(AuctionSchedule schedule = {});

    [[nodiscard]] const AuctionSchedule& schedule() const { return schedule_; }
    [[nodiscard]] bool collecting(Tick t) const;
    /// Tick at whose end a bid submitted at `submit_tick` is decided.
    [[nodiscard]] Tick decision_tick_for(Tick submit_tick) const;

    void submit(Bid bid);
    /// Returns the round decided at `now`, if any. Its late bids move to the next round.
    std::optional<AuctionRound> close_due(Tick now);
    /// Pushes a round's bids, unsolved, into the following round.
    void defer(AuctionRound round);
    /// Removes a pending bid; returns it when found.
    std::optional<Bid> withdraw(VehicleId bidder);
    [[nodiscard]] bool has_pending(VehicleId bidder) const;
    [[nodiscard]] std::size_t pending_count() const;

private:
    AuctionRound& round_at(std::uint64_t id);

    AuctionSchedule schedule_;
    std::map<std::uint64_t, AuctionRound> rounds_;
};

enum class SolverMode : std::uint8_t { kGreedy, kExact };

struct RoundOptions {
    SolverMode solver = SolverMode::kGreedy;
    Tick deadline_ticks = 1;
    std::size_t evaluations_per_tick = kDefaultEvaluationsPerTick;
    std::size_t oracle_limit = 20;
    bool multiplier_affects_payment = false;
};

struct Confirmation {
    Bid bid;
    Reservation reservation;
};

struct Rejection {
    Bid bid;
    RejectReason reason = RejectReason::kOutbid;
};

struct RoundOutcome {
    std::vector<Confirmation> confirmations;
    std::vector<Rejection> rejections;
    WinnerSet winners;
};

/// First-price payment for a winning bid.
Money auction_payment(const Bid& bid, bool multiplier_affects_payment);

/// Solves the round's bid set, commits every winner and rejects the rest.
RoundOutcome run_round(Ledger& ledger, const AuctionRound& round, const RoundOptions& options, Tick now);

/// Extra admission test applied on top of ledger freedom (for example priority holds).
using Admissible = std::function<bool(const Bundle&, const TrajectoryParams&)>;

struct FcfsOptions {
    Tick horizon_ticks = 200;
    int safety_buffer = 0;
    ReservationKind kind = ReservationKind::kFcfs;
};

struct Deferral {
    std::optional<Tick> advised_arrival;
};

using FcfsResult = std::variant<Reservation, Deferral>;

/// Earliest arrival tick in [request.arrival_tick, request.arrival_tick + horizon]
/// whose shifted bundle is free and admissible.
std::optional<Tick> earliest_free_arrival(const Ledger& ledger, const IntersectionGrid& grid,
                                          const TrajectoryParams& request, Tick horizon_ticks, int safety_buffer,
                                          const Admissible& admissible = {});

/// First-come first-served grant: commits immediately with payment 0 when the
/// requested bundle is free, otherwise advises the earliest free arrival tick.
FcfsResult fcfs_grant(Ledger& ledger, const IntersectionGrid& grid, const TrajectoryParams& request,
                      VehicleId vehicle, Tick now, const FcfsOptions& options = {},
                      const Admissible& admissible = {});

}  // namespace aim
