#pragma once

#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "aim/auction.hpp"
#include "aim/compliance/audit.hpp"
#include "aim/compliance/free_pass.hpp"
#include "aim/compliance/windows.hpp"
#include "aim/geometry.hpp"
#include "aim/ledger.hpp"
#include "aim/pricing.hpp"

namespace aim {

struct ManagerConfig {
    IntersectionGrid grid;
    int safety_buffer = 0;
    AuctionSchedule schedule;
    RoundOptions round;
    Tick fcfs_horizon = 200;
    PricingConfig pricing;
    Tick pricing_period = 2;
    /// Reserve prices follow the excess-demand rule; otherwise they stay at the initial price.
    bool dynamic_pricing = true;
    bool windows_enabled = false;
    WindowSchedule windows;
};

struct IncomingLink {
    LinkId link;
    Approach approach = Approach::kWest;
    int supply = 1;
};

/// Outcome of bid intake.
struct IntakeResult {
    bool accepted = false;
    RejectReason reason = RejectReason::kOutbid;
};

struct PreemptionResult {
    std::optional<Reservation> reservation;
    std::vector<Reservation> cancelled;
};

/// Allocation authority of one intersection. Owns its ledger, auction engine,
/// reserve prices, waiting table, service windows and audit log; shares no
/// mutable state with other managers.
class IntersectionManager {
public:
    IntersectionManager(IntersectionId id, ManagerConfig config, std::vector<IncomingLink> links);

    [[nodiscard]] IntersectionId id() const { return id_; }
    [[nodiscard]] const ManagerConfig& config() const { return config_; }
    [[nodiscard]] const IntersectionGrid& grid() const { return config_.grid; }
    [[nodiscard]] const Ledger& ledger() const { return ledger_; }
    [[nodiscard]] const AuctionEngine& engine() const { return engine_; }
    [[nodiscard]] AuditLog& audit() { return audit_; }
    [[nodiscard]] const AuditLog& audit() const { return audit_; }
    [[nodiscard]] WaitingTable& waiting() { return waiting_; }
    [[nodiscard]] const WaitingTable& waiting() const { return waiting_; }
    [[nodiscard]] const std::vector<ReservePriceState>& prices() const { return prices_; }
    [[nodiscard]] const ReservePriceState& price_state(LinkId link) const;
    [[nodiscard]] bool serves(LinkId link) const { return link_index_.contains(link); }

    /// Clears expired closures and snapshots the reserve prices.
    PriceBoard publish(Tick now);

    /// Current service window; logs a window_switch record on every change.
    WindowPhase update_phase(Tick now);
    [[nodiscard]] WindowPhase phase() const { return phase_; }
    void record_arrival(bool equipped) { windows_.record_arrival(equipped); }

    /// Bid intake: counts demand on the entry link, then rejects bids below the
    /// reserve price or for a closed link; accepted bids join the open round.
    IntakeResult submit_bid(Bid bid, Tick now);
    /// Counts a vehicle that wants to enter via `link` this period but submits no
    /// bid: no open slot, a closed link, or a budget below the posted reserve.
    /// Each vehicle counts once per period.
    void note_blocked(LinkId link, VehicleId vehicle);
    std::optional<Bid> withdraw_bid(VehicleId vehicle, Tick now);

    /// Decides the round due at `now`, if any. During a legacy window the round is
    /// deferred unsolved.
    std::optional<RoundOutcome> decide(Tick now);

    /// Zero-payment first-come grant of the given kind; follows one deferral
    /// advice that is at most `horizon` ticks late (the configured FCFS horizon
    /// when absent). Respects priority holds.
    std::optional<Reservation> grant_first_come(VehicleId vehicle, const TrajectoryParams& request,
                                                ReservationKind kind, Tick now,
                                                std::optional<Tick> horizon = std::nullopt);

    /// Absolute priority: commits a zero-payment exempt reservation at the earliest
    /// arrival it can clear, cancelling every unstarted reservation that overlaps it
    /// or would start earlier on a shared cell. Reservations of `keep` (vehicles the
    /// requester cannot overtake) and other exempt reservations are never cancelled.
    /// Until it starts, the grant holds back later grants that would start earlier
    /// on a shared cell.
    PreemptionResult grant_absolute(VehicleId vehicle, const TrajectoryParams& request, Tick now,
                                    const std::vector<VehicleId>& keep = {});

    void cancel(ReservationId id, Tick now, std::string_view reason);

    /// Closes the pricing period ending at `now` when due.
    void end_period(Tick now);

    void prune(Tick now);

    [[nodiscard]] std::size_t commits() const { return commits_; }
    [[nodiscard]] std::size_t cancellations() const { return cancellations_; }
    [[nodiscard]] std::size_t closures() const { return closures_; }

private:
    [[nodiscard]] bool admissible(const Bundle& bundle, const TrajectoryParams& params, Tick now) const;
    void audit_confirm(const Reservation& r, const TrajectoryParams& params, const Bid* bid, Tick now);
    Reservation commit(VehicleId vehicle, Bundle bundle, Money payment, ReservationKind kind, Tick now,
                       const TrajectoryParams& params, const Bid* bid);

    struct Hold {
        VehicleId vehicle;
        Bundle bundle;
        Tick start = 0;
    };

    IntersectionId id_;
    ManagerConfig config_;
    Ledger ledger_;
    AuctionEngine engine_;
    std::vector<ReservePriceState> prices_;
    std::map<LinkId, std::size_t> link_index_;
    std::map<LinkId, int> period_demand_;
    std::map<LinkId, std::set<VehicleId>> period_bidders_;
    std::map<LinkId, std::set<VehicleId>> period_blocked_;
    WaitingTable waiting_;
    WindowScheduler windows_;
    WindowPhase phase_ = WindowPhase::kAuction;
    bool phase_known_ = false;
    std::vector<Hold> holds_;
    AuditLog audit_;
    std::size_t commits_ = 0;
    std::size_t cancellations_ = 0;
    std::size_t closures_ = 0;
};

}  // namespace aim
