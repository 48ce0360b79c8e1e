#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aim/geometry.hpp"
#include "aim/types.hpp"

namespace aim {

enum class ReservationKind : std::uint8_t { kAuction, kFcfs, kFreePass, kPriorityExempt, kLegacyWindow };

std::string_view to_string(ReservationKind k);
ReservationKind reservation_kind_from_string(std::string_view s);

struct Reservation {
    ReservationId id;
    VehicleId vehicle;
    Bundle bundle;
    Money payment = 0;
    Tick granted_tick = 0;
    ReservationKind kind = ReservationKind::kAuction;
};

/// Confirmed reservations of one intersection. Every space-time slot is held by at
/// most one reservation.
class Ledger {
public:
    [[nodiscard]] bool is_free(const Bundle& bundle) const;

    /// Ids of the reservations holding any slot of `bundle`, ascending.
    [[nodiscard]] std::vector<ReservationId> conflicts(const Bundle& bundle) const;

    /// Throws ConflictError if any slot is taken, ParameterError on an invalid payment.
    Reservation commit(VehicleId vehicle, Bundle bundle, Money payment, ReservationKind kind, Tick granted_tick);

    /// Releases every slot of the reservation. Payment is not refunded.
    /// Throws NotFoundError for an unknown id and TooLateError once the crossing began.
    Bundle cancel(ReservationId id, Tick cancel_tick);

    /// Drops reservations whose latest tick is before `now`.
    std::size_t prune(Tick now);

    [[nodiscard]] const Reservation* find(ReservationId id) const;
    [[nodiscard]] std::optional<ReservationId> occupant(const SpaceTimeSlot& slot) const;
    [[nodiscard]] std::size_t reservation_count() const { return reservations_.size(); }
    [[nodiscard]] std::size_t occupied_slots() const { return occupancy_.size(); }
    [[nodiscard]] const std::map<ReservationId, Reservation>& reservations() const { return reservations_; }

    /// Exhaustive consistency scan between the two indexes; returns the number of defects.
    [[nodiscard]] std::size_t audit_consistency() const;

private:
    std::unordered_map<SpaceTimeSlot, ReservationId, SlotHash> occupancy_;
    std::map<ReservationId, Reservation> reservations_;
    std::uint64_t next_id_ = 1;
};

}  // namespace aim
