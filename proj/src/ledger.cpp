#include "aim/ledger.hpp"

#include <algorithm>
#include <string>

namespace aim {

std::string_view to_string(ReservationKind k) {
    switch (k) {
        case ReservationKind::kAuction: return "auction";
        case ReservationKind::kFcfs: return "fcfs";
        case ReservationKind::kFreePass: return "free_pass";
        case ReservationKind::kPriorityExempt: return "priority_exempt";
        case ReservationKind::kLegacyWindow: return "legacy_window";
    }
    return "?";
}

ReservationKind reservation_kind_from_string(std::string_view s) {
    for (auto k : {ReservationKind::kAuction, ReservationKind::kFcfs, ReservationKind::kFreePass,
                   ReservationKind::kPriorityExempt, ReservationKind::kLegacyWindow}) {
        if (to_string(k) == s) return k;
    }
    throw ParameterError("unknown reservation kind '" + std::string(s) + "'");
}

bool Ledger::is_free(const Bundle& bundle) const {
    return std::none_of(bundle.begin(), bundle.end(), [&](const SpaceTimeSlot& s) { return occupancy_.contains(s); });
}

std::vector<ReservationId> Ledger::conflicts(const Bundle& bundle) const {
    std::vector<ReservationId> ids;
    for (const auto& s : bundle) {
        if (auto it = occupancy_.find(s); it != occupancy_.end()) ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

Reservation Ledger::commit(VehicleId vehicle, Bundle bundle, Money payment, ReservationKind kind, Tick granted_tick) {
    if (bundle.empty()) throw ParameterError("cannot commit an empty bundle");
    if (!(payment >= 0)) throw ParameterError("payment must be non-negative");
    if (kind != ReservationKind::kAuction && payment != 0)
        throw ParameterError("only auction reservations carry a payment");
    if (!is_free(bundle)) throw ConflictError("bundle overlaps an existing reservation");

    Reservation r{ReservationId{next_id_++}, vehicle, std::move(bundle), payment, granted_tick, kind};
    for (const auto& s : r.bundle) occupancy_.emplace(s, r.id);
    auto [it, _] = reservations_.emplace(r.id, r);
    return it->second;
}

Bundle Ledger::cancel(ReservationId id, Tick cancel_tick) {
    auto it = reservations_.find(id);
    if (it == reservations_.end()) throw NotFoundError("unknown reservation " + std::to_string(id.value));
    if (cancel_tick >= it->second.bundle.min_tick())
        throw TooLateError("reservation " + std::to_string(id.value) + " already started at tick " +
                           std::to_string(it->second.bundle.min_tick()));
    Bundle released = std::move(it->second.bundle);
    for (const auto& s : released) occupancy_.erase(s);
    reservations_.erase(it);
    return released;
}

std::size_t Ledger::prune(Tick now) {
    std::size_t removed = 0;
    for (auto it = reservations_.begin(); it != reservations_.end();) {
        if (it->second.bundle.max_tick() < now) {
            for (const auto& s : it->second.bundle) occupancy_.erase(s);
            it = reservations_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

const Reservation* Ledger::find(ReservationId id) const {
    auto it = reservations_.find(id);
    return it == reservations_.end() ? nullptr : &it->second;
}

std::optional<ReservationId> Ledger::occupant(const SpaceTimeSlot& slot) const {
    if (auto it = occupancy_.find(slot); it != occupancy_.end()) return it->second;
    return std::nullopt;
}

std::size_t Ledger::audit_consistency() const {
    std::size_t defects = 0;
    std::size_t expected_slots = 0;
    for (const auto& [id, r] : reservations_) {
        expected_slots += r.bundle.size();
        for (const auto& s : r.bundle) {
            auto it = occupancy_.find(s);
            if (it == occupancy_.end() || it->second != id) ++defects;
        }
    }
    if (expected_slots != occupancy_.size()) ++defects;
    return defects;
}

}  // namespace aim
