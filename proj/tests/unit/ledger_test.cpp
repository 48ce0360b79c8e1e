#include <doctest.h>

#include <map>

#include "aim/ledger.hpp"
#include "helpers.hpp"

using namespace aim;
using aimtest::run;

TEST_CASE("commit then conflicting commit") {
    Ledger l;
    const auto b = run(1, 0, 4, 10);
    CHECK(l.is_free(b));
    const auto r = l.commit(VehicleId{1}, b, 2.5, ReservationKind::kAuction, 9);
    CHECK(r.payment == 2.5);
    CHECK_FALSE(l.is_free(b));
    CHECK(l.occupied_slots() == 4);

    const auto clash = aimtest::slots({{12, {1, 2}}, {12, {2, 2}}});
    CHECK(l.conflicts(clash) == std::vector<ReservationId>{r.id});
    CHECK_THROWS_AS(l.commit(VehicleId{2}, clash, 1, ReservationKind::kAuction, 9), ConflictError);
    CHECK(l.reservation_count() == 1);
    CHECK(l.is_free(aimtest::slots({{14, {1, 3}}})));
    CHECK_THROWS_AS(l.commit(VehicleId{3}, run(0, 0, 1, 0), -1, ReservationKind::kAuction, 0), ParameterError);
}

TEST_CASE("cancel") {
    Ledger l;
    const auto r = l.commit(VehicleId{1}, run(1, 0, 4, 10), 3, ReservationKind::kAuction, 5);
    CHECK_THROWS_AS(l.cancel(r.id, 11), TooLateError);
    const auto freed = l.cancel(r.id, 8);
    CHECK(freed.size() == 4);
    CHECK(l.is_free(run(1, 0, 4, 10)));
    CHECK_THROWS_AS(l.cancel(r.id, 8), NotFoundError);
    CHECK_THROWS_AS(l.cancel(ReservationId{999}, 0), NotFoundError);
}

TEST_CASE("prune drops finished reservations only") {
    Ledger l;
    l.commit(VehicleId{1}, run(0, 0, 3, 0), 0, ReservationKind::kFcfs, 0);
    const auto live = l.commit(VehicleId{2}, run(1, 0, 3, 4), 0, ReservationKind::kFcfs, 0);
    CHECK(l.prune(3) == 1);
    CHECK(l.prune(3) == 0);
    CHECK(l.find(live.id) != nullptr);
    CHECK(l.occupied_slots() == 3);
    CHECK(l.audit_consistency() == 0);
}

TEST_CASE("property: ledger matches a naive slot map") {
    aimtest::Gen gen(7);
    for (int trial = 0; trial < 50; ++trial) {
        Ledger l;
        std::map<SpaceTimeSlot, ReservationId> model;
        std::map<ReservationId, Bundle> held;
        for (int op = 0; op < 300; ++op) {
            const Tick now = op / 3;
            if (gen.coin(0.7) || held.empty()) {
                const auto b = run(gen.range(0, 5), gen.range(0, 3), gen.range(1, 4), now + gen.range(0, 20));
                bool free = true;
                for (const auto& s : b) free = free && !model.contains(s);
                CHECK(l.is_free(b) == free);
                if (free) {
                    const auto r = l.commit(VehicleId{static_cast<std::uint64_t>(op)}, b, 1, ReservationKind::kAuction,
                                            now);
                    for (const auto& s : b) model[s] = r.id;
                    held[r.id] = b;
                } else {
                    CHECK_THROWS_AS(l.commit(VehicleId{1}, b, 1, ReservationKind::kAuction, now), ConflictError);
                }
            } else {
                auto it = held.begin();
                std::advance(it, gen.range(0, static_cast<int>(held.size()) - 1));
                if (it->second.min_tick() <= now) {
                    CHECK_THROWS_AS(l.cancel(it->first, now), TooLateError);
                } else {
                    l.cancel(it->first, now);
                    for (const auto& s : it->second) model.erase(s);
                    held.erase(it);
                }
            }
            CHECK(l.occupied_slots() == model.size());
        }
        for (const auto& [slot, id] : model) CHECK(l.occupant(slot) == id);
        CHECK(l.audit_consistency() == 0);
    }
}
