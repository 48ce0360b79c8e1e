#include <doctest.h>

#include <algorithm>

#include "aim/auction.hpp"
#include "aim/compliance/priority.hpp"
#include "helpers.hpp"

using namespace aim;
using aimtest::bid;
using aimtest::run;

namespace {

// Best conflict-free subset by plain enumeration; value only.
double brute_force(const std::vector<Bid>& bids, const Ledger& ledger) {
    double best = 0;
    const std::size_t n = bids.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<SpaceTimeSlot> used;
        bool ok = true;
        double total = 0;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (!(mask & (1u << i))) continue;
            for (const auto& s : bids[i].bundle) {
                if (std::find(used.begin(), used.end(), s) != used.end() || ledger.occupant(s)) ok = false;
                used.push_back(s);
            }
            total += bids[i].effective_value();
        }
        if (ok) best = std::max(best, total);
    }
    return best;
}

std::vector<Bid> random_bids(aimtest::Gen& gen, int count) {
    std::vector<Bid> bids;
    for (int i = 0; i < count; ++i) {
        std::vector<SpaceTimeSlot> v;
        const int len = gen.range(1, 4);
        const int r = gen.range(0, 3), c = gen.range(0, 3);
        const Tick t = gen.range(0, 4);
        for (int k = 0; k < len; ++k) v.push_back({t + k, {r, std::min(3, c + k)}});
        bids.push_back(bid(static_cast<std::uint64_t>(i + 1), Bundle(std::move(v)), gen.range(1, 20),
                           gen.range(0, 3)));
    }
    return bids;
}

}  // namespace

TEST_CASE("run_round confirms disjoint bids and pays first price") {
    Ledger l;
    AuctionRound r;
    CHECK(run_round(l, r, {}, 1).confirmations.empty());
    r.bid_set = {bid(1, run(0, 0, 2, 5), 3), bid(2, run(1, 0, 2, 5), 5)};
    const auto out = run_round(l, r, {}, 1);
    REQUIRE(out.confirmations.size() == 2);
    CHECK(out.rejections.empty());
    for (const auto& c : out.confirmations) CHECK(c.reservation.payment == c.bid.value);
    CHECK(l.reservation_count() == 2);
}

TEST_CASE("run_round with one shared slot") {
    Ledger l;
    AuctionRound r;
    r.bid_set = {bid(1, run(0, 0, 2, 5), 5), bid(2, aimtest::slots({{6, {0, 1}}, {7, {1, 1}}}), 3)};
    for (auto solver : {SolverMode::kGreedy, SolverMode::kExact}) {
        Ledger fresh;
        RoundOptions o;
        o.solver = solver;
        const auto out = run_round(fresh, r, o, 1);
        REQUIRE(out.confirmations.size() == 1);
        CHECK(out.confirmations[0].bid.value == 5);
        REQUIRE(out.rejections.size() == 1);
        CHECK(out.rejections[0].reason == RejectReason::kOutbid);
    }
}

TEST_CASE("exact solver prefers two small bids over one large") {
    Ledger l;
    const std::vector<Bid> bids = {bid(1, run(0, 0, 4, 0), 10), bid(2, run(0, 0, 2, 0), 6), bid(3, run(0, 2, 2, 2), 6)};
    const auto ws = solve_wdp_exact(bids, l);
    CHECK(ws.exact);
    CHECK(ws.winners == std::vector<std::size_t>{1, 2});
    CHECK(ws.total_value == 12);
    CHECK(solve_wdp_greedy(bids, l, 1).winners == std::vector<std::size_t>{1, 2});
}

TEST_CASE("exact solver tie goes to the earlier bid") {
    Ledger l;
    const std::vector<Bid> bids = {bid(1, run(0, 0, 2, 0), 4, 3), bid(2, run(0, 1, 2, 1), 4, 2)};
    CHECK(solve_wdp_exact(bids, l).winners == std::vector<std::size_t>{1});
    CHECK(solve_wdp_exact(std::span<const Bid>(bids.data(), 1), l).winners == std::vector<std::size_t>{0});
}

TEST_CASE("exact solver size limit") {
    Ledger l;
    std::vector<Bid> bids;
    for (int i = 0; i < 5; ++i) bids.push_back(bid(i + 1, run(i, 0, 1, 0), 1));
    CHECK_THROWS_AS(solve_wdp_exact(bids, l, 4), SizeLimitError);
}

TEST_CASE("greedy with no time returns nothing") {
    Ledger l;
    const std::vector<Bid> bids = {bid(1, run(0, 0, 2, 0), 5)};
    const auto ws = solve_wdp_greedy(bids, l, 0);
    CHECK(ws.winners.empty());
    CHECK(is_feasible(bids, ws, l));
}

TEST_CASE("bids colliding with the ledger never win") {
    Ledger l;
    l.commit(VehicleId{9}, run(0, 0, 1, 0), 0, ReservationKind::kFcfs, 0);
    const std::vector<Bid> bids = {bid(1, run(0, 0, 2, 0), 50), bid(2, run(1, 0, 2, 0), 1)};
    CHECK(solve_wdp_exact(bids, l).winners == std::vector<std::size_t>{1});
    CHECK(solve_wdp_greedy(bids, l, 1).winners == std::vector<std::size_t>{1});
}

TEST_CASE("property: exact equals enumeration and greedy is feasible") {
    aimtest::Gen gen(2024);
    for (int i = 0; i < 400; ++i) {
        Ledger l;
        if (gen.coin(0.3)) l.commit(VehicleId{100}, run(gen.range(0, 3), 0, 2, gen.range(0, 4)), 0, ReservationKind::kFcfs, 0);
        auto bids = random_bids(gen, gen.range(0, 9));
        for (auto& b : bids) b.priority_multiplier = gen.coin(0.2) ? 1.5 : 1.0;
        const auto exact = solve_wdp_exact(bids, l);
        const auto greedy = solve_wdp_greedy(bids, l, 1);
        CHECK(is_feasible(bids, exact, l));
        CHECK(is_feasible(bids, greedy, l));
        CHECK(exact.total_value == doctest::Approx(brute_force(bids, l)));
        CHECK(greedy.total_value <= exact.total_value + 1e-9);
        const auto partial = solve_wdp_greedy(bids, l, 1, static_cast<std::size_t>(gen.range(0, 5)));
        CHECK(is_feasible(bids, partial, l));
    }
}

TEST_CASE("engine defers late bids to the next round") {
    AuctionEngine e;
    CHECK(e.collecting(0));
    CHECK_FALSE(e.collecting(1));
    CHECK(e.decision_tick_for(0) == 1);
    CHECK(e.decision_tick_for(1) == 3);

    auto b1 = bid(1, run(0, 0, 2, 9), 2, 0);
    auto b2 = bid(2, run(1, 0, 2, 9), 2, 1);
    e.submit(b1);
    e.submit(b2);
    const auto r0 = e.close_due(1);
    REQUIRE(r0);
    REQUIRE(r0->bid_set.size() == 1);
    CHECK(r0->bid_set[0].bidder == VehicleId{1});
    CHECK_FALSE(e.close_due(2));
    const auto r1 = e.close_due(3);
    REQUIRE(r1);
    REQUIRE(r1->bid_set.size() == 1);
    CHECK(r1->bid_set[0].bidder == VehicleId{2});
}

TEST_CASE("withdraw a pending bid") {
    AuctionEngine e;
    e.submit(bid(4, run(0, 0, 1, 3), 1, 0));
    CHECK(e.has_pending(VehicleId{4}));
    CHECK(e.withdraw(VehicleId{4}));
    CHECK_FALSE(e.withdraw(VehicleId{4}));
    CHECK(e.pending_count() == 0);
}

TEST_CASE("priority multipliers and exemptions") {
    const auto table = PriorityTable::defaults();
    const auto hov = apply_priority(bid(1, run(0, 0, 2, 0), 10), table, "high_occupancy");
    REQUIRE(std::holds_alternative<Bid>(hov));
    const std::vector<Bid> bids = {std::get<Bid>(hov), bid(2, run(0, 1, 2, 1), 12)};
    const auto ws = solve_wdp_exact(bids, Ledger{});
    CHECK(ws.winners == std::vector<std::size_t>{0});
    CHECK(auction_payment(bids[0], false) == 10);
    CHECK(auction_payment(bids[0], true) == doctest::Approx(10.0 / 1.5));

    const auto em = apply_priority(bid(3, run(0, 0, 2, 0), 0), table, "emergency");
    REQUIRE(std::holds_alternative<ExemptionGrant>(em));
    CHECK(std::get<ExemptionGrant>(em).absolute);
    CHECK(table.lookup("martian").name == "standard");
    CHECK(PriorityTable::neutral().lookup("high_occupancy").multiplier == 1.0);
}
