#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "aim/pricing.hpp"
#include "helpers.hpp"

using namespace aim;

namespace {

ReservePriceState state(int supply, Money p0, Money cap = 100.0) {
    PricingConfig c;
    c.initial_price = p0;
    c.cap = cap;
    return ReservePriceState(LinkId{1}, supply, c);
}

}  // namespace

TEST_CASE("excess demand") {
    auto s = state(10, 1.0);
    CHECK(s.record_demand(10) == 0);
    CHECK(s.record_demand(15) == 5);
    CHECK(s.record_demand(5) == -5);
    CHECK_THROWS_AS(s.record_demand(-1), ParameterError);
    CHECK_THROWS_AS(state(0, 1.0), ParameterError);
}

TEST_CASE("price update examples") {
    auto a = state(10, 1.0);
    a.record_demand(10);
    CHECK(a.update_price(2).new_price == 1.0);

    auto b = state(10, 2.0);
    b.record_demand(15);
    CHECK(b.update_price(2).new_price == 3.0);

    auto c = state(10, 2.0);
    c.record_demand(5);
    CHECK(c.update_price(2).new_price == 1.0);
    CHECK(c.demand_count() == 0);

    auto d = state(1, 9.0, 10.0);
    d.record_demand(2);
    const auto u = d.update_price(20);
    CHECK(u.new_price == 10.0);
    CHECK(u.closure_triggered);
    CHECK(u.closed_until == 30);
}

TEST_CASE("floor holds under collapsing demand") {
    auto s = state(4, 1.0);
    for (int i = 0; i < 50; ++i) {
        s.record_demand(0);
        s.update_price(i);
    }
    CHECK(s.price() == 0.01);
}

TEST_CASE("closure is half open") {
    auto s = state(1, 90.0);
    s.record_demand(5);
    s.update_price(40);
    REQUIRE(s.closed_until() == 50);
    CHECK_FALSE(s.open_at(49));
    CHECK_FALSE(s.is_open(49));
    CHECK(s.is_open(50));
    CHECK_FALSE(s.closed_until());
}

TEST_CASE("no cap means no closure") {
    auto s = state(1, 90.0, std::numeric_limits<Money>::infinity());
    s.record_demand(5);
    const auto u = s.update_price(0);
    CHECK(u.new_price == 450.0);
    CHECK_FALSE(u.closure_triggered);
    CHECK(s.open_at(1));
}

TEST_CASE("board lookups") {
    std::vector<ReservePriceState> states = {state(2, 3.0), ReservePriceState(LinkId{2}, 1, PricingConfig{})};
    states[1].record_demand(200);
    states[1].update_price(0);
    const auto board = publish_prices(states, 1);
    CHECK(board.entry_cost(LinkId{1}) == 3.0);
    CHECK(std::isinf(board.entry_cost(LinkId{2})));
    CHECK(board.entry_cost(LinkId{77}) == 0);
    CHECK_FALSE(board.lookup(LinkId{77}));
}

TEST_CASE("property: update rule matches the closed form") {
    aimtest::Gen gen(99);
    for (int i = 0; i < 20000; ++i) {
        const int supply = gen.range(1, 12);
        const Money p0 = gen.real(0.01, 50.0);
        const Money cap = gen.coin(0.3) ? std::numeric_limits<Money>::infinity() : gen.real(p0, 200.0);
        auto s = state(supply, p0, cap);
        const int demand = gen.range(0, 30);
        s.record_demand(demand);
        const auto u = s.update_price(5);
        const double z = demand - supply;
        const double expect = std::min(cap, std::max(0.01, p0 * (1.0 + z / supply)));
        CHECK(u.new_price == doctest::Approx(expect).epsilon(1e-12));
        CHECK(u.closure_triggered == (std::isfinite(cap) && p0 + p0 * z / supply > cap));
        CHECK(u.new_price >= 0.01);
        CHECK(u.new_price <= cap);
    }
}
