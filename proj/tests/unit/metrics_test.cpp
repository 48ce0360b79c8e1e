#include <doctest.h>

#include <cmath>

#include "aim/metrics.hpp"
#include "helpers.hpp"

using namespace aim;

namespace {

TripRecord trip(Tick spawn, std::optional<Tick> done, Tick free_flow, Money paid = 0) {
    TripRecord t;
    t.spawn_tick = spawn;
    t.completion_tick = done;
    t.free_flow_ticks = free_flow;
    t.total_paid = paid;
    return t;
}

// Average ranks by counting, then Pearson on the ranks.
double rank_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double below = 0, same = 0;
            for (double w : v) {
                if (w < v[i]) ++below;
                if (w == v[i]) ++same;
            }
            r[i] = below + (same + 1) / 2;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i] / n;
        my += ry[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("delay") {
    CHECK(delay(trip(0, 20, 20)) == 0);
    CHECK(delay(trip(3, 30, 20)) == 7);
    CHECK_THROWS_AS(delay(trip(0, std::nullopt, 20)), InsufficientDataError);
    const std::vector<TripRecord> ts = {trip(0, 20, 20), trip(0, 30, 20), trip(0, std::nullopt, 5)};
    CHECK(mean_delay(ts) == 5.0);
    CHECK(mean_delay(std::vector<TripRecord>{}) == 0.0);
}

TEST_CASE("moving average window") {
    const std::vector<TripRecord> ts = {trip(0, 10, 5), trip(30, 50, 5), trip(0, 100, 5)};
    CHECK_FALSE(moving_avg_travel_time(ts, 10, 80));
    CHECK(moving_avg_travel_time(ts, 50, 50) == 15.0);
    // Completion at exactly at_tick - window falls outside.
    CHECK(moving_avg_travel_time(ts, 40, 50) == 20.0);
    CHECK(moving_avg_travel_time(ts, 100, 100) == doctest::Approx(130.0 / 3));
}

TEST_CASE("spearman examples") {
    const std::vector<double> up = {1, 2, 3, 4, 5};
    const std::vector<double> down = {50, 40, 30, 20, 10};
    CHECK(spearman(up, down) == doctest::Approx(-1.0));
    const std::vector<double> flat = {2, 2, 2, 2, 2};
    CHECK_THROWS_AS(spearman(flat, down), InsufficientDataError);
    const std::vector<double> x = {1, 2, 3, 4};
    const std::vector<double> y = {9, 7, 5, 8};
    // Ranks of y are 4,2,1,3; d^2 sums to 14; 1 - 6*14/(4*15).
    CHECK(spearman(x, y) == doctest::Approx(-0.4));
    CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{2}), InsufficientDataError);
}

TEST_CASE("spend-delay needs ten trips") {
    std::vector<TripRecord> ts;
    for (int i = 0; i < 9; ++i) ts.push_back(trip(0, 20 + i, 10, 9 - i));
    CHECK_THROWS_AS(spend_delay_correlation(ts), InsufficientDataError);
    ts.push_back(trip(0, 40, 10, 0));
    CHECK(spend_delay_correlation(ts) == doctest::Approx(-1.0));
}

TEST_CASE("social cost") {
    const PairingKey key{3, "abc"};
    std::vector<TripRecord> ca = {trip(0, 22, 10), trip(0, 22, 10)};
    std::vector<TripRecord> fcfs = {trip(0, 19, 10), trip(0, 19, 10)};
    CHECK(social_cost(ca, key, fcfs, key) == 3.0);
    CHECK(social_cost(ca, key, ca, key) == 0.0);
    CHECK_THROWS_AS(social_cost(ca, key, fcfs, PairingKey{4, "abc"}), ParameterError);
}

TEST_CASE("format_double") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(3.0) == "3");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("property: spearman matches rank pearson with ties") {
    aimtest::Gen gen(314);
    for (int i = 0; i < 500; ++i) {
        const int n = gen.range(2, 40);
        std::vector<double> x, y;
        for (int k = 0; k < n; ++k) {
            x.push_back(gen.range(0, 6));
            y.push_back(gen.coin(0.5) ? gen.range(0, 6) : gen.real(0, 1));
        }
        const bool flat = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
                          std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
        if (flat) {
            CHECK_THROWS_AS(spearman(x, y), InsufficientDataError);
            continue;
        }
        const double rho = spearman(x, y);
        CHECK(rho == doctest::Approx(rank_pearson(x, y)).epsilon(1e-9));
        CHECK(spearman(y, x) == doctest::Approx(rho).epsilon(1e-12));
    }
}
