#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

#include "aim/auction.hpp"
#include "aim/geometry.hpp"

namespace aimtest {

inline aim::Bundle slots(std::initializer_list<std::pair<aim::Tick, aim::Cell>> items) {
    std::vector<aim::SpaceTimeSlot> v;
    for (const auto& [t, c] : items) v.push_back({t, c});
    return aim::Bundle(std::move(v));
}

/// Horizontal run of `len` cells in `row` starting at `col`, one tick each from `t`.
inline aim::Bundle run(int row, int col, int len, aim::Tick t) {
    std::vector<aim::SpaceTimeSlot> v;
    for (int i = 0; i < len; ++i) v.push_back({t + i, {row, col + i}});
    return aim::Bundle(std::move(v));
}

inline aim::Bid bid(std::uint64_t bidder, aim::Bundle b, double value, aim::Tick submitted = 0) {
    aim::Bid out;
    out.bidder = aim::VehicleId{bidder};
    out.bundle = std::move(b);
    out.value = value;
    out.submitted_tick = submitted;
    return out;
}

/// Small seeded generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace aimtest
