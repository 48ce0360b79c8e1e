#include "aim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace aim {

Tick TripRecord::travel_ticks() const {
    if (!completion_tick) throw InsufficientDataError("trip of vehicle " + std::to_string(vehicle.value) + " is incomplete");
    return *completion_tick - spawn_tick;
}

Tick delay(const TripRecord& trip) { return trip.travel_ticks() - trip.free_flow_ticks; }

double mean_delay(std::span<const TripRecord> trips) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& t : trips) {
        if (!t.complete()) continue;
        sum += static_cast<double>(delay(t));
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::optional<double> moving_avg_travel_time(std::span<const TripRecord> trips, Tick window_ticks, Tick at_tick) {
    if (window_ticks <= 0) throw ParameterError("moving-average window must be positive");
    double sum = 0;
    std::size_t n = 0;
    for (const auto& t : trips) {
        if (!t.complete()) continue;
        const Tick c = *t.completion_tick;
        if (c > at_tick - window_ticks && c <= at_tick) {
            sum += static_cast<double>(t.travel_ticks());
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InsufficientDataError("series differ in length");
    if (x.size() < 2) throw InsufficientDataError("need at least two points");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0;
    double sxx = 0;
    double syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) throw InsufficientDataError("a series has zero variance");
    return sxy / std::sqrt(sxx * syy);
}

double spend_delay_correlation(std::span<const TripRecord> trips) {
    std::vector<double> paid;
    std::vector<double> delays;
    for (const auto& t : trips) {
        if (!t.complete()) continue;
        paid.push_back(t.total_paid);
        delays.push_back(static_cast<double>(delay(t)));
    }
    if (paid.size() < 10)
        throw InsufficientDataError("spend/delay correlation needs at least 10 completed trips, got " +
                                    std::to_string(paid.size()));
    return spearman(paid, delays);
}

double social_cost(std::span<const TripRecord> ca, const PairingKey& ca_key, std::span<const TripRecord> fcfs,
                   const PairingKey& fcfs_key) {
    if (!(ca_key == fcfs_key)) throw ParameterError("social cost needs paired runs (same seed and demand)");
    return mean_delay(ca) - mean_delay(fcfs);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace aim
