#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aim/types.hpp"

namespace aim {

struct TripRecord {
    VehicleId vehicle;
    std::string origin;
    std::string destination;
    Tick spawn_tick = 0;
    std::optional<Tick> completion_tick;
    /// Travel time of the chosen route on an empty network.
    Tick free_flow_ticks = 0;
    Money total_paid = 0;
    int rejections = 0;
    std::string priority_class = "standard";
    double alpha = 1.0;
    Money budget = 0;
    bool equipped = true;

    [[nodiscard]] bool complete() const { return completion_tick.has_value(); }
    /// Throws InsufficientDataError for an incomplete trip.
    [[nodiscard]] Tick travel_ticks() const;
};

/// (completion - spawn) - free flow. Throws InsufficientDataError for an incomplete trip.
Tick delay(const TripRecord& trip);

/// Mean delay over completed trips; 0 for none.
double mean_delay(std::span<const TripRecord> trips);

/// Mean travel time of trips completed in (at_tick - window, at_tick]; nothing
/// when the window holds no completion.
std::optional<double> moving_avg_travel_time(std::span<const TripRecord> trips, Tick window_ticks, Tick at_tick);

/// Spearman rank correlation with average ranks for ties. Throws
/// InsufficientDataError for mismatched sizes, fewer than two points, or a
/// constant series.
double spearman(std::span<const double> x, std::span<const double> y);

/// Spearman correlation of (total_paid, delay) over completed trips. Needs at
/// least 10 of them.
double spend_delay_correlation(std::span<const TripRecord> trips);

/// Identifies the demand a run was driven with; paired runs must agree on it.
struct PairingKey {
    std::uint64_t seed = 0;
    std::string demand_digest;

    friend bool operator==(const PairingKey&, const PairingKey&) = default;
};

/// mean_delay(ca) - mean_delay(fcfs). Throws ParameterError for unpaired runs.
double social_cost(std::span<const TripRecord> ca, const PairingKey& ca_key, std::span<const TripRecord> fcfs,
                   const PairingKey& fcfs_key);

/// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" otherwise).
std::string format_double(double v);

}  // namespace aim
