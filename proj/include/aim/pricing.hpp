#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>

#include "aim/types.hpp"

namespace aim {

struct PricingConfig {
    Money initial_price = 1.0;
    Money floor = 0.01;
    /// Maximum reserve price; +infinity disables the cap and closures.
    Money cap = 100.0;
    Tick closure_ticks = 10;

    [[nodiscard]] bool cap_enabled() const { return cap < std::numeric_limits<Money>::infinity(); }
};

struct PriceUpdate {
    Money old_price = 0;
    Money raw = 0;
    Money new_price = 0;
    int demand = 0;
    int excess = 0;
    int supply = 0;
    bool closure_triggered = false;
    std::optional<Tick> closed_until;
};

/// Reserve price of one incoming link, updated by excess demand:
/// p' = p + p * z / s, clamped to [floor, cap].
class ReservePriceState {
public:
    ReservePriceState(LinkId link, int supply, const PricingConfig& config);

    [[nodiscard]] LinkId link() const { return link_; }
    [[nodiscard]] Money price() const { return price_; }
    [[nodiscard]] int supply() const { return supply_; }
    [[nodiscard]] int demand_count() const { return demand_; }
    [[nodiscard]] int excess() const { return excess_; }
    [[nodiscard]] Money cap() const { return config_.cap; }
    [[nodiscard]] Money floor() const { return config_.floor; }
    [[nodiscard]] std::optional<Tick> closed_until() const { return closed_until_; }

    /// Sets the demand of the current period; returns the resulting excess demand.
    int record_demand(int requests_this_period);

    /// Applies the update rule once for the period ending at `now`; resets demand.
    PriceUpdate update_price(Tick now);

    /// Clears an expired closure.
    bool is_open(Tick now);
    /// Pure variant of is_open.
    [[nodiscard]] bool open_at(Tick now) const { return !closed_until_ || now >= *closed_until_; }

private:
    LinkId link_;
    int supply_;
    PricingConfig config_;
    Money price_;
    int demand_ = 0;
    int excess_ = 0;
    std::optional<Tick> closed_until_;
};

/// Raw update before floor and cap, saturated to the finite range.
Money raw_reserve_update(Money price, int excess, int supply);

/// Clamp of a raw update into [floor, cap].
Money clamp_reserve_price(Money raw, Money floor, Money cap);

struct PriceEntry {
    Money price = 0;
    bool open = true;
};

/// Immutable snapshot of published prices at one tick.
class PriceBoard {
public:
    PriceBoard() = default;
    PriceBoard(Tick tick, std::map<LinkId, PriceEntry> entries) : tick_(tick), entries_(std::move(entries)) {}

    [[nodiscard]] Tick tick() const { return tick_; }
    [[nodiscard]] const std::map<LinkId, PriceEntry>& entries() const { return entries_; }
    [[nodiscard]] std::optional<PriceEntry> lookup(LinkId link) const;
    /// Monetary cost of entering `link`; +infinity while closed, 0 for unpriced links.
    [[nodiscard]] Money entry_cost(LinkId link) const;

    friend bool operator==(const PriceBoard& a, const PriceBoard& b) {
        if (a.tick_ != b.tick_ || a.entries_.size() != b.entries_.size()) return false;
        for (auto ia = a.entries_.begin(), ib = b.entries_.begin(); ia != a.entries_.end(); ++ia, ++ib)
            if (ia->first != ib->first || ia->second.price != ib->second.price || ia->second.open != ib->second.open)
                return false;
        return true;
    }

private:
    Tick tick_ = 0;
    std::map<LinkId, PriceEntry> entries_;
};

PriceBoard publish_prices(std::span<const ReservePriceState> states, Tick now);

}  // namespace aim
