#include "aim/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aim {

ReservePriceState::ReservePriceState(LinkId link, int supply, const PricingConfig& config)
    : link_(link), supply_(supply), config_(config), price_(config.initial_price) {
    if (supply <= 0) throw ParameterError("supply must be positive");
    if (!(config.floor > 0)) throw ParameterError("price floor must be positive");
    if (!(config.initial_price > 0) || config.initial_price > config.cap)
        throw ParameterError("initial price must be in (0, cap]");
    if (config.floor > config.cap) throw ParameterError("price floor exceeds cap");
    if (config.closure_ticks < 0) throw ParameterError("closure duration must be non-negative");
}

int ReservePriceState::record_demand(int requests_this_period) {
    if (requests_this_period < 0) throw ParameterError("demand must be non-negative");
    demand_ = requests_this_period;
    excess_ = demand_ - supply_;
    return excess_;
}

Money raw_reserve_update(Money price, int excess, int supply) {
    const Money raw = price + price * static_cast<double>(excess) / static_cast<double>(supply);
    if (std::isnan(raw)) return std::numeric_limits<Money>::max();
    return std::clamp(raw, -std::numeric_limits<Money>::max(), std::numeric_limits<Money>::max());
}

Money clamp_reserve_price(Money raw, Money floor, Money cap) { return std::min(std::max(raw, floor), cap); }

PriceUpdate ReservePriceState::update_price(Tick now) {
    PriceUpdate u;
    u.old_price = price_;
    u.demand = demand_;
    u.excess = excess_;
    u.supply = supply_;
    u.raw = raw_reserve_update(price_, excess_, supply_);
    price_ = clamp_reserve_price(u.raw, config_.floor, config_.cap);
    if (config_.cap_enabled() && u.raw > config_.cap) {
        closed_until_ = now + config_.closure_ticks;
        u.closure_triggered = true;
    }
    u.new_price = price_;
    u.closed_until = closed_until_;
    demand_ = 0;
    excess_ = -supply_;
    return u;
}

bool ReservePriceState::is_open(Tick now) {
    if (closed_until_ && now >= *closed_until_) closed_until_.reset();
    return !closed_until_;
}

std::optional<PriceEntry> PriceBoard::lookup(LinkId link) const {
    if (auto it = entries_.find(link); it != entries_.end()) return it->second;
    return std::nullopt;
}

Money PriceBoard::entry_cost(LinkId link) const {
    auto e = lookup(link);
    if (!e) return 0.0;
    return e->open ? e->price : std::numeric_limits<Money>::infinity();
}

PriceBoard publish_prices(std::span<const ReservePriceState> states, Tick now) {
    std::map<LinkId, PriceEntry> entries;
    for (const auto& s : states) entries[s.link()] = PriceEntry{s.price(), s.open_at(now)};
    return PriceBoard(now, std::move(entries));
}

}  // namespace aim
