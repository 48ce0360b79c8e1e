#include "aim/compliance/windows.hpp"

#include <algorithm>
#include <cmath>

namespace aim {

std::string_view to_string(WindowPhase p) { return p == WindowPhase::kAuction ? "auction" : "legacy"; }

void WindowSchedule::validate() const {
    if (auction_window < 1 || legacy_window < 1) throw ParameterError("both service windows must be >= 1 tick");
    if (adaptive && (min_window < 1 || max_window < min_window))
        throw ParameterError("adaptive window bounds must satisfy 1 <= min <= max");
}

WindowPhase window_phase(const WindowSchedule& schedule, Tick now) {
    return now % schedule.cycle() < schedule.auction_window ? WindowPhase::kAuction : WindowPhase::kLegacy;
}

WindowSchedule adapt_split(const WindowSchedule& current, std::uint64_t equipped, std::uint64_t legacy) {
    if (equipped + legacy == 0) return current;
    const Tick cycle = current.cycle();
    const double share = static_cast<double>(equipped) / static_cast<double>(equipped + legacy);
    // Both windows must stay within the bounds and at least one tick long.
    const Tick lo = std::max<Tick>({1, current.min_window, cycle - current.max_window});
    const Tick hi = std::min<Tick>({cycle - 1, current.max_window, cycle - current.min_window});
    WindowSchedule next = current;
    next.auction_window = std::clamp<Tick>(std::llround(share * static_cast<double>(cycle)), lo, std::max(lo, hi));
    next.legacy_window = cycle - next.auction_window;
    return next;
}

WindowScheduler::WindowScheduler(WindowSchedule schedule) : schedule_(schedule) { schedule_.validate(); }

WindowPhase WindowScheduler::phase(Tick now) {
    while (now >= cycle_start_ + schedule_.cycle()) {
        const Tick finished = schedule_.cycle();
        if (schedule_.adaptive) schedule_ = adapt_split(schedule_, equipped_, legacy_);
        equipped_ = legacy_ = 0;
        cycle_start_ += finished;
    }
    return now - cycle_start_ < schedule_.auction_window ? WindowPhase::kAuction : WindowPhase::kLegacy;
}

void WindowScheduler::record_arrival(bool equipped) { ++(equipped ? equipped_ : legacy_); }

}  // namespace aim
