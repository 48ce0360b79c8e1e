#pragma once

#include <cstdint>
#include <string_view>

#include "aim/types.hpp"

namespace aim {

enum class WindowPhase : std::uint8_t { kAuction, kLegacy };

std::string_view to_string(WindowPhase p);

/// Alternating service windows for equipped (auction) and legacy (FCFS) traffic.
struct WindowSchedule {
    Tick auction_window = 10;
    Tick legacy_window = 10;
    bool adaptive = false;
    Tick min_window = 2;
    Tick max_window = 18;

    [[nodiscard]] Tick cycle() const { return auction_window + legacy_window; }
    void validate() const;
};

/// Phase at `now` for a fixed split: auction first, then legacy, repeating from tick 0.
WindowPhase window_phase(const WindowSchedule& schedule, Tick now);

/// Next split proportional to the observed arrivals, clamped to the bounds; the
/// cycle length is preserved. Returns `current` unchanged when nothing arrived.
WindowSchedule adapt_split(const WindowSchedule& current, std::uint64_t equipped, std::uint64_t legacy);

/// Stateful schedule; re-splits after every complete cycle when adaptive.
class WindowScheduler {
public:
    explicit WindowScheduler(WindowSchedule schedule = {});

    /// Must be queried with non-decreasing ticks.
    WindowPhase phase(Tick now);
    void record_arrival(bool equipped);

    [[nodiscard]] const WindowSchedule& schedule() const { return schedule_; }
    [[nodiscard]] Tick cycle_start() const { return cycle_start_; }

private:
    WindowSchedule schedule_;
    Tick cycle_start_ = 0;
    std::uint64_t equipped_ = 0;
    std::uint64_t legacy_ = 0;
};

}  // namespace aim
