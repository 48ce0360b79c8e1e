#pragma once

#include <map>
#include <vector>

#include "aim/types.hpp"

namespace aim {

struct WaitingRecord {
    VehicleId vehicle;
    Tick first_request_tick = 0;
    int rejections = 0;
    /// Set for vehicles pre-empted by an absolute-priority crossing; due immediately.
    bool guaranteed = false;
};

/// Waiting vehicles of one intersection manager.
class WaitingTable {
public:
    /// Record for `vehicle`, created with `now` as first request tick when absent.
    WaitingRecord& touch(VehicleId vehicle, Tick now);
    void erase(VehicleId vehicle) { records_.erase(vehicle); }
    [[nodiscard]] const WaitingRecord* find(VehicleId vehicle) const;
    WaitingRecord* find(VehicleId vehicle);
    [[nodiscard]] const std::map<VehicleId, WaitingRecord>& records() const { return records_; }
    [[nodiscard]] std::size_t size() const { return records_.size(); }

private:
    std::map<VehicleId, WaitingRecord> records_;
};

struct WaitNotice {
    VehicleId vehicle;
    Tick remaining = 0;
};

struct FreePassDecision {
    /// Due vehicles ordered by first request tick, then vehicle id.
    std::vector<VehicleId> grants;
    /// Remaining wait until free passage for everyone else.
    std::vector<WaitNotice> notices;
};

FreePassDecision free_pass_check(const WaitingTable& table, Tick now, Tick threshold);

}  // namespace aim
