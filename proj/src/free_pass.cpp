#include "aim/compliance/free_pass.hpp"

#include <algorithm>

namespace aim {

WaitingRecord& WaitingTable::touch(VehicleId vehicle, Tick now) {
    auto [it, inserted] = records_.try_emplace(vehicle);
    if (inserted) {
        it->second.vehicle = vehicle;
        it->second.first_request_tick = now;
    }
    return it->second;
}

const WaitingRecord* WaitingTable::find(VehicleId vehicle) const {
    auto it = records_.find(vehicle);
    return it == records_.end() ? nullptr : &it->second;
}

WaitingRecord* WaitingTable::find(VehicleId vehicle) {
    auto it = records_.find(vehicle);
    return it == records_.end() ? nullptr : &it->second;
}

FreePassDecision free_pass_check(const WaitingTable& table, Tick now, Tick threshold) {
    if (threshold <= 0) throw ParameterError("free-pass threshold must be positive");
    std::vector<const WaitingRecord*> due;
    FreePassDecision out;
    for (const auto& [id, rec] : table.records()) {
        const Tick elapsed = now - rec.first_request_tick;
        if (rec.guaranteed || elapsed >= threshold) due.push_back(&rec);
        else out.notices.push_back({id, threshold - elapsed});
    }
    std::sort(due.begin(), due.end(), [](const WaitingRecord* a, const WaitingRecord* b) {
        if (a->first_request_tick != b->first_request_tick) return a->first_request_tick < b->first_request_tick;
        return a->vehicle < b->vehicle;
    });
    for (const auto* r : due) out.grants.push_back(r->vehicle);
    return out;
}

}  // namespace aim
