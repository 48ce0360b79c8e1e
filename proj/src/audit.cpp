#include "aim/compliance/audit.hpp"

#include <algorithm>
#include <ostream>

namespace aim {

using nlohmann::ordered_json;

std::string_view to_string(AuditKind k) {
    switch (k) {
        case AuditKind::kBid: return "bid";
        case AuditKind::kConfirm: return "confirm";
        case AuditKind::kReject: return "reject";
        case AuditKind::kCancel: return "cancel";
        case AuditKind::kPriceUpdate: return "price_update";
        case AuditKind::kFreePass: return "free_pass";
        case AuditKind::kClosure: return "closure";
        case AuditKind::kWindowSwitch: return "window_switch";
    }
    return "?";
}

AuditKind audit_kind_from_string(std::string_view s) {
    for (auto k : {AuditKind::kBid, AuditKind::kConfirm, AuditKind::kReject, AuditKind::kCancel,
                   AuditKind::kPriceUpdate, AuditKind::kFreePass, AuditKind::kClosure, AuditKind::kWindowSwitch}) {
        if (to_string(k) == s) return k;
    }
    throw AuditFormatError("unknown audit record kind '" + std::string(s) + "'");
}

std::string to_line(const AuditRecord& r) {
    ordered_json j;
    j["seq"] = r.seq;
    j["tick"] = r.tick;
    j["intersection"] = r.intersection.value;
    j["kind"] = to_string(r.kind);
    j["vehicle"] = r.vehicle ? ordered_json(r.vehicle->value) : ordered_json(nullptr);
    j["payload"] = r.payload;
    return j.dump();
}

AuditRecord parse_audit_line(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw AuditFormatError(std::string("unparsable audit record: ") + e.what());
    }
    try {
        AuditRecord r;
        r.seq = j.at("seq").get<std::uint64_t>();
        r.tick = j.at("tick").get<Tick>();
        r.intersection = IntersectionId{j.at("intersection").get<std::uint64_t>()};
        r.kind = audit_kind_from_string(j.at("kind").get<std::string>());
        if (!j.at("vehicle").is_null()) r.vehicle = VehicleId{j.at("vehicle").get<std::uint64_t>()};
        r.payload = j.at("payload");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw AuditFormatError(std::string("incomplete audit record: ") + e.what());
    }
}

ordered_json params_to_json(const TrajectoryParams& p) {
    ordered_json j;
    j["arrival"] = p.arrival_tick;
    j["speed"] = ordered_json::array({p.speed.num, p.speed.den});
    j["approach"] = to_string(p.approach);
    j["lane"] = p.lane;
    j["turn"] = to_string(p.turn);
    return j;
}

TrajectoryParams params_from_json(const ordered_json& j) {
    TrajectoryParams p;
    p.arrival_tick = j.at("arrival").get<Tick>();
    p.speed = Speed{j.at("speed").at(0).get<std::int64_t>(), j.at("speed").at(1).get<std::int64_t>()};
    p.approach = approach_from_string(j.at("approach").get<std::string>());
    p.lane = j.at("lane").get<int>();
    p.turn = turn_from_string(j.at("turn").get<std::string>());
    return p;
}

std::string AuditHeader::to_line() const {
    ordered_json j;
    j["format"] = "aim-audit";
    j["version"] = kVersion;
    j["grid_size"] = grid_size;
    j["lanes_per_approach"] = lanes_per_approach;
    j["safety_buffer"] = safety_buffer;
    j["multiplier_affects_payment"] = multiplier_affects_payment;
    j["initial_price"] = pricing.initial_price;
    j["price_floor"] = pricing.floor;
    j["price_cap"] = pricing.cap_enabled() ? ordered_json(pricing.cap) : ordered_json(nullptr);
    j["closure_ticks"] = pricing.closure_ticks;
    return j.dump();
}

AuditHeader AuditHeader::parse(std::string_view line) {
    try {
        auto j = ordered_json::parse(line);
        if (j.at("format").get<std::string>() != "aim-audit") throw AuditFormatError("not an audit log header");
        if (j.at("version").get<int>() != kVersion) throw AuditFormatError("unsupported audit log version");
        AuditHeader h;
        h.grid_size = j.at("grid_size").get<int>();
        h.lanes_per_approach = j.at("lanes_per_approach").get<int>();
        h.safety_buffer = j.at("safety_buffer").get<int>();
        h.multiplier_affects_payment = j.at("multiplier_affects_payment").get<bool>();
        h.pricing.initial_price = j.at("initial_price").get<double>();
        h.pricing.floor = j.at("price_floor").get<double>();
        h.pricing.cap = j.at("price_cap").is_null() ? std::numeric_limits<Money>::infinity()
                                                    : j.at("price_cap").get<double>();
        h.pricing.closure_ticks = j.at("closure_ticks").get<Tick>();
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw AuditFormatError(std::string("malformed audit header: ") + e.what());
    }
}

std::uint64_t AuditLog::append(Tick tick, AuditKind kind, std::optional<VehicleId> vehicle, ordered_json payload) {
    AuditRecord r;
    r.tick = tick;
    r.intersection = intersection_;
    r.kind = kind;
    r.vehicle = vehicle;
    r.payload = std::move(payload);
    return append(std::move(r));
}

std::uint64_t AuditLog::append(AuditRecord record) {
    if (last_tick_ && record.tick < *last_tick_)
        throw OrderingError("audit record at tick " + std::to_string(record.tick) + " after tick " +
                            std::to_string(*last_tick_));
    record.seq = next_seq_++;
    record.intersection = intersection_;
    last_tick_ = record.tick;
    if (sink_) *sink_ << to_line(record) << '\n';
    unflushed_.push_back(record);
    records_.push_back(std::move(record));
    return records_.back().seq;
}

std::size_t AuditLog::purge(Tick now, Tick retention_ticks) {
    if (retention_ticks <= 0) throw ParameterError("retention must be positive");
    const Tick cutoff = now - retention_ticks;
    std::size_t removed = 0;
    while (!records_.empty() && records_.front().tick < cutoff) {
        records_.pop_front();
        ++removed;
    }
    return removed;
}

std::vector<AuditRecord> AuditLog::take_unflushed() { return std::exchange(unflushed_, {}); }

}  // namespace aim
