#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aim/geometry.hpp"
#include "aim/pricing.hpp"
#include "aim/types.hpp"

namespace aim {

enum class AuditKind : std::uint8_t {
    kBid,
    kConfirm,
    kReject,
    kCancel,
    kPriceUpdate,
    kFreePass,
    kClosure,
    kWindowSwitch,
};

std::string_view to_string(AuditKind k);
AuditKind audit_kind_from_string(std::string_view s);

/// One audit event. Serialized as a single JSON object per line with the keys in
/// the order seq, tick, intersection, kind, vehicle, payload.
struct AuditRecord {
    std::uint64_t seq = 0;
    Tick tick = 0;
    IntersectionId intersection;
    AuditKind kind = AuditKind::kBid;
    std::optional<VehicleId> vehicle;
    nlohmann::ordered_json payload = nlohmann::ordered_json::object();
};

std::string to_line(const AuditRecord& record);
AuditRecord parse_audit_line(std::string_view line);

nlohmann::ordered_json params_to_json(const TrajectoryParams& p);
TrajectoryParams params_from_json(const nlohmann::ordered_json& j);

/// Configuration a replay needs to re-derive bundles and prices. Written as the
/// first line of an audit file.
struct AuditHeader {
    static constexpr int kVersion = 1;

    int grid_size = IntersectionGrid::kDefaultSize;
    int lanes_per_approach = IntersectionGrid::kDefaultLanes;
    int safety_buffer = 0;
    bool multiplier_affects_payment = false;
    PricingConfig pricing;

    [[nodiscard]] std::string to_line() const;
    static AuditHeader parse(std::string_view line);
};

/// Append-only log of one intersection manager.
class AuditLog {
public:
    explicit AuditLog(IntersectionId intersection = IntersectionId{0}) : intersection_(intersection) {}

    /// Appends and returns the assigned sequence number. Throws OrderingError when
    /// `tick` precedes the last appended tick.
    std::uint64_t append(Tick tick, AuditKind kind, std::optional<VehicleId> vehicle,
                         nlohmann::ordered_json payload = nlohmann::ordered_json::object());
    std::uint64_t append(AuditRecord record);

    /// Removes records older than `now - retention_ticks`.
    std::size_t purge(Tick now, Tick retention_ticks);

    /// Records appended since the previous call.
    std::vector<AuditRecord> take_unflushed();

    /// Every appended record is also written to `sink` as one line.
    void set_sink(std::ostream* sink) { sink_ = sink; }

    [[nodiscard]] const std::deque<AuditRecord>& records() const { return records_; }
    [[nodiscard]] IntersectionId intersection() const { return intersection_; }
    [[nodiscard]] std::uint64_t appended() const { return next_seq_; }

private:
    IntersectionId intersection_;
    std::deque<AuditRecord> records_;
    std::vector<AuditRecord> unflushed_;
    std::uint64_t next_seq_ = 0;
    std::optional<Tick> last_tick_;
    std::ostream* sink_ = nullptr;
};

}  // namespace aim
