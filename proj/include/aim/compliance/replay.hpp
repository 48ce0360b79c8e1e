#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aim/ledger.hpp"
#include "aim/types.hpp"

namespace aim {

struct Discrepancy {
    std::uint64_t seq = 0;
    IntersectionId intersection;
    std::size_t line = 0;  // 1-based line number in the log
    std::string message;
};

/// Ledger mutation re-executed during replay.
struct LedgerEvent {
    Tick tick = 0;
    IntersectionId intersection;
    bool commit = true;  // false for a cancellation
    std::uint64_t reservation = 0;
    std::optional<VehicleId> vehicle;
    ReservationKind kind = ReservationKind::kAuction;
    std::size_t slots = 0;
};

struct ReplayReport {
    bool pass = true;
    std::vector<Discrepancy> discrepancies;
    std::vector<std::string> warnings;
    std::vector<LedgerEvent> history;
    std::size_t records = 0;
    std::size_t confirms = 0;
    std::size_t cancels = 0;
    std::size_t price_updates = 0;

    /// Human-readable verdict followed by one line per discrepancy.
    [[nodiscard]] std::string to_text() const;
};

/// Re-executes the logged decisions against fresh ledgers and price states. The
/// first line must be the audit header. Throws AuditFormatError on a corrupt or
/// truncated log.
ReplayReport audit_replay(std::span<const std::string> lines);
ReplayReport audit_replay_file(const std::filesystem::path& path);

}  // namespace aim
