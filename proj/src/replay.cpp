#include "aim/compliance/replay.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "aim/auction.hpp"
#include "aim/compliance/audit.hpp"
#include "aim/digest.hpp"

namespace aim {

namespace {

using nlohmann::ordered_json;

bool close_enough(double a, double b) {
    if (a == b) return true;
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

struct PendingBid {
    Money value = 0;
    double multiplier = 1;
};

struct IntersectionReplay {
    Ledger ledger;
    std::map<std::uint64_t, ReservationId> ids;  // recorded id -> replay ledger id
    std::map<std::uint64_t, Money> prices;       // link -> current price
    std::map<std::uint64_t, PendingBid> bids;    // vehicle -> latest bid
    std::optional<std::uint64_t> last_seq;
    Tick pruned_to = 0;
};

class Replayer {
public:
    explicit Replayer(const AuditHeader& header)
        : header_(header), grid_(header.grid_size, header.lanes_per_approach) {}

    void apply(const AuditRecord& r, std::size_t line, ReplayReport& report) {
        auto& st = state_[r.intersection.value];
        auto fail = [&](std::string msg) {
            report.pass = false;
            report.discrepancies.push_back({r.seq, r.intersection, line, std::move(msg)});
        };

        if (st.last_seq && r.seq <= *st.last_seq) fail("sequence number not increasing");
        st.last_seq = r.seq;
        if (r.tick > st.pruned_to) {
            st.ledger.prune(r.tick);
            st.pruned_to = r.tick;
        }

        const auto& p = r.payload;
        switch (r.kind) {
            case AuditKind::kBid:
                if (!r.vehicle) throw AuditFormatError("bid record without vehicle");
                st.bids[r.vehicle->value] = {p.at("value").get<double>(), p.at("multiplier").get<double>()};
                break;
            case AuditKind::kConfirm: confirm(r, st, report, fail); break;
            case AuditKind::kCancel: cancel(r, st, report, fail); break;
            case AuditKind::kPriceUpdate: price_update(r, st, fail); break;
            case AuditKind::kReject:
            case AuditKind::kFreePass:
            case AuditKind::kClosure:
            case AuditKind::kWindowSwitch: break;
        }
    }

private:
    template <typename Fail>
    void confirm(const AuditRecord& r, IntersectionReplay& st, ReplayReport& report, Fail&& fail) {
        ++report.confirms;
        const auto& p = r.payload;
        if (!r.vehicle) throw AuditFormatError("confirm record without vehicle");
        const auto kind = reservation_kind_from_string(p.at("kind").get<std::string>());
        const auto recorded_id = p.at("reservation").get<std::uint64_t>();
        const Money payment = p.at("payment").get<double>();
        const auto params = params_from_json(p.at("params"));

        Bundle bundle;
        try {
            bundle = rasterize_bundle(grid_, params, header_.safety_buffer);
        } catch (const ParameterError& e) {
            fail(std::string("confirm carries invalid trajectory: ") + e.what());
            return;
        }
        const auto digest = from_hex(p.at("digest").get<std::string>());
        if (bundle_digest(bundle) != digest) {
            fail("bundle digest mismatch for reservation " + std::to_string(recorded_id));
            return;
        }

        if (kind == ReservationKind::kAuction) {
            const Money bid_value = p.at("bid_value").get<double>();
            const double multiplier = p.at("multiplier").get<double>();
            auto it = st.bids.find(r.vehicle->value);
            if (it == st.bids.end()) {
                fail("auction confirmation without a recorded bid");
            } else if (!close_enough(it->second.value, bid_value) || !close_enough(it->second.multiplier, multiplier)) {
                fail("confirmed bid differs from the recorded bid");
            }
            Bid b;
            b.value = bid_value;
            b.priority_multiplier = multiplier;
            const Money expected = auction_payment(b, header_.multiplier_affects_payment);
            if (!close_enough(expected, payment))
                fail("payment " + std::to_string(payment) + " does not match bid under the payment rule (expected " +
                     std::to_string(expected) + ")");
        } else if (payment != 0) {
            fail("non-auction reservation charged " + std::to_string(payment));
        }

        const auto clash = st.ledger.conflicts(bundle);
        if (!clash.empty()) {
            std::uint64_t other = 0;
            for (const auto& [rec, mine] : st.ids)
                if (mine == clash.front()) other = rec;
            fail("double-booking: reservation " + std::to_string(recorded_id) + " overlaps reservation " +
                 std::to_string(other));
            return;
        }
        const auto committed =
            st.ledger.commit(*r.vehicle, std::move(bundle), kind == ReservationKind::kAuction ? payment : 0.0, kind, r.tick);
        st.ids[recorded_id] = committed.id;
        report.history.push_back(
            {r.tick, r.intersection, true, recorded_id, r.vehicle, kind, committed.bundle.size()});
    }

    template <typename Fail>
    void cancel(const AuditRecord& r, IntersectionReplay& st, ReplayReport& report, Fail&& fail) {
        ++report.cancels;
        const auto recorded_id = r.payload.at("reservation").get<std::uint64_t>();
        auto it = st.ids.find(recorded_id);
        if (it == st.ids.end()) {
            fail("cancel of unknown reservation " + std::to_string(recorded_id));
            return;
        }
        const auto* res = st.ledger.find(it->second);
        if (!res) {
            fail("cancel of expired reservation " + std::to_string(recorded_id));
            return;
        }
        const auto kind = res->kind;
        try {
            auto released = st.ledger.cancel(it->second, r.tick);
            report.history.push_back({r.tick, r.intersection, false, recorded_id, r.vehicle, kind, released.size()});
        } catch (const TooLateError&) {
            fail("cancel of reservation " + std::to_string(recorded_id) + " after its crossing began");
        }
        st.ids.erase(it);
    }

    template <typename Fail>
    void price_update(const AuditRecord& r, IntersectionReplay& st, Fail&& fail) {
        const auto& p = r.payload;
        const auto link = p.at("link").get<std::uint64_t>();
        const Money old_price = p.at("old_price").get<double>();
        const int supply = p.at("supply").get<int>();
        const int demand = p.at("demand").get<int>();
        const int excess = p.at("excess").get<int>();
        const Money new_price = p.at("new_price").get<double>();

        auto [it, fresh] = st.prices.try_emplace(link, header_.pricing.initial_price);
        if (!close_enough(it->second, old_price)) {
            fail("price chain broken on link " + std::to_string(link) + ": expected previous price " +
                 std::to_string(it->second));
        } else if (supply <= 0 || excess != demand - supply) {
            fail("excess demand inconsistent with demand and supply on link " + std::to_string(link));
        } else {
            const Money raw = raw_reserve_update(old_price, excess, supply);
            const Money expected = clamp_reserve_price(raw, header_.pricing.floor, header_.pricing.cap);
            if (!close_enough(expected, new_price)) {
                fail("price update on link " + std::to_string(link) + " violates the update rule (expected " +
                     std::to_string(expected) + ", recorded " + std::to_string(new_price) + ")");
            } else if (header_.pricing.cap_enabled() && raw > header_.pricing.cap &&
                       (p.at("closed_until").is_null() ||
                        p.at("closed_until").get<Tick>() != r.tick + header_.pricing.closure_ticks)) {
                fail("price exceeded the cap without the mandated closure on link " + std::to_string(link));
            }
        }
        // Continue from the recorded value so one tampered record is reported once.
        it->second = new_price;
    }

    AuditHeader header_;
    IntersectionGrid grid_;
    std::map<std::uint64_t, IntersectionReplay> state_;
};

}  // namespace

std::string ReplayReport::to_text() const {
    std::ostringstream out;
    out << (pass ? "PASS" : "FAIL") << " records=" << records << " confirms=" << confirms << " cancels=" << cancels
        << " price_updates=" << price_updates << '\n';
    for (const auto& w : warnings) out << "warning: " << w << '\n';
    for (const auto& d : discrepancies)
        out << "discrepancy line=" << d.line << " intersection=" << d.intersection.value << " seq=" << d.seq << ": "
            << d.message << '\n';
    return out.str();
}

ReplayReport audit_replay(std::span<const std::string> lines) {
    ReplayReport report;
    std::size_t first = 0;
    while (first < lines.size() && lines[first].empty()) ++first;
    if (first == lines.size()) {
        report.warnings.push_back("empty audit log; nothing to verify");
        return report;
    }
    const auto header = AuditHeader::parse(lines[first]);
    Replayer replayer(header);
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto record = parse_audit_line(lines[i]);
        ++report.records;
        if (record.kind == AuditKind::kPriceUpdate) ++report.price_updates;
        try {
            replayer.apply(record, i + 1, report);
        } catch (const nlohmann::json::exception& e) {
            throw AuditFormatError("line " + std::to_string(i + 1) + ": malformed payload: " + e.what());
        }
    }
    if (report.records == 0) report.warnings.push_back("audit log holds no records");
    return report;
}

ReplayReport audit_replay_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw AuditFormatError("cannot read audit log " + path.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    if (!in.eof()) throw AuditFormatError("error while reading " + path.string());
    return audit_replay(lines);
}

}  // namespace aim
