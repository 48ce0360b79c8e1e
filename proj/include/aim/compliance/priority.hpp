#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>

#include "aim/auction.hpp"

namespace aim {

struct PriorityClass {
    std::string name;
    double multiplier = 1.0;
    bool exempt_from_bidding = false;
    /// Crosses before any other vehicle, free of charge. Implies exemption.
    bool absolute_priority = false;
};

/// Registered vehicle classes. Unknown class names resolve to "standard".
class PriorityTable {
public:
    PriorityTable();

    /// Standard, emergency, low_emission, high_occupancy, disabled and legacy.
    static PriorityTable defaults();
    /// Every class neutral: multiplier 1, nobody exempt.
    static PriorityTable neutral();

    void add(PriorityClass c);
    [[nodiscard]] const PriorityClass& lookup(std::string_view name) const;
    [[nodiscard]] const std::map<std::string, PriorityClass, std::less<>>& classes() const { return classes_; }

private:
    std::map<std::string, PriorityClass, std::less<>> classes_;
};

struct ExemptionGrant {
    VehicleId vehicle;
    bool absolute = false;
};

using PriorityResult = std::variant<Bid, ExemptionGrant>;

/// Stamps the class multiplier onto a bid, or diverts exempt classes out of the auction.
PriorityResult apply_priority(Bid bid, const PriorityTable& table, std::string_view class_name);

}  // namespace aim
