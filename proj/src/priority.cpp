#include "aim/compliance/priority.hpp"

namespace aim {

PriorityTable::PriorityTable() { classes_.emplace("standard", PriorityClass{"standard", 1.0, false, false}); }

PriorityTable PriorityTable::defaults() {
    PriorityTable t;
    t.add({"emergency", 1.0, true, true});
    t.add({"low_emission", 1.25, false, false});
    t.add({"high_occupancy", 1.5, false, false});
    t.add({"disabled", 2.0, false, false});
    t.add({"legacy", 1.0, false, false});
    return t;
}

PriorityTable PriorityTable::neutral() {
    PriorityTable t;
    const auto base = defaults();
    for (const auto& c : base.classes()) t.add({c.first, 1.0, false, false});
    return t;
}

void PriorityTable::add(PriorityClass c) {
    if (c.name.empty()) throw ParameterError("priority class needs a name");
    if (!(c.multiplier > 0)) throw ParameterError("priority multiplier must be positive for class " + c.name);
    if (c.absolute_priority && !c.exempt_from_bidding)
        throw ParameterError("absolute priority requires exemption from bidding for class " + c.name);
    auto name = c.name;
    classes_.insert_or_assign(std::move(name), std::move(c));
}

const PriorityClass& PriorityTable::lookup(std::string_view name) const {
    if (auto it = classes_.find(name); it != classes_.end()) return it->second;
    return classes_.find("standard")->second;
}

PriorityResult apply_priority(Bid bid, const PriorityTable& table, std::string_view class_name) {
    const auto& c = table.lookup(class_name);
    if (c.exempt_from_bidding) return ExemptionGrant{bid.bidder, c.absolute_priority};
    bid.priority_multiplier = c.multiplier;
    return bid;
}

}  // namespace aim
