#include "aim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "aim/digest.hpp"

namespace aim {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Policy p) {
    switch (p) {
        case Policy::kFcfs: return "fcfs";
        case Policy::kCa: return "ca";
        case Policy::kCtaCa: return "cta-ca";
    }
    return "?";
}

Policy policy_from_string(std::string_view s) {
    if (s == "fcfs") return Policy::kFcfs;
    if (s == "ca") return Policy::kCa;
    if (s == "cta-ca") return Policy::kCtaCa;
    throw ConfigError("policy: expected one of fcfs, ca, cta-ca, got '" + std::string(s) + "'");
}

PricingConfig Scenario::effective_pricing() const {
    PricingConfig p = pricing;
    p.cap = features.cap ? pricing.initial_price * cap_factor : std::numeric_limits<Money>::infinity();
    return p;
}

PriorityTable Scenario::effective_priorities() const {
    if (!features.priorities) return PriorityTable::neutral();
    auto table = PriorityTable::defaults();
    for (const auto& c : priority_classes) table.add(c);
    return table;
}

bool Scenario::has_legacy_traffic() const {
    for (const auto& f : flows)
        if (f.legacy_share > 0) return true;
    for (const auto& v : vehicles)
        if (!v.equipped) return true;
    return false;
}

bool Scenario::windows_active() const {
    return features.windows && policy != Policy::kFcfs && has_legacy_traffic();
}

void apply_paper_mode(Scenario& s) {
    s.features.free_pass = false;
    s.features.cap = false;
    s.features.windows = false;
    s.features.priorities = false;
}

namespace {

// Typed access to one JSON object, with the field path in every error message.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    template <typename T>
    T get(std::string_view key, T fallback) {
        seen_.insert(std::string(key));
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return fallback;
        return convert<T>(*it, field(key));
    }

    template <typename T>
    T require(std::string_view key) {
        seen_.insert(std::string(key));
        auto it = j_.find(key);
        if (it == j_.end()) throw ConfigError(field(key) + ": missing required field");
        return convert<T>(*it, field(key));
    }

    std::optional<Reader> object(std::string_view key) {
        seen_.insert(std::string(key));
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return std::nullopt;
        return Reader(*it, field(key));
    }

    const json* array(std::string_view key) {
        seen_.insert(std::string(key));
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return nullptr;
        if (!it->is_array()) throw ConfigError(field(key) + ": expected an array");
        return &*it;
    }

    const json* raw(std::string_view key) {
        seen_.insert(std::string(key));
        auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.contains(k)) throw ConfigError(field(k) + ": unknown field");
    }

    [[nodiscard]] std::string field(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }
    [[nodiscard]] std::string where() const { return path_.empty() ? std::string("<root>") : path_; }

private:
    template <typename T>
    static T convert(const json& v, const std::string& name) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(name + ": expected true or false");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(name + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) return v.get<T>();
                if (v.get<std::int64_t>() < 0) throw ConfigError(name + ": must be non-negative");
            }
            return v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError(name + ": expected a number");
            return v.get<T>();
        } else {
            if (!v.is_string()) throw ConfigError(name + ": expected a string");
            return v.get<std::string>();
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

Speed parse_speed(const json* v, const std::string& name, Speed fallback) {
    if (!v) return fallback;
    if (v->is_number_integer()) return Speed{v->get<std::int64_t>(), 1};
    if (v->is_array() && v->size() == 2 && (*v)[0].is_number_integer() && (*v)[1].is_number_integer())
        return Speed{(*v)[0].get<std::int64_t>(), (*v)[1].get<std::int64_t>()};
    throw ConfigError(name + ": expected an integer or [numerator, denominator]");
}

ordered_json speed_json(Speed s) {
    if (s.den == 1) return s.num;
    return ordered_json::array({s.num, s.den});
}

void require_that(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw ConfigError(field + ": " + message);
}

}  // namespace

Scenario scenario_from_json(const json& j) {
    Scenario s;
    Reader root(j, "");
    const int version = root.require<int>("version");
    if (version != Scenario::kVersion)
        throw ConfigError("version: unsupported scenario version " + std::to_string(version));
    s.name = root.get<std::string>("name", s.name);
    s.seed = root.get<std::uint64_t>("seed", s.seed);
    s.duration_ticks = root.get<Tick>("duration_ticks", s.duration_ticks);
    s.policy = policy_from_string(root.get<std::string>("policy", std::string(to_string(s.policy))));
    s.parallel = root.get<bool>("parallel", s.parallel);

    if (auto t = root.object("topology")) {
        const auto kind = t->get<std::string>("kind", "grid");
        if (kind != "grid") throw ConfigError("topology.kind: only 'grid' is supported");
        s.topology.rows = t->get<int>("rows", s.topology.rows);
        s.topology.cols = t->get<int>("cols", s.topology.cols);
        s.topology.link_ticks = t->get<Tick>("link_ticks", s.topology.link_ticks);
        s.topology.terminal_ticks = t->get<Tick>("terminal_ticks", s.topology.terminal_ticks);
        if (const auto* arr = t->array("overrides")) {
            for (std::size_t i = 0; i < arr->size(); ++i) {
                Reader o((*arr)[i], "topology.overrides[" + std::to_string(i) + "]");
                LinkOverride lo;
                lo.from = o.require<std::string>("from");
                lo.to = o.require<std::string>("to");
                if (o.raw("free_flow_ticks")) lo.free_flow_ticks = o.require<Tick>("free_flow_ticks");
                if (o.raw("supply")) lo.supply = o.require<int>("supply");
                o.finish();
                s.topology.overrides.push_back(std::move(lo));
            }
        }
        t->finish();
    }

    if (auto x = root.object("intersection")) {
        s.grid_size = x->get<int>("grid_size", s.grid_size);
        s.lanes_per_approach = x->get<int>("lanes_per_approach", s.lanes_per_approach);
        s.safety_buffer = x->get<int>("safety_buffer", s.safety_buffer);
        x->finish();
    }

    if (auto a = root.object("auction")) {
        s.schedule.collect_ticks = a->get<Tick>("collect_ticks", s.schedule.collect_ticks);
        s.schedule.solve_ticks = a->get<Tick>("solve_ticks", s.schedule.solve_ticks);
        s.exact_solver = a->get<bool>("exact_solver", s.exact_solver);
        s.evaluations_per_tick = a->get<std::size_t>("evaluations_per_tick", s.evaluations_per_tick);
        s.oracle_limit = a->get<std::size_t>("oracle_limit", s.oracle_limit);
        s.multiplier_affects_payment = a->get<bool>("multiplier_affects_payment", s.multiplier_affects_payment);
        a->finish();
    }

    if (auto p = root.object("pricing")) {
        s.pricing.initial_price = p->get<double>("initial_price", s.pricing.initial_price);
        s.pricing.floor = p->get<double>("floor", s.pricing.floor);
        s.cap_factor = p->get<double>("cap_factor", s.cap_factor);
        s.pricing.closure_ticks = p->get<Tick>("closure_ticks", s.pricing.closure_ticks);
        s.pricing_period = p->get<Tick>("period_ticks", s.pricing_period);
        s.supply = p->get<int>("supply", s.supply);
        p->finish();
    }

    if (auto f = root.object("fcfs")) {
        s.fcfs_horizon = f->get<Tick>("horizon_ticks", s.fcfs_horizon);
        f->finish();
    }
    if (auto f = root.object("free_pass")) {
        s.free_pass_threshold = f->get<Tick>("threshold_ticks", s.free_pass_threshold);
        f->finish();
    }
    if (auto w = root.object("windows")) {
        s.windows.auction_window = w->get<Tick>("auction_ticks", s.windows.auction_window);
        s.windows.legacy_window = w->get<Tick>("legacy_ticks", s.windows.legacy_window);
        s.windows.adaptive = w->get<bool>("adaptive", s.windows.adaptive);
        s.windows.min_window = w->get<Tick>("min_ticks", s.windows.min_window);
        s.windows.max_window = w->get<Tick>("max_ticks", s.windows.max_window);
        w->finish();
    }
    if (auto a = root.object("audit")) {
        s.audit_retention_ticks = a->get<Tick>("retention_ticks", s.audit_retention_ticks);
        a->finish();
    }
    if (auto m = root.object("metrics")) {
        s.moving_average_window = m->get<Tick>("moving_average_window", s.moving_average_window);
        m->finish();
    }
    if (auto f = root.object("features")) {
        s.features.free_pass = f->get<bool>("free_pass", s.features.free_pass);
        s.features.cap = f->get<bool>("cap", s.features.cap);
        s.features.windows = f->get<bool>("windows", s.features.windows);
        s.features.priorities = f->get<bool>("priorities", s.features.priorities);
        s.features.audit = f->get<bool>("audit", s.features.audit);
        f->finish();
    }
    if (const auto* arr = root.array("priority_classes")) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            Reader c((*arr)[i], "priority_classes[" + std::to_string(i) + "]");
            PriorityClass pc;
            pc.name = c.require<std::string>("name");
            pc.multiplier = c.get<double>("multiplier", pc.multiplier);
            pc.exempt_from_bidding = c.get<bool>("exempt", pc.exempt_from_bidding);
            pc.absolute_priority = c.get<bool>("absolute", pc.absolute_priority);
            c.finish();
            s.priority_classes.push_back(std::move(pc));
        }
    }
    if (auto d = root.object("drivers")) {
        s.drivers.alpha_median = d->get<double>("alpha_median", s.drivers.alpha_median);
        s.drivers.alpha_sigma = d->get<double>("alpha_sigma", s.drivers.alpha_sigma);
        s.drivers.budget_factor = d->get<double>("budget_factor", s.drivers.budget_factor);
        s.drivers.bid_escalation = d->get<double>("bid_escalation", s.drivers.bid_escalation);
        s.drivers.request_horizon_rounds = d->get<int>("request_horizon_rounds", s.drivers.request_horizon_rounds);
        s.drivers.route_alternatives = d->get<std::size_t>("route_alternatives", s.drivers.route_alternatives);
        d->finish();
    }
    if (auto d = root.object("demand")) {
        if (const auto* flows = d->array("flows")) {
            for (std::size_t i = 0; i < flows->size(); ++i) {
                const auto name = "demand.flows[" + std::to_string(i) + "]";
                Reader f((*flows)[i], name);
                FlowSpec fs;
                fs.origin = f.require<std::string>("origin");
                fs.destination = f.require<std::string>("destination");
                fs.rate = f.require<double>("rate");
                fs.start_tick = f.get<Tick>("start_tick", fs.start_tick);
                if (f.raw("end_tick")) fs.end_tick = f.require<Tick>("end_tick");
                fs.legacy_share = f.get<double>("legacy_share", fs.legacy_share);
                fs.speed = parse_speed(f.raw("speed"), name + ".speed", fs.speed);
                if (auto classes = f.object("classes")) {
                    for (const auto& [k, v] : (*flows)[i].at("classes").items())
                        fs.classes[k] = classes->require<double>(k);
                    classes->finish();
                }
                f.finish();
                s.flows.push_back(std::move(fs));
            }
        }
        if (const auto* vs = d->array("vehicles")) {
            for (std::size_t i = 0; i < vs->size(); ++i) {
                const auto name = "demand.vehicles[" + std::to_string(i) + "]";
                Reader v((*vs)[i], name);
                ScriptedVehicle sv;
                sv.spawn_tick = v.require<Tick>("spawn_tick");
                sv.origin = v.require<std::string>("origin");
                sv.destination = v.require<std::string>("destination");
                sv.alpha = v.get<double>("alpha", sv.alpha);
                sv.budget = v.get<double>("budget", sv.budget);
                sv.priority_class = v.get<std::string>("class", sv.priority_class);
                sv.equipped = v.get<bool>("equipped", sv.equipped);
                sv.speed = parse_speed(v.raw("speed"), name + ".speed", sv.speed);
                v.finish();
                s.vehicles.push_back(std::move(sv));
            }
        }
        d->finish();
    }
    if (auto d = root.object("disturbance")) {
        s.disturbance.probability = d->get<double>("probability", s.disturbance.probability);
        s.disturbance.max_extra_ticks = d->get<Tick>("max_extra_ticks", s.disturbance.max_extra_ticks);
        d->finish();
    }
    root.finish();
    validate(s);
    return s;
}

ordered_json to_json(const Scenario& s) {
    ordered_json j;
    j["version"] = Scenario::kVersion;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["duration_ticks"] = s.duration_ticks;
    j["policy"] = to_string(s.policy);
    j["parallel"] = s.parallel;

    ordered_json overrides = ordered_json::array();
    for (const auto& o : s.topology.overrides) {
        ordered_json oj{{"from", o.from}, {"to", o.to}};
        if (o.free_flow_ticks) oj["free_flow_ticks"] = *o.free_flow_ticks;
        if (o.supply) oj["supply"] = *o.supply;
        overrides.push_back(std::move(oj));
    }
    j["topology"] = {{"kind", "grid"},
                     {"rows", s.topology.rows},
                     {"cols", s.topology.cols},
                     {"link_ticks", s.topology.link_ticks},
                     {"terminal_ticks", s.topology.terminal_ticks},
                     {"overrides", std::move(overrides)}};
    j["intersection"] = {{"grid_size", s.grid_size},
                         {"lanes_per_approach", s.lanes_per_approach},
                         {"safety_buffer", s.safety_buffer}};
    j["auction"] = {{"collect_ticks", s.schedule.collect_ticks},
                    {"solve_ticks", s.schedule.solve_ticks},
                    {"exact_solver", s.exact_solver},
                    {"evaluations_per_tick", s.evaluations_per_tick},
                    {"oracle_limit", s.oracle_limit},
                    {"multiplier_affects_payment", s.multiplier_affects_payment}};
    j["pricing"] = {{"initial_price", s.pricing.initial_price},
                    {"floor", s.pricing.floor},
                    {"cap_factor", s.cap_factor},
                    {"closure_ticks", s.pricing.closure_ticks},
                    {"period_ticks", s.pricing_period},
                    {"supply", s.supply}};
    j["fcfs"] = {{"horizon_ticks", s.fcfs_horizon}};
    j["free_pass"] = {{"threshold_ticks", s.free_pass_threshold}};
    j["windows"] = {{"auction_ticks", s.windows.auction_window},
                    {"legacy_ticks", s.windows.legacy_window},
                    {"adaptive", s.windows.adaptive},
                    {"min_ticks", s.windows.min_window},
                    {"max_ticks", s.windows.max_window}};
    j["audit"] = {{"retention_ticks", s.audit_retention_ticks}};
    j["metrics"] = {{"moving_average_window", s.moving_average_window}};
    j["features"] = {{"free_pass", s.features.free_pass},
                     {"cap", s.features.cap},
                     {"windows", s.features.windows},
                     {"priorities", s.features.priorities},
                     {"audit", s.features.audit}};
    ordered_json classes = ordered_json::array();
    for (const auto& c : s.priority_classes)
        classes.push_back({{"name", c.name},
                           {"multiplier", c.multiplier},
                           {"exempt", c.exempt_from_bidding},
                           {"absolute", c.absolute_priority}});
    j["priority_classes"] = std::move(classes);
    j["drivers"] = {{"alpha_median", s.drivers.alpha_median},
                    {"alpha_sigma", s.drivers.alpha_sigma},
                    {"budget_factor", s.drivers.budget_factor},
                    {"bid_escalation", s.drivers.bid_escalation},
                    {"request_horizon_rounds", s.drivers.request_horizon_rounds},
                    {"route_alternatives", s.drivers.route_alternatives}};

    ordered_json flows = ordered_json::array();
    for (const auto& f : s.flows) {
        ordered_json fj{{"origin", f.origin}, {"destination", f.destination}, {"rate", f.rate},
                        {"start_tick", f.start_tick}};
        if (f.end_tick) fj["end_tick"] = *f.end_tick;
        fj["legacy_share"] = f.legacy_share;
        fj["speed"] = speed_json(f.speed);
        if (!f.classes.empty()) {
            ordered_json cj = ordered_json::object();
            for (const auto& [k, w] : f.classes) cj[k] = w;
            fj["classes"] = std::move(cj);
        }
        flows.push_back(std::move(fj));
    }
    ordered_json vehicles = ordered_json::array();
    for (const auto& v : s.vehicles)
        vehicles.push_back({{"spawn_tick", v.spawn_tick},
                            {"origin", v.origin},
                            {"destination", v.destination},
                            {"alpha", v.alpha},
                            {"budget", v.budget},
                            {"class", v.priority_class},
                            {"equipped", v.equipped},
                            {"speed", speed_json(v.speed)}});
    j["demand"] = {{"flows", std::move(flows)}, {"vehicles", std::move(vehicles)}};
    j["disturbance"] = {{"probability", s.disturbance.probability},
                        {"max_extra_ticks", s.disturbance.max_extra_ticks}};
    return j;
}

void validate(const Scenario& s) {
    require_that(s.duration_ticks >= 0, "duration_ticks", "must be non-negative");
    require_that(s.topology.rows >= 1 && s.topology.cols >= 1, "topology", "rows and cols must be >= 1");
    require_that(s.topology.link_ticks >= 1, "topology.link_ticks", "must be >= 1");
    require_that(s.topology.terminal_ticks >= 1, "topology.terminal_ticks", "must be >= 1");
    require_that(s.grid_size >= 2, "intersection.grid_size", "must be >= 2");
    require_that(s.lanes_per_approach >= 1 && s.lanes_per_approach <= s.grid_size, "intersection.lanes_per_approach",
                 "must be in [1, grid_size]");
    require_that(s.safety_buffer >= 0, "intersection.safety_buffer", "must be non-negative");
    require_that(s.schedule.collect_ticks >= 1, "auction.collect_ticks", "must be >= 1");
    require_that(s.schedule.solve_ticks >= 1, "auction.solve_ticks", "must be >= 1");
    require_that(s.evaluations_per_tick >= 1, "auction.evaluations_per_tick", "must be >= 1");
    require_that(s.pricing.initial_price > 0, "pricing.initial_price", "must be positive");
    require_that(s.pricing.floor > 0 && s.pricing.floor <= s.pricing.initial_price, "pricing.floor",
                 "must be positive and at most the initial price");
    require_that(s.cap_factor >= 1, "pricing.cap_factor", "must be >= 1");
    require_that(s.pricing.closure_ticks >= 0, "pricing.closure_ticks", "must be non-negative");
    require_that(s.pricing_period >= 0, "pricing.period_ticks", "must be non-negative");
    require_that(s.supply >= 1, "pricing.supply", "must be >= 1");
    require_that(s.fcfs_horizon >= 1, "fcfs.horizon_ticks", "must be >= 1");
    require_that(s.free_pass_threshold >= 1, "free_pass.threshold_ticks", "must be >= 1");
    try {
        s.windows.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("windows: ") + e.what());
    }
    require_that(s.audit_retention_ticks >= 0, "audit.retention_ticks", "must be non-negative");
    require_that(s.moving_average_window >= 1, "metrics.moving_average_window", "must be >= 1");
    require_that(s.drivers.alpha_median > 0, "drivers.alpha_median", "must be positive");
    require_that(s.drivers.alpha_sigma >= 0, "drivers.alpha_sigma", "must be non-negative");
    require_that(s.drivers.budget_factor >= 0, "drivers.budget_factor", "must be non-negative");
    require_that(s.drivers.bid_escalation >= 1, "drivers.bid_escalation", "must be >= 1");
    require_that(s.drivers.request_horizon_rounds >= 1, "drivers.request_horizon_rounds", "must be >= 1");
    require_that(s.drivers.route_alternatives >= 1, "drivers.route_alternatives", "must be >= 1");
    require_that(s.disturbance.probability >= 0 && s.disturbance.probability <= 1, "disturbance.probability",
                 "must be in [0, 1]");
    require_that(s.disturbance.max_extra_ticks >= 1, "disturbance.max_extra_ticks", "must be >= 1");

    for (std::size_t i = 0; i < s.priority_classes.size(); ++i) {
        const auto name = "priority_classes[" + std::to_string(i) + "]";
        require_that(!s.priority_classes[i].name.empty(), name + ".name", "must not be empty");
        require_that(s.priority_classes[i].multiplier > 0, name + ".multiplier", "must be positive");
    }

    const auto net = build_network(s);
    auto check_terminal = [&](const std::string& node, const std::string& field) {
        auto n = net.find_node(node);
        require_that(n.has_value(), field, "unknown node '" + node + "'");
        require_that(net.node(*n).kind == NodeKind::kTerminal, field, "'" + node + "' is not a terminal");
    };
    const auto table = s.effective_priorities();
    auto check_class = [&](const std::string& name, const std::string& field) {
        require_that(table.classes().contains(name) || PriorityTable::defaults().classes().contains(name), field,
                     "unknown priority class '" + name + "'");
    };
    for (std::size_t i = 0; i < s.flows.size(); ++i) {
        const auto& f = s.flows[i];
        const auto name = "demand.flows[" + std::to_string(i) + "]";
        check_terminal(f.origin, name + ".origin");
        check_terminal(f.destination, name + ".destination");
        require_that(f.origin != f.destination, name + ".destination", "must differ from origin");
        require_that(f.rate >= 0 && std::isfinite(f.rate), name + ".rate", "must be a non-negative number");
        require_that(f.start_tick >= 0, name + ".start_tick", "must be non-negative");
        require_that(f.legacy_share >= 0 && f.legacy_share <= 1, name + ".legacy_share", "must be in [0, 1]");
        require_that(f.speed.valid(), name + ".speed", "must be positive");
        for (const auto& [k, w] : f.classes) {
            check_class(k, name + ".classes." + k);
            require_that(w >= 0, name + ".classes." + k, "weight must be non-negative");
        }
    }
    for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
        const auto& v = s.vehicles[i];
        const auto name = "demand.vehicles[" + std::to_string(i) + "]";
        require_that(v.spawn_tick >= 0, name + ".spawn_tick", "must be non-negative");
        check_terminal(v.origin, name + ".origin");
        check_terminal(v.destination, name + ".destination");
        require_that(v.origin != v.destination, name + ".destination", "must differ from origin");
        require_that(v.alpha > 0, name + ".alpha", "must be positive");
        require_that(v.budget >= 0, name + ".budget", "must be non-negative");
        require_that(v.speed.valid(), name + ".speed", "must be positive");
        check_class(v.priority_class, name + ".class");
    }
}

RoadNetwork build_network(const Scenario& s) {
    RoadNetwork net;
    try {
        net = RoadNetwork::grid(s.topology.rows, s.topology.cols, s.topology.link_ticks, s.topology.terminal_ticks,
                                s.supply);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("topology: ") + e.what());
    }
    for (std::size_t i = 0; i < s.topology.overrides.size(); ++i) {
        const auto& o = s.topology.overrides[i];
        const auto name = "topology.overrides[" + std::to_string(i) + "]";
        auto from = net.find_node(o.from);
        auto to = net.find_node(o.to);
        require_that(from.has_value(), name + ".from", "unknown node '" + o.from + "'");
        require_that(to.has_value(), name + ".to", "unknown node '" + o.to + "'");
        auto link = net.find_link(*from, *to);
        require_that(link.has_value(), name, "no link " + o.from + "->" + o.to);
        auto& l = net.link_mut(*link);
        if (o.free_flow_ticks) {
            require_that(*o.free_flow_ticks >= 1, name + ".free_flow_ticks", "must be >= 1");
            l.free_flow_ticks = *o.free_flow_ticks;
        }
        if (o.supply) {
            require_that(*o.supply >= 1, name + ".supply", "must be >= 1");
            l.supply = *o.supply;
        }
    }
    try {
        net.validate();
    } catch (const RoutingError& e) {
        throw ConfigError(std::string("topology: ") + e.what());
    }
    return net;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open scenario file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    try {
        return scenario_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string config_digest(const Scenario& s) {
    Fnv1a64 h;
    const auto text = to_json(s).dump();
    h.update(text);
    return to_hex(h.value());
}

namespace {

FlowSpec flow(std::string origin, std::string destination, double rate) {
    FlowSpec f;
    f.origin = std::move(origin);
    f.destination = std::move(destination);
    f.rate = rate;
    return f;
}

// Flows between every pair of opposite terminals of a single intersection plus
// one turning flow per side.
void single_intersection_flows(Scenario& s, double rate) {
    const char* sides[] = {"N", "E", "S", "W"};
    const char* opposite_side[] = {"S", "W", "N", "E"};
    const char* left_of[] = {"E", "S", "W", "N"};
    for (int i = 0; i < 4; ++i) {
        s.flows.push_back(flow(std::string("I0:") + sides[i], std::string("I0:") + opposite_side[i], rate * 0.7));
        s.flows.push_back(flow(std::string("I0:") + sides[i], std::string("I0:") + left_of[i], rate * 0.3));
    }
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
    return {"smoke", "single", "corridor", "grid2x2", "grid4x4", "saturated", "starvation", "unbounded", "emergency", "mixed"};
}

Scenario builtin_scenario(std::string_view name) {
    Scenario s;
    s.name = std::string(name);
    if (name == "smoke") {
        s.duration_ticks = 200;
        const char* routes[][2] = {{"I0:W", "I0:E"}, {"I0:N", "I0:S"}, {"I0:E", "I0:W"}, {"I0:S", "I0:N"},
                                   {"I0:W", "I0:N"}, {"I0:N", "I0:E"}, {"I0:E", "I0:S"}, {"I0:S", "I0:W"},
                                   {"I0:W", "I0:S"}, {"I0:E", "I0:N"}};
        for (int i = 0; i < 10; ++i) {
            ScriptedVehicle v;
            v.spawn_tick = i * 3;
            v.origin = routes[i][0];
            v.destination = routes[i][1];
            v.alpha = 0.5 + 0.25 * i;
            v.budget = 50 * v.alpha;
            s.vehicles.push_back(v);
        }
    } else if (name == "single") {
        s.policy = Policy::kCa;
        s.duration_ticks = 2000;
        s.drivers.alpha_sigma = 1.0;
        s.drivers.budget_factor = 3;
        single_intersection_flows(s, 0.56);
    } else if (name == "corridor") {
        s.duration_ticks = 2000;
        s.topology.cols = 3;
        s.flows.push_back(flow("I0:W", "I2:E", 0.2));
        s.flows.push_back(flow("I2:E", "I0:W", 0.2));
        for (int i = 0; i < 3; ++i) {
            const auto id = "I" + std::to_string(i);
            s.flows.push_back(flow(id + ":N", id + ":S", 0.1));
            s.flows.push_back(flow(id + ":S", id + ":N", 0.1));
        }
    } else if (name == "grid2x2") {
        s.duration_ticks = 3000;
        s.topology.rows = 2;
        s.topology.cols = 2;
        s.flows.push_back(flow("I0:W", "I3:S", 0.34));
        s.flows.push_back(flow("I0:N", "I3:E", 0.34));
        s.flows.push_back(flow("I3:E", "I0:W", 0.27));
        s.flows.push_back(flow("I1:N", "I1:E", 0.27));
        s.flows.push_back(flow("I2:W", "I2:S", 0.27));
    } else if (name == "grid4x4") {
        s.duration_ticks = 3000;
        s.topology.rows = 4;
        s.topology.cols = 4;
        s.flows.push_back(flow("I0:W", "I15:E", 0.2));
        s.flows.push_back(flow("I12:W", "I3:E", 0.2));
        s.flows.push_back(flow("I0:N", "I15:S", 0.2));
        s.flows.push_back(flow("I3:N", "I12:S", 0.2));
        s.flows.push_back(flow("I15:E", "I0:W", 0.2));
    } else if (name == "saturated") {
        s.duration_ticks = 1500;
        single_intersection_flows(s, 1.2);
    } else if (name == "starvation") {
        s.duration_ticks = 600;
        s.flows.push_back(flow("I0:W", "I0:E", 0.8));
        s.flows.push_back(flow("I0:N", "I0:S", 0.8));
        s.drivers.budget_factor = 1000;
        ScriptedVehicle poor;
        poor.spawn_tick = 20;
        poor.origin = "I0:S";
        poor.destination = "I0:N";
        poor.budget = 0;
        s.vehicles.push_back(poor);
    } else if (name == "unbounded") {
        s.policy = Policy::kCa;
        s.duration_ticks = 600;
        s.drivers.alpha_sigma = 1.0;
        s.drivers.budget_factor = 3;
        single_intersection_flows(s, 0.17);
        for (int i = 0; i < 2; ++i) {
            ScriptedVehicle slow;
            slow.spawn_tick = 300;
            slow.origin = "I0:W";
            slow.destination = "I0:E";
            slow.budget = 100;
            slow.speed = Speed{1, 4};
            s.vehicles.push_back(slow);
        }
        ScriptedVehicle rich;
        rich.spawn_tick = 310;
        rich.origin = "I0:W";
        rich.destination = "I0:E";
        rich.alpha = 1e6;
        rich.budget = 1e15;
        s.vehicles.push_back(rich);
    } else if (name == "emergency") {
        s.duration_ticks = 1000;
        single_intersection_flows(s, 0.15);
        for (auto& f : s.flows) f.classes = {{"standard", 0.95}, {"emergency", 0.05}};
    } else if (name == "mixed") {
        s.duration_ticks = 2000;
        single_intersection_flows(s, 0.1);
        for (auto& f : s.flows) f.legacy_share = 0.3;
        s.windows.adaptive = true;
    } else {
        throw ConfigError("scenario: unknown built-in scenario '" + std::string(name) + "'");
    }
    validate(s);
    return s;
}

}  // namespace aim
