#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aim/auction.hpp"
#include "aim/compliance/priority.hpp"
#include "aim/compliance/windows.hpp"
#include "aim/network.hpp"
#include "aim/pricing.hpp"

namespace aim {

enum class Policy : std::uint8_t { kFcfs, kCa, kCtaCa };
std::string_view to_string(Policy p);
Policy policy_from_string(std::string_view s);

struct LinkOverride {
    std::string from;
    std::string to;
    std::optional<Tick> free_flow_ticks;
    std::optional<int> supply;
};

struct TopologySpec {
    int rows = 1;
    int cols = 1;
    Tick link_ticks = 10;
    Tick terminal_ticks = 10;
    std::vector<LinkOverride> overrides;
};

struct FlowSpec {
    std::string origin;
    std::string destination;
    /// Expected spawns per tick (Poisson).
    double rate = 0;
    Tick start_tick = 0;
    std::optional<Tick> end_tick;
    double legacy_share = 0;
    /// Class name -> relative weight. Empty means all standard.
    std::map<std::string, double> classes;
    Speed speed{1, 1};
};

struct ScriptedVehicle {
    Tick spawn_tick = 0;
    std::string origin;
    std::string destination;
    double alpha = 1.0;
    Money budget = 0;
    std::string priority_class = "standard";
    bool equipped = true;
    Speed speed{1, 1};
};

struct DriverSpec {
    double alpha_median = 1.0;
    double alpha_sigma = 0.5;
    /// Budget of a generated agent is budget_factor x alpha.
    double budget_factor = 50.0;
    double bid_escalation = 1.2;
    /// Agents request once their earliest arrival is within this many rounds.
    int request_horizon_rounds = 2;
    std::size_t route_alternatives = 4;
};

struct Features {
    bool free_pass = true;
    bool cap = true;
    bool windows = true;
    bool priorities = true;
    bool audit = true;
};

struct Disturbance {
    /// Chance per reservation that the vehicle misses its start tick.
    double probability = 0;
    Tick max_extra_ticks = 3;
};

struct Scenario {
    static constexpr int kVersion = 1;

    std::string name = "unnamed";
    std::uint64_t seed = 1;
    Tick duration_ticks = 1000;
    Policy policy = Policy::kCtaCa;

    TopologySpec topology;
    int grid_size = IntersectionGrid::kDefaultSize;
    int lanes_per_approach = IntersectionGrid::kDefaultLanes;
    int safety_buffer = 0;

    AuctionSchedule schedule;
    bool exact_solver = false;
    std::size_t evaluations_per_tick = kDefaultEvaluationsPerTick;
    std::size_t oracle_limit = 20;
    bool multiplier_affects_payment = false;

    PricingConfig pricing;
    /// Cap as a multiple of the initial price.
    double cap_factor = 100.0;
    /// Ticks per pricing period; 0 means one auction round.
    Tick pricing_period = 0;
    int supply = 4;

    Tick fcfs_horizon = 200;
    Tick free_pass_threshold = 60;
    WindowSchedule windows;
    /// Five years of one-second ticks.
    Tick audit_retention_ticks = 5LL * 365 * 24 * 3600;
    Tick moving_average_window = 100;

    Features features;
    std::vector<PriorityClass> priority_classes;  // added to or replacing the defaults
    DriverSpec drivers;
    std::vector<FlowSpec> flows;
    std::vector<ScriptedVehicle> vehicles;
    Disturbance disturbance;
    bool parallel = false;

    [[nodiscard]] Tick round_ticks() const { return schedule.period(); }
    [[nodiscard]] Tick effective_pricing_period() const { return pricing_period > 0 ? pricing_period : round_ticks(); }
    /// Pricing with the cap applied or removed according to the feature toggle.
    [[nodiscard]] PricingConfig effective_pricing() const;
    [[nodiscard]] PriorityTable effective_priorities() const;
    /// True when some traffic is not equipped to bid.
    [[nodiscard]] bool has_legacy_traffic() const;
    [[nodiscard]] bool windows_active() const;
};

/// Turns off every compliance extension: no cap, no free pass, no windows, all
/// classes neutral.
void apply_paper_mode(Scenario& s);

/// Throws ConfigError naming the offending field.
void validate(const Scenario& s);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

/// Network described by the topology spec, overrides applied.
RoadNetwork build_network(const Scenario& s);

/// FNV-1a digest of the canonical JSON form, as 16 hex digits.
std::string config_digest(const Scenario& s);

std::vector<std::string> builtin_scenario_names();
/// Throws ConfigError for an unknown name.
Scenario builtin_scenario(std::string_view name);

}  // namespace aim
