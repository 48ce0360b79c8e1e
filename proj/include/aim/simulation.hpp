#pragma once

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "aim/compliance/priority.hpp"
#include "aim/driver.hpp"
#include "aim/manager.hpp"
#include "aim/metrics.hpp"
#include "aim/network.hpp"
#include "aim/scenario.hpp"

namespace aim {

/// One crossing of one intersection, recorded when the vehicle enters it.
struct CrossingRecord {
    VehicleId vehicle;
    IntersectionId intersection;
    std::string priority_class;
    TrajectoryParams params;
    Tick first_request_tick = 0;
    Tick grant_tick = 0;
    Tick start_tick = 0;
    Tick last_tick = 0;
    ReservationKind kind = ReservationKind::kFcfs;
    Money payment = 0;
};

struct RequestEvent {
    VehicleId vehicle;
    IntersectionId intersection;
    Tick tick = 0;
    TrajectoryParams params;
};

struct PriceRow {
    Tick tick = 0;
    IntersectionId intersection;
    LinkId link;
    Money price = 0;
    bool open = true;
};

/// Results of the independent checks run alongside the simulation.
struct InvariantReport {
    /// Two vehicles physically in one cell at one tick.
    std::size_t slot_conflicts = 0;
    /// A vehicle occupied a slot its reservation does not hold.
    std::size_t fact1_violations = 0;
    std::size_t ledger_defects = 0;
    std::size_t budget_violations = 0;
    /// Ledger mutations without a matching audit record, or the reverse.
    std::size_t audit_mismatches = 0;
    bool conserved = true;

    [[nodiscard]] bool ok() const {
        return slot_conflicts == 0 && fact1_violations == 0 && ledger_defects == 0 && budget_violations == 0 &&
               audit_mismatches == 0 && conserved;
    }
    [[nodiscard]] std::string describe() const;
};

struct RunSummary {
    std::string scenario;
    Policy policy = Policy::kCtaCa;
    std::uint64_t seed = 0;
    Tick duration_ticks = 0;
    std::size_t spawned = 0;
    std::size_t completed = 0;
    std::size_t en_route = 0;
    double mean_delay = 0;
    double mean_travel_time = 0;
    /// Mean of the moving-average travel time sampled over the second half of the run.
    std::optional<double> steady_travel_time;
    std::optional<double> spend_delay_spearman;
    Money revenue = 0;
    std::size_t free_passes = 0;
    std::size_t closures = 0;
    std::size_t cancellations = 0;
    Money max_price = 0;
    /// Vehicles still waiting at the end whose wait reached the free-pass threshold.
    std::size_t unserved_long_waits = 0;
    Tick max_wait_ticks = 0;
};

struct RunArtifacts {
    Scenario scenario;
    std::vector<TripRecord> trips;  // every spawned vehicle, in id order
    std::vector<CrossingRecord> crossings;
    std::vector<RequestEvent> requests;
    std::vector<PriceRow> prices;
    /// Header line first, then records in flush order.
    std::vector<std::string> audit_lines;
    std::vector<std::pair<Tick, std::optional<double>>> travel_time_series;
    RunSummary summary;
    InvariantReport invariants;
};

struct SimulationOptions {
    /// Keeps every reservation request for later inspection.
    bool record_requests = false;
    /// Independent per-tick occupancy scan.
    bool occupancy_scan = true;
};

/// Discrete-time world. Each step runs the fixed phase order: spawn, publish
/// prices, requests, priority and free-pass grants, rounds and first-come
/// grants, movement, pricing, flush, prune.
class Simulation {
public:
    explicit Simulation(Scenario scenario, SimulationOptions options = {});

    /// Executes tick now() and advances.
    void step();
    void run_to_end();
    [[nodiscard]] Tick now() const { return now_; }
    [[nodiscard]] bool finished() const { return now_ >= scenario_.duration_ticks; }
    [[nodiscard]] const Scenario& scenario() const { return scenario_; }
    [[nodiscard]] const RoadNetwork& network() const { return net_; }
    [[nodiscard]] const std::vector<IntersectionManager>& managers() const { return managers_; }
    [[nodiscard]] const InvariantReport& invariants() const { return invariants_; }

    RunArtifacts finish();

private:
    enum class Stage : std::uint8_t { kApproaching, kCrossing, kLeaving, kDone };

    struct Held {
        ReservationId id;
        TrajectoryParams params;
        Tick start = 0;  // first tick of the bundle
        Tick last = 0;   // last physically occupied tick
        ReservationKind kind = ReservationKind::kFcfs;
        Money payment = 0;
        Tick grant_tick = 0;
    };

    struct Vehicle {
        DriverAgent agent;
        TripRecord trip;
        Route route;
        std::size_t leg = 0;
        Stage stage = Stage::kApproaching;
        bool routed = false;
        Tick ready_tick = 0;
        bool bid_pending = false;
        int rejections_here = 0;
        std::optional<Held> held;
        Approach approach = Approach::kWest;
        int lane = 0;
        Turn turn = Turn::kStraight;
        std::size_t manager = 0;
        std::size_t lane_key = 0;
    };

    struct Request {
        std::size_t vehicle = 0;
        TrajectoryParams params;
        ReservationKind kind = ReservationKind::kFcfs;
    };

    struct ManagerWork {
        std::vector<Request> exempt;
        std::vector<Request> first_come;
    };

    struct ManagerResult {
        std::optional<RoundOutcome> outcome;
        std::vector<std::pair<std::size_t, Reservation>> grants;
        std::vector<TrajectoryParams> granted_params;
    };

    void spawn();
    void publish();
    void route_new_vehicles();
    void refresh_routes();
    void collect_requests();
    void priority_and_free_pass();
    void decide();
    ManagerResult decide_one(std::size_t m);
    void advance();
    void close_period();
    void flush();

    void enter_link(Vehicle& v, std::size_t index, LinkId link, Tick enter_tick);
    void place_in_lane(Vehicle& v, std::size_t index);
    const std::vector<RankedRoute>& onward_routes(const Vehicle& v);
    void assign(Vehicle& v, const Reservation& r, const TrajectoryParams& params, const Bid* bid);
    /// Waiting at or approaching its next stop line without a reservation.
    [[nodiscard]] bool unreserved(std::size_t index) const;
    [[nodiscard]] Tick earliest_arrival(std::size_t index, Tick floor) const;
    std::optional<Tick> open_arrival(std::size_t index, Tick floor, const Ledger& ledger);
    [[nodiscard]] TrajectoryParams request_params(const Vehicle& v, Tick arrival) const;
    void release(std::size_t index, bool guarantee, std::string_view reason);
    [[nodiscard]] const PriorityClass& class_of(const Vehicle& v) const;
    [[nodiscard]] bool auction_policy() const { return scenario_.policy != Policy::kFcfs; }
    std::size_t vehicle_index(VehicleId id) const { return static_cast<std::size_t>(id.value - 1); }

    Scenario scenario_;
    SimulationOptions options_;
    RoadNetwork net_;
    IntersectionGrid grid_;
    PriorityTable priorities_;
    std::vector<IntersectionManager> managers_;
    std::vector<Vehicle> vehicles_;
    std::vector<std::deque<std::size_t>> lanes_;
    std::vector<ManagerWork> work_;
    std::vector<std::size_t> fresh_;
    std::vector<std::pair<TrajectoryParams, std::optional<Tick>>> open_cache_;
    std::map<std::tuple<std::size_t, std::size_t, int, std::int64_t, std::int64_t>, std::vector<RankedRoute>> onward_;
    PriceBoard board_;
    Tick now_ = 0;
    Tick request_horizon_ = 0;

    std::mt19937_64 demand_rng_;
    std::mt19937_64 attribute_rng_;
    std::mt19937_64 disturbance_rng_;

    std::vector<CrossingRecord> crossings_;
    std::vector<RequestEvent> requests_;
    std::vector<PriceRow> prices_;
    std::vector<std::string> audit_lines_;
    std::size_t audit_mutations_ = 0;
    std::size_t free_passes_ = 0;
    Money revenue_ = 0;
    Money max_price_ = 0;
    InvariantReport invariants_;
};

RunArtifacts run(const Scenario& scenario, SimulationOptions options = {});

/// Seed and digest of everything except the policy and execution options.
PairingKey pairing_key(const Scenario& scenario);

}  // namespace aim
