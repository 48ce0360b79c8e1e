#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "aim/artifacts.hpp"
#include "aim/auction.hpp"
#include "aim/compliance/replay.hpp"
#include "aim/metrics.hpp"
#include "aim/pricing.hpp"
#include "aim/scenario.hpp"
#include "aim/simulation.hpp"

namespace {

using namespace aim;

struct Verdict {
    bool pass = false;
    std::string detail;
};

// Sustainable FCFS throughput of the built-in single intersection, veh/tick.
constexpr double kSingleSupply = 3.0;

template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& f) {
    std::vector<std::future<T>> futures;
    futures.reserve(n);
    for (std::size_t i = 0; i < n; ++i) futures.push_back(std::async(std::launch::async, f, i));
    std::vector<T> out;
    out.reserve(n);
    for (auto& fu : futures) out.push_back(fu.get());
    return out;
}

double total_rate(const Scenario& s) {
    double r = 0;
    for (const auto& f : s.flows) r += f.rate;
    return r;
}

void scale_flows(Scenario& s, double factor) {
    for (auto& f : s.flows) f.rate *= factor;
}

std::string fmt(double v, int digits = 3) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(digits);
    o << v;
    return o.str();
}

std::string fmt_sci(double v) {
    std::ostringstream o;
    o.precision(3);
    o << v;
    return o.str();
}

RunArtifacts run_quiet(Scenario s) {
    SimulationOptions o;
    o.occupancy_scan = false;
    return run(s, o);
}

Verdict spend_delay() {
    const auto t0 = std::chrono::steady_clock::now();
    auto rhos = parallel_map<std::pair<double, std::size_t>>(5, [](std::size_t i) {
        auto s = builtin_scenario("single");
        s.seed = i + 1;
        const auto r = run_quiet(s);
        return std::make_pair(spend_delay_correlation(r.trips), r.summary.completed);
    });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = secs < 30;
    std::string d;
    for (const auto& [rho, n] : rhos) {
        ok = ok && rho < -0.2 && n >= 500;
        d += fmt(rho) + "(n=" + std::to_string(n) + ") ";
    }
    return {ok, "rho " + d + "time " + fmt(secs, 1) + "s"};
}

Verdict social_cost_of_ca() {
    const std::vector<double> loads = {0.6, 1.0, 1.2, 1.4};
    const std::size_t seeds = 5;
    auto gaps = parallel_map<double>(loads.size() * seeds, [&](std::size_t k) {
        auto s = builtin_scenario("single");
        s.seed = k % seeds + 1;
        scale_flows(s, loads[k / seeds] * kSingleSupply / total_rate(s));
        s.policy = Policy::kCa;
        const auto ca = run_quiet(s);
        s.policy = Policy::kFcfs;
        const auto fcfs = run_quiet(s);
        return social_cost(ca.trips, pairing_key(ca.scenario), fcfs.trips, pairing_key(fcfs.scenario));
    });
    std::vector<double> pooled(loads.size(), 0);
    std::vector<int> wins(loads.size(), 0);
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        pooled[k / seeds] += gaps[k] / static_cast<double>(seeds);
        if (gaps[k] >= 0) ++wins[k / seeds];
    }
    const bool high = wins[2] >= 4 && wins[3] >= 4;
    const bool monotone = pooled[0] < pooled[1] && pooled[1] < pooled[3];
    std::string d;
    for (std::size_t l = 0; l < loads.size(); ++l)
        d += fmt(loads[l], 1) + "x gap " + fmt(pooled[l], 2) + " (" + std::to_string(wins[l]) + "/5) ";
    return {high && monotone, d};
}

Verdict network_gain() {
    const std::vector<double> loads = {0.8, 1.4};
    const std::size_t seeds = 5;
    auto rows = parallel_map<std::pair<double, double>>(loads.size() * seeds, [&](std::size_t k) {
        auto s = builtin_scenario("grid2x2");
        s.seed = k % seeds + 1;
        scale_flows(s, loads[k / seeds]);
        s.policy = Policy::kCtaCa;
        const auto cta = run_quiet(s);
        s.policy = Policy::kFcfs;
        const auto fcfs = run_quiet(s);
        return std::make_pair(cta.summary.steady_travel_time.value_or(NAN),
                              fcfs.summary.steady_travel_time.value_or(NAN));
    });
    std::vector<double> cta(loads.size(), 0), fcfs(loads.size(), 0);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        cta[k / seeds] += rows[k].first / static_cast<double>(seeds);
        fcfs[k / seeds] += rows[k].second / static_cast<double>(seeds);
    }
    const double low_gap = fcfs[0] - cta[0];
    const double high_gap = fcfs[1] - cta[1];
    const bool ok = cta[1] <= fcfs[1] && high_gap > low_gap;
    return {ok, "0.8x cta " + fmt(cta[0], 1) + " fcfs " + fmt(fcfs[0], 1) + ", 1.4x cta " + fmt(cta[1], 1) +
                    " fcfs " + fmt(fcfs[1], 1) + ", gain " + fmt(low_gap, 2) + " -> " + fmt(high_gap, 2)};
}

Verdict unbounded_money() {
    auto delays = parallel_map<Tick>(5, [](std::size_t i) {
        auto s = builtin_scenario("unbounded");
        s.seed = i + 1;
        const auto r = run_quiet(s);
        for (const auto& t : r.trips)
            if (t.budget >= 1e12) return t.complete() ? delay(t) : Tick{-1};
        return Tick{-1};
    });
    bool ok = true;
    std::string d = "delay";
    for (auto t : delays) {
        ok = ok && t > 0;
        d += " " + std::to_string(t);
    }
    return {ok, d};
}

Verdict formula_fidelity() {
    std::mt19937_64 rng(20240501);
    std::uniform_real_distribution<double> price(0.05, 80.0);
    std::uniform_int_distribution<int> supply(1, 40);
    PricingConfig cfg;
    std::size_t checked = 0;
    double worst = 0;
    while (checked < 100000) {
        const int s = supply(rng);
        std::uniform_int_distribution<int> excess(-s, 3 * s);
        const int z = excess(rng);
        cfg.initial_price = price(rng);
        const double p = cfg.initial_price;
        const double expected = p * (1.0 + static_cast<double>(z) / s);
        if (!(expected > cfg.floor && expected < cfg.cap)) continue;
        ReservePriceState st(LinkId{1}, s, cfg);
        st.record_demand(s + z);
        const auto u = st.update_price(checked);
        worst = std::max(worst, std::abs(u.new_price - expected) / expected);
        ++checked;
    }
    return {worst <= 1e-12, "triples " + std::to_string(checked) + " max rel err " + fmt(worst * 1e15, 2) + "e-15"};
}

// Rasterizes every recorded crossing from its physical start tick and counts
// pairs of vehicles sharing a space-time slot at one intersection.
std::size_t physical_conflicts(const RunArtifacts& r) {
    const IntersectionGrid grid(r.scenario.grid_size, r.scenario.lanes_per_approach);
    std::map<std::pair<std::uint64_t, SpaceTimeSlot>, std::uint64_t> seen;
    std::size_t conflicts = 0;
    for (const auto& c : r.crossings) {
        auto p = c.params;
        p.arrival_tick = c.start_tick;
        for (const auto& slot : rasterize_bundle(grid, p)) {
            auto [it, fresh] = seen.emplace(std::make_pair(c.intersection.value, slot), c.vehicle.value);
            if (!fresh && it->second != c.vehicle.value) ++conflicts;
        }
    }
    return conflicts;
}

Scenario random_scenario(std::mt19937_64& rng, Tick duration) {
    static const std::vector<std::string> names = {"single", "corridor", "grid2x2", "saturated", "emergency", "mixed"};
    std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
    std::uniform_real_distribution<double> load(0.3, 1.5);
    std::uniform_int_distribution<int> policy(0, 2);
    std::uniform_int_distribution<std::uint64_t> seed(1, 1'000'000);
    auto s = builtin_scenario(names[pick(rng)]);
    s.seed = seed(rng);
    s.duration_ticks = duration;
    s.policy = static_cast<Policy>(policy(rng));
    scale_flows(s, load(rng));
    if (std::bernoulli_distribution(0.3)(rng)) s.disturbance.probability = 0.05;
    if (std::bernoulli_distribution(0.2)(rng)) s.safety_buffer = 1;
    return s;
}

Verdict never_double_book() {
    std::mt19937_64 rng(77);
    std::vector<Scenario> scenarios;
    for (int i = 0; i < 100; ++i) scenarios.push_back(random_scenario(rng, 400));
    auto counts = parallel_map<std::pair<std::size_t, std::size_t>>(scenarios.size(), [&](std::size_t i) {
        const auto r = run(scenarios[i]);
        return std::make_pair(r.invariants.slot_conflicts, physical_conflicts(r));
    });
    std::size_t scan = 0, replayed = 0;
    for (const auto& [a, b] : counts) {
        scan += a;
        replayed += b;
    }
    return {scan == 0 && replayed == 0,
            "runs 100 scan conflicts " + std::to_string(scan) + " rasterized conflicts " + std::to_string(replayed)};
}

double brute_force_best(const std::vector<Bid>& bids) {
    double best = 0;
    const std::uint32_t n = static_cast<std::uint32_t>(bids.size());
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double total = 0;
        bool ok = true;
        for (std::uint32_t a = 0; a < n && ok; ++a) {
            if (!(mask >> a & 1u)) continue;
            total += bids[a].value * bids[a].priority_multiplier;
            for (std::uint32_t b = a + 1; b < n && ok; ++b) {
                if (!(mask >> b & 1u)) continue;
                for (const auto& slot : bids[a].bundle)
                    if (bids[b].bundle.contains(slot)) {
                        ok = false;
                        break;
                    }
            }
        }
        if (ok) best = std::max(best, total);
    }
    return best;
}

Verdict greedy_vs_oracle() {
    std::mt19937_64 rng(4242);
    const IntersectionGrid grid(8, 2);
    std::size_t infeasible = 0, exact_below = 0, mismatched = 0, enumerated = 0;
    for (int i = 0; i < 10000; ++i) {
        std::uniform_int_distribution<std::size_t> count(1, 12);
        std::uniform_int_distribution<int> arrival(0, 6), side(0, 3), lane(0, 1), turn(0, 2), slow(0, 2);
        std::uniform_real_distribution<double> value(0.5, 20.0);
        std::vector<Bid> bids(count(rng));
        for (std::size_t b = 0; b < bids.size(); ++b) {
            auto& bid = bids[b];
            bid.bidder = VehicleId{b + 1};
            bid.params = {arrival(rng), Speed{1, slow(rng) + 1}, static_cast<Approach>(side(rng)), lane(rng),
                          static_cast<Turn>(turn(rng))};
            bid.bundle = rasterize_bundle(grid, bid.params);
            bid.value = value(rng);
            bid.submitted_tick = static_cast<Tick>(b % 2);
        }
        const Ledger ledger;
        const auto greedy = solve_wdp_greedy(bids, ledger, 1);
        const auto exact = solve_wdp_exact(bids, ledger);
        if (!is_feasible(bids, greedy, ledger) || !is_feasible(bids, exact, ledger)) ++infeasible;
        if (exact.total_value + 1e-9 < greedy.total_value) ++exact_below;
        if (bids.size() <= 8) {
            ++enumerated;
            const double best = brute_force_best(bids);
            if (std::abs(best - exact.total_value) > 1e-9 * std::max(1.0, best)) ++mismatched;
        }
    }
    return {infeasible == 0 && exact_below == 0 && mismatched == 0,
            "instances 10000 enumerated " + std::to_string(enumerated) + " infeasible " + std::to_string(infeasible) +
                " exact<greedy " + std::to_string(exact_below) + " oracle mismatches " + std::to_string(mismatched)};
}

struct StarvationResult {
    bool served = false;
    Tick wait = 0;
};

StarvationResult poor_agent(std::uint64_t seed, bool paper) {
    auto s = builtin_scenario("starvation");
    s.seed = seed;
    if (paper) apply_paper_mode(s);
    const auto r = run_quiet(s);
    StarvationResult out;
    for (const auto& c : r.crossings) {
        if (r.trips[c.vehicle.value - 1].budget > 0) continue;
        out.served = true;
        out.wait = c.start_tick - c.first_request_tick;
    }
    return out;
}

Verdict free_pass_guarantee() {
    const auto base = builtin_scenario("starvation");
    const Tick bound = base.free_pass_threshold + base.round_ticks() + base.fcfs_horizon;
    auto normal = parallel_map<StarvationResult>(5, [](std::size_t i) { return poor_agent(i + 1, false); });
    auto paper = parallel_map<StarvationResult>(5, [](std::size_t i) { return poor_agent(i + 1, true); });
    bool ok = true;
    std::string d = "waits";
    for (const auto& r : normal) {
        ok = ok && r.served && r.wait <= bound;
        d += " " + (r.served ? std::to_string(r.wait) : std::string("never"));
    }
    std::size_t paper_served = 0;
    for (const auto& r : paper) paper_served += r.served ? 1 : 0;
    ok = ok && paper_served == 0;
    return {ok, d + " (bound " + std::to_string(bound) + "), paper-mode served " + std::to_string(paper_served) + "/5"};
}

Verdict cap_and_closure() {
    auto rows = parallel_map<std::tuple<double, std::size_t, double>>(3, [](std::size_t i) {
        auto s = builtin_scenario("saturated");
        s.seed = i + 1;
        const auto capped = run_quiet(s);
        const double cap = s.effective_pricing().cap;
        double over = 0;
        for (const auto& p : capped.prices) over = std::max(over, p.price - cap);
        apply_paper_mode(s);
        const auto open = run_quiet(s);
        const Tick last = open.prices.back().tick;
        std::vector<double> end;
        for (const auto& p : open.prices)
            if (p.tick == last) end.push_back(p.price / s.pricing.initial_price);
        // Uncapped prices can sit near the largest double; average without overflow.
        double mean = 0;
        for (double x : end) mean += x / static_cast<double>(end.size());
        return std::make_tuple(over, capped.summary.closures, mean);
    });
    bool ok = true;
    std::string d;
    for (const auto& [over, closures, growth] : rows) {
        ok = ok && over <= 0 && closures >= 1 && growth > 10;
        d += "closures " + std::to_string(closures) + " end/initial " + fmt_sci(growth) + "; ";
    }
    return {ok, d + "cap never exceeded: " + (ok ? "yes" : "check")};
}

Verdict emergency_priority() {
    std::mt19937_64 rng(909);
    std::vector<Scenario> scenarios;
    for (int i = 0; i < 100; ++i) {
        auto s = builtin_scenario("emergency");
        s.seed = std::uniform_int_distribution<std::uint64_t>(1, 1'000'000)(rng);
        s.duration_ticks = 400;
        scale_flows(s, std::uniform_real_distribution<double>(0.5, 2.0)(rng));
        scenarios.push_back(s);
    }
    struct Tally {
        std::size_t emergencies = 0, paid = 0, contenders = 0, overtaken = 0;
    };
    auto tallies = parallel_map<Tally>(scenarios.size(), [&](std::size_t i) {
        const auto r = run_quiet(scenarios[i]);
        const IntersectionGrid grid(r.scenario.grid_size, r.scenario.lanes_per_approach);
        Tally t;
        for (const auto& e : r.crossings) {
            if (e.priority_class != "emergency") continue;
            ++t.emergencies;
            if (e.payment != 0 || r.trips[e.vehicle.value - 1].total_paid != 0) ++t.paid;
            const auto eb = rasterize_bundle(grid, e.params);
            for (const auto& s : r.crossings) {
                if (s.priority_class != "standard" || s.intersection != e.intersection) continue;
                // Unreserved at the same time as the emergency vehicle, on a conflicting path.
                if (s.first_request_tick > e.grant_tick || s.grant_tick < e.first_request_tick) continue;
                if (!rasterize_bundle(grid, s.params).shares_cell_with(eb)) continue;
                ++t.contenders;
                if (s.start_tick < e.start_tick) ++t.overtaken;
            }
        }
        return t;
    });
    Tally sum;
    for (const auto& t : tallies) {
        sum.emergencies += t.emergencies;
        sum.paid += t.paid;
        sum.contenders += t.contenders;
        sum.overtaken += t.overtaken;
    }
    return {sum.emergencies > 0 && sum.contenders > 0 && sum.paid == 0 && sum.overtaken == 0,
            "emergency crossings " + std::to_string(sum.emergencies) + " paid " + std::to_string(sum.paid) +
                " contenders " + std::to_string(sum.contenders) + " started earlier " + std::to_string(sum.overtaken)};
}

struct Mutation {
    std::size_t line = 0;  // 1-based
    std::string kind;
};

Verdict audit_replay_check() {
    std::mt19937_64 rng(31337);
    std::vector<Scenario> scenarios;
    for (int i = 0; i < 100; ++i) {
        auto s = random_scenario(rng, 300);
        s.features.audit = true;
        scenarios.push_back(s);
    }
    auto verdicts = parallel_map<bool>(scenarios.size(), [&](std::size_t i) {
        const auto r = run_quiet(scenarios[i]);
        return audit_replay(r.audit_lines).pass;
    });
    const auto clean = static_cast<std::size_t>(std::count(verdicts.begin(), verdicts.end(), true));

    auto s = builtin_scenario("grid2x2");
    s.duration_ticks = 400;
    const auto base = run_quiet(s);
    std::vector<std::size_t> confirms, prices;
    for (std::size_t i = 1; i < base.audit_lines.size(); ++i) {
        const auto j = nlohmann::json::parse(base.audit_lines[i]);
        if (j["kind"] == "confirm") confirms.push_back(i);
        if (j["kind"] == "price_update" && j["payload"]["demand"].get<int>() > 0) prices.push_back(i);
    }
    std::size_t detected = 0;
    std::string missed;
    for (int m = 0; m < 20; ++m) {
        auto lines = base.audit_lines;
        const int what = m % 3;
        const auto& pool = what == 2 ? prices : confirms;
        const std::size_t at = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
        auto j = nlohmann::ordered_json::parse(lines[at]);
        if (what == 0) {
            j["payload"]["payment"] = j["payload"]["payment"].get<double>() + 0.5;
        } else if (what == 1) {
            j["payload"]["params"]["arrival"] = j["payload"]["params"]["arrival"].get<Tick>() + 1;
        } else {
            j["payload"]["new_price"] = j["payload"]["new_price"].get<double>() * 1.5 + 0.01;
        }
        lines[at] = j.dump();
        const auto report = audit_replay(lines);
        const bool located = !report.pass && !report.discrepancies.empty() && report.discrepancies.front().line == at + 1;
        if (located) ++detected;
        else missed += " " + std::to_string(at + 1);
    }
    return {clean == 100 && detected == 20,
            "clean runs PASS " + std::to_string(clean) + "/100, mutations located " + std::to_string(detected) + "/20" +
                (missed.empty() ? "" : " missed lines" + missed)};
}

Verdict determinism() {
    const std::vector<std::string> names = {"grid2x2", "grid4x4", "mixed", "emergency"};
    std::size_t identical = 0;
    for (const auto& name : names) {
        auto s = builtin_scenario(name);
        s.seed = 11;
        s.duration_ticks = std::min<Tick>(s.duration_ticks, 1000);
        s.parallel = false;
        const auto serial = run(s);
        s.parallel = true;
        const auto parallel = run(s);
        if (trips_csv(serial) == trips_csv(parallel) && prices_csv(serial) == prices_csv(parallel) &&
            summary_csv(serial) == summary_csv(parallel) && travel_time_csv(serial) == travel_time_csv(parallel) &&
            audit_jsonl(serial) == audit_jsonl(parallel))
            ++identical;
    }
    return {identical == names.size(),
            "byte-identical serial/parallel " + std::to_string(identical) + "/" + std::to_string(names.size())};
}

}  // namespace

// Optional arguments select criteria by number; none runs all of them.
int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"spend-delay inverse relation", spend_delay},
        {"social cost of CA", social_cost_of_ca},
        {"CTA-CA gain on network", network_gain},
        {"no zero delay with unbounded money", unbounded_money},
        {"price formula fidelity", formula_fidelity},
        {"never double book", never_double_book},
        {"greedy vs oracle", greedy_vs_oracle},
        {"free-pass guarantee", free_pass_guarantee},
        {"cap and closure", cap_and_closure},
        {"emergency priority", emergency_priority},
        {"audit replay", audit_replay_check},
        {"determinism", determinism},
    };
    std::set<std::size_t> only;
    for (int a = 1; a < argc; ++a) only.insert(std::stoul(argv[a]));
    int failed = 0;
    std::size_t ran = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.contains(i + 1)) continue;
        ++ran;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << v.detail
                  << std::endl;
    }
    std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
