#include "aim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "aim/artifacts.hpp"
#include "aim/auction.hpp"
#include "aim/compliance/replay.hpp"
#include "aim/simulation.hpp"

namespace aim {

namespace fs = std::filesystem;

Scenario resolve_scenario(const std::string& name_or_path) {
    if (fs::exists(name_or_path)) return load_scenario(name_or_path);
    const auto names = builtin_scenario_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return builtin_scenario(name_or_path);
    throw ConfigError("scenario: no file or built-in scenario named '" + name_or_path + "'");
}

namespace {

struct RunFlags {
    std::string scenario = "smoke";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> policy;
    std::optional<Tick> duration;
    bool paper_mode = false;
    bool parallel = false;
    bool no_free_pass = false;
    bool no_cap = false;
    bool no_windows = false;
    bool no_priorities = false;
    bool no_audit = false;
};

void add_common(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--scenario", f.scenario, "Scenario file or built-in name")->envname("AIM_SCENARIO");
    cmd->add_option("--seed", f.seed, "Random seed override")->envname("AIM_SEED");
    cmd->add_option("--duration", f.duration, "Duration override in ticks")->envname("AIM_DURATION");
    cmd->add_flag("--paper-mode", f.paper_mode, "Disable cap, free pass, windows and priority classes")
        ->envname("AIM_PAPER_MODE");
    cmd->add_flag("--parallel", f.parallel, "Decide intersections on separate threads");
    cmd->add_flag("--no-free-pass", f.no_free_pass);
    cmd->add_flag("--no-cap", f.no_cap);
    cmd->add_flag("--no-windows", f.no_windows);
    cmd->add_flag("--no-priorities", f.no_priorities);
    cmd->add_flag("--no-audit", f.no_audit);
}

Scenario configure(const RunFlags& f) {
    auto s = resolve_scenario(f.scenario);
    if (f.seed) s.seed = *f.seed;
    if (f.duration) s.duration_ticks = *f.duration;
    if (f.policy) s.policy = policy_from_string(*f.policy);
    if (f.paper_mode) apply_paper_mode(s);
    if (f.parallel) s.parallel = true;
    if (f.no_free_pass) s.features.free_pass = false;
    if (f.no_cap) s.features.cap = false;
    if (f.no_windows) s.features.windows = false;
    if (f.no_priorities) s.features.priorities = false;
    if (f.no_audit) s.features.audit = false;
    validate(s);
    return s;
}

void print_summary(std::ostream& out, const RunArtifacts& run) {
    const auto cols = summary_columns();
    const auto vals = summary_values(run.summary);
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << std::left << std::setw(22) << cols[i] << (vals[i].empty() ? "-" : vals[i]) << '\n';
    out << std::left << std::setw(22) << "invariants" << run.invariants.describe() << '\n';
}

int cmd_run(const RunFlags& f, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    const auto s = configure(f);
    const auto run = aim::run(s);
    print_summary(out, run);
    if (!out_dir.empty()) {
        const auto paths = write_run(run, out_dir);
        out << "wrote " << paths.size() << " files to " << out_dir << '\n';
    }
    if (!run.invariants.ok()) {
        err << "invariant violation: " << run.invariants.describe() << '\n';
        return kExitInvariant;
    }
    return kExitOk;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_compare(const RunFlags& f, const std::string& policies_arg, const std::string& seeds_arg,
                const std::string& out_dir, std::ostream& out, std::ostream& err) {
    std::vector<Policy> policies;
    for (const auto& p : split_list(policies_arg)) {
        const auto policy = policy_from_string(p);
        if (std::find(policies.begin(), policies.end(), policy) != policies.end()) {
            err << "warning: policy " << p << " listed twice; ignoring the repeat\n";
            continue;
        }
        policies.push_back(policy);
    }
    if (policies.size() < 2) {
        err << "compare needs at least two distinct policies\n";
        return kExitUsage;
    }
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_list(seeds_arg)) seeds.push_back(std::stoull(s));
    if (seeds.empty()) {
        err << "compare needs at least one seed\n";
        return kExitUsage;
    }

    const auto base = configure(f);
    struct Row {
        std::uint64_t seed;
        Policy policy;
        RunSummary summary;
        std::optional<double> social;
    };
    std::vector<Row> rows;
    bool invariants_ok = true;
    for (auto seed : seeds) {
        std::map<Policy, RunArtifacts> runs;
        for (auto p : policies) {
            auto s = base;
            s.seed = seed;
            s.policy = p;
            runs.emplace(p, aim::run(s));
            invariants_ok = invariants_ok && runs.at(p).invariants.ok();
            if (!out_dir.empty())
                write_run(runs.at(p), fs::path(out_dir) / ("seed_" + std::to_string(seed)) / std::string(to_string(p)));
        }
        for (auto p : policies) {
            Row r{seed, p, runs.at(p).summary, std::nullopt};
            if (p != Policy::kFcfs && runs.contains(Policy::kFcfs)) {
                const auto& a = runs.at(p);
                const auto& b = runs.at(Policy::kFcfs);
                r.social = social_cost(a.trips, pairing_key(a.scenario), b.trips, pairing_key(b.scenario));
            }
            rows.push_back(std::move(r));
        }
    }

    std::ostringstream table;
    table << "seed,policy,mean_delay,steady_travel_ticks,spend_delay_spearman,social_cost_vs_fcfs\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : rows)
        table << r.seed << ',' << to_string(r.policy) << ',' << format_double(r.summary.mean_delay) << ','
              << opt(r.summary.steady_travel_time) << ',' << opt(r.summary.spend_delay_spearman) << ','
              << opt(r.social) << '\n';
    for (auto p : policies) {
        double delay = 0;
        double steady = 0;
        double social = 0;
        std::size_t n_steady = 0;
        std::size_t n_social = 0;
        std::size_t n = 0;
        for (const auto& r : rows) {
            if (r.policy != p) continue;
            delay += r.summary.mean_delay;
            ++n;
            if (r.summary.steady_travel_time) {
                steady += *r.summary.steady_travel_time;
                ++n_steady;
            }
            if (r.social) {
                social += *r.social;
                ++n_social;
            }
        }
        table << "pooled," << to_string(p) << ',' << format_double(delay / static_cast<double>(n)) << ','
              << (n_steady ? format_double(steady / static_cast<double>(n_steady)) : std::string()) << ",,"
              << (n_social ? format_double(social / static_cast<double>(n_social)) : std::string()) << '\n';
    }
    out << table.str();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream(fs::path(out_dir) / "compare.csv") << table.str();
    }
    if (!invariants_ok) {
        err << "invariant violation in at least one run\n";
        return kExitInvariant;
    }
    return kExitOk;
}

int cmd_audit(const std::string& path, std::ostream& out, std::ostream& err) {
    if (!fs::exists(path)) {
        err << path << ": cannot read audit log\n";
        return kExitUsage;
    }
    try {
        const auto report = audit_replay_file(path);
        out << report.to_text();
        return report.pass ? kExitOk : kExitAudit;
    } catch (const AuditFormatError& e) {
        err << "corrupt audit log: " << e.what() << '\n';
        return kExitAudit;
    }
}

// Random winner-determination instances checked against exhaustive enumeration.
int cmd_check_wdp(std::size_t instances, std::size_t max_bids, std::uint64_t seed, std::ostream& out,
                  std::ostream& err) {
    std::mt19937_64 rng(seed);
    const IntersectionGrid grid(4, 2);
    std::size_t infeasible = 0;
    std::size_t exact_below_greedy = 0;
    std::size_t exact_not_optimal = 0;
    std::size_t enumerated = 0;
    for (std::size_t i = 0; i < instances; ++i) {
        std::uniform_int_distribution<std::size_t> nbids(1, max_bids);
        std::uniform_int_distribution<int> arrival(0, 5), side(0, 3), lane(0, 1), turn(0, 2), speed(0, 1);
        std::uniform_real_distribution<double> value(0.1, 10.0);
        std::vector<Bid> bids(nbids(rng));
        for (std::size_t b = 0; b < bids.size(); ++b) {
            auto& bid = bids[b];
            bid.bidder = VehicleId{b + 1};
            bid.params = {arrival(rng), speed(rng) ? Speed{1, 1} : Speed{1, 2}, static_cast<Approach>(side(rng)),
                          lane(rng), static_cast<Turn>(turn(rng))};
            bid.bundle = rasterize_bundle(grid, bid.params);
            bid.value = value(rng);
            bid.submitted_tick = static_cast<Tick>(b % 3);
        }
        const Ledger ledger;
        const auto greedy = solve_wdp_greedy(bids, ledger, 1);
        const auto exact = solve_wdp_exact(bids, ledger);
        if (!is_feasible(bids, greedy, ledger) || !is_feasible(bids, exact, ledger)) ++infeasible;
        if (exact.total_value + 1e-9 < greedy.total_value) ++exact_below_greedy;
        if (bids.size() <= 8) {
            ++enumerated;
            double best = 0;
            for (std::uint32_t mask = 0; mask < (1u << bids.size()); ++mask) {
                bool ok = true;
                double total = 0;
                for (std::size_t a = 0; a < bids.size() && ok; ++a) {
                    if (!(mask >> a & 1u)) continue;
                    total += bids[a].effective_value();
                    for (std::size_t c = a + 1; c < bids.size() && ok; ++c)
                        if ((mask >> c & 1u) && bids[a].bundle.overlaps(bids[c].bundle)) ok = false;
                }
                if (ok) best = std::max(best, total);
            }
            if (std::abs(best - exact.total_value) > 1e-9 * std::max(1.0, best)) ++exact_not_optimal;
        }
    }
    out << "instances=" << instances << " enumerated=" << enumerated << " infeasible=" << infeasible
        << " exact_below_greedy=" << exact_below_greedy << " exact_not_optimal=" << exact_not_optimal << '\n';
    if (infeasible || exact_below_greedy || exact_not_optimal) {
        err << "winner determination check failed\n";
        return kExitInvariant;
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Reservation-based intersection simulator"};
    app.require_subcommand(1);

    RunFlags run_flags;
    std::string out_dir;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario");
    add_common(run_cmd, run_flags);
    run_cmd->add_option("--policy", run_flags.policy, "fcfs, ca or cta-ca")->envname("AIM_POLICY");
    run_cmd->add_option("--out", out_dir, "Output directory")->envname("AIM_OUT");

    RunFlags cmp_flags;
    std::string cmp_out;
    std::string policies = "fcfs,cta-ca";
    std::string seeds = "1,2,3,4,5";
    auto* cmp_cmd = app.add_subcommand("compare", "Paired runs of several policies");
    add_common(cmp_cmd, cmp_flags);
    cmp_cmd->add_option("--policies", policies, "Comma separated policies");
    cmp_cmd->add_option("--seeds", seeds, "Comma separated seeds");
    cmp_cmd->add_option("--out", cmp_out, "Output directory")->envname("AIM_OUT");

    std::string log_path;
    auto* audit_cmd = app.add_subcommand("audit", "Replay and verify an audit log");
    audit_cmd->add_option("log", log_path, "Audit log (JSON lines)")->required();

    std::size_t instances = 1000;
    std::size_t max_bids = 12;
    std::uint64_t wdp_seed = 1;
    auto* wdp_cmd = app.add_subcommand("check-wdp", "Check the winner-determination solvers on random instances");
    wdp_cmd->add_option("--instances", instances);
    wdp_cmd->add_option("--max-bids", max_bids)->check(CLI::Range(1, 20));
    wdp_cmd->add_option("--seed", wdp_seed);

    std::string show_name;
    auto* show_cmd = app.add_subcommand("show-scenario", "Print a scenario as JSON");
    show_cmd->add_option("scenario", show_name)->required();
    app.add_subcommand("list-scenarios", "List built-in scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*run_cmd) return cmd_run(run_flags, out_dir, out, err);
        if (*cmp_cmd) return cmd_compare(cmp_flags, policies, seeds, cmp_out, out, err);
        if (*audit_cmd) return cmd_audit(log_path, out, err);
        if (*wdp_cmd) return cmd_check_wdp(instances, max_bids, wdp_seed, out, err);
        if (*show_cmd) {
            out << to_json(resolve_scenario(show_name)).dump(2) << '\n';
            return kExitOk;
        }
        for (const auto& n : builtin_scenario_names()) out << n << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace aim
