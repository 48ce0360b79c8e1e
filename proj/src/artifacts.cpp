#include "aim/artifacts.hpp"

#include <fstream>
#include <sstream>

namespace aim {

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path.string() + ": cannot write");
    out << text;
    if (!out) throw ConfigError(path.string() + ": write failed");
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i];
    }
    return s;
}

}  // namespace

std::string trips_csv(const RunArtifacts& run) {
    std::ostringstream out;
    out << "vehicle_id,origin,destination,class,equipped,alpha,budget,spawn_tick,completion_tick,free_flow_ticks,"
           "travel_ticks,delay,total_paid,rejections\n";
    for (const auto& t : run.trips) {
        if (!t.complete()) continue;
        out << t.vehicle.value << ',' << t.origin << ',' << t.destination << ',' << t.priority_class << ','
            << (t.equipped ? 1 : 0) << ',' << format_double(t.alpha) << ',' << format_double(t.budget) << ','
            << t.spawn_tick << ',' << *t.completion_tick << ',' << t.free_flow_ticks << ',' << t.travel_ticks() << ','
            << delay(t) << ',' << format_double(t.total_paid) << ',' << t.rejections << '\n';
    }
    return out.str();
}

std::string prices_csv(const RunArtifacts& run) {
    std::ostringstream out;
    out << "tick,intersection,link,price,open\n";
    for (const auto& p : run.prices)
        out << p.tick << ',' << p.intersection.value << ',' << p.link.value << ',' << format_double(p.price) << ','
            << (p.open ? 1 : 0) << '\n';
    return out.str();
}

std::string travel_time_csv(const RunArtifacts& run) {
    std::ostringstream out;
    out << "tick,moving_avg_travel_ticks\n";
    for (const auto& [t, v] : run.travel_time_series) out << t << ',' << opt(v) << '\n';
    return out.str();
}

std::vector<std::string> summary_columns() {
    return {"scenario",     "policy",        "seed",        "duration_ticks", "spawned",
            "completed",    "en_route",      "mean_delay",  "mean_travel_ticks", "steady_travel_ticks",
            "spend_delay_spearman", "revenue", "free_passes", "closures",       "cancellations",
            "max_price",    "unserved_long_waits", "max_wait_ticks"};
}

std::vector<std::string> summary_values(const RunSummary& s) {
    return {s.scenario,
            std::string(to_string(s.policy)),
            std::to_string(s.seed),
            std::to_string(s.duration_ticks),
            std::to_string(s.spawned),
            std::to_string(s.completed),
            std::to_string(s.en_route),
            format_double(s.mean_delay),
            format_double(s.mean_travel_time),
            opt(s.steady_travel_time),
            opt(s.spend_delay_spearman),
            format_double(s.revenue),
            std::to_string(s.free_passes),
            std::to_string(s.closures),
            std::to_string(s.cancellations),
            format_double(s.max_price),
            std::to_string(s.unserved_long_waits),
            std::to_string(s.max_wait_ticks)};
}

std::string summary_csv(const RunArtifacts& run) {
    return join(summary_columns()) + '\n' + join(summary_values(run.summary)) + '\n';
}

std::string audit_jsonl(const RunArtifacts& run) {
    std::string out;
    for (const auto& line : run.audit_lines) {
        out += line;
        out += '\n';
    }
    return out;
}

std::vector<std::filesystem::path> write_run(const RunArtifacts& run, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError(dir.string() + ": cannot create output directory: " + ec.message());

    std::vector<std::pair<std::string, std::string>> files = {
        {"trips.csv", trips_csv(run)},
        {"prices.csv", prices_csv(run)},
        {"travel_time.csv", travel_time_csv(run)},
        {"summary.csv", summary_csv(run)},
        {"scenario.json", to_json(run.scenario).dump(2) + '\n'},
    };
    if (run.scenario.features.audit) files.emplace_back("audit.jsonl", audit_jsonl(run));

    std::vector<std::filesystem::path> written;
    nlohmann::ordered_json manifest;
    manifest["config_digest"] = config_digest(run.scenario);
    manifest["scenario"] = run.scenario.name;
    manifest["policy"] = to_string(run.scenario.policy);
    manifest["seed"] = run.scenario.seed;
    manifest["invariants_ok"] = run.invariants.ok();
    manifest["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& [name, text] : files) {
        write_file(dir / name, text);
        written.push_back(dir / name);
        manifest["artifacts"].push_back(name);
    }
    write_file(dir / "manifest.json", manifest.dump(2) + '\n');
    written.push_back(dir / "manifest.json");
    return written;
}

}  // namespace aim
