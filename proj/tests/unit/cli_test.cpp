#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aim/cli.hpp"

using namespace aim;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "aimsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("aimsim_cli_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("usage errors") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"fly"}).code == kExitUsage);
    CHECK(cli({"run", "--scenario", "nowhere"}).code == kExitUsage);
    CHECK(cli({"run", "--scenario", "smoke", "--policy", "lottery"}).code == kExitUsage);
    CHECK(cli({"compare", "--scenario", "smoke", "--policies", "ca", "--seeds", "1"}).code == kExitUsage);
    CHECK(cli({"audit", "/nonexistent/audit.jsonl"}).code == kExitUsage);
}

TEST_CASE("list and show") {
    const auto list = cli({"list-scenarios"});
    CHECK(list.code == kExitOk);
    CHECK(list.out.find("grid2x2\n") != std::string::npos);
    const auto show = cli({"show-scenario", "smoke"});
    CHECK(show.code == kExitOk);
    CHECK(show.out.find("\"version\": 1") != std::string::npos);
}

TEST_CASE("run writes artifacts that audit clean") {
    const auto dir = scratch("run");
    const auto r = cli({"run", "--scenario", "smoke", "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    for (const char* f : {"trips.csv", "prices.csv", "summary.csv", "travel_time.csv", "audit.jsonl", "scenario.json",
                          "manifest.json"})
        CHECK_MESSAGE(fs::exists(dir / f), f);

    const auto audit = cli({"audit", (dir / "audit.jsonl").string()});
    CHECK(audit.code == kExitOk);
    CHECK(audit.out.rfind("PASS", 0) == 0);

    // Raise the first recorded payment.
    std::ifstream in(dir / "audit.jsonl");
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    bool changed = false;
    for (auto& l : lines) {
        const auto at = l.find("\"payment\":");
        if (at == std::string::npos || changed) continue;
        l.insert(at + 10, "7");
        changed = true;
    }
    REQUIRE(changed);
    std::ofstream(dir / "tampered.jsonl") << [&] {
        std::string s;
        for (const auto& l : lines) s += l + "\n";
        return s;
    }();
    const auto bad = cli({"audit", (dir / "tampered.jsonl").string()});
    CHECK(bad.code == kExitAudit);
    CHECK(bad.out.find("discrepancy line=") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("audit of an empty log passes") {
    const auto dir = scratch("empty");
    fs::create_directories(dir);
    std::ofstream(dir / "audit.jsonl").close();
    const auto r = cli({"audit", (dir / "audit.jsonl").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.rfind("PASS", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("compare warns on a repeated policy") {
    const auto r = cli({"compare", "--scenario", "smoke", "--policies", "fcfs,ca,fcfs", "--seeds", "1,2"});
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("listed twice") != std::string::npos);
    CHECK(r.out.find("pooled,ca,") != std::string::npos);
}

TEST_CASE("paper mode flag") {
    const auto r = cli({"run", "--scenario", "smoke", "--paper-mode"});
    CHECK(r.code == kExitOk);
}
