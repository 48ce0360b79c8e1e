#include <doctest.h>

#include <string>

#include "aim/scenario.hpp"

using namespace aim;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
    try {
        validate(scenario_from_json(j));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

json minimal() { return json{{"version", 1}, {"name", "t"}, {"duration_ticks", 50}}; }

}  // namespace

TEST_CASE("built-ins round trip through json") {
    for (const auto& name : builtin_scenario_names()) {
        const auto s = builtin_scenario(name);
        CHECK_NOTHROW(validate(s));
        const auto back = scenario_from_json(json::parse(to_json(s).dump()));
        CHECK(config_digest(back) == config_digest(s));
        CHECK(to_json(back).dump() == to_json(s).dump());
    }
    CHECK_THROWS_AS(builtin_scenario("nowhere"), ConfigError);
}

TEST_CASE("minimal scenario uses defaults") {
    const auto s = scenario_from_json(minimal());
    CHECK(s.duration_ticks == 50);
    CHECK(s.policy == Policy::kCtaCa);
    CHECK(s.round_ticks() == 2);
    CHECK(s.effective_pricing_period() == 2);
    CHECK(s.effective_pricing().cap == doctest::Approx(100.0));
}

TEST_CASE("parse errors name the field") {
    auto j = minimal();
    j["version"] = 2;
    CHECK(error_of(j).rfind("version", 0) == 0);

    j = minimal();
    j["policy"] = "lottery";
    CHECK(error_of(j).find("policy") != std::string::npos);

    j = minimal();
    j["duration_ticks"] = -5;
    CHECK(error_of(j).find("duration_ticks") != std::string::npos);

    j = minimal();
    j["colour"] = "red";
    CHECK(error_of(j).find("colour: unknown field") != std::string::npos);

    j = minimal();
    j["demand"] = {{"flows", json::array({{{"origin", "I0:W"}, {"destination", "I9:E"}, {"rate", 0.1}}})}};
    CHECK(error_of(j).find("unknown node 'I9:E'") != std::string::npos);

    j = minimal();
    j.erase("version");
    CHECK(error_of(j).find("missing required field") != std::string::npos);
}

TEST_CASE("paper mode strips the extensions") {
    auto s = builtin_scenario("emergency");
    apply_paper_mode(s);
    CHECK_FALSE(s.features.free_pass);
    CHECK_FALSE(s.features.cap);
    CHECK(std::isinf(s.effective_pricing().cap));
    CHECK(s.effective_priorities().lookup("emergency").multiplier == 1.0);
    CHECK_FALSE(s.effective_priorities().lookup("emergency").exempt_from_bidding);
}

TEST_CASE("grid network shape") {
    auto s = builtin_scenario("grid2x2");
    const auto net = build_network(s);
    CHECK(net.intersection_count() == 4);
    // 8 inner links plus an in and an out link per outer side.
    CHECK(net.links().size() == 8 + 16);
    CHECK(net.find_node("I3:S"));
    CHECK_NOTHROW(net.validate());
}

TEST_CASE("digest ignores nothing that changes demand") {
    auto a = builtin_scenario("single");
    auto b = a;
    b.seed = 2;
    CHECK(config_digest(a) != config_digest(b));
    b = a;
    b.flows[0].rate *= 2;
    CHECK(config_digest(a) != config_digest(b));
}
