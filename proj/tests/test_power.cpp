#include <doctest.h>

#include <random>

#include "support.hpp"
#include "wearsim/power.hpp"

using namespace wearsim;

namespace {

DeviceTimeline timeline(std::map<std::string, double> seconds, double bytes = 0.0) {
    DeviceTimeline tl;
    tl.state_seconds = std::move(seconds);
    tl.bytes_moved = bytes;
    return tl;
}

PowerReport two_component_report(double a, double b) {
    Scenario s = ts::empty_scenario();
    s.devices.push_back(ts::device("a", ResourceCategory::Compute, a));
    s.devices.push_back(ts::device("b", ResourceCategory::Sensor, b));
    return report_from_components(s, {{"a", a}, {"b", b}});
}

std::map<std::string, double> random_loads(const Scenario& s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 300.0);
    std::map<std::string, double> loads;
    for (const auto& d : s.devices) loads[d.id] = u(rng);
    return loads;
}

}  // namespace

TEST_CASE("device_power from state duty") {
    const Device d = ts::device("cpu", ResourceCategory::Compute, 1.0, 10.0, 1.0);
    CHECK(device_power(timeline({{"idle", 0.8}, {"active", 0.2}}), d, 1.0) == doctest::Approx(2.8).epsilon(1e-15));
    const Device off = ts::device("off", ResourceCategory::Compute, 0.0);
    CHECK(device_power(timeline({{"idle", 10.0}}), off, 10.0) == 0.0);
}

TEST_CASE("device_power from bytes moved") {
    Device link = ts::device("link", ResourceCategory::Interconnect, 0.0, 0.0, 1e9);
    link.energy_per_byte_nj = 1.0;
    CHECK(device_power(timeline({{"idle", 10.0}}, 1e9), link, 10.0) == doctest::Approx(100.0).epsilon(1e-15));
}

TEST_CASE("device_power rejects unknown states") {
    const Device d = ts::device("cpu", ResourceCategory::Compute, 1.0);
    CHECK_THROWS_AS(device_power(timeline({{"turbo", 1.0}}), d, 1.0), std::invalid_argument);
}

TEST_CASE("single rail at 75% efficiency") {
    Scenario s = ts::empty_scenario();
    s.rails.push_back({"pmic", 0.75, std::string(kBatteryRail)});
    s.devices.push_back(ts::device("load", ResourceCategory::Compute, 75.0, 0, 0, "pmic"));
    CHECK(battery_draw(s, {{"load", 75.0}}) == 100.0);
    CHECK(rail_losses(s, {{"load", 75.0}}).at("pmic") == 25.0);

    s.rails[0].efficiency = 1.0;
    CHECK(rail_losses(s, {{"load", 75.0}}).at("pmic") == 0.0);
}

TEST_CASE("two-level rail tree") {
    Scenario s = ts::empty_scenario();
    s.rails.push_back({"pmic", 0.9, std::string(kBatteryRail)});
    s.rails.push_back({"buck", 0.9, "pmic"});
    s.devices.push_back(ts::device("load", ResourceCategory::Compute, 81.0, 0, 0, "buck"));
    CHECK(battery_draw(s, {{"load", 81.0}}) == doctest::Approx(100.0).epsilon(1e-15));
    const auto losses = rail_losses(s, {{"load", 81.0}});
    CHECK(losses.at("buck") == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(losses.at("pmic") == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("battery draw matches the path-product oracle on random rail trees") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const Scenario s = ts::random_rail_tree(rng, 5);
        REQUIRE_NOTHROW(validate(s));
        const auto loads = random_loads(s, rng);
        CHECK(ts::close_rel(battery_draw(s, loads), ts::path_product_draw(s, loads), 1e-12));
        const PowerReport r = report_from_components(s, loads);
        double sum = 0.0;
        for (const auto& [_, mw] : r.items()) sum += mw;
        CHECK(std::abs(r.total - sum) <= 1e-9);
        double cats = 0.0;
        for (const auto& [_, mw] : r.per_category) cats += mw;
        CHECK(std::abs(r.total - cats) <= 1e-9);
    }
}

TEST_CASE("disjoint device sets on disjoint rails add") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        Scenario a = ts::random_rail_tree(rng, 4);
        Scenario b = ts::random_rail_tree(rng, 4);
        for (auto& r : b.rails) {
            r.id = "b_" + r.id;
            if (r.parent != kBatteryRail) r.parent = "b_" + r.parent;
        }
        for (auto& d : b.devices) {
            d.id = "b_" + d.id;
            if (d.rail != kBatteryRail) d.rail = "b_" + d.rail;
        }
        Scenario both = a;
        both.rails.insert(both.rails.end(), b.rails.begin(), b.rails.end());
        both.devices.insert(both.devices.end(), b.devices.begin(), b.devices.end());
        const auto la = random_loads(a, rng);
        const auto lb = random_loads(b, rng);
        auto lboth = la;
        lboth.insert(lb.begin(), lb.end());
        const double sep = report_from_components(a, la).total + report_from_components(b, lb).total;
        CHECK(ts::close_rel(report_from_components(both, lboth).total, sep, 1e-12));
    }
}

TEST_CASE("moving time from idle to a higher-power state never lowers the total") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        Scenario s = ts::random_rail_tree(rng, 3);
        for (auto& d : s.devices) d.states.push_back({"active", d.states[0].power_mw + 100.0 * u(rng)});
        std::map<std::string, double> duty;
        for (const auto& d : s.devices) duty[d.id] = u(rng);
        auto total = [&](const std::map<std::string, double>& dc) {
            std::map<std::string, double> loads;
            for (const auto& d : s.devices)
                loads[d.id] = device_power(timeline({{"idle", 1.0 - dc.at(d.id)}, {"active", dc.at(d.id)}}), d, 1.0);
            return report_from_components(s, loads).total;
        };
        const double before = total(duty);
        auto more = duty;
        const std::string& id = s.devices[std::uniform_int_distribution<std::size_t>(0, s.devices.size() - 1)(rng)].id;
        more[id] += (1.0 - more[id]) * u(rng);
        CHECK(total(more) >= before - 1e-12);
    }
}

TEST_CASE("aggregate of an empty workload with zero idle power is zero") {
    Scenario s = ts::empty_scenario(10.0);
    s.devices.push_back(ts::device("cpu", ResourceCategory::Compute, 0.0));
    s.devices.push_back(ts::device("cam", ResourceCategory::Sensor, 0.0));
    const PowerReport r = aggregate(run(s), s);
    CHECK(r.total == 0.0);
    CHECK(r.per_component.size() == 2);
}

TEST_CASE("idle-only heavy-tail scenario passes component power through") {
    const Scenario s = load_scenario(ts::data_path("heavytail_145.scenario"));
    const PowerReport r = aggregate(run(s), s);
    REQUIRE(r.per_component.size() == 145);
    double sum = 0.0;
    for (const auto& d : s.devices) {
        CHECK(r.per_component.at(d.id) == doctest::Approx(d.states[0].power_mw).epsilon(1e-12));
        sum += d.states[0].power_mw;
    }
    CHECK(r.total == doctest::Approx(sum).epsilon(1e-12));
    // bucket shares as published sum to 99.999864%
    CHECK(r.total == doctest::Approx(999.99864).epsilon(1e-9));
}

TEST_CASE("reference scenario: power delivery is about a fifth of full-offload power") {
    Scenario s = load_scenario(ts::data_path("aria2_like.scenario"));
    s.placement = full_offload(s);
    const PowerReport r = aggregate(run(s), s);
    const double share = r.per_category.at(ResourceCategory::PowerDelivery) / r.total;
    CHECK(share == doctest::Approx(0.20).epsilon(0.1));
    double sum = 0.0;
    for (const auto& [_, mw] : r.items()) sum += mw;
    CHECK(std::abs(r.total - sum) <= 1e-9);
}

TEST_CASE("round_sig") {
    CHECK(round_sig(1.234, 2) == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(round_sig(61.6, 2) == 62.0);
    CHECK(round_sig(0.0, 2) == 0.0);
    CHECK(round_sig(0.017927, 2) == doctest::Approx(0.018).epsilon(1e-15));
    CHECK(round_sig(-987.0, 2) == -990.0);
}

TEST_CASE("render_percentages") {
    SUBCASE("each item is rounded to two significant figures first") {
        const auto p = render_percentages(two_component_report(61.6, 38.4));
        CHECK(p.at("a") == 62.0);
        CHECK(p.at("b") == 38.0);
    }
    SUBCASE("1.234 mW counts as 1.2 mW") {
        const auto p = render_percentages(two_component_report(1.234, 1.2));
        CHECK(p.at("a") == 50.0);
        CHECK(p.at("b") == 50.0);
    }
    SUBCASE("zero total cannot be rendered") {
        CHECK_THROWS_AS(render_percentages(two_component_report(0.0, 0.0)), std::domain_error);
    }
}

TEST_CASE("rendered percentages sum to 100 and never mutate the report") {
    const Scenario s = load_scenario(ts::data_path("heavytail_145.scenario"));
    const PowerReport r = aggregate(run(s), s);
    const PowerReport before = r;
    const auto p1 = render_percentages(r);
    const auto p2 = render_percentages(r);
    CHECK(p1 == p2);
    CHECK(r.per_component == before.per_component);
    CHECK(r.total == before.total);
    double sum = 0.0;
    for (const auto& [_, pct] : p1) sum += pct;
    CHECK(sum == doctest::Approx(100.0).epsilon(1e-9));

    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const Scenario t = ts::random_rail_tree(rng, 3);
        const auto pct = render_percentages(report_from_components(t, random_loads(t, rng)));
        double total = 0.0;
        for (const auto& [_, v] : pct) total += v;
        CHECK(std::abs(total - 100.0) <= 0.5);
    }
}
