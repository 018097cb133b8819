#pragma once
// Scenario builders, a closed-form duty-cycle oracle and small random
// generators shared by the unit tests and the acceptance binary.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wearsim/scenario.hpp"

#ifndef WEARSIM_DATA_DIR
#define WEARSIM_DATA_DIR "data"
#endif

namespace ts {

using namespace wearsim;

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(WEARSIM_DATA_DIR) / name; }

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

inline Device device(std::string id, ResourceCategory cat, double idle_mw, double active_mw = 0.0,
                     double service_rate = 0.0, std::string rail = "battery") {
    Device d;
    d.id = std::move(id);
    d.category = cat;
    d.states = {{"idle", idle_mw}};
    if (active_mw > 0.0 || service_rate > 0.0) d.states.push_back({"active", active_mw});
    d.service_rate = service_rate;
    d.rail = std::move(rail);
    return d;
}

inline Scenario empty_scenario(double duration_s = 1.0) {
    Scenario s;
    s.duration_s = duration_s;
    s.battery = {3.0, 15.0};
    return s;
}

// Adds a sensor device + stream "<id>" at `rate_hz` (1x1x1x8 bits).
inline void add_trigger_sensor(Scenario& s, const std::string& id, double rate_hz) {
    s.devices.push_back(device(id + "_dev", ResourceCategory::Sensor, 0.0));
    SensorStream st;
    st.id = id;
    st.device = id + "_dev";
    st.bit_depth = 8;
    st.rate_hz = rate_hz;
    s.sensors.push_back(st);
}

inline Task task(std::string id, std::string dev, double work, std::vector<std::string> deps = {}) {
    Task t;
    t.id = std::move(id);
    t.device = std::move(dev);
    t.work = work;
    t.deps = std::move(deps);
    return t;
}

// Adds an on-device primitive "<graph id>" whose graph fires on `sensor`.
inline void add_graph(Scenario& s, const std::string& id, const std::string& sensor, std::int64_t divisor,
                      std::vector<Task> tasks, double signal_rate = 0.0) {
    Primitive p;
    p.id = id;
    p.sensors = {{sensor, divisor}};
    TaskGraph g;
    g.id = id;
    g.trigger = {sensor, divisor};
    g.tasks = std::move(tasks);
    p.on_device_graph = std::move(g);
    p.signal_rate = signal_rate;
    s.primitives.push_back(std::move(p));
    s.placement[id] = Placement::OnDevice;
}

// One compute device running a single task of `task_seconds` per firing.
inline Scenario single_task_scenario(double task_seconds, double rate_hz, double duration_s,
                                     double idle_mw = 1.0, double active_mw = 10.0) {
    Scenario s = empty_scenario(duration_s);
    add_trigger_sensor(s, "trig", rate_hz);
    s.devices.push_back(device("cpu", ResourceCategory::Compute, idle_mw, active_mw, 1e6));
    add_graph(s, "g", "trig", 1, {task("t", "cpu", task_seconds * 1e6)});
    return s;
}

// Two graphs, each demanding 60 ms per 100 ms period on one device
// (offered load 1.2).
inline Scenario overloaded_scenario(double duration_s) {
    Scenario s = empty_scenario(duration_s);
    add_trigger_sensor(s, "clk", 10.0);
    s.devices.push_back(device("cpu", ResourceCategory::Compute, 1.0, 10.0, 1000.0));
    add_graph(s, "a", "clk", 1, {task("t", "cpu", 60.0)});
    add_graph(s, "b", "clk", 1, {task("t", "cpu", 60.0)});
    return s;
}

inline RadioProfile radio_profile(std::string id, std::string dev, double throughput_bps, double maint_mw,
                                  double epb_nj, double max_bw_bps) {
    RadioProfile p;
    p.id = std::move(id);
    p.device = std::move(dev);
    p.throughput_bps = throughput_bps;
    p.maintenance_power_mw = maint_mw;
    p.tx_energy_per_byte_nj = epb_nj;
    p.max_bandwidth_bps = max_bw_bps;
    return p;
}

inline void add_radio(Scenario& s, const RadioProfile& p) {
    s.devices.push_back(device(p.device, ResourceCategory::Radio, 0.0));
    s = with_radio(std::move(s), p);
}

// Closed-form active duty per device: sum over graphs and tasks of
// work * trigger_rate / divisor / service_rate. Valid when firings never
// overlap and the duration is a whole number of trigger periods.
inline std::map<std::string, double> closed_form_duty(const Scenario& s) {
    std::map<std::string, double> duty;
    for (const auto& d : s.devices) duty[d.id] = 0.0;
    for (const auto& p : s.primitives) {
        if (!p.on_device_graph || s.placement.at(p.id) != Placement::OnDevice) continue;
        const auto& g = *p.on_device_graph;
        double rate = 0.0;
        for (const auto& st : s.sensors)
            if (st.id == g.trigger.sensor) rate = st.rate_hz / static_cast<double>(g.trigger.divisor);
        for (const auto& t : g.tasks) {
            for (const auto& d : s.devices)
                if (d.id == t.device) duty[d.id] += t.work * rate / d.service_rate;
        }
    }
    return duty;
}

// Random contention-free workload: every graph owns its devices, its task
// chain finishes inside one trigger period, and the duration is a whole
// number of periods.
inline Scenario random_contention_free(std::mt19937_64& rng) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto unit = [&] { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
    static const double kRates[] = {10, 20, 30, 40, 50, 100};
    static const std::int64_t kDivisors[] = {1, 2, 5, 10};

    Scenario s = empty_scenario(static_cast<double>(pick(1, 3)));
    const int graphs = pick(1, 4);
    for (int gi = 0; gi < graphs; ++gi) {
        const std::string gid = "g" + std::to_string(gi);
        const double rate = kRates[pick(0, 5)];
        const std::int64_t div = kDivisors[pick(0, 3)];
        const double period = static_cast<double>(div) / rate;
        add_trigger_sensor(s, gid + "_sensor", rate);

        const int ndev = pick(1, 3);
        std::vector<std::string> devs;
        for (int di = 0; di < ndev; ++di) {
            const std::string did = gid + "_d" + std::to_string(di);
            const bool link = pick(0, 3) == 0;
            const double svc = link ? 1e6 * pick(1, 100) : 1e3 * pick(1, 1000);
            s.devices.push_back(device(did, link ? ResourceCategory::Interconnect : ResourceCategory::Compute,
                                       unit() * 5.0, 5.0 + unit() * 100.0, svc));
            devs.push_back(did);
        }
        const int ntasks = pick(1, 4);
        // Chain spans at most 80% of the period.
        std::vector<double> spans(ntasks);
        double sum = 0.0;
        for (auto& x : spans) sum += (x = 0.05 + unit());
        const double budget = period * (0.05 + 0.75 * unit());
        std::vector<Task> tasks;
        for (int ti = 0; ti < ntasks; ++ti) {
            const std::string& did = devs[pick(0, ndev - 1)];
            double svc = 0.0;
            for (const auto& d : s.devices)
                if (d.id == did) svc = d.service_rate;
            std::vector<std::string> deps;
            if (ti > 0) deps.push_back("t" + std::to_string(ti - 1));
            tasks.push_back(task("t" + std::to_string(ti), did, budget * spans[ti] / sum * svc, deps));
        }
        add_graph(s, gid, gid + "_sensor", div, std::move(tasks));
    }
    return s;
}

// Random rail forest of depth <= max_depth with devices attached anywhere.
inline Scenario random_rail_tree(std::mt19937_64& rng, int max_depth = 5) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto unit = [&] { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
    Scenario s = empty_scenario(1.0);
    std::vector<std::pair<std::string, int>> nodes{{std::string(kBatteryRail), 0}};
    const int nrails = pick(0, 8);
    for (int i = 0; i < nrails; ++i) {
        std::vector<std::size_t> eligible;
        for (std::size_t k = 0; k < nodes.size(); ++k)
            if (nodes[k].second < max_depth) eligible.push_back(k);
        const auto& parent = nodes[eligible[pick(0, static_cast<int>(eligible.size()) - 1)]];
        RailNode r{"r" + std::to_string(i), 0.5 + 0.5 * unit(), parent.first};
        if (pick(0, 5) == 0) r.efficiency = 1.0;
        s.rails.push_back(r);
        nodes.push_back({r.id, parent.second + 1});
    }
    const int ndev = pick(1, 10);
    for (int i = 0; i < ndev; ++i) {
        const auto& rail = nodes[pick(0, static_cast<int>(nodes.size()) - 1)].first;
        s.devices.push_back(device("d" + std::to_string(i), ResourceCategory::Compute, unit() * 200.0, 0.0, 0.0, rail));
    }
    return s;
}

// Path-product oracle: each device load divided by the efficiencies of every
// rail between it and the battery.
inline double path_product_draw(const Scenario& s, const std::map<std::string, double>& loads) {
    double total = 0.0;
    for (const auto& [id, mw] : loads) {
        std::string rail;
        for (const auto& d : s.devices)
            if (d.id == id) rail = d.rail;
        double draw = mw;
        while (rail != kBatteryRail) {
            const RailNode* r = s.find_rail(rail);
            draw /= r->efficiency;
            rail = r->parent;
        }
        total += draw;
    }
    return total;
}

}  // namespace ts
