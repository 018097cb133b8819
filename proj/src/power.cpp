#include "wearsim/power.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wearsim {

std::map<std::string, double> PowerReport::items() const {
    std::map<std::string, double> out = per_component;
    for (const auto& [id, mw] : per_rail_loss) out[id] = mw;
    return out;
}

double device_power(const DeviceTimeline& timeline, const Device& device, double duration_s) {
    if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be > 0");
    double mw = 0.0;
    for (const auto& [state, seconds] : timeline.state_seconds) {
        const PowerState* st = device.find_state(state);
        if (!st) throw std::invalid_argument("device '" + device.id + "' has no state '" + state + "'");
        mw += (seconds / duration_s) * st->power_mw;
    }
    // nJ/byte * bytes/s = nW; 1e-6 converts to mW.
    mw += timeline.bytes_moved * device.energy_per_byte_nj * 1e-6 / duration_s;
    return mw;
}

namespace {

int rail_depth(const Scenario& s, const RailNode& r) {
    int depth = 0;
    for (const RailNode* cur = &r; cur->parent != kBatteryRail; cur = s.find_rail(cur->parent)) ++depth;
    return depth;
}

struct RailFlow {
    std::map<std::string, double> input;  // rail id -> input power
    std::map<std::string, double> loss;
    double battery = 0.0;
};

RailFlow propagate(const Scenario& s, const std::map<std::string, double>& per_component) {
    std::map<std::string, double> delivered;
    for (const auto& r : s.rails) delivered[r.id] = 0.0;
    double battery = 0.0;
    for (const auto& d : s.devices) {
        auto it = per_component.find(d.id);
        const double mw = it == per_component.end() ? 0.0 : it->second;
        if (d.rail == kBatteryRail) battery += mw;
        else delivered.at(d.rail) += mw;
    }
    std::vector<const RailNode*> order;
    for (const auto& r : s.rails) order.push_back(&r);
    std::stable_sort(order.begin(), order.end(), [&](const RailNode* a, const RailNode* b) {
        return rail_depth(s, *a) > rail_depth(s, *b);
    });
    RailFlow flow;
    for (const RailNode* r : order) {
        const double out = delivered.at(r->id);
        const double in = out / r->efficiency;
        flow.input[r->id] = in;
        flow.loss[r->id] = in - out;
        if (r->parent == kBatteryRail) battery += in;
        else delivered.at(r->parent) += in;
    }
    flow.battery = battery;
    return flow;
}

}  // namespace

std::map<std::string, double> rail_losses(const Scenario& scenario, const std::map<std::string, double>& per_component) {
    return propagate(scenario, per_component).loss;
}

double battery_draw(const Scenario& scenario, const std::map<std::string, double>& per_component) {
    return propagate(scenario, per_component).battery;
}

PowerReport report_from_components(const Scenario& scenario, std::map<std::string, double> per_component) {
    PowerReport report;
    for (ResourceCategory c : kAllCategories) report.per_category[c] = 0.0;
    for (const auto& d : scenario.devices) {
        const double mw = per_component[d.id];
        report.per_category[d.category] += mw;
        report.component_category[d.id] = d.category;
    }
    report.per_component = std::move(per_component);
    const RailFlow flow = propagate(scenario, report.per_component);
    report.per_rail_loss = flow.loss;
    for (const auto& [id, mw] : flow.loss) {
        report.per_category[ResourceCategory::PowerDelivery] += mw;
        report.component_category[id] = ResourceCategory::PowerDelivery;
    }
    report.total = flow.battery;
    return report;
}

PowerReport aggregate(const SimTrace& trace, const Scenario& scenario) {
    std::map<std::string, double> per_component;
    for (const auto& d : scenario.devices) {
        auto it = trace.timelines.find(d.id);
        if (it == trace.timelines.end()) throw std::invalid_argument("trace has no timeline for device '" + d.id + "'");
        per_component[d.id] = device_power(it->second, d, trace.duration_s);
    }
    return report_from_components(scenario, std::move(per_component));
}

double round_sig(double value, int sig_figs) {
    if (value == 0.0 || !std::isfinite(value)) return value;
    const int exponent = static_cast<int>(std::floor(std::log10(std::abs(value))));
    const double scale = std::pow(10.0, sig_figs - 1 - exponent);
    return std::round(value * scale) / scale;
}

std::map<std::string, double> render_percentages(const PowerReport& report) {
    if (!(report.total > 0.0)) throw std::domain_error("cannot render percentages of a zero total");
    std::map<std::string, double> rounded;
    double sum = 0.0;
    for (const auto& [id, mw] : report.items()) {
        rounded[id] = round_sig(mw, report.rounding.sig_figs);
        sum += rounded[id];
    }
    std::map<std::string, double> percent;
    if (!(sum > 0.0)) throw std::domain_error("all components round to zero");
    double assigned = 0.0;
    std::string largest;
    for (const auto& [id, mw] : rounded) {
        const double p = std::round(mw / sum * 1000.0) / 10.0;
        percent[id] = p;
        assigned += p;
        if (largest.empty() || mw > rounded[largest]) largest = id;
    }
    percent[largest] = std::round((percent[largest] + (100.0 - assigned)) * 10.0) / 10.0;
    return percent;
}

}  // namespace wearsim
