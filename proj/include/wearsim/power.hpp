#pragma once

#include <map>
#include <string>
#include <vector>

#include "wearsim/scenario.hpp"
#include "wearsim/sim.hpp"

namespace wearsim {

struct PowerReport {
    std::map<std::string, double> per_component;  // device id -> mW
    std::map<std::string, double> per_rail_loss;  // rail id -> mW
    std::map<ResourceCategory, double> per_category;
    std::map<std::string, ResourceCategory> component_category;
    double total = 0.0;  // battery draw, mW

    struct Rounding {
        int sig_figs = 2;
        bool applied = false;
    } rounding;

    // Components and rail losses in one id -> mW map (rail ids are distinct
    // from device ids by construction of the scenario).
    std::map<std::string, double> items() const;
};

// Average power of one device over `duration_s`, in mW.
double device_power(const DeviceTimeline& timeline, const Device& device, double duration_s);

// Loss per rail for the given per-device loads, propagated up the rail tree.
std::map<std::string, double> rail_losses(const Scenario& scenario, const std::map<std::string, double>& per_component);

// Battery draw for the given loads (root input power).
double battery_draw(const Scenario& scenario, const std::map<std::string, double>& per_component);

// Builds a report from per-device loads; shared by aggregate() and analyses
// that rescale component powers.
PowerReport report_from_components(const Scenario& scenario, std::map<std::string, double> per_component);

PowerReport aggregate(const SimTrace& trace, const Scenario& scenario);

double round_sig(double value, int sig_figs);

// Rounds every item to two significant figures, then normalises to percent.
// Percentages carry one decimal and sum to exactly 100 after the residual is
// given to the largest item.
std::map<std::string, double> render_percentages(const PowerReport& report);

}  // namespace wearsim
