#include "wearsim/dse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace wearsim {

PowerReport evaluate(const Scenario& scenario, const SimOptions& options) {
    return aggregate(run(scenario, options), scenario);
}

const PlacementRow* SweepResult::find(std::string_view label) const {
    for (const auto& r : rows) {
        if (r.label == label) return &r;
    }
    return nullptr;
}

SweepResult placement_sweep(const Scenario& scenario, const std::vector<std::string>& subset,
                            const SweepOptions& options) {
    if (subset.size() > kMaxFreePrimitives) {
        throw GuardError("combinatorial guard: " + std::to_string(subset.size()) + " free primitives exceed the limit of " +
                         std::to_string(kMaxFreePrimitives) + "; pass an explicit configuration list instead");
    }
    std::vector<const Primitive*> free;
    for (const auto& name : subset) {
        const Primitive* p = scenario.resolve_primitive(name);
        if (!p) throw ValidationError(name, "unknown primitive");
        if (p->forced != Forced::None) throw ValidationError(p->id, "primitive placement is forced and cannot be swept");
        if (std::find(free.begin(), free.end(), p) != free.end()) throw ValidationError(p->id, "listed twice");
        free.push_back(p);
    }
    const PlacementConfig base = full_offload(scenario);
    const std::size_t n = std::size_t{1} << free.size();
    auto rows = parallel_map<PlacementRow>(n, options.jobs, [&](std::size_t mask) {
        PlacementRow row;
        row.placement = base;
        std::string label;
        for (std::size_t j = 0; j < free.size(); ++j) {
            if (!(mask & (std::size_t{1} << j))) continue;
            row.placement[free[j]->id] = Placement::OnDevice;
            label += (label.empty() ? "" : "+") + subset[j];
        }
        row.label = label.empty() ? "full_offload" : label;
        Scenario s = scenario;
        s.placement = row.placement;
        row.report = evaluate(s, options.sim);
        return row;
    });
    const double base_total = rows.front().report.total;
    for (auto& r : rows) r.delta_percent = base_total > 0.0 ? (r.report.total - base_total) / base_total * 100.0 : 0.0;
    rows.front().delta_percent = 0.0;
    return SweepResult{std::move(rows)};
}

const RadioProfile& radio_fallback(double demand_bps, const RadioProfile& primary, const RadioProfile& fallback,
                                   double threshold_bps) {
    if (fallback.max_bandwidth_bps < threshold_bps)
        throw std::invalid_argument("fallback max bandwidth is below the fallback threshold");
    const bool primary_ok = demand_bps <= primary.max_bandwidth_bps;
    const bool fallback_ok = demand_bps <= fallback.max_bandwidth_bps;
    if (!primary_ok && !fallback_ok) {
        throw ValidationError(primary.id, "upload demand of " + std::to_string(demand_bps) +
                                              " bps exceeds both '" + primary.id + "' and '" + fallback.id + "'");
    }
    if (!primary_ok) return fallback;
    if (demand_bps < threshold_bps && fallback.power_at(demand_bps) < primary.power_at(demand_bps)) return fallback;
    return primary;
}

CompressionGrid compression_sweep(const Scenario& scenario, const std::vector<double>& ratios,
                                  const std::vector<std::int64_t>& divisors, const SweepOptions& options) {
    if (!scenario.radio) throw ValidationError("radio", "compression sweep needs a radio profile");
    for (double r : ratios) {
        if (!(r >= 1.0)) throw ValidationError("ratios", "compression ratios must be >= 1");
    }
    for (auto d : divisors) {
        if (d < 1) throw ValidationError("divisors", "rate divisors must be >= 1");
    }
    const RadioProfile primary = *scenario.radio;
    const RadioProfile* fallback = scenario.fallback ? scenario.find_profile(scenario.fallback->profile) : nullptr;
    Scenario base = scenario;
    base.placement = full_offload(scenario);

    CompressionGrid grid;
    grid.ratios = ratios;
    grid.divisors = divisors;
    const std::size_t n = ratios.size() * divisors.size();
    grid.cells = parallel_map<CompressionCell>(n, options.jobs, [&](std::size_t i) {
        CompressionCell cell;
        cell.divisor = divisors[i / ratios.size()];
        cell.ratio = ratios[i % ratios.size()];
        Scenario s = base;
        s.upload.compression = base.upload.compression * cell.ratio;
        s.upload.rate_divisor = base.upload.rate_divisor * cell.divisor;
        cell.demand_bps = 8.0 * total_upload_bytes(upload_plan(s, s.placement));
        const RadioProfile& chosen =
            fallback ? radio_fallback(cell.demand_bps, primary, *fallback, scenario.fallback->threshold_bps) : primary;
        s = with_radio(std::move(s), chosen);
        const PowerReport report = evaluate(s, options.sim);
        cell.total_mw = report.total;
        cell.radio_mw = report.per_component.at(chosen.device);
        cell.selected_profile = chosen.id;
        cell.maintenance_mw = chosen.maintenance_power_mw;
        auto idle_link = report.per_component;
        idle_link[chosen.device] = chosen.maintenance_power_mw;
        cell.floor_mw = battery_draw(s, idle_link);
        return cell;
    });
    return grid;
}

ScalingTable default_scaling_table() {
    ScalingTable t;
    t.factor_per_node = {{PowerType::DigitalDynamic, 0.85},
                         {PowerType::DigitalLeakage, 0.90},
                         {PowerType::Analog, 0.97},
                         {PowerType::Rf, 0.98}};
    t.node_cadence_years = 2.0;
    return t;
}

void validate(const ScalingTable& table) {
    if (!(table.node_cadence_years > 0.0)) throw ValidationError("node_cadence_years", "cadence must be > 0");
    for (PowerType t : kAllPowerTypes) {
        auto it = table.factor_per_node.find(t);
        if (it == table.factor_per_node.end()) throw ValidationError(std::string(to_string(t)), "missing scaling factor");
        if (!(it->second > 0.0 && it->second <= 1.0))
            throw ValidationError(std::string(to_string(t)), "scaling factor must lie in (0, 1]");
    }
}

ScalingTable load_scaling_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scaling table '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed scaling table: ") + e.what());
    }
    ScalingTable t;
    try {
        for (const auto& [k, v] : j.items()) {
            if (k != "node_cadence_years" && k != "factors") throw ParseError("scaling table: unknown key '" + k + "'");
        }
        t.node_cadence_years = j.value("node_cadence_years", 2.0);
        for (const auto& [k, v] : j.at("factors").items()) {
            bool known = false;
            for (PowerType pt : kAllPowerTypes) {
                if (to_string(pt) == k) {
                    t.factor_per_node[pt] = v.get<double>();
                    known = true;
                }
            }
            if (!known) throw ParseError("scaling table: unknown power type '" + k + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scaling table schema error: ") + e.what());
    }
    validate(t);
    return t;
}

double ScalingRow::share(PowerType t) const {
    double sum = 0.0;
    for (const auto& [_, mw] : per_type_mw) sum += mw;
    return sum > 0.0 ? per_type_mw.at(t) / sum : 0.0;
}

std::vector<ScalingRow> scaling_projection(const PowerReport& report, const Scenario& scenario,
                                           const ScalingTable& table, int horizon_years) {
    validate(table);
    if (horizon_years < 0) throw std::invalid_argument("horizon must be >= 0");
    for (const auto& d : scenario.devices) {
        if (!d.decomposition) throw ValidationError(d.id, "device has no power decomposition");
    }
    std::vector<ScalingRow> rows;
    for (int year = 0; year <= horizon_years; ++year) {
        ScalingRow row;
        row.year = year;
        row.node = static_cast<int>(std::floor(year / table.node_cadence_years));
        for (PowerType t : kAllPowerTypes) row.per_type_mw[t] = 0.0;
        std::map<std::string, double> projected;
        for (const auto& d : scenario.devices) {
            const double base = report.per_component.at(d.id);
            double mw = 0.0;
            for (PowerType t : kAllPowerTypes) {
                const double part = base * d.decomposition->fraction(t) * std::pow(table.factor_per_node.at(t), row.node);
                row.per_type_mw[t] += part;
                mw += part;
            }
            projected[d.id] = mw;
        }
        // Node 0 is the unscaled input.
        row.report = row.node == 0 ? report : report_from_components(scenario, std::move(projected));
        for (const auto& [_, loss] : row.report.per_rail_loss) row.power_delivery_mw += loss;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::map<std::string, double> component_shares(const PowerReport& report) {
    if (!(report.total > 0.0)) throw std::domain_error("cannot analyse a zero-power report");
    double sum = 0.0;
    std::map<std::string, double> items = report.per_component;
    for (const auto& [id, mw] : report.per_rail_loss) {
        if (mw > 0.0) items[id] = mw;
    }
    for (const auto& [_, mw] : items) sum += mw;
    std::map<std::string, double> shares;
    for (const auto& [id, mw] : items) shares[id] = mw / sum * 100.0;
    return shares;
}

std::vector<std::string> top_components(const PowerReport& report, std::size_t top_n) {
    const auto shares = component_shares(report);
    std::vector<std::pair<std::string, double>> ranked(shares.begin(), shares.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(top_n, ranked.size()); ++i) out.push_back(ranked[i].first);
    return out;
}

AmdahlTable amdahl_analysis(const PowerReport& report, const std::vector<double>& thresholds,
                            const std::optional<std::vector<std::string>>& improvable) {
    if (thresholds.empty()) throw std::invalid_argument("at least one threshold is required");
    std::vector<double> sorted = thresholds;
    std::sort(sorted.begin(), sorted.end());
    const auto shares = component_shares(report);

    // Relative slack so a share equal to a threshold is counted despite
    // rounding in the division.
    auto within = [](double share, double threshold) { return share <= threshold * (1.0 + 1e-9); };

    AmdahlTable table;
    for (double th : sorted) {
        AmdahlRow row{th, 0, 0.0};
        for (const auto& [_, share] : shares) {
            if (within(share, th)) {
                ++row.count;
                row.cumulative_percent += share;
            }
        }
        table.rows.push_back(row);
    }
    if (table.rows.back().count < shares.size()) {
        double all = 0.0;
        for (const auto& [_, share] : shares) all += share;
        table.rows.push_back({100.0, shares.size(), all});
    }

    if (improvable) {
        for (const auto& id : *improvable) {
            if (!shares.count(id)) throw std::invalid_argument("unknown component '" + id + "'");
        }
        table.improvable = *improvable;
    } else {
        const double prev = table.rows.size() >= 2 ? table.rows[table.rows.size() - 2].threshold_percent : -1.0;
        const bool single = table.rows.size() < 2;
        for (const auto& [id, share] : shares) {
            if (single || !within(share, prev)) table.improvable.push_back(id);
        }
    }
    for (const auto& id : table.improvable) table.improvable_fraction += shares.at(id) / 100.0;
    table.improvable_fraction = std::min(1.0, table.improvable_fraction);
    table.bound = amdahl_bound(table.improvable_fraction);
    return table;
}

BudgetCheck budget_check(const PowerReport& report, const Scenario& scenario) {
    BudgetCheck c;
    c.budget_mw = power_budget(scenario.battery);
    c.thermal_limit_mw = scenario.thermal_limit_mw;
    c.average_ok = report.total <= c.budget_mw;
    c.sustained_ok = report.total <= c.thermal_limit_mw;
    c.average_margin_mw = c.budget_mw - report.total;
    c.sustained_margin_mw = c.thermal_limit_mw - report.total;
    return c;
}

}  // namespace wearsim
