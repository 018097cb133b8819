#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "wearsim/power.hpp"
#include "wearsim/scenario.hpp"
#include "wearsim/sim.hpp"

namespace wearsim {

// A sweep request that would enumerate too many configurations.
class GuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxFreePrimitives = 8;

// Runs fn(0..n-1) on up to `jobs` threads. Results land at their index, so
// output order never depends on the thread count.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned jobs, const std::function<T(std::size_t)>& fn) {
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<T> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

struct SweepOptions {
    unsigned jobs = 1;
    SimOptions sim;
};

struct PlacementRow {
    std::string label;
    PlacementConfig placement;
    PowerReport report;
    double delta_percent = 0.0;
};

struct SweepResult {
    std::vector<PlacementRow> rows;  // rows[0] is the full-offload baseline
    const PlacementRow& baseline() const { return rows.front(); }
    const PlacementRow* find(std::string_view label) const;
};

// Simulates every on/off-device combination of `subset` (ids or aliases),
// with all other primitives at their full-offload placement. Row i places
// subset[j] on-device iff bit j of i is set.
SweepResult placement_sweep(const Scenario& scenario, const std::vector<std::string>& subset,
                            const SweepOptions& options = {});

const RadioProfile& radio_fallback(double demand_bps, const RadioProfile& primary, const RadioProfile& fallback,
                                   double threshold_bps = 1e6);

inline const std::vector<double> kDefaultCompressionRatios{1, 2, 4, 8, 16, 32, 64, 128};
inline const std::vector<std::int64_t> kDefaultRateDivisors{1, 2, 4, 8, 16, 32};

struct CompressionCell {
    double ratio = 1.0;
    std::int64_t divisor = 1;
    double demand_bps = 0.0;
    double total_mw = 0.0;
    double radio_mw = 0.0;
    // Total with the selected link carrying no payload.
    double floor_mw = 0.0;
    double maintenance_mw = 0.0;
    std::string selected_profile;
};

struct CompressionGrid {
    std::vector<double> ratios;
    std::vector<std::int64_t> divisors;
    std::vector<CompressionCell> cells;  // row-major: divisor-major, ratio-minor

    const CompressionCell& at(std::size_t divisor_index, std::size_t ratio_index) const {
        return cells[divisor_index * ratios.size() + ratio_index];
    }
};

// Full-offload link-demand sweep. Compute and sensor power stay fixed; only
// the uplink payload (and therefore the radio) changes.
CompressionGrid compression_sweep(const Scenario& scenario, const std::vector<double>& ratios = kDefaultCompressionRatios,
                                  const std::vector<std::int64_t>& divisors = kDefaultRateDivisors,
                                  const SweepOptions& options = {});

struct ScalingTable {
    std::map<PowerType, double> factor_per_node;
    double node_cadence_years = 2.0;
};

ScalingTable default_scaling_table();
ScalingTable load_scaling_table(const std::filesystem::path& path);
void validate(const ScalingTable& table);

struct ScalingRow {
    int year = 0;
    int node = 0;
    std::map<PowerType, double> per_type_mw;  // device power split by type
    double power_delivery_mw = 0.0;
    PowerReport report;

    double share(PowerType t) const;
};

std::vector<ScalingRow> scaling_projection(const PowerReport& report, const Scenario& scenario,
                                           const ScalingTable& table, int horizon_years);

inline const std::vector<double> kDefaultAmdahlThresholds{0.1, 0.5, 1, 5, 10, 25};

struct AmdahlRow {
    double threshold_percent = 0.0;
    std::size_t count = 0;
    double cumulative_percent = 0.0;
};

struct AmdahlTable {
    std::vector<AmdahlRow> rows;
    std::vector<std::string> improvable;
    double improvable_fraction = 0.0;
    double bound = 1.0;  // +inf when everything is improvable
};

inline double amdahl_bound(double improvable_fraction) {
    return improvable_fraction >= 1.0 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - improvable_fraction);
}

// Per-item power shares in percent, ranked over devices and non-zero rail losses.
std::map<std::string, double> component_shares(const PowerReport& report);

// Without `improvable`, the improvable set is the items that first appear in
// the last row of the table (the largest consumers).
AmdahlTable amdahl_analysis(const PowerReport& report,
                            const std::vector<double>& thresholds = kDefaultAmdahlThresholds,
                            const std::optional<std::vector<std::string>>& improvable = std::nullopt);

// The `top_n` highest-power items.
std::vector<std::string> top_components(const PowerReport& report, std::size_t top_n);

struct BudgetCheck {
    double budget_mw = 0.0;
    double thermal_limit_mw = 0.0;
    bool average_ok = false;
    bool sustained_ok = false;
    double average_margin_mw = 0.0;
    double sustained_margin_mw = 0.0;
};

BudgetCheck budget_check(const PowerReport& report, const Scenario& scenario);

// Simulates and aggregates `scenario` as given.
PowerReport evaluate(const Scenario& scenario, const SimOptions& options = {});

}  // namespace wearsim
