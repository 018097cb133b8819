// wearsim command-line front end.
//
// Exit codes: 0 success, 1 validation, 2 I/O, 3 guard/limit.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wearsim/dse.hpp"
#include "wearsim/power.hpp"
#include "wearsim/report.hpp"
#include "wearsim/scenario.hpp"
#include "wearsim/sim.hpp"

namespace fs = std::filesystem;
using namespace wearsim;

namespace {

enum Exit { kOk = 0, kValidation = 1, kIo = 2, kGuard = 3 };

struct Globals {
    std::string out_dir;
    double duration_s = 0.0;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    bool strict_memory = false;
    bool lenient = false;
    std::string trace;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct Loaded {
    Scenario scenario;
    std::string path;
    std::string sha256;
};

Loaded load(const std::string& path, const Globals& g) {
    const std::string text = read_file(path);
    Loaded l{parse_scenario(text, {g.lenient}), path, sha256_hex(text)};
    if (g.duration_s > 0.0) l.scenario.duration_s = g.duration_s;
    return l;
}

// "as_declared", "full_offload", "full_on_device" or "id=on_device,id2=offload".
PlacementConfig resolve_placement(const Scenario& s, const std::string& spec) {
    if (spec.empty() || spec == "as_declared") return s.placement;
    if (spec == "full_offload") return full_offload(s);
    if (spec == "full_on_device") return full_on_device(s);
    PlacementConfig p = s.placement;
    for (const auto& item : split_list(spec)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError(item, "expected <primitive>=on_device|offload");
        const Primitive* prim = s.resolve_primitive(item.substr(0, eq));
        if (!prim) throw ValidationError(item.substr(0, eq), "unknown primitive");
        const std::string where = item.substr(eq + 1);
        if (where == "on_device" || where == "on") p[prim->id] = Placement::OnDevice;
        else if (where == "offload" || where == "off") p[prim->id] = Placement::Offload;
        else throw ValidationError(item, "expected on_device or offload");
    }
    check_placement(s, p);
    return p;
}

fs::path out_dir(const Globals& g) {
    if (!g.out_dir.empty()) return g.out_dir;
    if (const char* env = std::getenv("WEARSIM_OUT"); env && *env) return env;
    return "wearsim_out";
}

class Outputs {
public:
    Outputs(fs::path dir, const Loaded* scenario, std::vector<std::string> argv)
        : dir_(std::move(dir)), scenario_(scenario), argv_(std::move(argv)) {}

    void write(const std::string& name, const std::string& content) {
        write_output(dir_, name, content);
        names_.push_back(name);
    }
    void add_external(const std::string& path) { names_.push_back(path); }

    void finish() {
        Manifest m;
        if (scenario_) {
            m.scenario_path = scenario_->path;
            m.scenario_sha256 = scenario_->sha256;
        }
        m.command = argv_;
        m.outputs = names_;
        write_output(dir_, "manifest.json", manifest_json(m));
        std::cout << "wrote " << names_.size() << " file(s) to " << dir_.string() << "\n";
    }

private:
    fs::path dir_;
    const Loaded* scenario_;
    std::vector<std::string> argv_;
    std::vector<std::string> names_;
};

Bar bar_of(const std::string& label, const PowerReport& r) {
    Bar b{label, {}};
    for (const auto& [c, mw] : r.per_category) {
        if (mw > 0.0) b.segments[c] = mw;
    }
    return b;
}

void print_rollup(const PowerReport& report, const BudgetCheck& budget) {
    std::cout << "category         mW        share\n";
    for (ResourceCategory c : kAllCategories) {
        const double mw = report.per_category.at(c);
        const double pct = report.total > 0 ? mw / report.total * 100.0 : 0.0;
        std::printf("%-14s %10.2f   %5.1f%%\n", std::string(to_string(c)).c_str(), mw, pct);
    }
    std::printf("%-14s %10.2f\n", "total", report.total);
    std::printf("average budget %.1f mW: %s (margin %.1f mW)\n", budget.budget_mw, budget.average_ok ? "OK" : "EXCEEDED",
                budget.average_margin_mw);
    std::printf("thermal limit  %.1f mW: %s (margin %.1f mW)\n", budget.thermal_limit_mw,
                budget.sustained_ok ? "OK" : "EXCEEDED", budget.sustained_margin_mw);
}

// Reads a report.csv written by `simulate` back into a report.
PowerReport report_from_csv(const std::string& path) {
    std::stringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("component,category,mW", 0) != 0)
        throw ParseError(path + ": not a report.csv (expected header component,category,mW,percent)");
    PowerReport r;
    for (ResourceCategory c : kAllCategories) r.per_category[c] = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split_list(line);
        if (cols.size() < 3) throw ParseError(path + ": malformed row '" + line + "'");
        const auto cat = parse_category(cols[1]);
        if (!cat) throw ParseError(path + ": unknown category '" + cols[1] + "'");
        double mw = 0.0;
        try {
            mw = std::stod(cols[2]);
        } catch (const std::exception&) {
            throw ParseError(path + ": bad mW value '" + cols[2] + "'");
        }
        if (*cat == ResourceCategory::PowerDelivery) r.per_rail_loss[cols[0]] = mw;
        else r.per_component[cols[0]] = mw;
        r.component_category[cols[0]] = *cat;
        r.per_category[*cat] += mw;
        r.total += mw;
    }
    return r;
}

int cmd_validate(const std::string& path, const Globals& g) {
    const Loaded l = load(path, g);
    std::cout << path << ": valid (" << l.scenario.devices.size() << " devices, " << l.scenario.primitives.size()
              << " primitives, " << l.scenario.sensors.size() << " sensor streams)\n";
    return kOk;
}

int cmd_simulate(const std::string& path, const std::string& placement, const Globals& g,
                 const std::vector<std::string>& argv) {
    Loaded l = load(path, g);
    l.scenario.placement = resolve_placement(l.scenario, placement);
    SimOptions opts{g.strict_memory, !g.trace.empty()};
    const SimTrace trace = run(l.scenario, opts);
    for (const auto& d : trace.diagnostics) std::cerr << d << "\n";
    const PowerReport report = aggregate(trace, l.scenario);
    const BudgetCheck budget = budget_check(report, l.scenario);

    Outputs out(out_dir(g), &l, argv);
    out.write("report.csv", report_csv(report));
    out.write("report.md", report_markdown(report, budget, "Power report: " + fs::path(path).filename().string()));
    std::vector<Bar> bars;
    if (report.total > 0.0) bars.push_back(bar_of(placement.empty() ? "as_declared" : placement, report));
    out.write("composition.svg", composition_svg(bars, "Power composition"));
    if (!g.trace.empty()) {
        const fs::path tp(g.trace);
        write_output(tp.has_parent_path() ? tp.parent_path() : fs::path("."), tp.filename().string(), trace_csv(trace));
        out.add_external(g.trace);
    }
    out.finish();
    print_rollup(report, budget);
    return kOk;
}

int cmd_sweep_placement(const std::string& path, const std::string& primitives, const Globals& g,
                        const std::vector<std::string>& argv) {
    const auto subset = split_list(primitives);
    if (subset.size() > kMaxFreePrimitives) {
        throw GuardError("combinatorial guard: " + std::to_string(subset.size()) + " free primitives exceed the limit of " +
                         std::to_string(kMaxFreePrimitives));
    }
    const Loaded l = load(path, g);
    const SweepResult result = placement_sweep(l.scenario, subset, {g.jobs, {g.strict_memory, false}});
    Outputs out(out_dir(g), &l, argv);
    out.write("sweep_placement.csv", placement_csv(result));
    std::vector<Bar> bars;
    for (const auto& r : result.rows) bars.push_back(bar_of(r.label, r.report));
    out.write("sweep_placement.svg", composition_svg(bars, "Power composition by on-device primitive set"));
    out.finish();
    for (const auto& r : result.rows) std::printf("%-40s %10.2f mW  %+7.2f%%\n", r.label.c_str(), r.report.total, r.delta_percent);
    return kOk;
}

template <class T>
std::vector<T> parse_numbers(const std::string& list, const char* what) {
    std::vector<T> out;
    for (const auto& item : split_list(list)) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(static_cast<T>(v));
        } catch (const std::exception&) {
            throw ValidationError(what, "bad number '" + item + "'");
        }
    }
    return out;
}

int cmd_sweep_compression(const std::string& path, const std::string& ratios, const std::string& divisors,
                          const Globals& g, const std::vector<std::string>& argv) {
    const Loaded l = load(path, g);
    const auto r = ratios.empty() ? kDefaultCompressionRatios : parse_numbers<double>(ratios, "ratios");
    const auto d = divisors.empty() ? kDefaultRateDivisors : parse_numbers<std::int64_t>(divisors, "divisors");
    const CompressionGrid grid = compression_sweep(l.scenario, r, d, {g.jobs, {g.strict_memory, false}});
    Outputs out(out_dir(g), &l, argv);
    out.write("sweep_compression.csv", compression_csv(grid));
    out.write("sweep_compression.svg", compression_svg(grid));
    out.finish();
    std::cout << "compute and sensor power held fixed; only uplink demand is swept\n";
    std::cout << grid.cells.size() << " grid points, total " << fmt_num(grid.cells.back().total_mw, 2) << " mW at "
              << fmt_num(grid.ratios.back(), 0) << ":1 / " << grid.divisors.back() << "x\n";
    return kOk;
}

int cmd_project(const std::string& path, const std::string& table_path, int horizon, const std::string& placement,
                const Globals& g, const std::vector<std::string>& argv) {
    Loaded l = load(path, g);
    l.scenario.placement = resolve_placement(l.scenario, placement);
    const ScalingTable table = table_path.empty() ? default_scaling_table() : load_scaling_table(table_path);
    const PowerReport report = evaluate(l.scenario, {g.strict_memory, false});
    const auto rows = scaling_projection(report, l.scenario, table, horizon);
    Outputs out(out_dir(g), &l, argv);
    out.write("scaling.csv", scaling_csv(rows));
    out.write("scaling.svg", scaling_svg(rows));
    out.finish();
    for (const auto& r : rows) {
        std::printf("year %2d node %d  total %9.2f mW  analog share %5.2f%%\n", r.year, r.node, r.report.total,
                    r.share(PowerType::Analog) * 100.0);
    }
    return kOk;
}

int cmd_amdahl(const std::string& path, const std::string& thresholds, std::size_t top, const std::string& placement,
               const Globals& g, const std::vector<std::string>& argv) {
    PowerReport report;
    std::optional<Loaded> loaded;
    if (fs::path(path).extension() == ".csv") {
        report = report_from_csv(path);
    } else {
        loaded = load(path, g);
        loaded->scenario.placement = resolve_placement(loaded->scenario, placement);
        report = evaluate(loaded->scenario, {g.strict_memory, false});
    }
    if (!(report.total > 0.0)) throw ValidationError(path, "report has zero total power");
    const auto th = thresholds.empty() ? kDefaultAmdahlThresholds : parse_numbers<double>(thresholds, "thresholds");
    std::optional<std::vector<std::string>> improvable;
    if (top > 0) improvable = top_components(report, top);
    const AmdahlTable table = amdahl_analysis(report, th, improvable);
    Outputs out(out_dir(g), loaded ? &*loaded : nullptr, argv);
    out.write("amdahl.csv", amdahl_csv(table));
    out.write("amdahl.svg", amdahl_svg(table));
    out.finish();
    for (const auto& r : table.rows) std::printf("<= %6.2f%%  %4zu components  %6.2f%%\n", r.threshold_percent, r.count, r.cumulative_percent);
    std::cout << "improvable set: " << table.improvable.size() << " component(s), "
              << fmt_num(table.improvable_fraction * 100.0, 2) << "% of power\n";
    std::cout << "bound: " << (std::isinf(table.bound) ? std::string("inf") : fmt_num(table.bound, 2)) << "x\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wearsim: event-driven power and performance simulator for wearable devices"};
    app.require_subcommand(1);
    Globals g;
    auto add_globals = [&g](CLI::App* a) {
        a->add_option("--out-dir", g.out_dir, "Output directory (default: $WEARSIM_OUT or ./wearsim_out)");
        a->add_option("--duration-s", g.duration_s, "Override simulated duration in seconds")->check(CLI::PositiveNumber);
        a->add_option("--jobs", g.jobs, "Parallel sweep workers")->check(CLI::PositiveNumber);
        a->add_flag("--strict-memory", g.strict_memory, "Treat memory over-commitment as an error");
        a->add_flag("--lenient", g.lenient, "Ignore unknown keys in scenario files");
        a->add_option("--trace", g.trace, "Write a device state trace CSV");
    };
    add_globals(&app);

    std::string path, placement, primitives, ratios, divisors, table, thresholds;
    int horizon = 8;
    std::size_t top = 0;

    auto* validate_cmd = app.add_subcommand("validate", "Validate a scenario file");
    validate_cmd->add_option("scenario", path)->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a scenario and write a power report");
    simulate_cmd->add_option("scenario", path)->required();
    simulate_cmd->add_option("--placement", placement, "as_declared | full_offload | full_on_device | id=on_device,...");

    auto* sweep_cmd = app.add_subcommand("sweep", "Design-space sweeps");
    sweep_cmd->require_subcommand(1);
    auto* sweep_placement_cmd = sweep_cmd->add_subcommand("placement", "Enumerate on-device subsets of primitives");
    sweep_placement_cmd->add_option("scenario", path)->required();
    sweep_placement_cmd->add_option("--primitives", primitives, "Comma-separated free primitives (ids or aliases)")->required();
    auto* sweep_compression_cmd = sweep_cmd->add_subcommand("compression", "Sweep uplink compression and frame-rate reduction");
    sweep_compression_cmd->add_option("scenario", path)->required();
    sweep_compression_cmd->add_option("--ratios", ratios, "Comma-separated compression ratios (default 1..128)");
    sweep_compression_cmd->add_option("--divisors", divisors, "Comma-separated frame-rate divisors (default 1..32)");

    auto* project_cmd = app.add_subcommand("project", "Project power under technology scaling");
    project_cmd->add_option("scenario", path)->required();
    project_cmd->add_option("--table", table, "Scaling table JSON (default: built-in placeholder factors)");
    project_cmd->add_option("--horizon", horizon, "Years to project")->check(CLI::NonNegativeNumber);
    project_cmd->add_option("--placement", placement);

    auto* amdahl_cmd = app.add_subcommand("amdahl", "Cumulative component power distribution and improvement bound");
    amdahl_cmd->add_option("input", path, "Scenario file or report.csv")->required();
    amdahl_cmd->add_option("--thresholds", thresholds, "Comma-separated percent thresholds");
    amdahl_cmd->add_option("--top", top, "Treat the N largest components as improvable");
    amdahl_cmd->add_option("--placement", placement);

    for (auto* sub : {validate_cmd, simulate_cmd, sweep_cmd, sweep_placement_cmd, sweep_compression_cmd, project_cmd, amdahl_cmd}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    const std::vector<std::string> args(argv, argv + argc);

    try {
        if (*validate_cmd) return cmd_validate(path, g);
        if (*simulate_cmd) return cmd_simulate(path, placement, g, args);
        if (*sweep_placement_cmd) return cmd_sweep_placement(path, primitives, g, args);
        if (*sweep_compression_cmd) return cmd_sweep_compression(path, ratios, divisors, g, args);
        if (*project_cmd) return cmd_project(path, table, horizon, placement, g, args);
        if (*amdahl_cmd) return cmd_amdahl(path, thresholds, top, placement, g, args);
    } catch (const GuardError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kGuard;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kValidation;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kValidation;
    } catch (const SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kValidation;
    }
    return kOk;
}
