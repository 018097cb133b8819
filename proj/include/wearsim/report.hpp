#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wearsim/dse.hpp"
#include "wearsim/power.hpp"
#include "wearsim/sim.hpp"

namespace wearsim {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Fixed-precision number formatting used by every CSV writer.
std::string fmt_num(double value, int decimals = 6);

std::string report_csv(const PowerReport& report);
std::string report_markdown(const PowerReport& report, const BudgetCheck& budget, std::string_view title);
std::string trace_csv(const SimTrace& trace);

std::string placement_csv(const SweepResult& sweep);
std::string compression_csv(const CompressionGrid& grid);
std::string scaling_csv(const std::vector<ScalingRow>& rows);
std::string amdahl_csv(const AmdahlTable& table);

struct Bar {
    std::string label;
    std::map<ResourceCategory, double> segments;  // mW
};

std::string composition_svg(const std::vector<Bar>& bars, std::string_view title);
std::string compression_svg(const CompressionGrid& grid);
std::string scaling_svg(const std::vector<ScalingRow>& rows);
std::string amdahl_svg(const AmdahlTable& table);

std::string sha256_hex(std::string_view data);

struct Manifest {
    std::string scenario_path;
    std::string scenario_sha256;
    std::vector<std::string> command;
    std::vector<std::string> outputs;
};

std::string manifest_json(const Manifest& m);

// Writes `content` to dir/name, creating dir; throws IoError on failure.
std::filesystem::path write_output(const std::filesystem::path& dir, const std::string& name, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace wearsim
