#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"
#include "wearsim/report.hpp"

#ifndef WEARSIM_CLI
#define WEARSIM_CLI "wearsim"
#endif

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string output;  // stdout and stderr
};

Result cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " '" WEARSIM_CLI "' " + args + " 2>&1";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "wearsim_cli_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string data(const std::string& name) { return "'" + ts::data_path(name).string() + "'"; }

std::vector<std::vector<std::string>> csv_rows(const fs::path& file) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(wearsim::read_file(file));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) break;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

// Category -> percent of total, from report.csv.
std::map<std::string, double> category_shares(const fs::path& report_csv) {
    std::map<std::string, double> mw;
    double total = 0.0;
    const auto rows = csv_rows(report_csv);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        mw[rows[i][1]] += std::stod(rows[i][2]);
        total += std::stod(rows[i][2]);
    }
    for (auto& [_, v] : mw) v = v / total * 100.0;
    return mw;
}

}  // namespace

TEST_CASE("validate exit codes") {
    CHECK(cli("validate " + data("aria2_like.scenario")).code == 0);
    CHECK(cli("validate " + data("heavytail_145.scenario")).code == 0);

    const fs::path dir = scratch("validate");
    std::string doc = wearsim::read_file(ts::data_path("aria2_like.scenario"));
    const auto pos = doc.find("\"buck_soc\"", doc.find("\"devices\""));
    doc.replace(pos, 10, "\"buck_gone\"");
    std::ofstream(dir / "dangling.scenario") << doc;
    const Result bad = cli("validate '" + (dir / "dangling.scenario").string() + "'");
    CHECK(bad.code == 1);
    CHECK(bad.output.find("buck_gone") != std::string::npos);

    std::ofstream(dir / "broken.scenario") << "{ not json";
    CHECK(cli("validate '" + (dir / "broken.scenario").string() + "'").code == 1);

    CHECK(cli("validate /nonexistent/none.scenario").code == 2);
}

TEST_CASE("simulate full offload vs full on-device") {
    const fs::path off = scratch("sim_off");
    const fs::path on = scratch("sim_on");
    REQUIRE(cli("simulate " + data("aria2_like.scenario") + " --placement full_offload --out-dir '" + off.string() + "'").code == 0);
    REQUIRE(cli("simulate " + data("aria2_like.scenario") + " --placement full_on_device --out-dir '" + on.string() + "'").code == 0);
    for (const char* f : {"report.csv", "report.md", "composition.svg", "manifest.json"}) CHECK(fs::exists(off / f));

    const auto s_off = category_shares(off / "report.csv");
    const auto s_on = category_shares(on / "report.csv");
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [cat, pct] : s_off) {
        CHECK(pct <= 50.0);
        ranked.push_back({pct, cat});
    }
    std::sort(ranked.rbegin(), ranked.rend());
    CHECK(ranked[0].second == "Radio");
    CHECK(s_on.at("Radio") < s_off.at("Radio"));
    CHECK(s_on.at("Compute") > s_off.at("Compute"));
}

TEST_CASE("simulate accepts per-primitive placements and a trace dump") {
    const fs::path dir = scratch("sim_custom");
    const Result r = cli("simulate " + data("aria2_like.scenario") + " --placement ht=on_device,vio=on_device --duration-s 5 --trace '" +
                         (dir / "trace.csv").string() + "' --out-dir '" + dir.string() + "'");
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(dir / "trace.csv");
    REQUIRE(!rows.empty());
    CHECK(rows[0] == std::vector<std::string>{"device", "state", "start_s", "end_s"});
    CHECK(wearsim::read_file(dir / "trace.csv").find("device,bytes_moved") != std::string::npos);
    CHECK(cli("simulate " + data("aria2_like.scenario") + " --placement object_recognition=on_device --out-dir '" + dir.string() + "'").code == 1);
}

TEST_CASE("simulate the empty scenario") {
    const fs::path dir = scratch("sim_empty");
    const Result r = cli("simulate " + data("empty.scenario") + " --out-dir '" + dir.string() + "'");
    REQUIRE(r.code == 0);
    CHECK(csv_rows(dir / "report.csv").size() == 1);
    CHECK(r.output.find("total                0.00") != std::string::npos);
    CHECK(wearsim::read_file(dir / "composition.svg").find("<svg") != std::string::npos);
}

TEST_CASE("placement sweep CLI") {
    const fs::path dir = scratch("sweep_placement");
    REQUIRE(cli("sweep placement " + data("aria2_like.scenario") + " --primitives ht,et,vio,asr --out-dir '" + dir.string() + "'").code == 0);
    CHECK(csv_rows(dir / "sweep_placement.csv").size() == 17);

    const Result guard = cli("sweep placement " + data("aria2_like.scenario") + " --primitives a,b,c,d,e,f,g,h,i --out-dir '" + dir.string() + "'");
    CHECK(guard.code == 3);
    CHECK(guard.output.find("combinatorial guard") != std::string::npos);
}

TEST_CASE("compression sweep CLI") {
    const fs::path dir = scratch("sweep_compression");
    REQUIRE(cli("sweep compression " + data("aria2_like.scenario") + " --out-dir '" + dir.string() + "'").code == 0);
    CHECK(csv_rows(dir / "sweep_compression.csv").size() == 49);
    CHECK(cli("sweep compression " + data("aria2_like.scenario") + " --ratios 0.5 --out-dir '" + dir.string() + "'").code == 1);
}

TEST_CASE("project CLI") {
    const fs::path dir = scratch("project");
    REQUIRE(cli("project " + data("aria2_like.scenario") + " --horizon 0 --out-dir '" + dir.string() + "'").code == 0);
    CHECK(csv_rows(dir / "scaling.csv").size() == 2);

    std::ofstream(dir / "ones.json") << R"({"factors": {"digital_dynamic": 1, "digital_leakage": 1, "analog": 1, "rf": 1}})";
    REQUIRE(cli("project " + data("aria2_like.scenario") + " --table '" + (dir / "ones.json").string() + "' --out-dir '" + dir.string() + "'").code == 0);
    const auto rows = csv_rows(dir / "scaling.csv");
    REQUIRE(rows.size() == 10);
    for (std::size_t i = 2; i < rows.size(); ++i) CHECK(rows[i].back() == rows[1].back());

    REQUIRE(cli("project " + data("aria2_like.scenario") + " --horizon 8 --out-dir '" + dir.string() + "'").code == 0);
    const auto def = csv_rows(dir / "scaling.csv");
    REQUIRE(def.size() == 10);
    const auto col = std::find(def[0].begin(), def[0].end(), "analog_mw") - def[0].begin();
    auto share = [&](std::size_t i) {
        double devices = 0.0;
        for (const char* t : {"digital_dynamic_mw", "digital_leakage_mw", "analog_mw", "rf_mw"})
            devices += std::stod(def[i][std::find(def[0].begin(), def[0].end(), t) - def[0].begin()]);
        return std::stod(def[i][col]) / devices;
    };
    CHECK(share(9) > share(1));

    std::ofstream(dir / "bad.json") << R"({"factors": {"digital_dynamic": 1.5, "digital_leakage": 1, "analog": 1, "rf": 1}})";
    CHECK(cli("project " + data("aria2_like.scenario") + " --table '" + (dir / "bad.json").string() + "' --out-dir '" + dir.string() + "'").code == 1);
}

TEST_CASE("amdahl CLI") {
    const fs::path dir = scratch("amdahl");
    const Result r = cli("amdahl " + data("heavytail_145.scenario") + " --out-dir '" + dir.string() + "'");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("bound: 1.62x") != std::string::npos);
    CHECK(csv_rows(dir / "amdahl.csv").size() == 7);

    const Result one = cli("amdahl " + data("heavytail_145.scenario") + " --thresholds 50 --out-dir '" + dir.string() + "'");
    REQUIRE(one.code == 0);
    const auto rows = csv_rows(dir / "amdahl.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][1] == "145");
    CHECK(std::stod(rows[1][2]) == doctest::Approx(100.0));

    std::ofstream(dir / "single.csv") << "component,category,mW,percent\nsoc,Compute,120.0,100.0\n";
    const Result inf = cli("amdahl '" + (dir / "single.csv").string() + "' --out-dir '" + dir.string() + "'");
    REQUIRE(inf.code == 0);
    CHECK(inf.output.find("bound: inf") != std::string::npos);
}

TEST_CASE("outputs are identical across runs and thread counts") {
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    const std::string scen = data("aria2_like.scenario");
    for (const auto& [dir, jobs] : {std::pair{a, "1"}, std::pair{b, "8"}}) {
        REQUIRE(cli("sweep placement " + scen + " --primitives ht,et,vio,asr --duration-s 10 --jobs " + jobs + " --out-dir '" + dir.string() + "'").code == 0);
        REQUIRE(cli("sweep compression " + scen + " --duration-s 10 --jobs " + std::string(jobs) + " --out-dir '" + dir.string() + "'").code == 0);
        REQUIRE(cli("simulate " + scen + " --duration-s 10 --trace '" + (dir / "trace.csv").string() + "' --jobs " + std::string(jobs) + " --out-dir '" + dir.string() + "'").code == 0);
    }
    for (const char* f : {"sweep_placement.csv", "sweep_compression.csv", "report.csv", "trace.csv", "sweep_placement.svg",
                          "sweep_compression.svg", "composition.svg"}) {
        CHECK_MESSAGE(wearsim::read_file(a / f) == wearsim::read_file(b / f), f);
    }
}

TEST_CASE("manifest records the scenario hash") {
    const fs::path dir = scratch("manifest");
    REQUIRE(cli("simulate " + data("heavytail_145.scenario") + " --out-dir '" + dir.string() + "'").code == 0);
    const std::string manifest = wearsim::read_file(dir / "manifest.json");
    CHECK(manifest.find(wearsim::sha256_hex(wearsim::read_file(ts::data_path("heavytail_145.scenario")))) != std::string::npos);
    CHECK(manifest.find("report.csv") != std::string::npos);
}

TEST_CASE("output directory falls back to the environment") {
    const fs::path dir = scratch("env_out");
    REQUIRE(cli("simulate " + data("empty.scenario"), "WEARSIM_OUT='" + dir.string() + "'").code == 0);
    CHECK(fs::exists(dir / "report.csv"));
}
