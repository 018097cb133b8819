#include "wearsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

namespace wearsim {

std::string fmt_num(double value, int decimals) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos) {
        if (s[0] == '-') s.erase(0, 1);
    }
    return s;
}

std::string report_csv(const PowerReport& report) {
    std::map<std::string, double> percent;
    if (report.total > 0.0) percent = render_percentages(report);
    std::ostringstream out;
    out << "component,category,mW,percent\n";
    for (const auto& [id, mw] : report.items()) {
        out << id << ',' << to_string(report.component_category.at(id)) << ',' << fmt_num(mw) << ','
            << (percent.empty() ? "0.0" : fmt_num(percent.at(id), 1)) << '\n';
    }
    return out.str();
}

std::string report_markdown(const PowerReport& report, const BudgetCheck& budget, std::string_view title) {
    std::ostringstream out;
    out << "# " << title << "\n\n";
    out << "| category | mW | percent |\n|---|---:|---:|\n";
    for (ResourceCategory c : kAllCategories) {
        const double mw = report.per_category.at(c);
        const double pct = report.total > 0.0 ? mw / report.total * 100.0 : 0.0;
        out << "| " << to_string(c) << " | " << fmt_num(round_sig(mw, 2), 2) << " | " << fmt_num(pct, 1) << " |\n";
    }
    out << "| **total** | " << fmt_num(round_sig(report.total, 2), 2) << " | 100.0 |\n\n";
    out << "Values in mW are rounded to two significant figures.\n\n";
    out << "- average budget " << fmt_num(budget.budget_mw, 1) << " mW: " << (budget.average_ok ? "OK" : "EXCEEDED")
        << " (margin " << fmt_num(budget.average_margin_mw, 1) << " mW)\n";
    out << "- sustained thermal limit " << fmt_num(budget.thermal_limit_mw, 1)
        << " mW: " << (budget.sustained_ok ? "OK" : "EXCEEDED") << " (margin " << fmt_num(budget.sustained_margin_mw, 1)
        << " mW)\n";
    return out.str();
}

std::string trace_csv(const SimTrace& trace) {
    std::ostringstream out;
    out << "device,state,start_s,end_s\n";
    for (const auto& seg : trace.segments) {
        out << seg.device << ',' << seg.state << ',' << fmt_num(seg.start_s, 9) << ',' << fmt_num(seg.end_s, 9) << '\n';
    }
    out << "\ndevice,bytes_moved\n";
    for (const auto& [id, tl] : trace.timelines) out << id << ',' << fmt_num(tl.bytes_moved, 3) << '\n';
    return out.str();
}

std::string placement_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "config,total_mw,delta_percent";
    for (ResourceCategory c : kAllCategories) out << ',' << to_string(c) << "_mw";
    out << '\n';
    for (const auto& r : sweep.rows) {
        out << r.label << ',' << fmt_num(r.report.total) << ',' << fmt_num(r.delta_percent, 4);
        for (ResourceCategory c : kAllCategories) out << ',' << fmt_num(r.report.per_category.at(c));
        out << '\n';
    }
    return out.str();
}

std::string compression_csv(const CompressionGrid& grid) {
    std::ostringstream out;
    out << "ratio,divisor,total_mw,radio_mw,selected_profile\n";
    for (const auto& c : grid.cells) {
        out << fmt_num(c.ratio, 0) << ',' << c.divisor << ',' << fmt_num(c.total_mw) << ',' << fmt_num(c.radio_mw) << ','
            << c.selected_profile << '\n';
    }
    return out.str();
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
    std::ostringstream out;
    out << "year,node";
    for (PowerType t : kAllPowerTypes) out << ',' << to_string(t) << "_mw";
    out << ",power_delivery_mw,total_mw\n";
    for (const auto& r : rows) {
        out << r.year << ',' << r.node;
        for (PowerType t : kAllPowerTypes) out << ',' << fmt_num(r.per_type_mw.at(t));
        out << ',' << fmt_num(r.power_delivery_mw) << ',' << fmt_num(r.report.total) << '\n';
    }
    return out.str();
}

std::string amdahl_csv(const AmdahlTable& table) {
    std::ostringstream out;
    out << "threshold,count,cumulative_percent\n";
    for (const auto& r : table.rows) {
        out << fmt_num(r.threshold_percent, 2) << ',' << r.count << ',' << fmt_num(r.cumulative_percent, 2) << '\n';
    }
    return out.str();
}

namespace {

const char* category_colour(ResourceCategory c) {
    switch (c) {
        case ResourceCategory::Sensor: return "#4e79a7";
        case ResourceCategory::Compute: return "#f28e2b";
        case ResourceCategory::Memory: return "#e15759";
        case ResourceCategory::Storage: return "#76b7b2";
        case ResourceCategory::Interconnect: return "#59a14f";
        case ResourceCategory::Radio: return "#edc948";
        case ResourceCategory::Output: return "#b07aa1";
        case ResourceCategory::PowerDelivery: return "#ff9da7";
        case ResourceCategory::SocTopLevel: return "#9c755f";
    }
    return "#999999";
}

const char* type_colour(PowerType t) {
    switch (t) {
        case PowerType::DigitalDynamic: return "#4e79a7";
        case PowerType::DigitalLeakage: return "#a0cbe8";
        case PowerType::Analog: return "#f28e2b";
        case PowerType::Rf: return "#edc948";
    }
    return "#999999";
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Svg {
    std::ostringstream body;
    int width;
    int height;

    Svg(int w, int h, std::string_view title) : width(w), height(h) {
        body << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
             << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
        body << "<!-- wearsim " << kToolVersion << " -->\n";
        body << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        body << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
             << "</text>\n";
    }
    void rect(double x, double y, double w, double h, const char* fill) {
        body << "<rect x=\"" << fmt_num(x, 2) << "\" y=\"" << fmt_num(y, 2) << "\" width=\"" << fmt_num(w, 2)
             << "\" height=\"" << fmt_num(h, 2) << "\" fill=\"" << fill << "\"/>\n";
    }
    void text(double x, double y, std::string_view s, const char* anchor = "middle") {
        body << "<text x=\"" << fmt_num(x, 2) << "\" y=\"" << fmt_num(y, 2) << "\" text-anchor=\"" << anchor << "\">"
             << escape(s) << "</text>\n";
    }
    void line(double x1, double y1, double x2, double y2, const char* stroke = "#333") {
        body << "<line x1=\"" << fmt_num(x1, 2) << "\" y1=\"" << fmt_num(y1, 2) << "\" x2=\"" << fmt_num(x2, 2)
             << "\" y2=\"" << fmt_num(y2, 2) << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke) {
        body << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << stroke << "\" points=\"";
        for (const auto& [x, y] : pts) body << fmt_num(x, 2) << ',' << fmt_num(y, 2) << ' ';
        body << "\"/>\n";
    }
    void polygon(const std::vector<std::pair<double, double>>& pts, const char* fill) {
        body << "<polygon fill=\"" << fill << "\" points=\"";
        for (const auto& [x, y] : pts) body << fmt_num(x, 2) << ',' << fmt_num(y, 2) << ' ';
        body << "\"/>\n";
    }
    std::string str() { return body.str() + "</svg>\n"; }
};

const char* palette(std::size_t i) {
    static const char* colours[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
    return colours[i % (sizeof colours / sizeof colours[0])];
}

}  // namespace

std::string composition_svg(const std::vector<Bar>& bars, std::string_view title) {
    const double plot_h = 300.0, top = 40.0, left = 60.0, bar_w = 36.0, gap = 18.0;
    const int width = static_cast<int>(left + std::max<std::size_t>(bars.size(), 1) * (bar_w + gap) + 160);
    Svg svg(width, 420, title);
    double max_total = 0.0;
    for (const auto& b : bars) {
        double t = 0.0;
        for (const auto& [_, mw] : b.segments) t += mw;
        max_total = std::max(max_total, t);
    }
    svg.line(left, top, left, top + plot_h);
    svg.line(left, top + plot_h, width - 150.0, top + plot_h);
    svg.text(left - 6, top + 4, fmt_num(max_total, 0) + " mW", "end");
    svg.text(left - 6, top + plot_h, "0", "end");
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double x = left + gap / 2 + i * (bar_w + gap);
        double y = top + plot_h;
        for (ResourceCategory c : kAllCategories) {
            auto it = bars[i].segments.find(c);
            if (it == bars[i].segments.end() || max_total <= 0.0) continue;
            const double h = it->second / max_total * plot_h;
            y -= h;
            svg.rect(x, y, bar_w, h, category_colour(c));
        }
        svg.body << "<text transform=\"translate(" << fmt_num(x + bar_w / 2, 2) << ',' << fmt_num(top + plot_h + 10, 2)
                 << ") rotate(45)\">" << escape(bars[i].label) << "</text>\n";
    }
    double ly = top;
    for (ResourceCategory c : kAllCategories) {
        svg.rect(width - 140.0, ly, 10, 10, category_colour(c));
        svg.text(width - 125.0, ly + 9, to_string(c), "start");
        ly += 16;
    }
    return svg.str();
}

std::string compression_svg(const CompressionGrid& grid) {
    const double left = 70, top = 40, plot_w = 420, plot_h = 300;
    Svg svg(680, 400, "System power vs. upload compression");
    double lo = 1e300, hi = 0;
    for (const auto& c : grid.cells) {
        lo = std::min(lo, c.total_mw);
        hi = std::max(hi, c.total_mw);
    }
    if (grid.cells.empty()) lo = hi = 0;
    const double span = hi > lo ? hi - lo : 1.0;
    const double xmax = std::max(1.0, std::log2(*std::max_element(grid.ratios.begin(), grid.ratios.end())));
    svg.line(left, top, left, top + plot_h);
    svg.line(left, top + plot_h, left + plot_w, top + plot_h);
    svg.text(left - 6, top + 4, fmt_num(hi, 0) + " mW", "end");
    svg.text(left - 6, top + plot_h, fmt_num(lo, 0) + " mW", "end");
    for (std::size_t r = 0; r < grid.ratios.size(); ++r) {
        const double x = left + std::log2(grid.ratios[r]) / xmax * plot_w;
        svg.text(x, top + plot_h + 14, fmt_num(grid.ratios[r], 0) + ":1");
    }
    for (std::size_t d = 0; d < grid.divisors.size(); ++d) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t r = 0; r < grid.ratios.size(); ++r) {
            const auto& c = grid.at(d, r);
            pts.emplace_back(left + std::log2(c.ratio) / xmax * plot_w, top + plot_h - (c.total_mw - lo) / span * plot_h);
        }
        svg.polyline(pts, palette(d));
        svg.rect(left + plot_w + 20, top + d * 16.0, 10, 10, palette(d));
        svg.text(left + plot_w + 35, top + d * 16.0 + 9, std::to_string(grid.divisors[d]) + "x frame-rate reduction", "start");
    }
    return svg.str();
}

std::string scaling_svg(const std::vector<ScalingRow>& rows) {
    const double left = 70, top = 40, plot_w = 420, plot_h = 300;
    Svg svg(680, 400, "Projected power by power type");
    double hi = 0;
    for (const auto& r : rows) hi = std::max(hi, r.report.total);
    const double years = rows.size() > 1 ? static_cast<double>(rows.back().year) : 1.0;
    auto xof = [&](const ScalingRow& r) { return left + (rows.size() > 1 ? r.year / years * plot_w : plot_w / 2); };
    auto yof = [&](double mw) { return top + plot_h - (hi > 0 ? mw / hi * plot_h : 0.0); };
    svg.line(left, top, left, top + plot_h);
    svg.line(left, top + plot_h, left + plot_w, top + plot_h);
    svg.text(left - 6, top + 4, fmt_num(hi, 0) + " mW", "end");
    std::vector<double> base(rows.size(), 0.0);
    std::size_t layer = 0;
    auto add_layer = [&](auto value_of, const char* colour, std::string_view name) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < rows.size(); ++i) pts.emplace_back(xof(rows[i]), yof(base[i] + value_of(rows[i])));
        for (std::size_t i = rows.size(); i-- > 0;) pts.emplace_back(xof(rows[i]), yof(base[i]));
        svg.polygon(pts, colour);
        for (std::size_t i = 0; i < rows.size(); ++i) base[i] += value_of(rows[i]);
        svg.rect(left + plot_w + 20, top + layer * 16.0, 10, 10, colour);
        svg.text(left + plot_w + 35, top + layer * 16.0 + 9, name, "start");
        ++layer;
    };
    for (PowerType t : kAllPowerTypes) {
        add_layer([t](const ScalingRow& r) { return r.per_type_mw.at(t); }, type_colour(t), to_string(t));
    }
    add_layer([](const ScalingRow& r) { return r.power_delivery_mw; }, "#ff9da7", "power_delivery");
    for (const auto& r : rows) svg.text(xof(r), top + plot_h + 14, "y" + std::to_string(r.year));
    return svg.str();
}

std::string amdahl_svg(const AmdahlTable& table) {
    const double left = 60, top = 40, plot_h = 300, bar_w = 50, gap = 20;
    Svg svg(static_cast<int>(left + table.rows.size() * (bar_w + gap) + 40), 400, "Cumulative power by component share");
    svg.line(left, top, left, top + plot_h);
    svg.line(left, top + plot_h, left + table.rows.size() * (bar_w + gap), top + plot_h);
    svg.text(left - 6, top + 4, "100%", "end");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const double x = left + gap / 2 + i * (bar_w + gap);
        const double h = r.cumulative_percent / 100.0 * plot_h;
        svg.rect(x, top + plot_h - h, bar_w, h, palette(0));
        svg.text(x + bar_w / 2, top + plot_h - h - 4, fmt_num(r.cumulative_percent, 2) + "%");
        svg.text(x + bar_w / 2, top + plot_h + 14, "<=" + fmt_num(r.threshold_percent, 1) + "%");
        svg.text(x + bar_w / 2, top + plot_h + 28, "n=" + std::to_string(r.count));
    }
    return svg.str();
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string manifest_json(const Manifest& m) {
    nlohmann::json j{{"tool", "wearsim"},
                     {"version", std::string(kToolVersion)},
                     {"scenario", {{"path", m.scenario_path}, {"sha256", m.scenario_sha256}}},
                     {"command", m.command},
                     {"outputs", m.outputs}};
    return j.dump(2) + "\n";
}

std::filesystem::path write_output(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("error writing '" + path.string() + "'");
    return path;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace wearsim
