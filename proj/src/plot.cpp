#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rotorwalk/experiments.hpp"

namespace rotorwalk {

namespace {

std::string timestamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

std::string svg_line_chart(const Series& s, const std::string& x_column, const std::vector<std::string>& y_columns,
                           bool log_x) {
    auto col = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < s.columns.size(); ++i)
            if (s.columns[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int xc = col(x_column);
    const double W = 640, H = 400, L = 70, Rm = 20, T = 30, B = 50;
    std::vector<std::vector<std::pair<double, double>>> lines;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& yname : y_columns) {
        int yc = col(yname);
        std::vector<std::pair<double, double>> pts;
        if (xc >= 0 && yc >= 0) {
            for (const auto& row : s.rows) {
                double x = std::strtod(row[xc].c_str(), nullptr), y = std::strtod(row[yc].c_str(), nullptr);
                if (log_x) {
                    if (x <= 0) continue;
                    x = std::log2(x);
                }
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                pts.emplace_back(x, y);
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        }
        lines.push_back(std::move(pts));
    }
    if (!(x1 > x0)) {
        x0 -= 1;
        x1 += 1;
    }
    if (!(y1 > y0)) {
        y0 -= 1;
        y1 += 1;
    }
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - Rm); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << s.name << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - Rm << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
           << (log_x ? std::pow(2.0, xv) : xv) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << yv
           << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">" << x_column
       << (log_x ? " (log scale)" : "") << "</text>\n";
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const char* color = kColors[i % 5];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : lines[i]) os << px(x) << ',' << py(y) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << W - Rm - 4 << "\" y=\"" << T + 14 * (i + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
           << color << "\">" << y_columns[i] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<std::string> write_report(const ExperimentReport& report, const std::string& directory,
                                      const std::string& stem, const Json& manifest, bool emit_plots) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    std::vector<std::string> written;
    const std::string when = timestamp();

    const fs::path json_path = fs::path(directory) / (stem + ".json");
    {
        Json j = report.to_json();
        j["provenance"]["manifest"] = manifest;
        j["generated"] = when;
        std::ofstream out(json_path);
        out << j.dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write " + json_path.string());
    }
    written.push_back(json_path.string());

    for (const auto& s : report.series) {
        const fs::path p = fs::path(directory) / (stem + "_" + s.name + ".csv");
        std::ofstream out(p);
        out << "# rotorwalk " << artifact_version() << '\n';
        out << "# manifest " << manifest.dump() << '\n';
        out << "# experiment " << report.experiment << " verdict " << to_string(report.verdict) << '\n';
        out << "# generated " << when << '\n';
        out << report.series_csv(s);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        written.push_back(p.string());
        if (emit_plots && !s.plot_x.empty()) {
            const fs::path svg = fs::path(directory) / (stem + "_" + s.name + ".svg");
            std::ofstream so(svg);
            so << svg_line_chart(s, s.plot_x, s.plot_y, s.log_x);
            written.push_back(svg.string());
        }
    }
    return written;
}

}  // namespace rotorwalk
