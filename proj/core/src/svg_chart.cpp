#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rave/evaluation.hpp"

namespace rave {

// Minimal standalone SVG line chart: four metric series against K.
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 30, kTop = 40, kBottom = 60;

struct Series {
    const char* name;
    const char* color;
};

constexpr Series kSeries[] = {
    {"accuracy", "#1f77b4"},
    {"precision", "#ff7f0e"},
    {"recall", "#2ca02c"},
    {"f1", "#d62728"},
};

double metric_value(const EvalReport& report, int series) {
    switch (series) {
        case 0: return report.accuracy;
        case 1: return report.precision.value_or(0.0);
        case 2: return report.recall.value_or(0.0);
        default: return report.f1;
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

}  // namespace

void write_sweep_chart(const std::string& path, const std::vector<KSweepRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write sweep chart: " + path);

    int k_min = rows.empty() ? 0 : rows.front().k;
    int k_max = rows.empty() ? 1 : rows.back().k;
    for (const KSweepRow& row : rows) {
        k_min = std::min(k_min, row.k);
        k_max = std::max(k_max, row.k);
    }
    if (k_max == k_min) k_max = k_min + 1;

    auto x_of = [&](int k) {
        return kLeft + (kWidth - kLeft - kRight) * (k - k_min) / double(k_max - k_min);
    };
    auto y_of = [&](double v) { return kTop + (kHeight - kTop - kBottom) * (1.0 - v); };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <text x=\"" << kWidth / 2
        << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << "Metric sensitivity to K</text>\n";

    // Axes and horizontal gridlines every 0.2.
    for (int i = 0; i <= 5; ++i) {
        double v = i / 5.0;
        out << "  <line x1=\"" << kLeft << "\" y1=\"" << fmt(y_of(v)) << "\" x2=\""
            << kWidth - kRight << "\" y2=\"" << fmt(y_of(v))
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "  <text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y_of(v) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(v * 1.0)
            << "</text>\n";
    }
    for (const KSweepRow& row : rows) {
        out << "  <text x=\"" << fmt(x_of(row.k)) << "\" y=\"" << kHeight - kBottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << row.k
            << "</text>\n";
    }
    out << "  <text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">K</text>\n";
    out << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kHeight - kBottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "  <line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
        << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (int s = 0; s < 4; ++s) {
        std::ostringstream points;
        for (const KSweepRow& row : rows) {
            points << fmt(x_of(row.k)) << ',' << fmt(y_of(metric_value(row.report, s))) << ' ';
        }
        out << "  <polyline fill=\"none\" stroke=\"" << kSeries[s].color
            << "\" stroke-width=\"2\" points=\"" << points.str() << "\"/>\n";
        for (const KSweepRow& row : rows) {
            out << "  <circle cx=\"" << fmt(x_of(row.k)) << "\" cy=\""
                << fmt(y_of(metric_value(row.report, s))) << "\" r=\"3\" fill=\""
                << kSeries[s].color << "\"/>\n";
        }
        // Legend.
        double lx = kLeft + 12 + s * 120;
        out << "  <rect x=\"" << lx << "\" y=\"" << kTop - 12 << "\" width=\"10\" height=\"10\" "
            << "fill=\"" << kSeries[s].color << "\"/>\n";
        out << "  <text x=\"" << lx + 14 << "\" y=\"" << kTop - 3
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << kSeries[s].name << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace rave
