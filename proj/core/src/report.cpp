#include "ihlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ihlab/rng.hpp"

namespace ihlab {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_report: cannot open for write: " + path);
    out << content;
    if (!out) throw std::runtime_error("emit_report: write failure: " + path);
}

std::string digest(const std::string& content) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    return buf;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<ChartSeries>& series) {
    constexpr double W = 640, H = 420;
    constexpr double ML = 70, MR = 30, MT = 40, MB = 50;  // margins
    const double plot_w = W - ML - MR, plot_h = H - MT - MB;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series) {
        for (auto [x, y] : s.points) {
            if (first) { xmin = xmax = x; ymin = ymax = y; first = false; }
            xmin = std::min(xmin, x); xmax = std::max(xmax, x);
            ymin = std::min(ymin, y); ymax = std::max(ymax, y);
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;

    auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return MT + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
        << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    // axes
    svg << "<line x1=\"" << ML << "\" y1=\"" << MT + plot_h << "\" x2=\"" << ML + plot_w
        << "\" y2=\"" << MT + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\""
        << MT + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ML + plot_w / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\" class=\"x-label\">" << x_label
        << "</text>\n";
    svg << "<text x=\"18\" y=\"" << MT + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" class=\"y-label\" transform=\"rotate(-90 18 "
        << MT + plot_h / 2 << ")\">" << y_label << "</text>\n";
    // axis range ticks
    svg << "<text x=\"" << ML << "\" y=\"" << H - 32
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_short(xmin) << "</text>\n";
    svg << "<text x=\"" << ML + plot_w << "\" y=\"" << H - 32
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_short(xmax) << "</text>\n";
    svg << "<text x=\"" << ML - 8 << "\" y=\"" << MT + plot_h
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_short(ymin) << "</text>\n";
    svg << "<text x=\"" << ML - 8 << "\" y=\"" << MT + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_short(ymax) << "</text>\n";

    std::size_t ci = 0;
    for (const auto& s : series) {
        const char* color = colors[ci % 6];
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" data-series=\"" << s.name << "\" points=\"";
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            if (i) svg << ' ';
            svg << fmt_short(px(s.points[i].first)) << ',' << fmt_short(py(s.points[i].second));
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << ML + plot_w - 4 << "\" y=\"" << MT + 14 + 16 * double(ci)
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << s.name
            << "</text>\n";
        ++ci;
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "k,token_ids,policy,trial,achieved,continuation_len,ood,mean_tau,final_entropy\n";
    for (const auto& r : rows) {
        out << r.k << ',';
        for (std::size_t i = 0; i < r.pattern.size(); ++i) {
            if (i) out << ';';
            out << r.pattern[i];
        }
        out << ',' << r.policy << ',' << r.trial << ',' << r.achieved_repetitions << ','
            << r.continuation_length << ',' << (r.ood_flag ? 1 : 0) << ',' << fmt(r.mean_tau)
            << ',' << fmt(r.final_entropy) << '\n';
    }
    return out.str();
}

ReportFiles emit_report(const SweepReport& report,
                        const std::vector<ToxicityTrace>& traces,
                        const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("emit_report: cannot create directory " + out_dir +
                                     ": " + ec.message());

    ReportFiles files;
    const std::string csv = sweep_rows_to_csv(report.rows);
    files.csv_path = out_dir + "/results.csv";
    write_file(files.csv_path, csv);

    // achieved-repetitions vs k (median over trials)
    std::map<std::size_t, std::vector<double>> by_k;
    for (const auto& r : report.rows)
        by_k[r.k].push_back(static_cast<double>(r.achieved_repetitions));
    ChartSeries achieved{"median achieved", {}};
    ChartSeries seeded{"target k", {}};
    for (auto& [k, v] : by_k) {
        std::sort(v.begin(), v.end());
        achieved.points.emplace_back(static_cast<double>(k), v[v.size() / 2]);
        seeded.points.emplace_back(static_cast<double>(k), static_cast<double>(k));
    }
    const std::string chart1 =
        svg_line_chart("Achieved repetitions vs target", "target repetitions k",
                       "achieved repetitions", {achieved, seeded});
    const std::string chart1_path = out_dir + "/achieved_vs_k.svg";
    write_file(chart1_path, chart1);
    files.svg_paths.push_back(chart1_path);

    std::string chart2;
    if (!traces.empty()) {
        std::vector<ChartSeries> series;
        for (std::size_t i = 0; i < traces.size(); ++i) {
            ChartSeries tau{"tau run " + std::to_string(i), {}};
            ChartSeries ent{"entropy run " + std::to_string(i), {}};
            for (const auto& s : traces[i].steps) {
                if (s.tau) tau.points.emplace_back(static_cast<double>(s.step), *s.tau);
                ent.points.emplace_back(static_cast<double>(s.step), s.entropy_nats);
            }
            series.push_back(std::move(tau));
            series.push_back(std::move(ent));
        }
        chart2 = svg_line_chart("Toxicity and entropy traces", "generation step",
                                "tau / entropy (nats)", series);
        const std::string chart2_path = out_dir + "/traces.svg";
        write_file(chart2_path, chart2);
        files.svg_paths.push_back(chart2_path);
    }

    nlohmann::ordered_json summary;
    summary["tool"] = "ihlab 0.1.0";
    summary["master_seed"] = report.spec.master_seed;
    nlohmann::ordered_json cfg;
    cfg["k_values"] = report.spec.k_values;
    cfg["pattern_len"] = report.spec.pattern_len;
    cfg["token_pool"] = report.spec.token_pool;
    cfg["window"] = report.spec.window;
    cfg["policy"] = report.spec.policy.to_string();
    cfg["trials"] = report.spec.trials;
    summary["config"] = std::move(cfg);
    nlohmann::ordered_json agg = nlohmann::ordered_json::array();
    for (auto& [k, v] : by_k) {
        std::size_t ood = 0;
        for (const auto& r : report.rows)
            if (r.k == k && r.ood_flag) ++ood;
        nlohmann::ordered_json row;
        row["k"] = k;
        row["median_achieved"] = v[v.size() / 2];
        row["ood_fraction"] = static_cast<double>(ood) / static_cast<double>(v.size());
        agg.push_back(std::move(row));
    }
    summary["aggregates"] = std::move(agg);
    nlohmann::ordered_json digests;
    digests["results.csv"] = digest(csv);
    digests["achieved_vs_k.svg"] = digest(chart1);
    if (!traces.empty()) digests["traces.svg"] = digest(chart2);
    summary["file_digests"] = std::move(digests);

    files.json_path = out_dir + "/summary.json";
    write_file(files.json_path, summary.dump(1) + "\n");
    return files;
}

}  // namespace ihlab
