#pragma once

#include <string>
#include <vector>

#include "ihlab/sweep.hpp"
#include "ihlab/toxicity.hpp"

namespace ihlab {

// Self-contained SVG line chart (no external assets): one <polyline> per
// series, labeled axes.
struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<ChartSeries>& series);

std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows);

struct ReportFiles {
    std::string csv_path;
    std::string json_path;
    std::vector<std::string> svg_paths;
};

// Writes results.csv, summary.json (aggregates + resolved config echo +
// master seed + file digests) and SVG charts into out_dir. Byte-identical
// output for identical inputs.
ReportFiles emit_report(const SweepReport& report,
                        const std::vector<ToxicityTrace>& traces,
                        const std::string& out_dir);

}  // namespace ihlab
