#include "lateralbench/report.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lateralbench/io.hpp"

namespace lateral::report {

namespace fs = std::filesystem;

namespace {

// Shortest round-trip decimal form: what strtod parses back is bit-equal.
std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Series {
  std::string name;
  std::string color;
  std::vector<sweep::CurvePoint> points;
};

// Every defined series: overall first, then the five cells. Cells whose
// values are undefined anywhere (e.g. no CR instances in the dataset) are
// left out rather than drawn with holes.
std::vector<Series> collect_series(const sweep::SweepResult& result) {
  static const char* kColors[] = {"#000000", "#1f77b4", "#ff7f0e",
                                  "#2ca02c", "#d62728", "#9467bd"};
  std::vector<Series> series;
  try {
    series.push_back({"overall", kColors[0], curve_data(result, std::nullopt)});
  } catch (const Error&) {
  }
  int color = 1;
  for (metrics::CellId id : metrics::all_cells()) {
    try {
      series.push_back({std::string(metrics::cell_name(id)), kColors[color],
                        curve_data(result, id)});
    } catch (const Error&) {
    }
    ++color;
  }
  if (series.empty()) {
    throw Error(errc::incomplete_sweep, "no defined series to render");
  }
  return series;
}

}  // namespace

std::string render_breakdown(const metrics::ScoreBreakdown& breakdown,
                             DocFormat format) {
  switch (format) {
    case DocFormat::text:
      return metrics::breakdown_to_text(breakdown);
    case DocFormat::json:
      return metrics::breakdown_to_json(breakdown).dump(2) + "\n";
    case DocFormat::csv: {
      std::ostringstream out;
      out << "cell,value,correct,total\n";
      for (metrics::CellId id : metrics::all_cells()) {
        const auto& c = breakdown.cell(id);
        out << metrics::cell_name(id) << ",";
        if (auto v = c.value()) out << fmt_double(*v);
        out << "," << c.correct << "," << c.total << "\n";
      }
      out << "overall,";
      if (auto v = breakdown.overall()) out << fmt_double(*v);
      out << ",,\n";
      return out.str();
    }
  }
  return {};
}

std::string curve_csv(const sweep::SweepResult& result,
                      std::optional<metrics::CellId> cell) {
  const auto points = curve_data(result, cell);
  std::string out = "temperature,mean,stddev\n";
  for (const auto& p : points) {
    out += fmt_double(p.temperature);
    out += ",";
    out += fmt_double(p.mean);
    out += ",";
    out += fmt_double(p.stddev);
    out += "\n";
  }
  return out;
}

std::string curves_svg(const sweep::SweepResult& result) {
  const auto series = collect_series(result);

  constexpr double kWidth = 800, kHeight = 500;
  constexpr double kLeft = 60, kRight = 660, kTop = 30, kBottom = 450;
  const double t_min = result.plan.temperatures.front();
  const double t_max = result.plan.temperatures.back();
  const double t_span = t_max > t_min ? t_max - t_min : 1.0;

  auto sx = [&](double t) {
    return kLeft + (t - t_min) / t_span * (kRight - kLeft);
  };
  auto sy = [&](double v) { return kBottom - v * (kBottom - kTop); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth
      << " " << kHeight << "\">\n";
  svg << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";

  // Axes.
  svg << "  <line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\""
      << kRight << "\" y2=\"" << kBottom
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kBottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  for (double t : result.plan.temperatures) {
    const double x = sx(t);
    svg << "  <line x1=\"" << x << "\" y1=\"" << kBottom << "\" x2=\"" << x
        << "\" y2=\"" << kBottom + 5 << "\" stroke=\"black\"/>\n";
    svg << "  <text x=\"" << x << "\" y=\"" << kBottom + 20
        << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt2(t)
        << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = i * 0.25;
    const double y = sy(v);
    svg << "  <line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\""
        << kLeft << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
    svg << "  <text x=\"" << kLeft - 10 << "\" y=\"" << y + 4
        << "\" font-size=\"12\" text-anchor=\"end\">" << fmt2(v) << "</text>\n";
  }
  svg << "  <text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kBottom + 38
      << "\" font-size=\"14\" text-anchor=\"middle\">temperature</text>\n";
  svg << "  <text x=\"18\" y=\"" << (kTop + kBottom) / 2
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (kTop + kBottom) / 2 << ")\">score</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    std::ostringstream pts;
    for (const auto& p : series[s].points) {
      pts << sx(p.temperature) << "," << sy(p.mean) << " ";
    }
    svg << "  <polyline fill=\"none\" stroke=\"" << series[s].color
        << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
    const double ly = kTop + 18 * static_cast<double>(s);
    svg << "  <line x1=\"" << kRight + 14 << "\" y1=\"" << ly + 10
        << "\" x2=\"" << kRight + 38 << "\" y2=\"" << ly + 10 << "\" stroke=\""
        << series[s].color << "\" stroke-width=\"2\"/>\n";
    svg << "  <text x=\"" << kRight + 44 << "\" y=\"" << ly + 14
        << "\" font-size=\"12\">" << series[s].name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::string> render_curves(const sweep::SweepResult& result,
                                       const std::string& out_dir,
                                       bool with_svg) {
  ensure_dir(out_dir);
  std::vector<std::string> written;

  auto write_cell_csv = [&](std::optional<metrics::CellId> cell,
                            const std::string& name) {
    try {
      const std::string csv = curve_csv(result, cell);
      const auto path = (fs::path(out_dir) / (name + ".csv")).string();
      write_file(path, csv);
      written.push_back(path);
    } catch (const Error& e) {
      if (e.code() != errc::incomplete_sweep) throw;
      // Undefined cell for this dataset; nothing to emit.
    }
  };
  write_cell_csv(std::nullopt, "overall");
  for (metrics::CellId id : metrics::all_cells()) {
    write_cell_csv(id, std::string(metrics::cell_name(id)));
  }

  if (with_svg) {
    const auto path = (fs::path(out_dir) / "curves.svg").string();
    write_file(path, curves_svg(result));
    written.push_back(path);
  }
  return written;
}

metrics::ScoreBreakdown rescore_from_log(const std::string& prediction_log_path,
                                         const std::string& dataset_path) {
  const auto predictions = load_prediction_log(prediction_log_path);
  const auto instances = load_dataset(dataset_path);
  return metrics::score_breakdown(predictions, instances);
}

}  // namespace lateral::report
