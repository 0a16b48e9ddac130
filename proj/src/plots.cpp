#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "aisopt/experiment.hpp"

// Presentation-only SVG rendering; everything here derives from summary.csv.

namespace aisopt {

namespace {

constexpr double kW = 640, kH = 420, kMargin = 56;

struct Series {
  std::vector<double> x, y;
};

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

std::vector<std::vector<double>> read_summary_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("emit_plots: cannot open " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell.empty() ? nan() : std::stod(cell));
    while (row.size() < 15) row.push_back(nan());
    rows.push_back(std::move(row));
  }
  return rows;
}

struct Figure {
  std::ostringstream body;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool logy = false;

  double px(double x) const {
    double lo = std::log10(xmin), hi = std::log10(xmax);
    return kMargin + (std::log10(x) - lo) / std::max(hi - lo, 1e-12) * (kW - 2 * kMargin);
  }
  double py(double y) const {
    double v = logy ? std::log10(y) : y;
    double lo = logy ? std::log10(ymin) : ymin, hi = logy ? std::log10(ymax) : ymax;
    return kH - kMargin - (v - lo) / std::max(hi - lo, 1e-12) * (kH - 2 * kMargin);
  }
  void polyline(const Series& s, const char* color, double width) {
    std::string pts;
    for (size_t i = 0; i < s.x.size(); ++i)
      pts += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
    body << fmt::format(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" points=\"{}\"/>\n", color,
        width, pts);
  }
  void band(const Series& lo, const Series& hi, const char* color) {
    std::string pts;
    for (size_t i = 0; i < lo.x.size(); ++i)
      pts += fmt::format("{:.2f},{:.2f} ", px(lo.x[i]), py(lo.y[i]));
    for (size_t i = hi.x.size(); i-- > 0;)
      pts += fmt::format("{:.2f},{:.2f} ", px(hi.x[i]), py(hi.y[i]));
    body << fmt::format("<polygon fill=\"{}\" fill-opacity=\"0.25\" stroke=\"none\" points=\"{}\"/>\n",
                        color, pts);
  }
  void write(const std::filesystem::path& file, const std::string& title,
             const std::string& ylabel) {
    std::ofstream out(file);
    out << fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        kW, kH, kW, kH);
    out << fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
        kMargin, kMargin, kW - 2 * kMargin, kH - 2 * kMargin);
    out << fmt::format(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
        "text-anchor=\"middle\">{}</text>\n",
        kW / 2, title);
    out << fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" "
        "text-anchor=\"middle\">iteration n (log scale)</text>\n",
        kW / 2, kH - 12);
    out << fmt::format(
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" "
        "text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        kH / 2, kH / 2, ylabel);
    auto tick = [&](double x, double y, double v) {
      out << fmt::format(
          "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"10\" "
          "fill=\"#444\">{:.4g}</text>\n",
          x, y, v);
    };
    tick(kMargin, kH - kMargin + 14, xmin);
    tick(kW - kMargin - 24, kH - kMargin + 14, xmax);
    tick(4, kH - kMargin, ymin);
    tick(4, kMargin + 4, ymax);
    out << body.str() << "</svg>\n";
  }
};

// Builds one banded figure from (n, mean, lo, hi) columns; returns false if
// the column set is entirely missing.
bool banded_figure(const std::vector<std::vector<double>>& rows, int col_mean,
                   const std::filesystem::path& file, const std::string& title,
                   const std::string& ylabel) {
  Series mean, lo, hi;
  for (const auto& r : rows) {
    if (std::isnan(r[col_mean])) continue;
    mean.x.push_back(r[0]);
    mean.y.push_back(r[col_mean]);
    lo.x.push_back(r[0]);
    lo.y.push_back(r[col_mean + 1]);
    hi.x.push_back(r[0]);
    hi.y.push_back(r[col_mean + 2]);
  }
  if (mean.x.empty()) return false;
  Figure fig;
  fig.xmin = mean.x.front();
  fig.xmax = std::max(mean.x.back(), fig.xmin * (1 + 1e-9) + 1e-12);
  fig.ymin = *std::min_element(lo.y.begin(), lo.y.end());
  fig.ymax = *std::max_element(hi.y.begin(), hi.y.end());
  double pad = 0.05 * std::max(fig.ymax - fig.ymin, 1e-12);
  fig.ymin -= pad;
  fig.ymax += pad;
  fig.band(lo, hi, "#4878cf");
  fig.polyline(mean, "#4878cf", 2.0);
  fig.write(file, title, ylabel);
  return true;
}

}  // namespace

int emit_plots(const std::string& summary_dir) {
  namespace fs = std::filesystem;
  fs::path dir(summary_dir);
  auto rows = read_summary_csv(dir / "summary.csv");
  if (rows.empty()) {
    std::cerr << "emit_plots: no checkpoints in " << summary_dir << ", nothing to plot\n";
    return 0;
  }
  int written = 0;
  if (banded_figure(rows, 1, dir / "theta.svg", "decision iterate: mean and 10%-90% band",
                    "theta_n"))
    ++written;
  if (banded_figure(rows, 7, dir / "mu.svg", "IS parameter: mean and 10%-90% band", "mu_n"))
    ++written;
  // variance figure (log-log when positive)
  Series var;
  for (const auto& r : rows)
    if (!std::isnan(r[13]) && r[13] > 0) {
      var.x.push_back(r[0]);
      var.y.push_back(r[13]);
    }
  if (var.x.size() >= 2) {
    Figure fig;
    fig.logy = true;
    fig.xmin = var.x.front();
    fig.xmax = var.x.back();
    fig.ymin = *std::min_element(var.y.begin(), var.y.end());
    fig.ymax = *std::max_element(var.y.begin(), var.y.end());
    fig.polyline(var, "#c44e52", 2.0);
    fig.write(dir / "variance.svg", "scaled-error variance (trace)", "Var trace (log scale)");
    ++written;
  }
  return written;
}

}  // namespace aisopt
