#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetsign/csv.hpp"
#include "hetsign/matrix.hpp"

namespace hetsign {

// Minimal line-chart writer: fixed canvas, axis box with min/max tick labels,
// one polyline per series plus a small legend.  CSV remains the normative
// output; these files are a quick visual aid.
class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add_series(std::string label, std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("SvgChart: x/y size mismatch");
    if (xs.empty()) throw std::invalid_argument("SvgChart: empty series");
    series_.push_back(Series{std::move(label), std::move(xs), std::move(ys)});
  }

  void write(const std::string& path) const {
    if (series_.empty()) throw std::logic_error("SvgChart: nothing to plot");
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series_)
      for (size_t i = 0; i < s.xs.size(); ++i) {
        xmin = std::min(xmin, s.xs[i]);
        xmax = std::max(xmax, s.xs[i]);
        ymin = std::min(ymin, s.ys[i]);
        ymax = std::max(ymax, s.ys[i]);
      }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    const double w = 640, h = 420, left = 70, right = 20, top = 40, bottom = 50;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (w - left - right); };
    auto py = [&](double y) { return h - bottom - (y - ymin) / (ymax - ymin) * (h - top - bottom); };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(w) +
           "\" height=\"" + format_double(h) + "\" font-family=\"sans-serif\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += text(w / 2, 24, title_, 16, "middle");
    out += "<rect x=\"" + format_double(left) + "\" y=\"" + format_double(top) + "\" width=\"" +
           format_double(w - left - right) + "\" height=\"" + format_double(h - top - bottom) +
           "\" fill=\"none\" stroke=\"#444\"/>\n";
    out += text(left, h - bottom + 18, format_double(xmin), 11, "middle");
    out += text(w - right, h - bottom + 18, format_double(xmax), 11, "middle");
    out += text(left - 8, h - bottom + 4, format_double(ymin), 11, "end");
    out += text(left - 8, top + 4, format_double(ymax), 11, "end");
    out += text(w / 2, h - 14, x_label_, 13, "middle");
    out += "<text x=\"18\" y=\"" + format_double(h / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           format_double(h / 2) + ")\">" + escape(y_label_) + "</text>\n";

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b"};
    for (size_t k = 0; k < series_.size(); ++k) {
      const auto& s = series_[k];
      std::string pts;
      for (size_t i = 0; i < s.xs.size(); ++i) {
        if (i) pts += ' ';
        pts += format_double(px(s.xs[i])) + "," + format_double(py(s.ys[i]));
      }
      const char* color = palette[k % 6];
      out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
      double ly = top + 16 + 16 * static_cast<double>(k);
      out += "<line x1=\"" + format_double(left + 8) + "\" y1=\"" + format_double(ly - 4) +
             "\" x2=\"" + format_double(left + 28) + "\" y2=\"" + format_double(ly - 4) +
             "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
      out += text(left + 34, ly, s.label, 12, "start");
    }
    out += "</svg>\n";
    save(path, out);
  }

 private:
  struct Series {
    std::string label;
    std::vector<double> xs, ys;
  };

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '<')
        out += "&lt;";
      else if (c == '>')
        out += "&gt;";
      else if (c == '&')
        out += "&amp;";
      else
        out += c;
    }
    return out;
  }

  static std::string text(double x, double y, const std::string& body, int size,
                          const char* anchor) {
    return "<text x=\"" + format_double(x) + "\" y=\"" + format_double(y) + "\" font-size=\"" +
           std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(body) +
           "</text>\n";
  }

  static void save(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("SvgChart: cannot open " + path);
    out << body;
    if (!out) throw std::runtime_error("SvgChart: write failed for " + path);
  }

  std::string title_;
  std::string x_label_;
  std::string y_label_;
  std::vector<Series> series_;
};

// Square heat map over a [0,1] x [0,1] grid with a blue-white-red diverging
// colormap centered at zero; used for the discrimination surfaces.
inline void write_heatmap_svg(const std::string& path, const std::string& title,
                              const Matrix& values) {
  if (values.rows() < 2 || values.cols() < 2)
    throw std::invalid_argument("write_heatmap_svg: need at least a 2x2 grid");
  double extreme = 0.0;
  for (double v : values.data()) extreme = std::max(extreme, std::abs(v));
  if (extreme == 0.0) extreme = 1.0;

  const double w = 520, h = 560, left = 60, top = 60, size = 420;
  double cw = size / values.cols(), ch = size / values.rows();
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(w) +
         "\" height=\"" + format_double(h) + "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + format_double(w / 2) +
         "\" y=\"30\" font-size=\"16\" text-anchor=\"middle\">" + title + "</text>\n";
  for (int r = 0; r < values.rows(); ++r) {
    for (int c = 0; c < values.cols(); ++c) {
      double t = values(r, c) / extreme;  // -1 .. 1
      int red, green, blue;
      if (t >= 0) {
        red = 255;
        green = blue = static_cast<int>(std::lround(255 * (1.0 - t)));
      } else {
        blue = 255;
        red = green = static_cast<int>(std::lround(255 * (1.0 + t)));
      }
      // row 0 at the bottom: both axes increase away from the origin corner
      double x = left + c * cw;
      double y = top + size - (r + 1) * ch;
      out += "<rect x=\"" + format_double(x) + "\" y=\"" + format_double(y) + "\" width=\"" +
             format_double(cw + 0.5) + "\" height=\"" + format_double(ch + 0.5) + "\" fill=\"rgb(" +
             std::to_string(red) + "," + std::to_string(green) + "," + std::to_string(blue) +
             ")\"/>\n";
    }
  }
  out += "<rect x=\"" + format_double(left) + "\" y=\"" + format_double(top) + "\" width=\"" +
         format_double(size) + "\" height=\"" + format_double(size) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  out += "<text x=\"" + format_double(left + size / 2) + "\" y=\"" + format_double(top + size + 30) +
         "\" font-size=\"13\" text-anchor=\"middle\">error rate e</text>\n";
  out += "<text x=\"30\" y=\"" + format_double(top + size / 2) +
         "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 30 " +
         format_double(top + size / 2) + ")\">homophily b</text>\n";
  out += "<text x=\"" + format_double(left) + "\" y=\"" + format_double(top + size + 16) +
         "\" font-size=\"11\" text-anchor=\"middle\">0</text>\n";
  out += "<text x=\"" + format_double(left + size) + "\" y=\"" + format_double(top + size + 16) +
         "\" font-size=\"11\" text-anchor=\"middle\">1</text>\n";
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("write_heatmap_svg: cannot open " + path);
  file << out;
  if (!file) throw std::runtime_error("write_heatmap_svg: write failed for " + path);
}

}  // namespace hetsign
