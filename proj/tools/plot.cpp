#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "opno/error.hpp"

namespace opno::tools {
namespace {

constexpr double kWidth = 640, kHeight = 400, kMargin = 50;

struct Frame {
  double xmin, xmax, ymin, ymax;
  double px(double x) const { return kMargin + (x - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin); }
  double py(double y) const {
    return kHeight - kMargin - (y - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin);
  }
};

std::string polyline(const Frame& f, std::span<const double> x, std::span<const double> y,
                     const char* color, const char* extra) {
  std::ostringstream s;
  s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" " << extra
    << " points=\"";
  char buf[64];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", f.px(x[i]), f.py(y[i]));
    s << buf;
  }
  s << "\"/>\n";
  return s.str();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_sample_plot(const std::filesystem::path& stem, const std::string& title,
                       std::span<const double> x, std::span<const double> u0,
                       std::span<const double> ref, std::span<const double> pred) {
  const std::size_t n = x.size();
  if (u0.size() != n || ref.size() != n || pred.size() != n || n < 2) {
    throw InvalidArgument("plot: curves must share the grid");
  }
  std::filesystem::path csv_path = stem, svg_path = stem;
  csv_path += ".csv";
  svg_path += ".svg";

  std::ofstream csv(csv_path);
  if (!csv) throw DataError("cannot write " + csv_path.string());
  csv << "x,u0,ref,pred\n";
  char line[128];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", x[i], u0[i], ref[i], pred[i]);
    csv << line;
  }

  Frame f{x.front(), x.back(), 0.0, 0.0};
  f.ymin = f.ymax = u0[0];
  for (auto curve : {u0, ref, pred}) {
    for (double v : curve) {
      f.ymin = std::min(f.ymin, v);
      f.ymax = std::max(f.ymax, v);
    }
  }
  const double pad = std::max(0.05 * (f.ymax - f.ymin), 1e-12);
  f.ymin -= pad;
  f.ymax += pad;

  std::ofstream svg(svg_path);
  if (!svg) throw DataError("cannot write " + svg_path.string());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
      << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = f.xmin + t * (f.xmax - f.xmin) / 4, yv = f.ymin + t * (f.ymax - f.ymin) / 4;
    std::snprintf(line, sizeof line, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.2f</text>\n",
                  f.px(xv), kHeight - kMargin + 16, xv);
    svg << line;
    std::snprintf(line, sizeof line, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n",
                  kMargin - 6, f.py(yv) + 4, yv);
    svg << line;
  }
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kMargin - 20
      << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  svg << polyline(f, x, u0, "#888888", "stroke-dasharray=\"6,4\"");
  svg << polyline(f, x, ref, "#1f4e9c", "");
  const std::size_t stride = std::max<std::size_t>(1, n / 64);
  for (std::size_t i = 0; i < n; i += stride) {
    std::snprintf(line, sizeof line,
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"none\" stroke=\"#c0392b\"/>\n",
                  f.px(x[i]), f.py(pred[i]));
    svg << line;
  }
  const double lx = kWidth - kMargin - 130, ly = kMargin + 14;
  svg << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly
      << "\" stroke=\"#888888\" stroke-dasharray=\"6,4\"/><text x=\"" << lx + 30 << "\" y=\""
      << ly + 4 << "\">u0</text>\n";
  svg << "<line x1=\"" << lx << "\" y1=\"" << ly + 16 << "\" x2=\"" << lx + 24 << "\" y2=\""
      << ly + 16 << "\" stroke=\"#1f4e9c\"/><text x=\"" << lx + 30 << "\" y=\"" << ly + 20
      << "\">reference</text>\n";
  svg << "<circle cx=\"" << lx + 12 << "\" cy=\"" << ly + 32
      << "\" r=\"2.5\" fill=\"none\" stroke=\"#c0392b\"/><text x=\"" << lx + 30 << "\" y=\""
      << ly + 36 << "\">prediction</text>\n";
  svg << "</svg>\n";
}

}  // namespace opno::tools
