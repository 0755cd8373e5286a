#include "quickflex/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace quickflex {

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

void emit_svg(const std::vector<std::pair<std::string, Polygon>>& regions,
              const std::filesystem::path& path) {
  if (regions.empty()) throw std::invalid_argument("emit_svg: no polygons");

  // Data window: all vertices plus the origin, padded.
  double pmin = 0.0, pmax = 0.0, qmin = 0.0, qmax = 0.0;
  for (const auto& [label, poly] : regions)
    for (const Point2& v : poly.vertices) {
      pmin = std::min(pmin, v.p);
      pmax = std::max(pmax, v.p);
      qmin = std::min(qmin, v.q);
      qmax = std::max(qmax, v.q);
    }
  const double pad_p = std::max(0.08 * (pmax - pmin), 1e-3);
  const double pad_q = std::max(0.08 * (qmax - qmin), 1e-3);
  pmin -= pad_p;
  pmax += pad_p;
  qmin -= pad_q;
  qmax += pad_q;

  const double W = 640.0, H = 480.0, margin = 46.0;
  const double sx = (W - 2 * margin) / (pmax - pmin);
  const double sy = (H - 2 * margin) / (qmax - qmin);
  auto X = [&](double p) { return margin + (p - pmin) * sx; };
  auto Y = [&](double q) { return H - margin - (q - qmin) * sy; };

  std::ofstream out(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";

  // Axes through the origin.
  out << "  <line x1=\"" << px(X(pmin)) << "\" y1=\"" << px(Y(0)) << "\" x2=\"" << px(X(pmax))
      << "\" y2=\"" << px(Y(0)) << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  out << "  <line x1=\"" << px(X(0)) << "\" y1=\"" << px(Y(qmin)) << "\" x2=\"" << px(X(0))
      << "\" y2=\"" << px(Y(qmax)) << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  out << "  <text x=\"" << px(W - margin + 6) << "\" y=\"" << px(Y(0) + 4)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#555555\">p</text>\n";
  out << "  <text x=\"" << px(X(0) - 4) << "\" y=\"" << px(margin - 8)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#555555\">q</text>\n";

  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& [label, poly] = regions[i];
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (poly.vertices.size() >= 2) {
      out << "  <path d=\"M " << px(X(poly.vertices[0].p)) << " " << px(Y(poly.vertices[0].q));
      for (std::size_t v = 1; v < poly.vertices.size(); ++v)
        out << " L " << px(X(poly.vertices[v].p)) << " " << px(Y(poly.vertices[v].q));
      out << " Z\" fill=\"" << color << "\" fill-opacity=\"0.12\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"/>\n";
    }
    const double ly = margin + 18.0 * static_cast<double>(i);
    out << "  <rect x=\"" << px(margin) << "\" y=\"" << px(ly) << "\" width=\"12\" height=\"12\" fill=\""
        << color << "\"/>\n";
    out << "  <text x=\"" << px(margin + 18) << "\" y=\"" << px(ly + 10)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">" << label
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace quickflex
