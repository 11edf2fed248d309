#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mixreg/error.hpp"
#include "mixreg/experiments.hpp"

namespace mixreg {
namespace {

std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
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

// Light grey for the first checkpoint down to black for the last.
std::string shade(std::size_t k, std::size_t count) {
  const int level = count > 1 ? static_cast<int>(std::lround(192.0 * (1.0 - double(k) / double(count - 1)))) : 0;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", level, level, level);
  return buf;
}

}  // namespace

std::string render_sweep_svg(const SweepTable& table, const PlotStyle& style) {
  if (table.rows.empty()) throw Error(ErrorCode::InvalidInput, "cannot plot an empty table");
  std::map<int, std::vector<std::pair<double, double>>> series;
  for (const auto& m : sweep_medians(table))
    if (m.count > 0 && std::isfinite(m.raw_error)) series[m.t].emplace_back(m.cos_alpha, m.raw_error);

  double x_lo = 1.0, x_hi = -1.0, y_hi = 0.0;
  for (const auto& [t, pts] : series)
    for (const auto& [x, y] : pts) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_hi = std::max(y_hi, y);
    }
  if (x_lo >= x_hi) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (!(y_hi > 0.0)) y_hi = 1.0;
  y_hi *= 1.05;

  const double W = style.width, H = style.height;
  const double left = 60, right = 20, top = style.title.empty() ? 20 : 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return top + ph - y / y_hi * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << style.height
     << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty())
    os << "<text x=\"" << fixed(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(style.title) << "</text>\n";
  os << "<g stroke=\"black\" stroke-width=\"1\">\n"
     << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(left + pw) << "\" y2=\""
     << fixed(top + ph) << "\"/>\n"
     << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(left) << "\" y2=\""
     << fixed(top + ph) << "\"/>\n</g>\n";
  os << "<g font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
    const double yv = y_hi * i / 4.0;
    os << "<text x=\"" << fixed(sx(xv)) << "\" y=\"" << fixed(top + ph + 16) << "\" text-anchor=\"middle\">"
       << fixed(xv) << "</text>\n";
    os << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(sy(yv) + 4) << "\" text-anchor=\"end\">"
       << fixed(yv) << "</text>\n";
  }
  os << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(H - 10) << "\" text-anchor=\"middle\">"
     << escape(style.x_label) << "</text>\n";
  os << "<text x=\"14\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << fixed(top + ph / 2) << ")\">" << escape(style.y_label) << "</text>\n</g>\n";

  std::size_t k = 0;
  for (const auto& [t, pts] : series) {
    const std::string color = shade(k++, series.size());
    if (pts.size() == 1) {
      os << "<circle data-t=\"" << t << "\" cx=\"" << fixed(sx(pts[0].first)) << "\" cy=\""
         << fixed(sy(pts[0].second)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      continue;
    }
    os << "<polyline data-t=\"" << t << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      os << (i ? " " : "") << fixed(sx(pts[i].first)) << ',' << fixed(sy(pts[i].second));
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const SweepTable& table, const PlotStyle& style, const std::string& path) {
  const std::string svg = render_sweep_svg(table, style);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << svg;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace mixreg
