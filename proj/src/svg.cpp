// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "apd/error.hpp"

namespace apd::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v, double step) {
  char buf[32];
  const int digits = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
  std::snprintf(buf, sizeof(buf), "%.*f", digits, std::abs(v) < 1e-12 * step ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return mag * (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0);
}

}  // namespace

Panel::Panel(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {
  x_lo_ = y_lo_ = std::numeric_limits<double>::infinity();
  x_hi_ = y_hi_ = -std::numeric_limits<double>::infinity();
}

void Panel::set_x_range(double lo, double hi) {
  x_lo_ = lo;
  x_hi_ = hi;
  x_set_ = true;
}

void Panel::set_y_range(double lo, double hi) {
  y_lo_ = lo;
  y_hi_ = hi;
  y_set_ = true;
}

void Panel::grow(const std::vector<double>& x, const std::vector<double>& y) {
  for (double v : x) {
    if (!x_set_ && std::isfinite(v)) {
      x_lo_ = std::min(x_lo_, v);
      x_hi_ = std::max(x_hi_, v);
    }
  }
  for (double v : y) {
    if (!y_set_ && std::isfinite(v)) {
      y_lo_ = std::min(y_lo_, v);
      y_hi_ = std::max(y_hi_, v);
    }
  }
}

void Panel::line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::string& color, double width, const std::string& label) {
  grow(x, y);
  items_.push_back({Item::kLine, x, y, {}, {}, color, label, width});
}

void Panel::error_bars(const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<double>& err, const std::string& color) {
  std::vector<double> lo(y.size()), hi(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    lo[i] = y[i] - err[i];
    hi[i] = y[i] + err[i];
  }
  grow(x, lo);
  grow(x, hi);
  items_.push_back({Item::kErrors, x, y, err, {}, color, "", 1.0});
}

void Panel::markers(const std::vector<double>& x, const std::vector<double>& y,
                    const std::string& color, const std::string& label) {
  grow(x, y);
  items_.push_back({Item::kMarkers, x, y, {}, {}, color, label, 1.0});
}

void Panel::steps(const std::vector<double>& edges, const std::vector<double>& values,
                  const std::string& color, const std::string& label) {
  grow(edges, values);
  grow({}, {0.0});
  items_.push_back({Item::kSteps, edges, values, {}, {}, color, label, 1.2});
}

void Panel::heatmap(const std::vector<double>& x_edges, const std::vector<double>& y_edges,
                    const std::vector<std::vector<double>>& values) {
  grow(x_edges, y_edges);
  items_.push_back({Item::kHeat, x_edges, y_edges, {}, values, "", "", 0.0});
}

void Panel::hline(double y, const std::string& color) {
  items_.push_back({Item::kHline, {}, {y}, {}, {}, color, "", 1.0});
}

void Panel::note(const std::string& text) { notes_.push_back(text); }

std::string Panel::render(double left, double top, double width, double height) const {
  const double ml = 62, mr = 16, mt = 28, mb = 44;
  const double px = left + ml, py = top + mt, pw = width - ml - mr, ph = height - mt - mb;
  double xl = x_lo_, xh = x_hi_, yl = y_lo_, yh = y_hi_;
  if (!(xh > xl)) {
    xl = std::isfinite(xl) ? xl - 1 : 0;
    xh = xl + 2;
  }
  if (!(yh > yl)) {
    yl = std::isfinite(yl) ? yl - 1 : 0;
    yh = yl + 2;
  }
  if (!y_set_) {
    const double pad = 0.05 * (yh - yl);
    yh += pad;
    if (yl < 0) yl -= pad;
  }
  auto sx = [&](double x) { return px + (x - xl) / (xh - xl) * pw; };
  auto sy = [&](double y) { return py + ph - (y - yl) / (yh - yl) * ph; };
  auto clip_y = [&](double y) { return std::clamp(sy(y), py, py + ph); };

  std::ostringstream o;
  o << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<text x=\"" << num(px + pw / 2) << "\" y=\"" << num(top + 17)
    << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(title_) << "</text>\n";

  for (const auto& it : items_) {
    if (it.kind != Item::kHeat) continue;
    double vmax = 0.0;
    for (const auto& col : it.grid) {
      for (double v : col) vmax = std::max(vmax, v);
    }
    const double lmax = std::log1p(vmax);
    for (std::size_t i = 0; i + 1 < it.x.size() && i < it.grid.size(); ++i) {
      for (std::size_t j = 0; j + 1 < it.y.size() && j < it.grid[i].size(); ++j) {
        const double v = it.grid[i][j];
        if (v <= 0.0) continue;
        const double s = lmax > 0 ? std::log1p(v) / lmax : 0.0;
        const int r = static_cast<int>(255 * std::min(1.0, 1.6 * s));
        const int g = static_cast<int>(255 * std::clamp(1.6 * s - 0.6, 0.0, 1.0));
        const int b = static_cast<int>(255 * std::clamp(0.5 - s, 0.0, 1.0) + 60 * s);
        const double x0 = sx(it.x[i]), x1 = sx(it.x[i + 1]);
        const double y0 = clip_y(it.y[j + 1]), y1 = clip_y(it.y[j]);
        if (y1 - y0 <= 0) continue;
        o << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\""
          << num(x1 - x0 + 0.3) << "\" height=\"" << num(y1 - y0 + 0.3) << "\" fill=\"rgb(" << r
          << "," << g << "," << b << ")\"/>\n";
      }
    }
  }

  o << "<rect x=\"" << num(px) << "\" y=\"" << num(py) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double xs = nice_step(xh - xl), ys = nice_step(yh - yl);
  for (double t = std::ceil(xl / xs) * xs; t <= xh + 1e-9 * xs; t += xs) {
    o << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(py + ph) << "\" x2=\"" << num(sx(t))
      << "\" y2=\"" << num(py + ph + 4) << "\" stroke=\"black\"/>"
      << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(py + ph + 16)
      << "\" text-anchor=\"middle\">" << tick_label(t, xs) << "</text>\n";
  }
  for (double t = std::ceil(yl / ys) * ys; t <= yh + 1e-9 * ys; t += ys) {
    o << "<line x1=\"" << num(px - 4) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(px)
      << "\" y2=\"" << num(sy(t)) << "\" stroke=\"black\"/>"
      << "<text x=\"" << num(px - 6) << "\" y=\"" << num(sy(t) + 4)
      << "\" text-anchor=\"end\">" << tick_label(t, ys) << "</text>\n";
  }
  o << "<text x=\"" << num(px + pw / 2) << "\" y=\"" << num(top + height - 8)
    << "\" text-anchor=\"middle\">" << escape(x_label_) << "</text>\n";
  o << "<text transform=\"translate(" << num(left + 14) << "," << num(py + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label_) << "</text>\n";

  o << "<clipPath id=\"c" << static_cast<long>(left) << "_" << static_cast<long>(top)
    << "\"><rect x=\"" << num(px) << "\" y=\"" << num(py) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\"/></clipPath>\n";
  o << "<g clip-path=\"url(#c" << static_cast<long>(left) << "_" << static_cast<long>(top)
    << ")\">\n";
  int legend = 0;
  for (const auto& it : items_) {
    switch (it.kind) {
      case Item::kLine: {
        o << "<polyline fill=\"none\" stroke=\"" << it.color << "\" stroke-width=\"" << it.width
          << "\" points=\"";
        for (std::size_t i = 0; i < it.x.size(); ++i) {
          if (std::isfinite(it.y[i])) o << num(sx(it.x[i])) << "," << num(sy(it.y[i])) << " ";
        }
        o << "\"/>\n";
        break;
      }
      case Item::kSteps: {
        o << "<polyline fill=\"none\" stroke=\"" << it.color << "\" stroke-width=\"" << it.width
          << "\" points=\"";
        for (std::size_t i = 0; i + 1 < it.x.size() && i < it.y.size(); ++i) {
          o << num(sx(it.x[i])) << "," << num(sy(it.y[i])) << " " << num(sx(it.x[i + 1])) << ","
            << num(sy(it.y[i])) << " ";
        }
        o << "\"/>\n";
        break;
      }
      case Item::kMarkers:
        for (std::size_t i = 0; i < it.x.size(); ++i) {
          o << "<circle cx=\"" << num(sx(it.x[i])) << "\" cy=\"" << num(sy(it.y[i]))
            << "\" r=\"2.5\" fill=\"" << it.color << "\"/>\n";
        }
        break;
      case Item::kErrors:
        for (std::size_t i = 0; i < it.x.size(); ++i) {
          o << "<line x1=\"" << num(sx(it.x[i])) << "\" y1=\"" << num(sy(it.y[i] - it.e[i]))
            << "\" x2=\"" << num(sx(it.x[i])) << "\" y2=\"" << num(sy(it.y[i] + it.e[i]))
            << "\" stroke=\"" << it.color << "\"/>\n";
        }
        break;
      case Item::kHline:
        o << "<line x1=\"" << num(px) << "\" y1=\"" << num(sy(it.y[0])) << "\" x2=\""
          << num(px + pw) << "\" y2=\"" << num(sy(it.y[0])) << "\" stroke=\"" << it.color
          << "\" stroke-dasharray=\"4,3\"/>\n";
        break;
      case Item::kHeat:
        break;
    }
  }
  o << "</g>\n";
  for (const auto& it : items_) {
    if (it.label.empty()) continue;
    const double ly = py + 14 + 14 * legend++;
    o << "<line x1=\"" << num(px + pw - 120) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
      << num(px + pw - 104) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << it.color
      << "\" stroke-width=\"2\"/><text x=\"" << num(px + pw - 100) << "\" y=\"" << num(ly)
      << "\">" << escape(it.label) << "</text>\n";
  }
  for (std::size_t i = 0; i < notes_.size(); ++i) {
    o << "<text x=\"" << num(px + 8) << "\" y=\"" << num(py + 16 + 14 * (legend + i))
      << "\">" << escape(notes_[i]) << "</text>\n";
  }
  o << "</g>\n";
  return o.str();
}

void write_figure(const std::filesystem::path& path, const std::vector<Panel>& panels,
                  int columns, double panel_width, double panel_height) {
  columns = std::max(1, columns);
  const int rows = static_cast<int>((panels.size() + columns - 1) / columns);
  const double w = panel_width * std::min<int>(columns, static_cast<int>(panels.size()));
  const double h = panel_height * rows;
  std::ofstream out(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\""
      << num(h) << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const double left = panel_width * static_cast<double>(i % columns);
    const double top = panel_height * static_cast<double>(i / columns);
    out << panels[i].render(left, top, panel_width, panel_height);
  }
  out << "</svg>\n";
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace apd::svg
