#include "cdch/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iomanip>

namespace cdch {

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
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

// Blue-white-red diverging ramp for t in [0, 1].
std::string color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  double r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;
    r = 0.23 + 0.77 * s;
    g = 0.30 + 0.70 * s;
    b = 0.75 + 0.25 * s;
  } else {
    const double s = (t - 0.5) / 0.5;
    r = 1.0 - 0.3 * s;
    g = 1.0 - 0.98 * s;
    b = 1.0 - 0.85 * s;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(r * 255), static_cast<int>(g * 255),
                static_cast<int>(b * 255));
  return buf;
}

// Shared raster writer: value(i, j) for pixel blocks, NaN means blank.
template <class Value>
void raster(std::ostream& out, int cols, int rows, Value value, const std::string& title,
            int max_pixels) {
  const int stride = std::max(1, (std::max(cols, rows) + max_pixels - 1) / max_pixels);
  const int pw = (cols + stride - 1) / stride, ph = (rows + stride - 1) / stride;
  double lo = INFINITY, hi = -INFINITY;
  for (int j = 0; j < rows; j += stride) {
    for (int i = 0; i < cols; i += stride) {
      const double v = value(i, j);
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  // symmetric range around zero for signed data, [0, hi] otherwise
  double a = 0.0, b = 1.0;
  if (std::isfinite(lo)) {
    if (lo < 0.0) {
      b = std::max(std::abs(lo), std::abs(hi));
      a = -b;
    } else {
      b = hi;
    }
    if (b - a <= 0.0) b = a + 1.0;
  }
  const int scale = std::max(1, 512 / std::max(pw, ph));
  const int width = pw * scale, height = ph * scale;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height + 24 << "\" shape-rendering=\"crispEdges\">\n";
  out << "<text x=\"4\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">" << escape(title)
      << " [" << short_number(a) << ", " << short_number(b) << "]</text>\n";
  out << "<g transform=\"translate(0,24)\">\n";
  for (int pj = 0; pj < ph; ++pj) {
    for (int pi = 0; pi < pw; ++pi) {
      const double v = value(pi * stride, pj * stride);
      if (std::isnan(v)) continue;
      // y grows upward in the field, downward in SVG
      out << "<rect x=\"" << pi * scale << "\" y=\"" << (ph - 1 - pj) * scale << "\" width=\""
          << scale << "\" height=\"" << scale << "\" fill=\"" << color((v - a) / (b - a))
          << "\"/>\n";
    }
  }
  out << "</g>\n</svg>\n";
}

}  // namespace

void write_field_csv(std::ostream& out, const DomainGrid& grid, const Eigen::VectorXd& u) {
  out << "x,y,u\n";
  for (int k = 0; k < grid.node_count(); ++k) {
    const Point p = grid.node(k);
    out << number(p.x()) << ',' << number(p.y()) << ',' << number(u[k]) << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << number(row[c]);
    out << '\n';
  }
}

void write_heatmap_svg(std::ostream& out, const DomainGrid& grid, const Eigen::VectorXd& u,
                       const std::string& title, int max_pixels) {
  raster(
      out, grid.nx + 1, grid.ny + 1,
      [&](int i, int j) {
        const int k = grid.index(i, j);
        return grid.mask[k] == NodeKind::exterior ? NAN : u[k];
      },
      title, max_pixels);
}

void write_torus_heatmap_svg(std::ostream& out, const Eigen::VectorXd& u, int n,
                             const std::string& title, int max_pixels) {
  raster(
      out, n, n, [&](int i, int j) { return u[static_cast<Eigen::Index>(j) * n + i]; }, title,
      max_pixels);
}

void write_loglog_svg(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y,
                      double slope, double constant, const std::string& x_label,
                      const std::string& y_label, const std::string& title) {
  constexpr double W = 480, H = 360, left = 70, right = 20, top = 30, bottom = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0 && y[k] > 0.0)) continue;
    x0 = std::min(x0, std::log10(x[k]));
    x1 = std::max(x1, std::log10(x[k]));
    y0 = std::min(y0, std::log10(y[k]));
    y1 = std::max(y1, std::log10(y[k]));
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  x0 = std::floor(x0 * 10) / 10 - 0.1;
  x1 = std::ceil(x1 * 10) / 10 + 0.1;
  y0 = std::floor(y0 * 10) / 10 - 0.1;
  y1 = std::ceil(y1 * 10) / 10 + 0.1;
  auto px = [&](double lx) { return left + (lx - x0) / (x1 - x0) * (W - left - right); };
  auto py = [&](double ly) { return H - bottom - (ly - y0) / (y1 - y0) * (H - top - bottom); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right
      << "\" height=\"" << H - top - bottom << "\" fill=\"none\" stroke=\"#444\"/>\n";
  out << "<text x=\"" << left << "\" y=\"18\" font-size=\"14\">" << escape(title) << "</text>\n";
  out << "<text x=\"" << (W + left - right) / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\">" << escape(x_label) << " (log10)</text>\n";
  out << "<text transform=\"translate(16," << (H + top - bottom) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << " (log10)</text>\n";
  for (double t = std::ceil(x0 * 2) / 2; t <= x1; t += 0.5) {
    out << "<text x=\"" << px(t) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">"
        << short_number(t) << "</text>\n";
  }
  for (double t = std::ceil(y0 * 2) / 2; t <= y1; t += 0.5) {
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
        << short_number(t) << "</text>\n";
  }
  if (constant > 0.0) {
    const double la = x0 + 0.1, lb = x1 - 0.1;
    const double c = std::log10(constant);
    out << "<line x1=\"" << px(la) << "\" y1=\"" << py(c + slope * la) << "\" x2=\"" << px(lb)
        << "\" y2=\"" << py(c + slope * lb)
        << "\" stroke=\"#c33\" stroke-dasharray=\"6 4\"/>\n";
    out << "<text x=\"" << W - right - 6 << "\" y=\"" << top + 16
        << "\" text-anchor=\"end\" fill=\"#c33\">slope " << short_number(slope) << "</text>\n";
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0 && y[k] > 0.0)) continue;
    out << "<circle cx=\"" << px(std::log10(x[k])) << "\" cy=\"" << py(std::log10(y[k]))
        << "\" r=\"4\" fill=\"#247\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace cdch
