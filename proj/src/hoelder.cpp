#include "cdch/hoelder.hpp"

#include "cdch/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cdch {

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2 || x.size() != y.size()) throw InvalidParams("fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

HoelderReport lattice_hoelder(const LatticeField& field, double alpha,
                              const HoelderOptions& options) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParams("alpha must lie in (0, 1]");
  const int cols = field.columns();
  const int rows = field.rows();
  if (field.values.size() != static_cast<Eigen::Index>(cols) * rows) {
    throw InvalidParams("field size does not match the lattice");
  }
  const bool masked = !field.valid.empty();
  auto ok = [&](int k) { return !masked || field.valid[static_cast<std::size_t>(k)]; };

  HoelderReport rep;
  rep.alpha = alpha;
  const int span = field.periodic ? std::max(cols, rows) / 2 : std::max(cols, rows) - 1;
  constexpr int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};

  for (int step = 1; step <= span; step *= 2) {
    for (const auto& d : dirs) {
      const int di = d[0] * step, dj = d[1] * step;
      const double sep = field.h * step * std::hypot(d[0], d[1]);
      double worst = 0.0;
      int wa = -1, wb = -1;
      for (int j = 0; j < rows; ++j) {
        int j2 = j + dj;
        if (field.periodic) {
          j2 = ((j2 % rows) + rows) % rows;
        } else if (j2 < 0 || j2 >= rows) {
          continue;
        }
        for (int i = 0; i < cols; ++i) {
          int i2 = i + di;
          if (field.periodic) {
            i2 %= cols;
          } else if (i2 >= cols) {
            break;
          }
          const int a = j * cols + i, b = j2 * cols + i2;
          if (!ok(a) || !ok(b)) continue;
          const double osc = std::abs(field.values[a] - field.values[b]);
          if (osc > worst) {
            worst = osc;
            wa = a;
            wb = b;
          }
        }
      }
      rep.modulus.emplace_back(sep, worst);
      if (wa >= 0 && worst / std::pow(sep, alpha) > rep.seminorm) {
        rep.seminorm = worst / std::pow(sep, alpha);
        auto at = [&](int k) { return Point(field.origin + field.h * Point(k % cols, k / cols)); };
        rep.witness_x = at(wa);
        rep.witness_y = at(wb);
      }
    }
  }

  // the modulus is the running max over separations up to s
  std::sort(rep.modulus.begin(), rep.modulus.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& [s, m] : rep.modulus) {
    if (!merged.empty() && std::abs(merged.back().first - s) <= 1e-12 * s) {
      merged.back().second = std::max(merged.back().second, m);
    } else {
      merged.emplace_back(s, m);
    }
  }
  rep.modulus = std::move(merged);
  double running = 0.0;
  for (auto& [s, m] : rep.modulus) {
    running = std::max(running, m);
    m = running;
  }
  const double extent = field.h * std::max(cols, rows);
  // fit at the axis separations 2^k h only; mixing in the diagonal ones
  // would bias the slope of a perfectly linear field
  std::vector<double> lx, ly;
  for (const auto& [s, m] : rep.modulus) {
    const double cells = s / field.h;
    if (std::abs(cells - std::round(cells)) > 1e-9 * cells) continue;
    if (s < options.fit_min_cells * field.h * (1 - 1e-12)) continue;
    if (s > options.fit_fraction * extent * (1 + 1e-12)) continue;
    if (m <= 0.0) continue;
    lx.push_back(std::log(s));
    ly.push_back(std::log(m));
  }
  if (lx.size() >= 2) {
    const auto [slope, icept] = fit_line(lx, ly);
    rep.fitted_alpha = slope;
    rep.fit_constant = std::exp(icept);
  }
  return rep;
}

}  // namespace cdch
