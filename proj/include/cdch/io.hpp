#ifndef CDCH_IO_HPP
#define CDCH_IO_HPP

#include "cdch/geometry.hpp"

#include <Eigen/Core>

#include <ostream>
#include <string>
#include <vector>

namespace cdch {

/// One "x,y,u" row per node of the grid, including boundary and exterior
/// nodes (u = 0 there).
void write_field_csv(std::ostream& out, const DomainGrid& grid, const Eigen::VectorXd& u);

/// Generic table: header row, then one row per record. Values are written
/// with 17 significant digits so the file round-trips.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Raster heatmap of a nodal field over the box, exterior nodes left blank.
/// Fields finer than `max_pixels` per side are block-sampled.
void write_heatmap_svg(std::ostream& out, const DomainGrid& grid, const Eigen::VectorXd& u,
                       const std::string& title, int max_pixels = 256);

/// Same for an n x n torus field indexed j n + i.
void write_torus_heatmap_svg(std::ostream& out, const Eigen::VectorXd& u, int n,
                             const std::string& title, int max_pixels = 256);

/// Log-log scatter of (x, y) with the line y = constant x^slope drawn over it.
/// A zero constant skips the line.
void write_loglog_svg(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y,
                      double slope, double constant, const std::string& x_label,
                      const std::string& y_label, const std::string& title);

}  // namespace cdch

#endif  // CDCH_IO_HPP
