#ifndef FYVI_SVG_PLOT_HPP
#define FYVI_SVG_PLOT_HPP

#include <string>
#include <vector>

#include "fyvi/fyem_gmm.hpp"

namespace fyvi::svg {

/// A line with a shaded +/- std band.
struct BandSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;
};

std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<BandSeries>& series);

/// Points colored by true label (outliers as crosses) with the 2-sigma level
/// curve of each fitted component. Uses the first two data columns.
std::string clustering_plot(const std::string& title, const Dataset& data, const GmmState& state);

}  // namespace fyvi::svg

#endif  // FYVI_SVG_PLOT_HPP
