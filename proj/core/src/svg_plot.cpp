#include "fyvi/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace fyvi::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

void axes(std::ostringstream& o, const Frame& f, const std::string& title, const std::string& xl,
          const std::string& yl) {
  o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  const double bx = kLeft;
  const double by = kHeight - kBottom;
  o << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << by
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << bx << "\" y2=\"" << kTop << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    o << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << by + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << tick(xv) << "</text>\n";
    o << "<text x=\"" << bx - 6 << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
      << tick(yv) << "</text>\n";
  }
  o << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\" font-size=\"13\">" << xl
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
    << kHeight / 2 << ")\">" << yl << "</text>\n";
}

std::string header() {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  return o.str();
}

}  // namespace

std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<BandSeries>& series) {
  Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const BandSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      f.x0 = std::min(f.x0, s.x[i]);
      f.x1 = std::max(f.x1, s.x[i]);
      f.y0 = std::min(f.y0, s.mean[i] - s.std[i]);
      f.y1 = std::max(f.y1, s.mean[i] + s.std[i]);
    }
  }
  if (!std::isfinite(f.x0)) f = {0, 1, 0, 1};
  pad(f.x0, f.x1);
  pad(f.y0, f.y1);

  std::ostringstream o;
  o << header();
  axes(o, f, title, x_label, y_label);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const BandSeries& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    o << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << num(f.px(s.x[i])) << ',' << num(f.py(s.mean[i] + s.std[i])) << ' ';
    for (std::size_t i = s.x.size(); i-- > 0;) o << num(f.px(s.x[i])) << ',' << num(f.py(s.mean[i] - s.std[i])) << ' ';
    o << "\"/>\n";
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << num(f.px(s.x[i])) << ',' << num(f.py(s.mean[i])) << ' ';
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      o << "<circle cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(s.mean[i])) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

std::string clustering_plot(const std::string& title, const Dataset& data, const GmmState& state) {
  Frame f{-3.5, 3.5, -3.5, 3.5};
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    f.x0 = std::min(f.x0, data.x(i, 0));
    f.x1 = std::max(f.x1, data.x(i, 0));
    f.y0 = std::min(f.y0, data.x(i, 1));
    f.y1 = std::max(f.y1, data.x(i, 1));
  }
  std::ostringstream o;
  o << header();
  axes(o, f, title, "x1", "x2");
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    const double cx = f.px(data.x(i, 0));
    const double cy = f.py(data.x(i, 1));
    const int label = data.labels.empty() ? 0 : data.labels[static_cast<std::size_t>(i)];
    if (label < 0) {
      o << "<path d=\"M" << num(cx - 3) << ',' << num(cy - 3) << " L" << num(cx + 3) << ',' << num(cy + 3) << " M"
        << num(cx - 3) << ',' << num(cy + 3) << " L" << num(cx + 3) << ',' << num(cy - 3)
        << "\" stroke=\"gray\" stroke-width=\"1\"/>\n";
    } else {
      o << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"2\" fill=\""
        << kPalette[static_cast<std::size_t>(label) % std::size(kPalette)] << "\" fill-opacity=\"0.6\"/>\n";
    }
  }
  // Level curve at two standard deviations: mu + 2 L (cos t, sin t).
  for (std::size_t k = 0; k < state.components(); ++k) {
    const Eigen::Matrix2d cov = state.covariances[k].topLeftCorner(2, 2);
    const Eigen::LLT<Eigen::Matrix2d> llt(cov);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::Matrix2d L = llt.matrixL();
    const Eigen::Vector2d mu = state.means.row(static_cast<Eigen::Index>(k)).head<2>().transpose();
    o << "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (int t = 0; t < 64; ++t) {
      const double a = 2.0 * std::numbers::pi * t / 64.0;
      const Eigen::Vector2d p = mu + 2.0 * L * Eigen::Vector2d(std::cos(a), std::sin(a));
      o << num(f.px(p(0))) << ',' << num(f.py(p(1))) << ' ';
    }
    o << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace fyvi::svg
