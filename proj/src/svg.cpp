#include "reachkit/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace reachkit {

std::size_t nearest_slice(const Grid3& grid, double theta) {
  return grid.nearest({grid.axis(0).lo, grid.axis(1).lo, theta})[2];
}

ScalarField indicator(const BoolMask& mask) {
  ScalarField f(mask.grid());
  for (std::size_t n = 0; n < f.size(); ++n) f[n] = mask[n] ? 1.0 : 0.0;
  return f;
}

std::vector<Segment> slice_contour(const ScalarField& field, std::size_t k, double level) {
  const Grid3& g = field.grid();
  const std::size_t nx = g.count(0), ny = g.count(1);
  std::vector<Segment> out;
  auto x = [&](double i) { return g.axis(0).lo + i * g.spacing(0); };
  auto y = [&](double j) { return g.axis(1).lo + j * g.spacing(1); };
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      // Corners counter-clockwise from (i, j).
      const double v[4] = {field.at(i, j, k), field.at(i + 1, j, k), field.at(i + 1, j + 1, k),
                           field.at(i, j + 1, k)};
      const double ci[4] = {0, 1, 1, 0}, cj[4] = {0, 0, 1, 1};
      std::vector<std::pair<double, double>> hits;
      for (int e = 0; e < 4; ++e) {
        const int a = e, b = (e + 1) % 4;
        const bool ia = v[a] < level, ib = v[b] < level;
        if (ia == ib) continue;
        const double t = (level - v[a]) / (v[b] - v[a]);
        hits.emplace_back(x(i + ci[a] + t * (ci[b] - ci[a])), y(j + cj[a] + t * (cj[b] - cj[a])));
      }
      if (hits.size() == 2) {
        out.push_back({hits[0].first, hits[0].second, hits[1].first, hits[1].second});
      } else if (hits.size() == 4) {
        // Saddle: pair edges by the sign of the cell-center average.
        const double mid = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        if ((mid < level) == (v[0] < level)) {
          out.push_back({hits[0].first, hits[0].second, hits[3].first, hits[3].second});
          out.push_back({hits[1].first, hits[1].second, hits[2].first, hits[2].second});
        } else {
          out.push_back({hits[0].first, hits[0].second, hits[1].first, hits[1].second});
          out.push_back({hits[2].first, hits[2].second, hits[3].first, hits[3].second});
        }
      }
    }
  }
  return out;
}

std::string render_slice_svg(const Grid3& grid, const Obstacle& obstacle, double theta,
                             const std::vector<SvgLayer>& layers) {
  const double x0 = grid.axis(0).lo, x1 = grid.axis(0).hi;
  const double y0 = grid.axis(1).lo, y1 = grid.axis(1).hi;
  const double scale = 480.0 / std::max(x1 - x0, y1 - y0);
  const double width = (x1 - x0) * scale, height = (y1 - y0) * scale;
  const double pad = 20.0;
  auto px = [&](double x) { return pad + (x - x0) * scale; };
  auto py = [&](double y) { return pad + (y1 - y) * scale; };  // y axis up
  const std::size_t k = nearest_slice(grid, theta);

  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width + 2 * pad << "\" height=\""
    << height + 2 * pad + 60 << "\">\n";
  s << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << width << "\" height=\"" << height
    << "\" fill=\"white\" stroke=\"black\"/>\n";
  s << "<circle cx=\"" << px(obstacle.cx) << "\" cy=\"" << py(obstacle.cy) << "\" r=\"" << obstacle.radius * scale
    << "\" fill=\"#dddddd\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto& layer : layers) {
    s << "<path fill=\"none\" stroke=\"" << layer.color << "\" stroke-width=\"2\" d=\"";
    for (const auto& seg : slice_contour(layer.field, k, layer.level)) {
      s << "M" << px(seg.x0) << ' ' << py(seg.y0) << "L" << px(seg.x1) << ' ' << py(seg.y1);
    }
    s << "\"><title>" << layer.label << "</title></path>\n";
  }
  double ly = height + pad + 18;
  char head[64];
  std::snprintf(head, sizeof head, "theta = %.3f (slice %zu)", grid.axis(2).coord(k), k);
  s << "<text x=\"" << pad << "\" y=\"" << ly << "\" font-size=\"13\">" << head << "</text>\n";
  double lx = pad + 170;
  s << "<text x=\"" << lx << "\" y=\"" << ly << "\" font-size=\"13\" fill=\"#777777\">failure set</text>\n";
  lx += 80;
  for (const auto& layer : layers) {
    s << "<text x=\"" << lx << "\" y=\"" << ly << "\" font-size=\"13\" fill=\"" << layer.color << "\">" << layer.label
      << "</text>\n";
    lx += 10.0 + 7.5 * static_cast<double>(layer.label.size());
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<std::filesystem::path> write_slice_svgs(const std::filesystem::path& dir, const std::string& prefix,
                                                    const Grid3& grid, const Obstacle& obstacle,
                                                    const std::vector<double>& thetas,
                                                    const std::vector<SvgLayer>& layers) {
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const auto p = dir / (prefix + "_" + std::to_string(i) + ".svg");
    std::ofstream(p) << render_slice_svg(grid, obstacle, thetas[i], layers);
    paths.push_back(p);
  }
  return paths;
}

}  // namespace reachkit
