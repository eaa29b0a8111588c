#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reachkit/grid.hpp"
#include "reachkit/reachability.hpp"

namespace reachkit {

struct Segment {
  double x0, y0, x1, y1;
};

// Marching-squares contour of one heading slice of `field` at `level`,
// over cell centers, in world coordinates.
std::vector<Segment> slice_contour(const ScalarField& field, std::size_t k, double level);

// Cell-indicator field (1 inside, 0 outside) whose 0.5 contour outlines the mask.
ScalarField indicator(const BoolMask& mask);

struct SvgLayer {
  std::string label;
  std::string color;
  ScalarField field;
  double level = 0.0;
};

// One heading slice: domain frame, obstacle circle, and one contour per layer.
std::string render_slice_svg(const Grid3& grid, const Obstacle& obstacle, double theta,
                             const std::vector<SvgLayer>& layers);

// Writes slice_<i>.svg (or <prefix>_<i>.svg) for each heading; returns the paths.
std::vector<std::filesystem::path> write_slice_svgs(const std::filesystem::path& dir, const std::string& prefix,
                                                    const Grid3& grid, const Obstacle& obstacle,
                                                    const std::vector<double>& thetas,
                                                    const std::vector<SvgLayer>& layers);

// Index of the heading slice nearest to theta.
std::size_t nearest_slice(const Grid3& grid, double theta);

}  // namespace reachkit
