#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace reachkit {

// Planar pose of the vehicle: position in meters, heading in radians.
struct State {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

using Vec3 = std::array<double, 3>;
using CellIndex = std::array<std::size_t, 3>;

// Wraps an angle into [-pi, pi).
double wrap_angle(double theta);

// One axis of the grid. Non-periodic axes place nodes on both endpoints;
// periodic axes alias `hi` onto `lo`.
struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 3;
  bool periodic = false;

  double spacing() const;
  double coord(std::size_t i) const;
  bool operator==(const AxisSpec&) const = default;
};

// Axis-aligned grid over (x, y, theta). Storage is row-major with theta as
// the fastest-varying axis.
class Grid3 {
 public:
  Grid3(AxisSpec x, AxisSpec y, AxisSpec theta);

  // Square domain [-half_width, half_width]^2 with a periodic heading axis.
  static Grid3 square(std::size_t nx, std::size_t ny, std::size_t ntheta, double half_width = 4.0);

  const AxisSpec& axis(std::size_t d) const { return axes_[d]; }
  const std::array<AxisSpec, 3>& axes() const { return axes_; }
  std::size_t count(std::size_t d) const { return axes_[d].count; }
  double spacing(std::size_t d) const { return axes_[d].spacing(); }
  std::size_t size() const { return size_; }

  std::size_t flat(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * axes_[1].count + j) * axes_[2].count + k;
  }
  std::size_t flat(const CellIndex& c) const { return flat(c[0], c[1], c[2]); }
  CellIndex unflat(std::size_t n) const;

  // Cell-center coordinates; throws IndexError on out-of-range input.
  State state(std::size_t i, std::size_t j, std::size_t k) const;
  State state(std::size_t n) const;

  // Nearest cell after clamping (x, y) into the domain and wrapping theta.
  CellIndex nearest(const State& s) const;

  bool contains_xy(double x, double y) const;

  bool operator==(const Grid3& other) const { return axes_ == other.axes_; }

 private:
  std::array<AxisSpec, 3> axes_;
  std::size_t size_;
};

// Real values on a Grid3.
class ScalarField {
 public:
  explicit ScalarField(Grid3 grid, double fill = 0.0);
  ScalarField(Grid3 grid, std::vector<double> values);

  const Grid3& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double operator[](std::size_t n) const { return values_[n]; }
  double& operator[](std::size_t n) { return values_[n]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return values_[grid_.flat(i, j, k)]; }

  double sum() const;
  bool operator==(const ScalarField&) const = default;

 private:
  Grid3 grid_;
  std::vector<double> values_;
};

// Boolean set of cells on a Grid3, one byte per cell.
class BoolMask {
 public:
  explicit BoolMask(Grid3 grid, bool fill = false);
  BoolMask(Grid3 grid, std::vector<std::uint8_t> bits);

  const Grid3& grid() const { return grid_; }
  std::size_t size() const { return bits_.size(); }
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool operator[](std::size_t n) const { return bits_[n] != 0; }
  void set(std::size_t n, bool v = true) { bits_[n] = v ? 1 : 0; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  BoolMask operator&(const BoolMask& o) const;
  BoolMask operator|(const BoolMask& o) const;
  BoolMask operator~() const;
  bool is_subset_of(const BoolMask& o) const;
  bool operator==(const BoolMask&) const = default;

 private:
  Grid3 grid_;
  std::vector<std::uint8_t> bits_;
};

// Throws ShapeError if the grids differ.
void require_same_grid(const Grid3& a, const Grid3& b, const char* what);

// Trilinear interpolation with the heading axis wrapped across its seam.
// Throws DomainError if (x, y) lies outside the grid.
double interpolate(const ScalarField& field, const State& s);

// One-sided differences along each axis at a cell. At a non-periodic
// boundary both sides collapse to the single available one-sided difference.
struct Differences {
  Vec3 minus{};
  Vec3 plus{};
};
Differences differences(const ScalarField& field, std::size_t i, std::size_t j, std::size_t k);

// Central differences, one-sided at non-periodic boundaries.
Vec3 gradient_central(const ScalarField& field, std::size_t i, std::size_t j, std::size_t k);

// Cells with value strictly below `threshold`.
BoolMask sublevel_set(const ScalarField& field, double threshold);

// Cells with value strictly above `threshold`.
BoolMask superlevel_set(const ScalarField& field, double threshold);

struct SetMetrics {
  double iou = 1.0;
  double frac_a_in_b = 1.0;
  double frac_b_in_a = 1.0;
};

SetMetrics set_metrics(const BoolMask& a, const BoolMask& b);

}  // namespace reachkit
