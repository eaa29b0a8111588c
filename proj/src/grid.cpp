#include "reachkit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "reachkit/errors.hpp"

namespace reachkit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_axis(const AxisSpec& a, const char* name) {
  if (!(a.lo < a.hi)) throw ConfigError(std::string("axis ") + name + ": lo must be < hi");
  if (a.count < 3) throw ConfigError(std::string("axis ") + name + ": count must be >= 3");
}

}  // namespace

double wrap_angle(double theta) {
  double w = std::fmod(theta + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi.
  if (w >= std::numbers::pi) w -= kTwoPi;
  return w;
}

double AxisSpec::spacing() const {
  return periodic ? (hi - lo) / static_cast<double>(count) : (hi - lo) / static_cast<double>(count - 1);
}

double AxisSpec::coord(std::size_t i) const { return lo + static_cast<double>(i) * spacing(); }

Grid3::Grid3(AxisSpec x, AxisSpec y, AxisSpec theta) : axes_{x, y, theta} {
  validate_axis(x, "x");
  validate_axis(y, "y");
  validate_axis(theta, "theta");
  if (x.periodic || y.periodic) throw ConfigError("spatial axes must not be periodic");
  if (!theta.periodic || theta.lo != -std::numbers::pi || theta.hi != std::numbers::pi) {
    throw ConfigError("theta axis must be periodic over [-pi, pi)");
  }
  size_ = x.count * y.count * theta.count;
}

Grid3 Grid3::square(std::size_t nx, std::size_t ny, std::size_t ntheta, double half_width) {
  return Grid3({-half_width, half_width, nx, false}, {-half_width, half_width, ny, false},
               {-std::numbers::pi, std::numbers::pi, ntheta, true});
}

CellIndex Grid3::unflat(std::size_t n) const {
  const std::size_t k = n % axes_[2].count;
  const std::size_t ij = n / axes_[2].count;
  return {ij / axes_[1].count, ij % axes_[1].count, k};
}

State Grid3::state(std::size_t i, std::size_t j, std::size_t k) const {
  if (i >= axes_[0].count || j >= axes_[1].count || k >= axes_[2].count) {
    throw IndexError("cell index (" + std::to_string(i) + ", " + std::to_string(j) + ", " +
                     std::to_string(k) + ") out of range");
  }
  return {axes_[0].coord(i), axes_[1].coord(j), axes_[2].coord(k)};
}

State Grid3::state(std::size_t n) const {
  if (n >= size_) throw IndexError("flat index " + std::to_string(n) + " out of range");
  const auto c = unflat(n);
  return state(c[0], c[1], c[2]);
}

CellIndex Grid3::nearest(const State& s) const {
  CellIndex c{};
  for (std::size_t d = 0; d < 2; ++d) {
    const auto& a = axes_[d];
    const double v = std::clamp(d == 0 ? s.x : s.y, a.lo, a.hi);
    const double r = std::round((v - a.lo) / a.spacing());
    c[d] = static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(a.count - 1)));
  }
  const auto& t = axes_[2];
  const double r = std::round((wrap_angle(s.theta) - t.lo) / t.spacing());
  c[2] = static_cast<std::size_t>(static_cast<long long>(r) % static_cast<long long>(t.count));
  return c;
}

bool Grid3::contains_xy(double x, double y) const {
  return x >= axes_[0].lo && x <= axes_[0].hi && y >= axes_[1].lo && y <= axes_[1].hi;
}

ScalarField::ScalarField(Grid3 grid, double fill) : grid_(std::move(grid)), values_(grid_.size(), fill) {}

ScalarField::ScalarField(Grid3 grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw ShapeError("field payload does not match grid size");
}

double ScalarField::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

BoolMask::BoolMask(Grid3 grid, bool fill) : grid_(std::move(grid)), bits_(grid_.size(), fill ? 1 : 0) {}

BoolMask::BoolMask(Grid3 grid, std::vector<std::uint8_t> bits) : grid_(std::move(grid)), bits_(std::move(bits)) {
  if (bits_.size() != grid_.size()) throw ShapeError("mask payload does not match grid size");
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BoolMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BoolMask BoolMask::operator&(const BoolMask& o) const {
  require_same_grid(grid_, o.grid_, "mask intersection");
  BoolMask r(grid_);
  for (std::size_t n = 0; n < bits_.size(); ++n) r.bits_[n] = bits_[n] & o.bits_[n];
  return r;
}

BoolMask BoolMask::operator|(const BoolMask& o) const {
  require_same_grid(grid_, o.grid_, "mask union");
  BoolMask r(grid_);
  for (std::size_t n = 0; n < bits_.size(); ++n) r.bits_[n] = bits_[n] | o.bits_[n];
  return r;
}

BoolMask BoolMask::operator~() const {
  BoolMask r(grid_);
  for (std::size_t n = 0; n < bits_.size(); ++n) r.bits_[n] = bits_[n] ? 0 : 1;
  return r;
}

bool BoolMask::is_subset_of(const BoolMask& o) const {
  require_same_grid(grid_, o.grid_, "subset test");
  for (std::size_t n = 0; n < bits_.size(); ++n) {
    if (bits_[n] && !o.bits_[n]) return false;
  }
  return true;
}

void require_same_grid(const Grid3& a, const Grid3& b, const char* what) {
  if (!(a == b)) throw ShapeError(std::string(what) + ": grid mismatch");
}

double interpolate(const ScalarField& field, const State& s) {
  const Grid3& g = field.grid();
  if (!g.contains_xy(s.x, s.y)) throw DomainError("interpolation point outside the (x, y) domain");

  std::array<std::size_t, 3> lo{};
  std::array<std::size_t, 3> hi{};
  std::array<double, 3> w{};
  const double coords[3] = {s.x, s.y, wrap_angle(s.theta)};
  for (std::size_t d = 0; d < 3; ++d) {
    const auto& a = g.axis(d);
    const double u = (coords[d] - a.lo) / a.spacing();
    if (a.periodic) {
      double f = std::floor(u);
      w[d] = u - f;
      long long i0 = static_cast<long long>(f) % static_cast<long long>(a.count);
      if (i0 < 0) i0 += static_cast<long long>(a.count);
      lo[d] = static_cast<std::size_t>(i0);
      hi[d] = (lo[d] + 1) % a.count;
    } else {
      const double f = std::clamp(std::floor(u), 0.0, static_cast<double>(a.count - 2));
      lo[d] = static_cast<std::size_t>(f);
      hi[d] = lo[d] + 1;
      w[d] = u - f;
    }
  }

  double acc = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    double weight = 1.0;
    CellIndex c{};
    for (std::size_t d = 0; d < 3; ++d) {
      const bool up = (corner >> d) & 1;
      c[d] = up ? hi[d] : lo[d];
      weight *= up ? w[d] : 1.0 - w[d];
    }
    if (weight != 0.0) acc += weight * field[g.flat(c)];
  }
  return acc;
}

Differences differences(const ScalarField& field, std::size_t i, std::size_t j, std::size_t k) {
  const Grid3& g = field.grid();
  if (i >= g.count(0) || j >= g.count(1) || k >= g.count(2)) throw IndexError("stencil index out of range");
  const CellIndex c{i, j, k};
  const double center = field[g.flat(c)];
  Differences out;
  for (std::size_t d = 0; d < 3; ++d) {
    const auto& a = g.axis(d);
    const double h = a.spacing();
    CellIndex up = c;
    CellIndex dn = c;
    if (a.periodic) {
      up[d] = (c[d] + 1) % a.count;
      dn[d] = (c[d] + a.count - 1) % a.count;
    } else if (c[d] == 0) {
      up[d] = 1;
      const double one_sided = (field[g.flat(up)] - center) / h;
      out.minus[d] = out.plus[d] = one_sided;
      continue;
    } else if (c[d] + 1 == a.count) {
      dn[d] = c[d] - 1;
      const double one_sided = (center - field[g.flat(dn)]) / h;
      out.minus[d] = out.plus[d] = one_sided;
      continue;
    } else {
      up[d] = c[d] + 1;
      dn[d] = c[d] - 1;
    }
    out.plus[d] = (field[g.flat(up)] - center) / h;
    out.minus[d] = (center - field[g.flat(dn)]) / h;
  }
  return out;
}

Vec3 gradient_central(const ScalarField& field, std::size_t i, std::size_t j, std::size_t k) {
  const auto d = differences(field, i, j, k);
  return {0.5 * (d.plus[0] + d.minus[0]), 0.5 * (d.plus[1] + d.minus[1]), 0.5 * (d.plus[2] + d.minus[2])};
}

BoolMask sublevel_set(const ScalarField& field, double threshold) {
  BoolMask m(field.grid());
  for (std::size_t n = 0; n < field.size(); ++n) m.set(n, field[n] < threshold);
  return m;
}

BoolMask superlevel_set(const ScalarField& field, double threshold) {
  BoolMask m(field.grid());
  for (std::size_t n = 0; n < field.size(); ++n) m.set(n, field[n] > threshold);
  return m;
}

SetMetrics set_metrics(const BoolMask& a, const BoolMask& b) {
  require_same_grid(a.grid(), b.grid(), "set_metrics");
  std::size_t na = 0, nb = 0, both = 0, either = 0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const bool x = a[n], y = b[n];
    na += x;
    nb += y;
    both += x && y;
    either += x || y;
  }
  SetMetrics m;
  m.iou = either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
  m.frac_a_in_b = na == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(na);
  m.frac_b_in_a = nb == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(nb);
  return m;
}

}  // namespace reachkit
