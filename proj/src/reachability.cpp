#include "reachkit/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <vector>

#include "reachkit/errors.hpp"
#include "reachkit/parallel.hpp"

namespace reachkit {

namespace {

// Heading-dependent coefficients of the Hamiltonian, cached per theta slice.
struct HeadingTerms {
  double cos_t = 0.0;
  double sin_t = 0.0;
  Vec3 alpha{};
};

std::vector<HeadingTerms> heading_terms(const ControlAffineModel& model, const Grid3& grid) {
  std::vector<HeadingTerms> out(grid.count(2));
  for (std::size_t k = 0; k < out.size(); ++k) {
    const State s{0.0, 0.0, grid.axis(2).coord(k)};
    out[k].cos_t = std::cos(s.theta);
    out[k].sin_t = std::sin(s.theta);
    out[k].alpha = dissipation_bounds(model, s);
  }
  return out;
}

double box_max(double coef, double lo, double hi) { return coef > 0.0 ? coef * hi : (coef < 0.0 ? coef * lo : 0.0); }
double box_min(double coef, double lo, double hi) { return coef > 0.0 ? coef * lo : (coef < 0.0 ? coef * hi : 0.0); }

// Same quantity as hamiltonian(model, s, p).value with the trig precomputed.
double hamiltonian_value(const ControlAffineModel& m, const HeadingTerms& t, const Vec3& p) {
  const double along = p[0] * t.cos_t + p[1] * t.sin_t;
  return m.v_nominal * along + box_max(along, m.action.lo[0], m.action.hi[0]) +
         box_max(p[2], m.action.lo[1], m.action.hi[1]) + box_min(p[0], m.disturbance.lo[0], m.disturbance.hi[0]) +
         box_min(p[1], m.disturbance.lo[1], m.disturbance.hi[1]);
}

double cfl_rate(const std::vector<HeadingTerms>& terms, const Grid3& grid) {
  double worst = 0.0;
  for (const auto& t : terms) {
    double r = 0.0;
    for (std::size_t d = 0; d < 3; ++d) r += t.alpha[d] / grid.spacing(d);
    worst = std::max(worst, r);
  }
  return worst;
}

// Writes the updated field into `out` and returns max |out - value|.
double lf_update(const ControlAffineModel& model, const std::vector<HeadingTerms>& terms, const ScalarField& value,
                 const ScalarField& h, double dt, ScalarField& out) {
  const Grid3& g = value.grid();
  const std::size_t nx = g.count(0), ny = g.count(1), nt = g.count(2);
  const std::size_t stride[3] = {ny * nt, nt, 1};
  const double inv_h[3] = {1.0 / g.spacing(0), 1.0 / g.spacing(1), 1.0 / g.spacing(2)};
  const auto v = value.values();
  const auto hv = h.values();
  auto o = out.values();

  std::vector<double> chunk_delta;
  std::mutex lock;
  parallel_for(nx * ny, [&](std::size_t begin, std::size_t end) {
    double local = 0.0;
    for (std::size_t ij = begin; ij < end; ++ij) {
      const std::size_t idx[2] = {ij / ny, ij % ny};
      const std::size_t count[2] = {nx, ny};
      for (std::size_t k = 0; k < nt; ++k) {
        const std::size_t n = ij * nt + k;
        const double c = v[n];
        Vec3 plus{}, minus{};
        for (std::size_t d = 0; d < 2; ++d) {
          if (idx[d] == 0) {
            plus[d] = minus[d] = (v[n + stride[d]] - c) * inv_h[d];
          } else if (idx[d] + 1 == count[d]) {
            plus[d] = minus[d] = (c - v[n - stride[d]]) * inv_h[d];
          } else {
            plus[d] = (v[n + stride[d]] - c) * inv_h[d];
            minus[d] = (c - v[n - stride[d]]) * inv_h[d];
          }
        }
        const std::size_t kp = k + 1 == nt ? n + 1 - nt : n + 1;
        const std::size_t km = k == 0 ? n + nt - 1 : n - 1;
        plus[2] = (v[kp] - c) * inv_h[2];
        minus[2] = (c - v[km]) * inv_h[2];

        const Vec3 p{0.5 * (plus[0] + minus[0]), 0.5 * (plus[1] + minus[1]), 0.5 * (plus[2] + minus[2])};
        const auto& t = terms[k];
        double ham = hamiltonian_value(model, t, p);
        for (std::size_t d = 0; d < 3; ++d) ham += 0.5 * t.alpha[d] * (plus[d] - minus[d]);
        const double next = std::min(c + dt * ham, hv[n]);
        o[n] = next;
        local = std::max(local, std::abs(next - c));
      }
    }
    std::lock_guard guard(lock);
    chunk_delta.push_back(local);
  });
  return chunk_delta.empty() ? 0.0 : *std::max_element(chunk_delta.begin(), chunk_delta.end());
}

// Squared 1-D distance transform (lower envelope of parabolas) with
// squared sample spacing w.
void distance_1d(const std::vector<double>& f, double w, std::vector<double>& d) {
  const std::size_t n = f.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> v(n);
  std::vector<double> z(n + 1);
  std::size_t k = 0;
  // Skip leading infinite samples: they never form part of the envelope.
  std::size_t first = 0;
  while (first < n && f[first] == inf) ++first;
  if (first == n) {
    d.assign(n, inf);
    return;
  }
  v[0] = first;
  z[0] = -inf;
  z[1] = inf;
  auto intersect = [&](std::size_t q, std::size_t p) {
    const double fq = f[q] + w * static_cast<double>(q * q);
    const double fp = f[p] + w * static_cast<double>(p * p);
    return (fq - fp) / (2.0 * w * (static_cast<double>(q) - static_cast<double>(p)));
  };
  for (std::size_t q = first + 1; q < n; ++q) {
    if (f[q] == inf) continue;
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  d.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double dq = static_cast<double>(q) - static_cast<double>(v[k]);
    d[q] = w * dq * dq + f[v[k]];
  }
}

// Squared Euclidean distance from every (x, y) cell of slice k to the
// nearest cell whose bit equals `to_value`.
std::vector<double> slice_distance_sq(const BoolMask& m, std::size_t k, bool to_value) {
  const Grid3& g = m.grid();
  const std::size_t nx = g.count(0), ny = g.count(1);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> grid_sq(nx * ny);
  std::vector<double> line, out;
  // Columns along x.
  for (std::size_t j = 0; j < ny; ++j) {
    line.assign(nx, inf);
    for (std::size_t i = 0; i < nx; ++i) {
      if (m[g.flat(i, j, k)] == to_value) line[i] = 0.0;
    }
    distance_1d(line, g.spacing(0) * g.spacing(0), out);
    for (std::size_t i = 0; i < nx; ++i) grid_sq[i * ny + j] = out[i];
  }
  // Rows along y.
  for (std::size_t i = 0; i < nx; ++i) {
    line.assign(grid_sq.begin() + static_cast<std::ptrdiff_t>(i * ny),
                grid_sq.begin() + static_cast<std::ptrdiff_t>((i + 1) * ny));
    distance_1d(line, g.spacing(1) * g.spacing(1), out);
    std::copy(out.begin(), out.end(), grid_sq.begin() + static_cast<std::ptrdiff_t>(i * ny));
  }
  return grid_sq;
}

}  // namespace

ScalarField failure_sdf(const Obstacle& obstacle, const Grid3& grid) {
  if (!(obstacle.radius > 0.0)) throw ConfigError("obstacle radius must be positive");
  ScalarField h(grid);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const State s = grid.state(n);
    h[n] = std::hypot(s.x - obstacle.cx, s.y - obstacle.cy) - obstacle.radius;
  }
  return h;
}

BoolMask failure_mask(const Obstacle& obstacle, const Grid3& grid) {
  return sublevel_set(failure_sdf(obstacle, grid), 0.0);
}

double stable_time_step(const ControlAffineModel& model, const Grid3& grid, double cfl) {
  const double rate = cfl_rate(heading_terms(model, grid), grid);
  return rate > 0.0 ? cfl / rate : std::numeric_limits<double>::infinity();
}

StepResult vi_step(const ControlAffineModel& model, const ScalarField& value, const ScalarField& h, double dt,
                   double cfl_limit) {
  require_same_grid(value.grid(), h.grid(), "vi_step");
  if (!(dt > 0.0)) throw ConfigError("vi_step requires dt > 0");
  const auto terms = heading_terms(model, value.grid());
  const double courant = dt * cfl_rate(terms, value.grid());
  if (courant > cfl_limit * (1.0 + 1e-12)) {
    throw ConfigError("time step violates the CFL bound (Courant number " + std::to_string(courant) + ")");
  }
  StepResult r{ScalarField(value.grid()), 0.0};
  r.delta = lf_update(model, terms, value, h, dt, r.value);
  return r;
}

BRTResult solve_brt(const ControlAffineModel& model, const ScalarField& h, const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (!(options.cfl > 0.0 && options.cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  if (options.max_iters < 1) throw ConfigError("max_iters must be >= 1");

  const Grid3& grid = h.grid();
  const auto terms = heading_terms(model, grid);
  const double rate = cfl_rate(terms, grid);
  const double dt = rate > 0.0 ? options.cfl / rate : 1.0;

  ScalarField current = h;
  ScalarField next(grid);
  BRTResult result{h, BoolMask(grid), 0, 0.0, false};
  for (int it = 1; it <= options.max_iters; ++it) {
    const double delta = lf_update(model, terms, current, h, dt, next);
    std::swap(current, next);
    result.iterations = it;
    result.residual = delta / dt;
    if (delta < options.tolerance * dt) {
      result.converged = true;
      break;
    }
  }
  result.value = std::move(current);
  result.unsafe = sublevel_set(result.value, 0.0);
  return result;
}

ScalarField mask_sdf(const BoolMask& target) {
  const Grid3& g = target.grid();
  const double half = 0.5 * std::min(g.spacing(0), g.spacing(1));
  const double far = std::hypot(g.axis(0).hi - g.axis(0).lo, g.axis(1).hi - g.axis(1).lo);
  ScalarField out(g);
  const std::size_t nx = g.count(0), ny = g.count(1);
  for (std::size_t k = 0; k < g.count(2); ++k) {
    const auto to_inside = slice_distance_sq(target, k, true);
    const auto to_outside = slice_distance_sq(target, k, false);
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        const std::size_t n = g.flat(i, j, k);
        const std::size_t c = i * ny + j;
        double v;
        if (target[n]) {
          v = std::isinf(to_outside[c]) ? -far : -(std::sqrt(to_outside[c]) - half);
        } else {
          v = std::isinf(to_inside[c]) ? far : std::sqrt(to_inside[c]) - half;
        }
        out[n] = v;
      }
    }
  }
  return out;
}

BRTResult brt_of_set(const ControlAffineModel& model, const BoolMask& target, const SolverOptions& options) {
  if (target.empty()) {
    const Grid3& g = target.grid();
    const double far = std::hypot(g.axis(0).hi - g.axis(0).lo, g.axis(1).hi - g.axis(1).lo);
    return {ScalarField(g, far), BoolMask(g), 0, 0.0, true};
  }
  return solve_brt(model, mask_sdf(target), options);
}

std::vector<double> box_samples(double lo, double hi, int n) {
  if (n < 2) throw ConfigError("box sampling needs at least 2 samples per dimension");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

BoolMask brute_force_brt(const ControlAffineModel& model, const BoolMask& failure, int n_actions, int n_disturbances,
                         double dt, int max_iters) {
  const Grid3& g = failure.grid();
  std::vector<Action> actions;
  for (double v : box_samples(model.action.lo[0], model.action.hi[0], n_actions)) {
    for (double w : box_samples(model.action.lo[1], model.action.hi[1], n_actions)) actions.push_back({v, w});
  }
  std::vector<Disturbance> disturbances;
  for (double dx : box_samples(model.disturbance.lo[0], model.disturbance.hi[0], n_disturbances)) {
    for (double dy : box_samples(model.disturbance.lo[1], model.disturbance.hi[1], n_disturbances)) {
      disturbances.push_back({dx, dy});
    }
  }
  const std::size_t na = actions.size(), nd = disturbances.size();
  std::vector<std::uint32_t> successor(g.size() * na * nd);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const State s = g.state(n);
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t d = 0; d < nd; ++d) {
        const State next = euler_step(model, s, actions[a], disturbances[d], dt);
        successor[(n * na + a) * nd + d] = static_cast<std::uint32_t>(g.flat(g.nearest(next)));
      }
    }
  }

  BoolMask unsafe = failure;
  for (int it = 0; it < max_iters; ++it) {
    BoolMask next = unsafe;
    bool changed = false;
    for (std::size_t n = 0; n < g.size(); ++n) {
      if (unsafe[n]) continue;
      bool trapped = true;
      for (std::size_t a = 0; a < na && trapped; ++a) {
        bool hit = false;
        for (std::size_t d = 0; d < nd && !hit; ++d) hit = unsafe[successor[(n * na + a) * nd + d]];
        trapped = hit;
      }
      if (trapped) {
        next.set(n);
        changed = true;
      }
    }
    unsafe = std::move(next);
    if (!changed) break;
  }
  return unsafe;
}

}  // namespace reachkit
