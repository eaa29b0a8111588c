#pragma once

#include "reachkit/dynamics.hpp"
#include "reachkit/grid.hpp"

namespace reachkit {

struct Obstacle {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 1.0;
};

// h(s) = |(x, y) - center| - radius at every cell, independent of heading.
ScalarField failure_sdf(const Obstacle& obstacle, const Grid3& grid);

// Cells strictly inside the obstacle (h < 0).
BoolMask failure_mask(const Obstacle& obstacle, const Grid3& grid);

struct SolverOptions {
  double tolerance = 1e-4;  // on max |dV| / dt
  double cfl = 0.8;
  int max_iters = 4000;
};

struct StepResult {
  ScalarField value;
  double delta = 0.0;  // max |V' - V|
};

// Largest dt with dt * sum_i alpha_i / dx_i <= cfl at every cell.
double stable_time_step(const ControlAffineModel& model, const Grid3& grid, double cfl);

// One backward-in-time Lax-Friedrichs update of the avoid HJI variational
// inequality followed by the min with h. Throws ConfigError when dt exceeds
// the CFL bound for `cfl_limit`.
StepResult vi_step(const ControlAffineModel& model, const ScalarField& value, const ScalarField& h, double dt,
                   double cfl_limit = 1.0);

struct BRTResult {
  ScalarField value;
  BoolMask unsafe;
  int iterations = 0;
  double residual = 0.0;  // max |dV| / dt of the final sweep
  bool converged = false;
};

// Iterates vi_step from V = h until max |dV| < tolerance * dt. Running out of
// iterations is reported through `converged`, not thrown.
BRTResult solve_brt(const ControlAffineModel& model, const ScalarField& h, const SolverOptions& options = {});

// Signed-distance-like initializer for an arbitrary target mask: per heading
// slice, Euclidean distance in (x, y) to the target (outside) or to its
// complement (inside), shifted by half a cell so that the strict zero
// sublevel set reproduces the mask.
ScalarField mask_sdf(const BoolMask& target);

// BRT of an arbitrary avoid set under `model`.
BRTResult brt_of_set(const ControlAffineModel& model, const BoolMask& target, const SolverOptions& options = {});

// Independent oracle: fixed point of the discrete avoid game on snapped grid
// states. A cell becomes unsafe when every sampled action admits a sampled
// disturbance whose Euler step lands in an unsafe cell. Samples are evenly
// spaced over each box dimension, endpoints included.
BoolMask brute_force_brt(const ControlAffineModel& model, const BoolMask& failure, int n_actions, int n_disturbances,
                         double dt, int max_iters = 10000);

// Evenly spaced samples of [lo, hi], endpoints included (n >= 2).
std::vector<double> box_samples(double lo, double hi, int n);

}  // namespace reachkit
