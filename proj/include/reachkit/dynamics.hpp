#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "reachkit/grid.hpp"

namespace reachkit {

using Vec2 = std::array<double, 2>;
using Action = Vec2;       // (v [m/s], omega [rad/s])
using Disturbance = Vec2;  // (d_x, d_y) [m/s]

struct BoxBounds {
  Vec2 lo{};
  Vec2 hi{};

  bool contains(const Vec2& u, double slack = 1e-12) const;
  Vec2 magnitude() const;  // componentwise max(|lo|, |hi|)
  Vec2 midpoint() const;
};

// Dubins-like control-affine model
//   x' = (v_nominal + v) cos(theta) + d_x
//   y' = (v_nominal + v) sin(theta) + d_y
//   theta' = omega
// i.e. f = f0(s) + G_u(s) a + G_d(s) d.
struct ControlAffineModel {
  std::string name = "custom";
  double v_nominal = 0.6;
  BoxBounds action{{-1.5, -1.5}, {1.5, 1.5}};
  BoxBounds disturbance{{-0.6, -0.6}, {0.6, 0.6}};

  Vec3 drift(const State& s) const;
  // Column j of the control Jacobian.
  Vec3 control_column(const State& s, std::size_t j) const;
  // Column j of the disturbance Jacobian.
  Vec3 disturbance_column(std::size_t j) const;
};

enum class Preset { agile, non_agile, ultra_agile };

ControlAffineModel preset(Preset p);
// Throws ConfigError for an unknown name.
ControlAffineModel preset(std::string_view name);
std::vector<std::string> preset_names();

// f(s, a, d); throws DomainError if a or d leaves its box.
Vec3 flow(const ControlAffineModel& model, const State& s, const Action& a, const Disturbance& d);

struct HamiltonianResult {
  double value = 0.0;
  Action a_star{};
  Disturbance d_star{};
};

// max over the action box, min over the disturbance box, of p . f(s, a, d).
// A zero switching coefficient selects the box midpoint.
HamiltonianResult hamiltonian(const ControlAffineModel& model, const State& s, const Vec3& p);

// Componentwise bound on |dH/dp_i| at s.
Vec3 dissipation_bounds(const ControlAffineModel& model, const State& s);

// Forward Euler step with the heading wrapped into [-pi, pi).
State euler_step(const ControlAffineModel& model, const State& s, const Action& a, const Disturbance& d, double dt);

}  // namespace reachkit
